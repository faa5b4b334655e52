"""Acceptance suite: every criterion at its stated tolerance.

Run with -s to see one pass/fail line per criterion. Heavy criteria share
intermediate results through a module-scoped cache.
"""

from whlab import acceptance

_CACHE = {}


def _run(fn):
    res = fn(_CACHE)
    print()
    print(res.line())
    if res.detail:
        print(f"       {res.detail}")
    return res


def test_criterion_01_closed_form_u():
    assert _run(acceptance.criterion_01_u_closed).passed


def test_criterion_02_entropy_density_equality():
    assert _run(acceptance.criterion_02_entropy_density).passed


def test_criterion_03_exact_identities():
    assert _run(acceptance.criterion_03_exact_identities).passed


def test_criterion_04_quadratic_crosscheck():
    assert _run(acceptance.criterion_04_quadratic_crosscheck).passed


def test_criterion_05_resolvent_remainder_decay():
    assert _run(acceptance.criterion_05_resolvent_decay).passed


def test_criterion_06_additivity():
    assert _run(acceptance.criterion_06_additivity).passed


def test_criterion_07_lowT_coefficient():
    assert _run(acceptance.criterion_07_lowT_coefficient).passed


def test_criterion_08_zeroT_slope():
    assert _run(acceptance.criterion_08_zeroT_slope).passed


def test_criterion_09_thermal_ee_trend():
    assert _run(acceptance.criterion_09_ee_trend).passed


def test_criterion_10_ee_boundedness():
    assert _run(acceptance.criterion_10_ee_bound).passed


def test_criterion_11_offdiag_decay():
    assert _run(acceptance.criterion_11_offdiag_decay).passed


def test_criterion_12_v_integral_laws():
    assert _run(acceptance.criterion_12_v_integrals).passed


def test_criterion_13_hs_oracle():
    assert _run(acceptance.criterion_13_hs_oracle).passed


def test_criterion_14_log_integral_oracle():
    assert _run(acceptance.criterion_14_log_integral).passed
