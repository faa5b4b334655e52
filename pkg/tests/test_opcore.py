"""Interval unions, discretization, traces, Schatten norms, and the
resolvent-based functional calculus."""

import math

import numpy as np
import pytest

from whlab import opcore, specfun, symbols
from whlab.errors import (
    DivergentIntegralError,
    MatrixSizeError,
    UnconvergedWindowWarning,
)
from whlab.opcore import (
    IntervalUnion,
    build_quadrature,
    commutator_defect,
    discretize,
    hs_trace_f,
    interval,
    kernel,
    offdiag_qnorm,
    schatten_qnorm,
    trace_D,
    trace_f,
    weyl_trace,
)

RNG = np.random.default_rng(7)


@pytest.fixture(scope="module")
def fermi_02():
    return symbols.make_fermi_symbol(
        symbols.FermiModel(h=lambda x: x**2, mu=1.0, T=0.2)
    )


class TestIntervalUnion:
    def test_omega_counts(self):
        iu = IntervalUnion(((0.0, 1.0), (2.0, 3.0)))
        assert iu.K == 2 and iu.omega == 4
        with_left = IntervalUnion(((0.0, 1.0),), left=-5.0)
        assert with_left.omega == 3
        both = IntervalUnion((), left=-1.0, right=1.0)
        assert both.omega == 2

    def test_complement_preserves_omega(self):
        for iu in (
            IntervalUnion(((0.0, 1.0),)),
            IntervalUnion(((0.0, 1.0), (2.0, 3.0))),
            IntervalUnion(((0.0, 1.0),), left=-5.0),
        ):
            assert iu.complement().omega == iu.omega

    def test_complement_structure(self):
        comp = IntervalUnion(((0.0, 1.0), (2.0, 3.0))).complement()
        assert comp.left == 0.0 and comp.right == 3.0
        assert comp.intervals == ((1.0, 2.0),)

    def test_complement_within_window(self):
        win = interval(0.0, 1.0).complement_within(8.0)
        assert win.intervals == ((-4.0, 0.0), (1.0, 4.0))
        with pytest.raises(ValueError):
            interval(0.0, 10.0).complement_within(8.0)

    def test_disjointness_enforced(self):
        with pytest.raises(ValueError):
            IntervalUnion(((0.0, 1.0), (1.0, 2.0)))
        with pytest.raises(ValueError):
            IntervalUnion(((0.0, 0.0),))

    def test_quadrature_weights_sum_to_length(self):
        iu = IntervalUnion(((0.0, 1.5), (3.0, 4.0)))
        q = build_quadrature(iu, 20.0, bandwidth=1.0)
        assert q.weights.sum() == pytest.approx(iu.length, rel=1e-13)
        assert np.all(q.weights > 0)
        for (s, t), (i0, i1) in zip(iu.intervals, q.slices):
            assert np.all((q.nodes[i0:i1] > s) & (q.nodes[i0:i1] < t))


class TestKernel:
    def test_indicator_against_sine_form(self):
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        # force the numeric oscillatory path; the closed form is the oracle
        k = kernel(ind, 10.0)
        for u in (0.0, 0.1, 0.7, 3.3):
            expect = 10.0 / math.pi if u == 0 else math.sin(10.0 * u) / (math.pi * u)
            assert complex(k(u)) == pytest.approx(expect, abs=1e-9)

    def test_gaussian_against_closed_form(self):
        g = symbols.gaussian_symbol()
        alpha = 7.0
        k = kernel(g, alpha)
        for u in (0.0, 0.2, 1.0):
            expect = alpha / (2 * math.sqrt(math.pi)) * math.exp(-(alpha * u) ** 2 / 4)
            assert complex(k(u)) == pytest.approx(expect, abs=1e-9)

    def test_zero_symbol(self):
        with pytest.warns(UserWarning):
            z = symbols.make_indicator_symbol(symbols.FermiSea(()))
        with pytest.raises(DivergentIntegralError):
            kernel(z, 5.0)(0.1)

    def test_hermitian_symmetry(self, fermi_02):
        k = kernel(fermi_02, 9.0)
        for u in (0.3, 1.1):
            assert complex(k(-u)) == pytest.approx(np.conj(complex(k(u))), abs=1e-12)


class TestDiscretize:
    def test_hermitian_and_range(self, fermi_02):
        W = discretize(fermi_02, 10.0, interval(0.0, 2.0))
        assert W.hermiticity_defect() <= 1e-12
        lam = W.eigenvalues
        lo, hi = W.clip_bounds()
        assert lam.min() >= lo - 1e-6
        assert lam.max() <= hi + 1e-6
        assert W.clip_stats() < 1e-3

    def test_sine_kernel_eigenvalue_range(self):
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        W = discretize(ind, 10.0, interval(0.0, math.pi))
        lam = W.eigenvalues
        assert lam.min() >= -1e-6 and lam.max() <= 1.0 + 1e-6

    def test_trace_matches_volume_term(self, fermi_02):
        W = discretize(fermi_02, 10.0, interval(0.0, 2.0))
        wt = weyl_trace(fermi_02, specfun.identity_function(), 10.0,
                        interval(0.0, 2.0))
        assert np.trace(W.matrix).real == pytest.approx(wt, rel=1e-8)

    def test_self_convergence_under_refinement(self, fermi_02):
        iu = interval(0.0, 2.0)
        eta1 = specfun.eta_gamma(1.0)
        t8 = trace_f(discretize(fermi_02, 10.0, iu, resolution=8), eta1)
        t16 = trace_f(discretize(fermi_02, 10.0, iu, resolution=16), eta1)
        assert abs(t16 - t8) < 1e-6

    def test_dimension_cap(self, fermi_02):
        with pytest.raises(MatrixSizeError):
            discretize(fermi_02, 1000.0, interval(0.0, 50.0), dim_cap=1000)

    def test_half_line_rejected(self, fermi_02):
        iu = IntervalUnion(((0.0, 1.0),), left=-3.0)
        with pytest.raises(ValueError):
            discretize(fermi_02, 10.0, iu)


class TestTraces:
    def test_zero_function(self, fermi_02):
        W = discretize(fermi_02, 10.0, interval(0.0, 1.0))
        zero = specfun.polynomial([0.0])
        assert trace_f(W, zero) == 0.0

    def test_square_is_frobenius(self, fermi_02):
        W = discretize(fermi_02, 10.0, interval(0.0, 1.0))
        got = trace_f(W, specfun.square_function())
        assert got == pytest.approx(np.linalg.norm(W.matrix) ** 2, rel=1e-10)

    def test_weyl_closed_forms(self):
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        val = weyl_trace(ind, specfun.identity_function(), math.pi,
                         interval(0.0, 1.0))
        assert val == pytest.approx(1.0, rel=1e-12)
        g = symbols.gaussian_symbol()
        val = weyl_trace(g, specfun.identity_function(), 2 * math.pi,
                         interval(0.0, 1.0))
        assert val == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_weyl_divergence_signal(self, fermi_02):
        const_one = specfun.polynomial([1.0])
        with pytest.raises(DivergentIntegralError):
            weyl_trace(fermi_02, const_one, 10.0, interval(0.0, 1.0))

    def test_trace_d_linear_vanishes(self, fermi_02):
        td = trace_D(fermi_02, 10.0, interval(0.0, 2.0),
                     specfun.identity_function())
        assert abs(td.value) <= 1e-8 * 10.0 * 2.0
        assert td.slack >= 0.0

    def test_scaling_covariance(self, fermi_02):
        # trace_D(a, alpha, I, f) = trace_D(a, 1, alpha*I, f)
        f = specfun.eta_gamma(1.0)
        for alpha in (2.0, 5.0):
            lhs = trace_D(fermi_02, alpha, interval(0.0, 2.0), f,
                          estimate_slack=True)
            rhs = trace_D(fermi_02, 1.0, interval(0.0, 2.0 * alpha), f,
                          estimate_slack=True)
            assert lhs.value == pytest.approx(
                rhs.value, abs=4 * (lhs.slack + rhs.slack) + 1e-9
            )

    def test_constant_symbol_short_circuit(self):
        c = symbols.constant_symbol(0.7)
        td = trace_D(c, 10.0, interval(0.0, 1.0), specfun.eta_gamma(1.0))
        assert td.value == 0.0


class TestCommutator:
    def test_trace_identity_with_square(self, fermi_02):
        iu = interval(0.0, 2.0)
        H = commutator_defect(fermi_02, fermi_02, 10.0, iu)
        d = trace_D(fermi_02, 10.0, iu, specfun.square_function(),
                    estimate_slack=False)
        assert np.trace(H).real == pytest.approx(-d.value, rel=1e-8)

    def test_unit_second_symbol(self, fermi_02):
        one = symbols.constant_symbol(1.0)
        H = commutator_defect(fermi_02, one, 10.0, interval(0.0, 1.0))
        assert np.abs(H).max() <= 1e-12

    def test_projection_case_positive(self):
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        H = commutator_defect(ind, ind, 10.0, interval(0.0, 1.0))
        lam = np.linalg.eigvalsh(H)
        assert lam.min() >= -1e-9


class TestSchatten:
    def test_rank_one_projector(self):
        v = RNG.normal(size=12)
        v /= np.linalg.norm(v)
        P = np.outer(v, v)
        for q in (0.5, 1.0, 2.0, 3.7):
            assert schatten_qnorm(P, q) == pytest.approx(1.0, rel=1e-12)

    def test_q2_is_frobenius(self):
        M = RNG.normal(size=(15, 15))
        assert schatten_qnorm(M, 2.0) == pytest.approx(
            np.linalg.norm(M), rel=1e-12
        )

    def test_q_triangle_inequality(self):
        q = 0.5
        for _ in range(10):
            A = RNG.normal(size=(20, 20))
            A = A + A.T
            B = RNG.normal(size=(20, 20))
            B = B + B.T
            lhs = schatten_qnorm(A + B, q) ** q
            rhs = schatten_qnorm(A, q) ** q + schatten_qnorm(B, q) ** q
            assert lhs <= rhs + 1e-9

    def test_holder_inequality(self):
        for _ in range(10):
            A = RNG.normal(size=(16, 16))
            B = RNG.normal(size=(16, 16))
            lhs = schatten_qnorm(A @ B, 1.0)
            rhs = schatten_qnorm(A, 2.0) * schatten_qnorm(B, 2.0)
            assert lhs <= rhs + 1e-9


class TestOffdiag:
    def test_monotone_in_gap(self):
        g = symbols.gaussian_symbol()
        vals = [
            offdiag_qnorm(g, 8.0, gap, 6.0, 1.0, check_window=False)
            for gap in (0.25, 0.5, 1.0)
        ]
        assert vals[0] > vals[1] > vals[2]

    def test_window_sensitivity_warns_for_slow_decay(self):
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        with pytest.warns(UnconvergedWindowWarning):
            offdiag_qnorm(ind, 8.0, 0.5, 4.0, 1.0)

    def test_smoothness_contrast(self):
        # discontinuous symbols decay much slower than smooth ones
        ind = symbols.make_indicator_symbol(symbols.FermiSea(((-1.0, 1.0),)))
        pts = []
        for gap in (0.5, 1.0, 2.0, 4.0):
            v = offdiag_qnorm(ind, 8.0, gap, 6.0, 1.0, check_window=False)
            pts.append((8.0 * gap, v))
        slope = np.polyfit(np.log([p[0] for p in pts]),
                           np.log([p[1] for p in pts]), 1)[0]
        assert slope > -1.5


class TestArtifacts:
    def test_spectral_decomposition_residuals(self, fermi_02):
        W = discretize(fermi_02, 10.0, interval(0.0, 1.0))
        dec = opcore.spectral_decomposition(W)
        assert dec.eigenvalues.size == W.dim
        assert dec.transform.shape == (W.dim, W.dim)
        lite = opcore.spectral_decomposition(W, with_transform=False)
        assert lite.transform is None
        assert np.allclose(lite.eigenvalues, dec.eigenvalues, atol=1e-12)

    def test_matrix_export(self, fermi_02, tmp_path):
        W = discretize(fermi_02, 10.0, interval(0.0, 1.0))
        W.save(tmp_path / "m.npy")
        assert np.allclose(np.load(tmp_path / "m.npy"), W.matrix)
        W.save(tmp_path / "m.csv", fmt="csv")
        back = np.loadtxt(tmp_path / "m.csv", delimiter=",")
        assert np.allclose(back, W.matrix, atol=1e-15)

    def test_kernel_table_cache(self, fermi_02, tmp_path):
        u1, k1 = opcore.kernel_table(fermi_02, 6.0, 2.0, n=17,
                                     cache_dir=tmp_path)
        files = list(tmp_path.glob("kernel_*.npz"))
        assert len(files) == 1
        mtime = files[0].stat().st_mtime_ns
        u2, k2 = opcore.kernel_table(fermi_02, 6.0, 2.0, n=17,
                                     cache_dir=tmp_path)
        assert files[0].stat().st_mtime_ns == mtime
        assert np.array_equal(k1, k2)


class TestPlaneIntegralCalculus:
    def test_agreement_with_eigen_trace(self):
        W = discretize(symbols.gaussian_symbol(), 12.0, interval(0.0, 1.0))
        f = specfun.bump(center=0.5, width=0.4, power=6)
        ext = specfun.make_almost_analytic(f, 4, 1.0)
        hs = hs_trace_f(W, ext)
        eig = trace_f(W, f)
        assert abs(hs - eig) <= 1e-6 * abs(eig)

    def test_plateau_counts_dimension(self):
        # f = 1 on the numerical range: trace equals the dimension
        W = discretize(symbols.gaussian_symbol(), 12.0, interval(0.0, 1.0))
        plateau = _plateau_function(-0.3, 1.3, 0.25)
        ext = specfun.make_almost_analytic(plateau, 4, 1.0)
        hs = hs_trace_f(W, ext)
        assert abs(hs - W.dim) <= 1e-6 * W.dim


def _plateau_function(lo, hi, ramp):
    """1 on [lo+ramp, hi-ramp], polynomial ramps to 0 at lo and hi;
    derivatives are exact polynomials on the ramps."""
    base = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** 6
    prim = base.integ()
    norm = prim(1.0) - prim(-1.0)

    def up(u):  # 0 at u=-1 to 1 at u=+1
        return (prim(np.clip(u, -1, 1)) - prim(-1.0)) / norm

    def ev(t):
        t = np.asarray(t, dtype=float)
        u_in = 2.0 * (t - lo) / ramp - 1.0
        u_out = 2.0 * (hi - t) / ramp - 1.0
        return up(u_in) * up(u_out)

    def dv(k, t):
        t = np.asarray(t, dtype=float)
        u_in = 2.0 * (t - lo) / ramp - 1.0
        u_out = 2.0 * (hi - t) / ramp - 1.0
        # ramps never overlap, so the product rule collapses to one factor
        d_in = base.deriv(k - 1)(np.clip(u_in, -1, 1)) / norm * (2.0 / ramp) ** k
        d_out = base.deriv(k - 1)(np.clip(u_out, -1, 1)) / norm * (-2.0 / ramp) ** k
        out = np.where((np.abs(u_in) < 1), d_in, 0.0)
        out = np.where((np.abs(u_out) < 1), d_out, out)
        return out

    return specfun.SpectralFunction(
        eval=ev, kind="smooth_compact", deriv=dv, support=(lo, hi),
        max_deriv=6, label="plateau",
    )
