"""Symbol construction, level sets, and the multi-scale machinery."""

import math

import numpy as np
import pytest

from whlab.errors import DivergentIntegralError, ZeroTemperatureError
from whlab.symbols import (
    Decay,
    FermiModel,
    FermiSea,
    MultiScale,
    build_multiscale,
    find_fermi_sea,
    gaussian_symbol,
    make_fermi_symbol,
    make_indicator_symbol,
    v_integral,
)


def quad_model(T, mu=1.0):
    return FermiModel(h=lambda x: x**2, mu=mu, T=T)


class TestFermiSymbol:
    def test_half_at_level_set(self):
        a = make_fermi_symbol(quad_model(0.37))
        assert a(np.array([1.0]))[0] == pytest.approx(0.5, abs=1e-15)

    def test_deep_occupation_saturates(self):
        a = make_fermi_symbol(quad_model(0.01))
        assert abs(a(np.array([0.0]))[0] - 1.0) <= 1e-40

    def test_step_bound_pointwise(self):
        # |a - chi| <= exp(-|h - mu| / T) at sampled points
        T = 0.1
        a = make_fermi_symbol(quad_model(T))
        for xi in (0.0, 0.5, 2.0):
            chi = 1.0 if xi**2 < 1.0 else 0.0
            bound = math.exp(-abs(xi**2 - 1.0) / T)
            assert abs(a(np.array([xi]))[0] - chi) <= bound + 1e-15

    def test_product_bound_on_grid(self):
        T = 0.1
        a = make_fermi_symbol(quad_model(T))
        xi = np.linspace(-3, 3, 301)
        av = a(xi)
        bound = np.exp(-np.abs(xi**2 - 1.0) / T)
        assert np.all(av * (1 - av) <= bound + 1e-15)

    def test_monotone_in_energy(self):
        a = make_fermi_symbol(quad_model(0.2))
        xi = np.linspace(0.0, 3.0, 50)  # h increasing here
        vals = a(xi)
        assert np.all(np.diff(vals) < 0)

    def test_sup_bound_holds_on_samples(self):
        a = make_fermi_symbol(quad_model(0.2))
        xi = np.linspace(-10, 10, 2001)
        assert np.all(np.abs(a(xi)) <= a.sup_bound + 1e-15)

    def test_zero_temperature_rejected(self):
        with pytest.raises(ZeroTemperatureError):
            make_fermi_symbol(FermiModel(h=lambda x: x**2, mu=1.0, T=0.0))

    def test_nonfinite_dispersion_rejected(self):
        bad = FermiModel(h=lambda x: np.where(x == 0, np.nan, x**2), mu=1.0, T=0.1)
        with pytest.raises(ValueError):
            make_fermi_symbol(bad)

    def test_scaled_is_exact_for_pow2(self):
        a = make_fermi_symbol(quad_model(0.2))
        b = a.scaled(2.0)
        xi = np.linspace(-2, 2, 101)
        assert np.all(b(xi) == 2.0 * a(xi))
        assert b.value_range == (0.0, 2.0 * a.value_range[1])


class TestFermiSea:
    def test_quadratic_single_component(self):
        sea = find_fermi_sea(quad_model(0.1))
        assert sea.N == 1
        (s, t), = sea.components
        assert s == pytest.approx(-1.0, abs=1e-10)
        assert t == pytest.approx(1.0, abs=1e-10)

    def test_quartic_two_components_against_root_oracle(self):
        # h = xi^4 - 2 xi^2, mu = -1/2: roots of xi^4 - 2 xi^2 + 1/2
        model = FermiModel(h=lambda x: x**4 - 2 * x**2, mu=-0.5, T=0.05)
        sea = find_fermi_sea(model, search_box=(-4, 4))
        roots = np.sort(np.roots([1.0, 0.0, -2.0, 0.0, 0.5]).real)
        assert sea.N == 2
        flat = np.array(sea.points)
        assert np.allclose(flat, roots, atol=1e-9)

    def test_empty_sea(self):
        sea = find_fermi_sea(quad_model(0.1, mu=-1.0))
        assert sea.N == 0
        assert sea.measure == 0.0

    def test_indicator_roundtrip(self):
        sea = FermiSea(((-1.5, -0.25), (0.5, 2.0)))
        ind = make_indicator_symbol(sea)
        # recover the sea from the indicator through a level-set problem
        model = FermiModel(h=lambda x: 1.0 - ind(x), mu=0.5, T=0.1)
        found = find_fermi_sea(model, search_box=(-8, 8), grid_n=4096)
        assert found.N == sea.N
        for (s1, t1), (s2, t2) in zip(found.components, sea.components):
            assert abs(s1 - s2) < 16.0 / 4096
            assert abs(t1 - t2) < 16.0 / 4096

    def test_grid_n_validation(self):
        with pytest.raises(ValueError):
            find_fermi_sea(quad_model(0.1), grid_n=32)


class TestIndicatorSymbol:
    def test_values(self):
        ind = make_indicator_symbol(FermiSea(((-1.0, 1.0),)))
        assert ind(np.array([0.0]))[0] == 1.0
        assert ind(np.array([2.0]))[0] == 0.0
        assert ind.sup_bound == 1.0
        assert ind.decay.kind == "compact"

    def test_closed_kernel_matches_sine_form(self):
        ind = make_indicator_symbol(FermiSea(((-1.0, 1.0),)))
        alpha = 10.0
        u = np.array([0.0, 0.1, 1.3])
        expect = np.array(
            [alpha / math.pi] + [math.sin(alpha * x) / (math.pi * x) for x in u[1:]]
        )
        assert np.allclose(ind.closed_kernel(alpha, u), expect, rtol=1e-14)

    def test_empty_sea_warns_and_is_zero(self):
        with pytest.warns(UserWarning):
            z = make_indicator_symbol(FermiSea(()))
        assert z.empty
        assert np.all(z(np.linspace(-2, 2, 11)) == 0.0)


@pytest.fixture(scope="module")
def ms():
    model = quad_model(0.1)
    return build_multiscale(model, find_fermi_sea(model))


class TestMultiScale:
    def test_tau_inf_at_level_points(self, ms):
        assert ms.tau_inf == pytest.approx(0.5 * 0.1)
        assert ms.tau(np.array([1.0]))[0] == pytest.approx(ms.tau_inf)

    def test_tau_floor_everywhere(self, ms):
        xi = np.linspace(-20, 20, 4001)
        assert np.all(ms.tau(xi) >= ms.tau_inf - 1e-15)

    def test_lipschitz_below_one(self, ms):
        assert 0 < ms.lipschitz_nu < 1.0
        assert ms.lipschitz_nu == pytest.approx(0.5, abs=1e-3)

    def test_far_field_cap(self, ms):
        assert 0.25 <= ms.tau(np.array([10.0]))[0] <= 0.5001

    def test_amplitude_comparability_band(self, ms):
        # the band is measured, not assumed; it must be finite, bracket 1,
        # and stay stable as T drops (uniformity of the construction)
        assert 0.0 < ms.c1 <= 1.0 <= ms.c2
        assert ms.c2 / ms.c1 < 100.0
        model_cold = quad_model(0.01)
        cold = build_multiscale(model_cold, find_fermi_sea(model_cold))
        assert cold.c2 / cold.c1 < 2.0 * (ms.c2 / ms.c1) + 1.0


class TestVIntegral:
    def test_closed_form_flat_tau(self):
        ms = MultiScale(
            tau=lambda x: np.ones_like(np.asarray(x, float)),
            v=lambda x: (1.0 + np.abs(x)) ** -2.0,
            tau_inf=1.0, lipschitz_nu=0.0, c1=1.0, c2=1.0,
            theta=1.0, sigma=1.0, points=(0.0,),
        )
        assert v_integral(ms, 1.0, 0.0) == pytest.approx(2.0, rel=1e-8)

    def test_monotone_in_sigma(self):
        model = quad_model(0.1)
        ms = build_multiscale(model, find_fermi_sea(model))
        v1 = v_integral(ms, 1.0, 0.0)
        v2 = v_integral(ms, 2.0, 0.0)
        assert v2 < v1

    def test_divergence_signal(self):
        model = quad_model(0.1)
        ms = build_multiscale(model, find_fermi_sea(model))
        with pytest.raises(DivergentIntegralError):
            v_integral(ms, 0.4, 1.0)

    def test_log_law_band(self):
        vals = {}
        for T in (1e-1, 1e-2, 1e-3):
            model = quad_model(T)
            ms = build_multiscale(model, find_fermi_sea(model))
            vals[T] = v_integral(ms, 1.0, 1.0) / (abs(math.log(T)) + 1.0)
        band = max(vals.values()) / min(vals.values())
        assert band < 5.0

    def test_temperature_scaling_of_rho2(self):
        for T in (1e-1, 1e-2):
            model = quad_model(T)
            ms = build_multiscale(model, find_fermi_sea(model))
            assert v_integral(ms, 1.0, 2.0) * T < 20.0


class TestDecay:
    def test_radii(self):
        assert Decay("compact", 2.5).radius(1e-30) == 2.5
        assert Decay("gaussian", 1.0).radius(1e-16) == pytest.approx(
            math.sqrt(math.log(1e16))
        )
        assert Decay("power", 2.0).radius(1e-8) == pytest.approx(1e4 - 1.0)

    def test_gaussian_symbol_metadata(self):
        g = gaussian_symbol(rate=2.0, amplitude=0.5)
        assert g.even
        assert g(np.array([0.0]))[0] == 0.5
        assert g.tail_radius(1e-12) < 5.0
