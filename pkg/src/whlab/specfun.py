"""Test functions applied to operators, and their calculus.

Provides binary entropy functions of Renyi order gamma, the non-homogeneous
eta(t) = -t log|t|, resolvents, smooth compact bumps, the secant-defect
functional

    U(s1, s2; g) = int_0^1 [g((1-t)s1 + t s2) - (1-t)g(s1) - t g(s2)]
                   / (t (1-t)) dt,

weighted derivative seminorms, and almost analytic plane extensions used by
the resolvent-based functional calculus.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre, xlogy

from .smoothing import zeta_cutoff, zeta_cutoff_d

_TINY = 1e-300


@dataclass(frozen=True)
class Singularity:
    """Location and strength of the one allowed non-smooth point.

    f is n-times differentiable away from t0 with |f^(k)(t)| bounded by
    C |t - t0|^(gamma - k), and supported in (t0 - R, t0 + R) when R is
    finite.
    """

    t0: float
    gamma: float
    R: float
    n: int


@dataclass(frozen=True)
class SpectralFunction:
    """A scalar test function with optional derivatives and singularity data."""

    eval: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    deriv: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    singularity: Optional[Singularity] = None
    support: Optional[Tuple[float, float]] = None
    is_complex: bool = False
    max_deriv: int = 0
    label: str = "f"

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))

    def derivative(self, k: int, t):
        t = np.asarray(t, dtype=float)
        if k == 0:
            return self.eval(t)
        if self.deriv is not None and (self.max_deriv == 0 or k <= self.max_deriv):
            return self.deriv(k, t)
        return _fd(self.eval, k, t)

    def value_at_zero(self) -> complex:
        return complex(np.asarray(self.eval(np.array([0.0])))[0])


def _fd(fn, k, t, h=None):
    if h is None:
        h = 1e-5 * (10.0 ** (k - 1))
    if k == 1:
        return (fn(t + h) - fn(t - h)) / (2 * h)
    return (_fd(fn, k - 1, t + h, h) - _fd(fn, k - 1, t - h, h)) / (2 * h)


# ---------------------------------------------------------------------------
# entropy functions


def _eta_gamma_core(t, g):
    """log[t^g + (1-t)^g] / (1-g) on (0,1), written to keep precision near
    the endpoints via s = min(t, 1-t)."""
    s = np.minimum(t, 1.0 - t)
    am1 = s**g + np.expm1(g * np.log1p(-s))
    return np.log1p(am1) / (1.0 - g)


def eta_gamma(gamma: float) -> SpectralFunction:
    """Binary Renyi entropy function of order gamma > 0; zero outside (0,1).

    gamma = 1 is the von Neumann limit -t log t - (1-t) log(1-t).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g = float(gamma)

    if g == 1.0:

        def ev(t):
            t = np.asarray(t, dtype=float)
            inside = (t > 0.0) & (t < 1.0)
            tt = np.where(inside, t, 0.5)
            val = -xlogy(tt, tt) - xlogy(1.0 - tt, 1.0 - tt)
            return np.where(inside, val, 0.0)

        def dv(k, t):
            t = np.asarray(t, dtype=float)
            inside = (t > _TINY) & (t < 1.0 - 1e-16)
            tt = np.where(inside, t, 0.5)
            if k == 1:
                val = np.log((1.0 - tt) / tt)
            elif k == 2:
                val = -1.0 / (tt * (1.0 - tt))
            else:
                return _fd(ev, k, t)
            return np.where(inside, val, 0.0)

        sing = Singularity(t0=0.0, gamma=0.9, R=1.0, n=2)
    else:

        def ev(t):
            t = np.asarray(t, dtype=float)
            inside = (t > 0.0) & (t < 1.0)
            tt = np.where(inside, t, 0.5)
            return np.where(inside, _eta_gamma_core(tt, g), 0.0)

        def dv(k, t):
            t = np.asarray(t, dtype=float)
            inside = (t > _TINY) & (t < 1.0 - 1e-16)
            tt = np.where(inside, t, 0.5)
            A = tt**g + (1.0 - tt) ** g
            A1 = g * (tt ** (g - 1.0) - (1.0 - tt) ** (g - 1.0))
            if k == 1:
                val = A1 / ((1.0 - g) * A)
            elif k == 2:
                A2 = g * (g - 1.0) * (tt ** (g - 2.0) + (1.0 - tt) ** (g - 2.0))
                val = (A2 * A - A1**2) / ((1.0 - g) * A**2)
            else:
                return _fd(ev, k, t)
            return np.where(inside, val, 0.0)

        sing = Singularity(t0=0.0, gamma=min(g, 1.0), R=1.0, n=2)

    return SpectralFunction(
        eval=ev, kind=f"renyi({gamma})", deriv=dv, singularity=sing,
        support=(0.0, 1.0), max_deriv=2, label=f"eta_{gamma}",
    )


def eta_plain() -> SpectralFunction:
    """eta(t) = -t log|t| with eta(0) = 0."""

    def ev(t):
        t = np.asarray(t, dtype=float)
        return -xlogy(t, np.abs(t))

    def dv(k, t):
        t = np.asarray(t, dtype=float)
        safe = np.abs(t) > _TINY
        tt = np.where(safe, t, 1.0)
        if k == 1:
            return np.where(safe, -np.log(np.abs(tt)) - 1.0, 0.0)
        if k == 2:
            return np.where(safe, -1.0 / tt, 0.0)
        return _fd(ev, k, t)

    return SpectralFunction(
        eval=ev, kind="eta", deriv=dv,
        singularity=Singularity(t0=0.0, gamma=0.9, R=math.inf, n=2),
        max_deriv=2, label="eta",
    )


def power_abs(gamma: float) -> SpectralFunction:
    """f(t) = |t|^gamma, the model homogeneous non-smooth function."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")

    def ev(t):
        return np.abs(np.asarray(t, dtype=float)) ** gamma

    def dv(k, t):
        t = np.asarray(t, dtype=float)
        coef = 1.0
        for j in range(k):
            coef *= gamma - j
        safe = np.abs(t) > _TINY
        tt = np.where(safe, t, 1.0)
        val = coef * np.sign(tt) ** k * np.abs(tt) ** (gamma - k)
        return np.where(safe, val, 0.0)

    return SpectralFunction(
        eval=ev, kind="custom", deriv=dv,
        singularity=Singularity(t0=0.0, gamma=gamma, R=math.inf, n=2),
        max_deriv=4, label=f"|t|^{gamma}",
    )


def polynomial(coeffs) -> SpectralFunction:
    """Polynomial in t with the given coefficients (low to high order)."""
    poly = np.polynomial.Polynomial(list(coeffs))

    def dv(k, t):
        return poly.deriv(k)(np.asarray(t, dtype=float))

    return SpectralFunction(
        eval=lambda t: poly(np.asarray(t, dtype=float)),
        kind="custom", deriv=dv, max_deriv=0, label=f"poly{tuple(coeffs)}",
    )


def identity_function() -> SpectralFunction:
    return polynomial([0.0, 1.0])


def square_function() -> SpectralFunction:
    return polynomial([0.0, 0.0, 1.0])


def resolvent(z: complex) -> SpectralFunction:
    """r_z(t) = 1 / (t - z) for Im z != 0."""
    if z.imag == 0:
        raise ValueError("resolvent point must have nonzero imaginary part")

    def ev(t):
        return 1.0 / (np.asarray(t, dtype=float) - z)

    def dv(k, t):
        t = np.asarray(t, dtype=float)
        return ((-1.0) ** k) * math.factorial(k) * (t - z) ** (-(k + 1))

    return SpectralFunction(
        eval=ev, kind=f"resolvent({z})", deriv=dv, is_complex=True,
        max_deriv=0, label=f"r_{z}",
    )


def bump(center: float = 0.5, width: float = 0.4, power: int = 6) -> SpectralFunction:
    """Compactly supported polynomial bump (1 - u^2)^power, u = (t-c)/w.

    C^(power-1) across the support edge; derivatives are exact polynomials.
    """
    base = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** power

    def ev(t):
        u = (np.asarray(t, dtype=float) - center) / width
        return np.where(np.abs(u) < 1.0, base(np.clip(u, -1, 1)), 0.0)

    def dv(k, t):
        u = (np.asarray(t, dtype=float) - center) / width
        return np.where(
            np.abs(u) < 1.0, base.deriv(k)(np.clip(u, -1, 1)) / width**k, 0.0
        )

    return SpectralFunction(
        eval=ev, kind="smooth_compact", deriv=dv,
        support=(center - width, center + width),
        max_deriv=2 * power, label=f"bump({center},{width})",
    )


def subtract_constant(f: SpectralFunction, c) -> SpectralFunction:
    """f - c; derivatives unchanged. Constants drop out of both the
    secant-defect functional and operator-difference traces, so this is the
    regularization that makes volume terms of non-vanishing f convergent."""
    base = f.eval
    return SpectralFunction(
        eval=lambda t: base(t) - c,
        kind=f.kind,
        deriv=f.deriv,
        singularity=None,
        support=None,
        is_complex=f.is_complex or isinstance(c, complex),
        max_deriv=f.max_deriv,
        label=f"{f.label}-const",
    )


def from_samples(ts, values, holder: float = 1.0, label: str = "table") -> SpectralFunction:
    """Piecewise-cubic function through samples; zero outside the table."""
    from scipy.interpolate import CubicSpline

    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(ts)
    spline = CubicSpline(ts[order], values[order], extrapolate=False)

    def ev(t):
        out = spline(np.asarray(t, dtype=float))
        return np.where(np.isnan(out), 0.0, out)

    return SpectralFunction(
        eval=ev, kind="custom",
        singularity=Singularity(t0=float(ts[order][0]), gamma=holder,
                                R=float(ts[order][-1] - ts[order][0]), n=1),
        support=(float(ts[order][0]), float(ts[order][-1])),
        label=label,
    )


# ---------------------------------------------------------------------------
# the secant-defect functional U


def u_functional(s1, s2, g: SpectralFunction, tol: float = 1e-9):
    """U(s1, s2; g) by adaptive quadrature.

    Substituting t = sin^2(pi s / 2) removes the endpoint weight 1/(t(1-t))
    up to a factor 2 pi / sin(pi s), which renders Holder endpoint behaviour
    integrable with high order.
    """
    s1, s2 = float(s1), float(s2)
    if s1 == s2:
        return 0.0 + 0.0j if g.is_complex else 0.0
    g1 = np.asarray(g.eval(np.array([s1])))[0]
    g2 = np.asarray(g.eval(np.array([s2])))[0]

    def integrand(s):
        t = math.sin(0.5 * math.pi * s) ** 2
        mid = np.asarray(g.eval(np.array([(1.0 - t) * s1 + t * s2])))[0]
        num = mid - (1.0 - t) * g1 - t * g2
        return num * 2.0 * math.pi / math.sin(math.pi * s)

    val, err = integrate.quad(
        integrand, 0.0, 1.0, epsabs=tol, epsrel=1e-12, limit=400,
        complex_func=g.is_complex,
    )
    return val


def u_eta_closed(gamma: float) -> float:
    """Closed value of U(1, 0; eta_gamma): pi^2 (1+gamma) / (6 gamma)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return math.pi**2 * (1.0 + gamma) / (6.0 * gamma)


def u_rule(nt: int = 400):
    """Fixed nodes t_k in (0,1) and weights for vectorised U evaluation."""
    x, w = roots_legendre(nt)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    t = np.sin(0.5 * math.pi * s) ** 2
    weight = w * 2.0 * math.pi / np.sin(math.pi * s)
    return t, weight


def u_functional_vec(S1, S2, g: SpectralFunction, rule):
    """U(S1, S2; g) on arrays of pairs using a fixed rule; pairs with
    |S1 - S2| < 1e-14 short-circuit to zero."""
    t, w = rule
    S1 = np.asarray(S1, dtype=float)
    S2 = np.asarray(S2, dtype=float)
    flat1, flat2 = S1.ravel(), S2.ravel()
    out = np.zeros(flat1.shape, dtype=complex if g.is_complex else float)
    live = np.abs(flat1 - flat2) >= 1e-14
    if np.any(live):
        a, b = flat1[live], flat2[live]
        args = np.outer(1.0 - t, a) + np.outer(t, b)
        gm = g.eval(args)
        ga = g.eval(a)
        gb = g.eval(b)
        num = gm - np.outer(1.0 - t, ga) - np.outer(t, gb)
        out[live] = w @ num
    return out.reshape(S1.shape)


def calibrated_u_rule(g: SpectralFunction, pairs, tol: float = 1e-8, nt0: int = 200):
    """Pick a rule size whose values match the adaptive quadrature on probe
    pairs to tol; doubles nt until they do."""
    nt = nt0
    targets = [u_functional(a, b, g, tol=tol * 0.1) for a, b in pairs]
    while True:
        rule = u_rule(nt)
        ok = True
        for (a, b), tgt in zip(pairs, targets):
            got = complex(u_functional_vec(np.array([a]), np.array([b]), g, rule)[0])
            if abs(got - tgt) > tol * max(1.0, abs(tgt)):
                ok = False
                break
        if ok or nt >= 6400:
            return rule
        nt *= 2


# ---------------------------------------------------------------------------
# seminorms


def seminorm(f: SpectralFunction, n: int, grid=None, t0=None, gamma=None) -> float:
    """Sampled sup of |f^(k)(t)| |t - t0|^(k - gamma) over k <= n.

    Returns inf when the weighted values keep growing geometrically on the
    innermost shells around t0 (sampled divergence).
    """
    if f.singularity is not None:
        t0 = f.singularity.t0 if t0 is None else t0
        gamma = f.singularity.gamma if gamma is None else gamma
    if t0 is None or gamma is None:
        raise ValueError("need t0 and gamma (no singularity descriptor present)")
    if grid is None:
        R = 1.0
        if f.singularity is not None and math.isfinite(f.singularity.R):
            R = f.singularity.R
        shells = np.logspace(-12, math.log10(R * 0.999), 200)
        grid = np.concatenate([t0 - shells[::-1], t0 + shells])
    grid = np.asarray(grid, dtype=float)
    grid = grid[np.abs(grid - t0) > 0]
    r = np.abs(grid - t0)
    r_min = r.min()

    best = 0.0
    diverging = False
    for k in range(n + 1):
        vals = np.abs(np.asarray(f.derivative(k, grid))) * r ** (k - gamma)
        finite = np.isfinite(vals)
        if not np.all(finite):
            diverging = True
        vals = np.where(finite, vals, 0.0)
        best = max(best, float(vals.max()))
        # power-law blowup toward t0: maxima growing across the three
        # innermost decades
        decades = [
            vals[(r >= r_min * 10.0**j) & (r < r_min * 10.0 ** (j + 1))]
            for j in range(3)
        ]
        if all(d.size for d in decades):
            m0, m1, m2 = (float(d.max()) for d in decades)
            if m2 > 0 and m0 > 5.0 * m1 and m1 > 5.0 * m2:
                diverging = True
    return math.inf if diverging else best


# ---------------------------------------------------------------------------
# almost analytic extensions


@dataclass(frozen=True)
class AlmostAnalytic:
    """Plane extension f~(x, y) of a compactly supported f with d/dz-bar
    vanishing to order n - 1 on the real axis.

    Built as zeta(y / <x>_r) * sum_{l<n} f^(l)(x) (iy)^l / l! where <x>_r =
    sqrt(x^2 + r^2) and zeta is 1 on [-1/2, 1/2] and 0 outside (-1, 1); the
    dbar derivative is computed from the construction, not numerically.
    """

    base: SpectralFunction
    order: int
    width: float

    def _parts(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hx = np.hypot(x, self.width)
        z = zeta_cutoff(y / hx)
        S = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        iy = 1j * y
        term = np.ones_like(S)
        for l in range(self.order):
            S = S + self.base.derivative(l, x) * term
            term = term * iy / (l + 1.0)
        return hx, z, S

    def eval(self, x, y):
        hx, z, S = self._parts(x, y)
        return z * S

    def dbar(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hx, z, S = self._parts(x, y)
        n = self.order
        iy = 1j * y
        top = (
            self.base.derivative(n, x)
            * iy ** (n - 1)
            / math.factorial(n - 1)
        )
        zp = zeta_cutoff_d(y / hx)
        chain = -x * y / hx**3 + 1j / hx
        return 0.5 * (zp * chain * S + z * top)

    def envelope(self, x):
        """F(x; r) = sum_{l<=n} |f^(l)(x)| <x>_r^(l - n)."""
        x = np.asarray(x, dtype=float)
        hx = np.hypot(x, self.width)
        out = np.zeros_like(hx)
        for l in range(self.order + 1):
            out += np.abs(self.base.derivative(l, x)) * hx ** (l - self.order)
        return out


def make_almost_analytic(f: SpectralFunction, n: int, r: float) -> AlmostAnalytic:
    """Order-n almost analytic extension of a compactly supported f."""
    if n < 2:
        raise ValueError("need order n >= 2")
    if r <= 0:
        raise ValueError("need width r > 0")
    if f.support is None:
        raise ValueError("extension requires a compactly supported function")
    if f.max_deriv and n > f.max_deriv:
        warnings.warn(
            f"derivatives available only to order {f.max_deriv}; reducing n", stacklevel=2
        )
        n = f.max_deriv
    return AlmostAnalytic(base=f, order=n, width=float(r))
