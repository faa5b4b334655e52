"""Momentum-space symbols and the thermal multi-scale machinery.

A symbol is a real bounded smooth function a(xi) of one momentum variable.
The module builds generic symbols (gaussians, indicators, tabulated data),
the thermal occupation symbol of a dispersion h with chemical potential mu
and temperature T, the occupied region {h < mu}, and the scale/amplitude
pair (tau, v) that controls derivative growth near the level set, together
with the weighted integrals V_{sigma,rho} = int v^sigma / tau^rho.
"""

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DegenerateLevelSetError,
    DivergentIntegralError,
    UnboundedSublevelError,
    ZeroTemperatureError,
)
from .smoothing import smooth_step

_TAIL_EPS_DEFAULT = 1e-12


@dataclass(frozen=True)
class Decay:
    """Tail behaviour of a symbol: how fast it vanishes as |xi| grows.

    kind is one of 'compact', 'gaussian', 'power', 'numeric', 'none'.
    value is the support radius, gaussian rate, or power exponent.
    radius_fn, when set, maps a threshold eps to a radius R with
    |a(xi)| <= eps for |xi| > R and overrides the analytic formulas.
    """

    kind: str
    value: float = 0.0
    radius_fn: Optional[Callable[[float], float]] = None

    def radius(self, eps: float) -> float:
        if self.radius_fn is not None:
            return float(self.radius_fn(eps))
        if self.kind == "compact":
            return self.value
        if self.kind == "gaussian":
            return math.sqrt(max(math.log(1.0 / eps), 1.0) / self.value)
        if self.kind == "power":
            return max(eps ** (-1.0 / self.value) - 1.0, 1.0)
        if self.kind == "none":
            return math.inf
        raise ValueError(f"decay kind {self.kind!r} needs a radius_fn")

    @property
    def integrable(self) -> bool:
        if self.kind in ("compact", "gaussian", "numeric"):
            return True
        if self.kind == "power":
            return self.value > 1.0
        return False


@dataclass(frozen=True)
class Symbol1D:
    """A real bounded symbol a(xi) with evaluation and tail metadata.

    eval must accept numpy arrays. value_range brackets the essential range
    of a over all of R (used to clip discretized spectra). breakpoints mark
    points of rapid variation (level-set crossings, jump points) and scale
    is the smallest internal variation length; both steer quadratures.
    closed_kernel, when present, returns the convolution kernel of op(a)
    in closed form and is preferred by the discretizer.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    sup_bound: float
    decay: Decay
    deriv: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    m_max: int = 2
    value_range: Tuple[float, float] = (0.0, 1.0)
    breakpoints: Tuple[float, ...] = ()
    scale: float = 1.0
    even: bool = False
    is_constant: bool = False
    const_value: float = 0.0
    closed_kernel: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    label: str = "symbol"
    empty: bool = False

    def __call__(self, xi):
        return self.eval(np.asarray(xi, dtype=float))

    def tail_radius(self, eps: float = _TAIL_EPS_DEFAULT) -> float:
        """Radius beyond which |a| stays below eps."""
        if self.is_constant:
            return math.inf if self.const_value != 0.0 else 0.0
        return float(self.decay.radius(max(eps, 1e-300)))

    def derivative(self, k: int, xi):
        """k-th derivative; analytic when provided, else central differences."""
        xi = np.asarray(xi, dtype=float)
        if k == 0:
            return self.eval(xi)
        if self.deriv is not None:
            return self.deriv(k, xi)
        return _fd_derivative(self.eval, k, xi)

    def scaled(self, lam: float) -> "Symbol1D":
        """The symbol lam * a (lam > 0); range and kernels scale exactly."""
        if lam <= 0:
            raise ValueError("scaling factor must be positive")
        base_eval, base_deriv = self.eval, self.deriv
        base_kernel = self.closed_kernel
        dec = self.decay
        new_decay = Decay(
            "numeric", radius_fn=lambda eps, _d=dec, _l=lam: _d.radius(eps / _l)
        )
        return replace(
            self,
            eval=lambda x: lam * base_eval(x),
            sup_bound=lam * self.sup_bound,
            decay=new_decay,
            deriv=(None if base_deriv is None else (lambda k, x: lam * base_deriv(k, x))),
            value_range=(lam * self.value_range[0], lam * self.value_range[1]),
            const_value=lam * self.const_value,
            closed_kernel=(
                None if base_kernel is None else (lambda a, u: lam * base_kernel(a, u))
            ),
            label=f"{lam}*{self.label}",
        )

    def product(self, other: "Symbol1D") -> "Symbol1D":
        """Pointwise product a*b with combined metadata (no closed kernel)."""
        if other.is_constant:
            return self.scaled(other.const_value) if other.const_value != 1.0 else self
        if self.is_constant:
            return other.product(self)
        fa, fb = self.eval, other.eval
        da, db = self.decay, other.decay
        sa, sb = self.sup_bound, other.sup_bound

        def rad(eps):
            cands = []
            if sb > 0:
                cands.append(da.radius(eps / sb))
            if sa > 0:
                cands.append(db.radius(eps / sa))
            return min(cands) if cands else 0.0

        lo = min(
            self.value_range[0] * other.value_range[0],
            self.value_range[0] * other.value_range[1],
            self.value_range[1] * other.value_range[0],
            self.value_range[1] * other.value_range[1],
        )
        hi = max(
            self.value_range[0] * other.value_range[0],
            self.value_range[0] * other.value_range[1],
            self.value_range[1] * other.value_range[0],
            self.value_range[1] * other.value_range[1],
        )
        return Symbol1D(
            eval=lambda x: fa(x) * fb(x),
            sup_bound=sa * sb,
            decay=Decay("numeric", radius_fn=rad),
            value_range=(min(lo, 0.0), max(hi, 0.0)),
            breakpoints=tuple(sorted(set(self.breakpoints) | set(other.breakpoints))),
            scale=min(self.scale, other.scale),
            even=self.even and other.even,
            label=f"{self.label}*{other.label}",
        )


def _fd_derivative(fn, k, xi, h=None):
    """Nested central differences; adequate as a fallback up to order ~4."""
    if h is None:
        h = max(1e-6, 1e-6 * float(np.max(np.abs(xi), initial=1.0))) * (10.0 ** (k - 1))
    if k == 1:
        return (fn(xi + h) - fn(xi - h)) / (2 * h)
    fwd = _fd_derivative(fn, k - 1, xi + h, h=h)
    bwd = _fd_derivative(fn, k - 1, xi - h, h=h)
    return (fwd - bwd) / (2 * h)


@dataclass(frozen=True)
class FermiModel:
    """Dispersion h(xi), chemical potential mu and temperature T >= 0.

    beta1 (growth order) and beta2 (derivative growth) are hints used for
    tail-integrability checks only.
    """

    h: Callable[[np.ndarray], np.ndarray]
    mu: float
    T: float
    beta1: float = 2.0
    beta2: float = 1.0

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("temperature must be nonnegative")

    def energy(self, xi):
        return np.asarray(self.h(np.asarray(xi, dtype=float)), dtype=float)


@dataclass(frozen=True)
class FermiSea:
    """The occupied region {h < mu} as an ordered union of open intervals."""

    components: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        prev_t = -math.inf
        for s, t in self.components:
            if not s < t:
                raise ValueError("each component must satisfy s < t")
            if not s > prev_t:
                raise ValueError("components must be sorted with disjoint closures")
            prev_t = t

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def points(self) -> Tuple[float, ...]:
        return tuple(x for st in self.components for x in st)

    @property
    def measure(self) -> float:
        return sum(t - s for s, t in self.components)


def auto_search_box(model: FermiModel, margin: float = 1.0, max_half: float = 1e6):
    """Expand a symmetric box until h > mu + margin on its edges."""
    half = 4.0
    while half <= max_half:
        edges = np.array([-half, half])
        if np.all(model.energy(edges) > model.mu + margin):
            return (-half, half)
        half *= 2.0
    raise UnboundedSublevelError(
        "could not bracket {h < mu}: h does not exceed mu on any tested box edge"
    )


def find_fermi_sea(model: FermiModel, search_box=None, grid_n: int = 2048) -> FermiSea:
    """Locate {h < mu} by sign-bracketing h - mu on a grid plus bisection.

    Roots are refined to relative tolerance 1e-12. A grid cell on which
    h - mu vanishes at both ends and at the midpoint signals a degenerate
    level set and must be resolved by a finer grid.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    if search_box is None:
        search_box = auto_search_box(model)
    lo, hi = float(search_box[0]), float(search_box[1])
    xs = np.linspace(lo, hi, grid_n + 1)
    fv = model.energy(xs) - model.mu
    if not np.all(np.isfinite(fv)):
        raise ValueError("h - mu is not finite on the search grid")
    if fv[0] < 0 or fv[-1] < 0:
        raise UnboundedSublevelError("{h < mu} touches the search box edge")

    zero = fv == 0.0
    for i in range(grid_n):
        if zero[i] and zero[i + 1]:
            mid = 0.5 * (xs[i] + xs[i + 1])
            if model.energy(np.array([mid]))[0] - model.mu == 0.0:
                raise DegenerateLevelSetError(
                    f"h - mu vanishes identically on cell [{xs[i]}, {xs[i + 1]}]; refine grid"
                )

    g = lambda x: float(model.energy(np.array([x]))[0] - model.mu)
    roots = []
    for i in range(grid_n):
        a, b = xs[i], xs[i + 1]
        if zero[i]:
            roots.append(a)
        if fv[i] * fv[i + 1] < 0:
            roots.append(optimize.brentq(g, a, b, rtol=1e-12, maxiter=200))
    if zero[-1]:
        roots.append(xs[-1])
    roots = sorted(set(roots))

    comps = []
    for a, b in zip(roots[:-1], roots[1:]):
        if g(0.5 * (a + b)) < 0:
            comps.append((a, b))
    return FermiSea(tuple(comps))


def make_fermi_symbol(model: FermiModel, sea: Optional[FermiSea] = None) -> Symbol1D:
    """Thermal occupation symbol a(xi) = 1 / (1 + exp((h(xi) - mu) / T))."""
    if model.T <= 0:
        raise ZeroTemperatureError("T = 0 has no thermal symbol; use an indicator symbol")
    probes = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    if not np.all(np.isfinite(model.energy(probes))):
        raise ValueError("h is not finite at probe points; invalid model")
    if sea is None:
        sea = find_fermi_sea(model)

    h, mu, T = model.h, model.mu, model.T

    def a_eval(xi):
        x = (np.asarray(h(np.asarray(xi, dtype=float)), dtype=float) - mu) / T
        # stable logistic: 1/(1+e^x)
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = np.exp(-x[pos]) / (1.0 + np.exp(-x[pos]))
        out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
        return out

    def radius_fn(eps):
        # find R with (h - mu)/T >= log(1/eps) outside [-R, R]
        target = mu + T * math.log(1.0 / max(eps, 1e-300))
        half = max((abs(p) for p in sea.points), default=1.0) + 0.05
        for _ in range(250):
            if all(
                model.energy(np.linspace(r0, r1, 33)).min() > target
                for r0, r1 in ((half, 4 * half), (-4 * half, -half))
            ):
                return half
            half *= 1.15
        raise UnboundedSublevelError("could not bound the symbol tail")

    grid = np.linspace(-radius_fn(1e-6), radius_fn(1e-6), 4097)
    vals = a_eval(grid)
    sup = float(vals.max())
    even = bool(
        np.allclose(model.energy(probes), model.energy(-probes), rtol=1e-12, atol=1e-12)
    )
    return Symbol1D(
        eval=a_eval,
        sup_bound=min(sup, 1.0),
        decay=Decay("numeric", radius_fn=radius_fn),
        value_range=(0.0, sup),
        breakpoints=sea.points,
        scale=T,
        even=even,
        label=f"fermi(T={T},mu={mu})",
    )


def make_indicator_symbol(sea: FermiSea) -> Symbol1D:
    """Indicator of the occupied region; convolution kernel in closed form."""
    if sea.N == 0:
        warnings.warn("empty region: returning the zero symbol", stacklevel=2)
        return Symbol1D(
            eval=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            sup_bound=0.0,
            decay=Decay("compact", 0.0),
            value_range=(0.0, 0.0),
            is_constant=True,
            const_value=0.0,
            closed_kernel=lambda a, u: np.zeros_like(np.asarray(u, dtype=float)),
            label="indicator(empty)",
            empty=True,
        )
    comps = sea.components

    def ind_eval(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        for s, t in comps:
            out = np.where((xi > s) & (xi < t), 1.0, out)
        return out

    even = all(
        any(abs(s + t2) < 1e-14 and abs(t + s2) < 1e-14 for s2, t2 in comps)
        for s, t in comps
    )

    def kernel(alpha, u):
        # (alpha/2pi) * int_s^t e^{i alpha xi u} dxi summed over components;
        # the sinc form is exact and stable through u = 0.
        u = np.asarray(u, dtype=float)
        total = np.zeros(u.shape, dtype=complex)
        for s, t in comps:
            width, center = t - s, 0.5 * (s + t)
            amp = alpha * width / (2.0 * math.pi)
            total += amp * np.exp(1j * alpha * center * u) * np.sinc(
                alpha * width * u / (2.0 * math.pi)
            )
        return total.real if even else total

    radius = max(abs(x) for x in sea.points)
    return Symbol1D(
        eval=ind_eval,
        sup_bound=1.0,
        decay=Decay("compact", radius),
        value_range=(0.0, 1.0),
        breakpoints=sea.points,
        scale=min(min(t - s for s, t in comps), 1.0),
        even=even,
        closed_kernel=kernel,
        label=f"indicator(N={sea.N})",
    )


def gaussian_symbol(rate: float = 1.0, amplitude: float = 1.0) -> Symbol1D:
    """a(xi) = A exp(-r xi^2); kernel known in closed form."""
    if rate <= 0:
        raise ValueError("rate must be positive")

    def kernel(alpha, u):
        u = np.asarray(u, dtype=float)
        return (
            amplitude
            * alpha
            / (2.0 * math.sqrt(math.pi * rate))
            * np.exp(-(alpha * u) ** 2 / (4.0 * rate))
        )

    def deriv(k, xi):
        if k == 1:
            return -2.0 * rate * xi * amplitude * np.exp(-rate * xi**2)
        if k == 2:
            return amplitude * (4 * rate**2 * xi**2 - 2 * rate) * np.exp(-rate * xi**2)
        return _fd_derivative(lambda x: amplitude * np.exp(-rate * x**2), k, xi)

    return Symbol1D(
        eval=lambda x: amplitude * np.exp(-rate * np.asarray(x, dtype=float) ** 2),
        sup_bound=amplitude,
        decay=Decay("gaussian", rate),
        deriv=deriv,
        value_range=(0.0, amplitude),
        scale=1.0 / math.sqrt(rate),
        even=True,
        closed_kernel=kernel,
        label=f"gaussian(r={rate})",
    )


def constant_symbol(c: float) -> Symbol1D:
    """The constant symbol a == c (op(c) acts as c times the identity)."""
    return Symbol1D(
        eval=lambda x: np.full_like(np.asarray(x, dtype=float), c),
        sup_bound=abs(c),
        decay=Decay("none"),
        value_range=(min(c, 0.0), max(c, 0.0)),
        is_constant=True,
        const_value=c,
        even=True,
        label=f"const({c})",
    )


def table_symbol(xi_values, a_values, label: str = "table") -> Symbol1D:
    """Cubic interpolation through (xi, a) samples; zero outside the table."""
    from scipy.interpolate import CubicSpline

    xi_values = np.asarray(xi_values, dtype=float)
    a_values = np.asarray(a_values, dtype=float)
    order = np.argsort(xi_values)
    xi_values, a_values = xi_values[order], a_values[order]
    spline = CubicSpline(xi_values, a_values, extrapolate=False)
    lo, hi = xi_values[0], xi_values[-1]

    def ev(x):
        x = np.asarray(x, dtype=float)
        out = spline(x)
        return np.where(np.isnan(out), 0.0, out)

    sup = float(np.max(np.abs(a_values)))
    return Symbol1D(
        eval=ev,
        sup_bound=sup,
        decay=Decay("compact", max(abs(lo), abs(hi))),
        value_range=(min(a_values.min(), 0.0), max(a_values.max(), 0.0)),
        breakpoints=(lo, hi),
        scale=float(np.min(np.diff(xi_values))),
        label=label,
    )


@dataclass(frozen=True)
class MultiScale:
    """Scale function tau and amplitude v controlling a thermal symbol.

    tau(xi) = theta * min(dist(xi, level set) + T, cap); the amplitude is 1
    near the level set and decays like (1+|xi|)^(-2/sigma) far away, blended
    by a smooth partition of unity. lipschitz_nu and the comparability band
    (c1, c2) are measured on grids, not assumed.
    """

    tau: Callable[[np.ndarray], np.ndarray]
    v: Callable[[np.ndarray], np.ndarray]
    tau_inf: float
    lipschitz_nu: float
    c1: float
    c2: float
    theta: float
    sigma: float
    points: Tuple[float, ...]

    def v_far_exponent(self) -> float:
        return 2.0 / self.sigma


def build_multiscale(
    model: FermiModel,
    sea: FermiSea,
    theta: float = 0.5,
    sigma: float = 1.0,
    cap: float = 1.0,
    blend=(1.0, 3.0),
) -> MultiScale:
    """Construct (tau, v) for a thermal symbol from its level-set points."""
    if model.T <= 0:
        raise ZeroTemperatureError("multi-scale construction needs T > 0")
    if sea.N == 0:
        raise ValueError("need at least one occupied component")
    pts = np.array(sea.points)
    T = model.T
    inner, outer = blend

    def dist(xi):
        xi = np.asarray(xi, dtype=float)
        return np.min(np.abs(xi[..., None] - pts), axis=-1)

    def tau(xi):
        return theta * np.minimum(dist(xi) + T, cap)

    def v(xi):
        xi = np.asarray(xi, dtype=float)
        w_far = smooth_step((dist(xi) - inner) / (outer - inner))
        far = (1.0 + np.abs(xi)) ** (-2.0 / sigma)
        return (1.0 - w_far) + w_far * far

    span = max(np.max(np.abs(pts)) + 5.0, 10.0)
    grid = np.linspace(-span, span, 10_001)
    tg = tau(grid)
    nu = float(np.max(np.abs(np.diff(tg)) / np.diff(grid)))

    # comparability of v over balls of radius tau: sample offsets inside
    offs = np.linspace(-0.95, 0.95, 9)
    base = v(grid)
    ratios = []
    for o in offs:
        ratios.append(v(grid + o * tg) / base)
    ratios = np.concatenate(ratios)
    return MultiScale(
        tau=tau,
        v=v,
        tau_inf=theta * min(T, cap),
        lipschitz_nu=nu,
        c1=float(ratios.min()),
        c2=float(ratios.max()),
        theta=theta,
        sigma=sigma,
        points=tuple(pts),
    )


def v_integral(ms: MultiScale, sigma: float, rho: float, tol: float = 1e-8) -> float:
    """int v(xi)^sigma * tau(xi)^(-rho) dxi by adaptive quadrature.

    The far field behaves like (1+|xi|)^(-sigma * 2/ms.sigma) with tau capped,
    so the tail converges iff that exponent exceeds 1.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    far_exp = sigma * ms.v_far_exponent()
    if far_exp <= 1.0 + 1e-12:
        raise DivergentIntegralError(
            f"far-field exponent {far_exp:.3f} <= 1: v^sigma/tau^rho not integrable"
        )

    def g(xi):
        return ms.v(xi) ** sigma * ms.tau(xi) ** (-rho)

    pts = sorted(ms.points)
    R = max(abs(pts[0]), abs(pts[-1])) + 5.0
    gs = lambda x: float(g(np.array([x]))[0])
    mid, err1 = integrate.quad(gs, -R, R, points=pts, limit=400, epsrel=tol, epsabs=0)
    left, err2 = integrate.quad(gs, -np.inf, -R, limit=200, epsrel=tol, epsabs=tol * abs(mid))
    right, err3 = integrate.quad(gs, R, np.inf, limit=200, epsrel=tol, epsabs=tol * abs(mid))
    return mid + left + right
