"""Boundary-trace asymptotic coefficients and their cross-checks.

The central object is the coefficient

    B(a; f) = (1 / 8 pi^2) lim_{eps -> 0}
              iint_{|xi1 - xi2| > eps} U(a(xi1), a(xi2); f) / (xi1 - xi2)^2

evaluated on a geometric cutoff schedule with extrapolation of the
near-diagonal remainder. For thermal symbols it grows like
(N / 2 pi^2) U(1, 0; f) |log T| with N the number of occupied components,
which the low-temperature helpers and the log-integral oracle quantify.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .errors import NonConvergedError
from .opcore import IntervalUnion, trace_D
from .specfun import (
    SpectralFunction,
    calibrated_u_rule,
    resolvent,
    u_functional,
    u_functional_vec,
    u_rule,
)
from .symbols import Symbol1D

_Q_S = 12  # nodes per panel in the outer momentum variable
_Q_U = 12  # nodes per octave panel in the separation variable
_PREF = 2.0 / (8.0 * math.pi**2)  # doubled u > 0 half-domain over 8 pi^2


@dataclass(frozen=True)
class CoefficientResult:
    """A computed asymptotic coefficient with its cutoff diagnostics."""

    value: complex
    epsilons: Tuple[float, ...]
    extrapolation_residual: float
    grid_spec: dict

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def record(self) -> dict:
        """JSON-compatible record: value, residual, cutoff ladder, cells."""
        v = complex(self.value)
        return {
            "value": v.real if v.imag == 0 else {"re": v.real, "im": v.imag},
            "residual": self.extrapolation_residual,
            "epsilons": list(self.epsilons),
            "cells": dict(self.grid_spec),
        }


def _graded_s_grid(breakpoints, smin, lo, hi, coarse=0.5):
    """Panels on [lo, hi], geometrically refined toward each breakpoint."""
    cuts = {float(lo), float(hi)}
    for p in breakpoints:
        if not lo < p < hi:
            continue
        cuts.add(float(p))
        d = smin
        while d < (hi - lo):
            for x in (p - d, p + d):
                if lo < x < hi:
                    cuts.add(float(x))
            d *= 2.0
    cuts = sorted(cuts)
    xq, wq = roots_legendre(_Q_S)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n_sub = max(1, math.ceil((b - a) / coarse))
        edges = np.linspace(a, b, n_sub + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * xq[None, :]).ravel())
        weights.append((half[:, None] * wq[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _holder_exponent(f: SpectralFunction) -> float:
    if f.singularity is None:
        return 1.0
    return min(f.singularity.gamma, 1.0)


def _collision_distances(breakpoints) -> Tuple[float, ...]:
    """Distinct positive distances between symbol breakpoints: separations
    at which a shifted transition region crosses another one, where the
    inner integral develops scale-T structure in the separation variable."""
    pts = sorted(breakpoints)
    ds = set()
    for i, p in enumerate(pts):
        for q in pts[i + 1 :]:
            ds.add(abs(q - p))
    return tuple(sorted(d for d in ds if d > 0))


def _u_panel_edges(eps0, u_max, collisions, scale):
    """Dyadic octave edges on [eps0, u_max], refined geometrically toward
    each collision distance down to the symbol's internal scale."""
    edges = {float(eps0), float(u_max)}
    e = eps0
    while e < u_max:
        e = min(2.0 * e, u_max)
        edges.add(float(e))
    for d in collisions:
        if not eps0 < d < u_max:
            continue
        edges.add(float(d))
        w = scale / 2.0
        while w < u_max:
            for x in (d - w, d + w):
                if eps0 < x < u_max:
                    edges.add(float(x))
            w *= 2.0
    return sorted(edges)


@dataclass(frozen=True)
class _PVPieces:
    """Raw pieces of the separation integral, before the 1/8pi^2 prefactor:
    'above' collects octaves with separation >= eps0, 'tail' the closed-form
    far contribution, 'below' the octave contributions descending from eps0
    with their lower edges."""

    above: complex
    tail: complex
    below_edges: Tuple[float, ...]
    below: Tuple[complex, ...]
    grid_spec: dict


def _pv_pieces(a, f, tol, eps0, max_octaves, nt=None, eps0_fixed=False) -> _PVPieces:
    hol = _holder_exponent(f)
    eps_a = min(1e-10, (tol * 1e-2) ** (1.0 / hol))
    S = a.tail_radius(eps_a) + 1.0
    u_max = 2.0 * S + 2.0
    smin = a.scale / 4.0
    coll = _collision_distances(a.breakpoints)
    if not eps0_fixed:
        # keep every collision inside the refined above-cutoff region; a
        # caller that pins eps0 as a semantic split boundary keeps it as is
        eps0 = min(eps0, 1.0)
        if coll:
            eps0 = min(eps0, coll[0] / 4.0)

    lo_s, hi_s = -S - u_max, S

    if nt is not None:
        rule = u_rule(nt)
    else:
        probes = [
            (a.value_range[1], a.value_range[0]),
            (a.value_range[1], 0.5 * (a.value_range[0] + a.value_range[1])),
        ]
        rule = calibrated_u_rule(f, probes, tol=min(tol * 1e-2, 1e-8))

    xq, wq = roots_legendre(_Q_U)
    n_s_seen = 0

    def inner(uv):
        # the integrand has width-scale features at the breakpoints of both
        # arguments: s = p and s = p - u; grade the grid toward each
        nonlocal n_s_seen
        shifted = tuple(p - uv for p in a.breakpoints)
        s_nodes, s_w = _graded_s_grid(
            a.breakpoints + shifted, smin, lo_s, hi_s
        )
        n_s_seen = max(n_s_seen, s_nodes.size)
        Uv = u_functional_vec(a(s_nodes), a(s_nodes + uv), f, rule)
        return np.sum(s_w * Uv)

    def octave(ua, ub):
        la, lb = math.log(ua), math.log(ub)
        us = np.exp(0.5 * (la + lb) + 0.5 * (lb - la) * xq)
        uw = 0.5 * (lb - la) * wq * us  # du = u d(log u)
        total = 0.0 + 0.0j if f.is_complex else 0.0
        for uv, uwt in zip(us, uw):
            total += uwt * inner(uv) / uv**2
        return total

    above = 0.0 + 0.0j if f.is_complex else 0.0
    edges = _u_panel_edges(eps0, u_max, coll, a.scale)
    for ua, ub in zip(edges[:-1], edges[1:]):
        above += octave(ua, ub)

    t_nodes, t_w = _graded_s_grid(a.breakpoints, smin, lo_s, hi_s)
    a_t = a(t_nodes)
    tail = 2.0 * np.sum(t_w * u_functional_vec(a_t, np.zeros_like(a_t), f, rule)) / u_max

    below, edges_below = [], []
    lo = eps0
    scale_ref = max(abs(above + tail), 1.0)
    for j in range(max_octaves):
        c = octave(lo / 2.0, lo)
        if j >= 4 and below and abs(c) >= 0.9 * abs(below[-1]):
            # entering the rounding-noise regime: the secant defect of
            # nearly coincident arguments is pure cancellation error, and
            # the 1/u^2 weight doubles its octave contribution on descent
            break
        below.append(c)
        edges_below.append(lo / 2.0)
        lo /= 2.0
        if j >= 3 and abs(c) < tol * scale_ref / 8.0:
            break

    return _PVPieces(
        above=above,
        tail=tail,
        below_edges=tuple(edges_below),
        below=tuple(below),
        grid_spec={
            "n_s": int(n_s_seen),
            "n_t": int(len(rule[0])),
            "n_octaves_below": len(below),
            "support_radius": S,
            "u_max": u_max,
            "eps0": eps0,
        },
    )


def _extrapolate_below(below):
    """Geometric extrapolation of the remaining near-diagonal octaves."""
    if not below:
        return 0.0, 0.0
    remainder = 0.0
    residual = abs(below[-1])
    if len(below) >= 3 and abs(below[-2]) > 0:
        rho = below[-1] / below[-2]
        if abs(rho) < 0.95:
            remainder = below[-1] * rho / (1.0 - rho)
            residual = abs(remainder) * abs(rho) + abs(below[-1]) * 1e-3
    return remainder, residual


def widom_B(
    a: Symbol1D,
    f: SpectralFunction,
    tol: float = 1e-6,
    eps0: float = None,
    nt: int = None,
    max_octaves: int = 48,
) -> CoefficientResult:
    """Principal-value double integral of U(a, a; f) / separation^2.

    The separation integral runs over dyadic octaves; the near-diagonal
    remainder is extrapolated from the geometric decay of the octave
    contributions, and the far tail, where one argument has left the symbol
    support, enters in closed form as 2 int U(a(t), 0; f) dt / u_max.
    """
    if a.is_constant:
        return CoefficientResult(0.0, (), 0.0, {"constant": True})
    if eps0 is None:
        eps0 = a.scale / 2.0
    p = _pv_pieces(a, f, tol, eps0, max_octaves, nt=nt)
    remainder, residual = _extrapolate_below(p.below)
    raw = p.above + p.tail + sum(p.below) + remainder
    value = _PREF * raw
    residual_scaled = _PREF * residual
    if residual_scaled > 8.0 * max(tol, 1e-14) * max(abs(value), 1.0):
        raise NonConvergedError(
            f"cutoff schedule not converged: residual {residual_scaled:.3e}",
            trace=[abs(c) for c in p.below],
        )
    if not f.is_complex:
        value = float(np.real(value))
    return CoefficientResult(
        value=value,
        epsilons=p.below_edges,
        extrapolation_residual=float(residual_scaled),
        grid_spec=p.grid_spec,
    )


def widom_B_split(
    a: Symbol1D,
    f: SpectralFunction,
    tau_inf: float,
    tol: float = 1e-6,
) -> Tuple[float, float]:
    """(near, far) split of the coefficient at separation tau_inf / 2.

    near collects separations below tau_inf / 2 (with the extrapolated
    diagonal remainder); far the rest including the closed-form tail. They
    sum to widom_B by partition of the integration domain.
    """
    if tau_inf <= 0:
        raise ValueError("tau_inf must be positive")
    if a.is_constant:
        return 0.0, 0.0
    p = _pv_pieces(a, f, tol, tau_inf / 2.0, max_octaves=48, eps0_fixed=True)
    remainder, _ = _extrapolate_below(p.below)
    near = _PREF * (sum(p.below) + remainder)
    far = _PREF * (p.above + p.tail)
    return float(np.real(near)), float(np.real(far))


def lowT_prediction(N: int, f: SpectralFunction, T: float, tol: float = 1e-9) -> float:
    """(N / 2 pi^2) U(1, 0; f) |log T|: the leading low-temperature law."""
    if not 0.0 < T < 1.0:
        raise ValueError("need 0 < T < 1")
    u10 = u_functional(1.0, 0.0, f, tol=tol)
    return float(N / (2.0 * math.pi**2) * np.real(u10) * abs(math.log(T)))


@dataclass(frozen=True)
class ResolventCheckRow:
    alpha: float
    trace_d: complex
    target: complex
    abs_err: float


@dataclass(frozen=True)
class ResolventCheck:
    rows: Tuple[ResolventCheckRow, ...]
    fitted_order: float
    coefficient: complex


def resolvent_trace_check(
    a: Symbol1D,
    iu: IntervalUnion,
    z: complex,
    alphas: Sequence[float],
    resolution: float = 8.0,
    tol_B: float = 1e-7,
) -> ResolventCheck:
    """Compare trace_D with omega * B for the resolvent at each alpha and
    fit the decay order of the error."""
    if z.imag == 0:
        raise ValueError("resolvent point must be off the real axis")
    rz = resolvent(z)
    if a.is_constant:
        B = 0.0 + 0.0j
    else:
        B = complex(widom_B(a, rz, tol=tol_B).value)
    rows = []
    for alpha in alphas:
        td = trace_D(a, alpha, iu, rz, resolution=resolution, estimate_slack=False)
        target = iu.omega * B
        rows.append(
            ResolventCheckRow(
                alpha=float(alpha),
                trace_d=complex(td.value),
                target=target,
                abs_err=float(abs(complex(td.value) - target)),
            )
        )
    errs = np.array([r.abs_err for r in rows])
    als = np.array([r.alpha for r in rows])
    live = errs > 1e-14
    order = float("nan")
    if live.sum() >= 2:
        slope = np.polyfit(np.log(als[live]), np.log(errs[live]), 1)[0]
        order = float(-slope)
    return ResolventCheck(tuple(rows), order, B)


def log_integral_oracle(
    J: Sequence[Tuple[float, float]],
    T: float,
    phi: Callable[[float], float],
    tol: float = 1e-9,
) -> Tuple[float, float]:
    """Two routes to sum_k int_{t not in J} phi(t) int_{|t-s|>=T, s in J_k}
    ds dt / (t-s)^2.

    numeric: outer adaptive quadrature with the inner integral in closed
    form. closed_form: |log T| * sum_k (phi(s_k) + phi(t_k)). Their gap is
    O(1) as T decreases.
    """
    comps = sorted((float(s), float(t)) for s, t in J)
    for (s1, t1), (s2, t2) in zip(comps[:-1], comps[1:]):
        if not t1 < s2:
            raise ValueError("interval closures must be pairwise disjoint")
    for s, t in comps:
        if not s < t:
            raise ValueError("intervals must be nondegenerate")
    if not 0.0 < T <= 0.5:
        raise ValueError("need 0 < T <= 1/2")

    def inner(t):
        total = 0.0
        for s_k, t_k in comps:
            for lo, hi in ((s_k, min(t_k, t - T)), (max(s_k, t + T), t_k)):
                if hi > lo:
                    total += 1.0 / (t - hi) - 1.0 / (t - lo)
        return total

    g = lambda t: phi(t) * inner(t)
    numeric = 0.0
    first_s, last_t = comps[0][0], comps[-1][1]
    numeric += integrate.quad(g, first_s - 1.0, first_s, points=[first_s - T],
                              limit=400, epsabs=tol, epsrel=tol)[0]
    numeric += integrate.quad(g, -math.inf, first_s - 1.0, limit=400,
                              epsabs=tol, epsrel=tol)[0]
    for (s1, t1), (s2, t2) in zip(comps[:-1], comps[1:]):
        pts = [p for p in (t1 + T, s2 - T) if t1 < p < s2]
        numeric += integrate.quad(g, t1, s2, points=pts, limit=400,
                                  epsabs=tol, epsrel=tol)[0]
    numeric += integrate.quad(g, last_t, last_t + 1.0, points=[last_t + T],
                              limit=400, epsabs=tol, epsrel=tol)[0]
    numeric += integrate.quad(g, last_t + 1.0, math.inf, limit=400,
                              epsabs=tol, epsrel=tol)[0]

    closed = abs(math.log(T)) * sum(phi(s) + phi(t) for s, t in comps)
    return float(numeric), float(closed)
