"""Scenario configuration, sweep orchestration and result persistence.

A Scenario is a JSON-compatible description of a symbol, a truncation set,
a test function and sweep axes. Runners produce RunRecords whose rows are
written as fixed-column CSV (17 significant digits), a JSON record, and a
rendered figure. Sweep points are cached on disk by parameter hash so an
interrupted sweep re-runs only what is missing.
"""

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import acceptance, asymptotics, fermions, opcore, report, specfun, symbols

VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# scenario


@dataclass(frozen=True)
class Scenario:
    """A declarative description of one study; see docs/schema.json."""

    name: str = "default"
    symbol: dict = field(default_factory=lambda: {
        "kind": "fermi", "h": "quadratic", "mu": 1.0, "T": 0.1,
    })
    set: dict = field(default_factory=lambda: {"intervals": [[0.0, 1.0]]})
    function: dict = field(default_factory=lambda: {"kind": "renyi", "gamma": 1.0})
    alphas: Tuple[float, ...] = (10.0, 20.0, 40.0)
    temps: Tuple[float, ...] = (0.1,)
    lambdas: Tuple[float, ...] = (1.0,)
    gammas: Tuple[float, ...] = (1.0,)
    pair_alpha_T: bool = False
    tol: float = 1e-6
    resolution: float = 8.0
    window: dict = field(default_factory=lambda: {"L": None, "factor": 1.5})
    alpha_T_min: float = 1.0

    def __post_init__(self):
        if not self.alphas or not self.temps:
            raise ValueError("sweep axes must be nonempty")
        if self.pair_alpha_T and len(self.alphas) != len(self.temps):
            raise ValueError("paired sweep needs matching alpha and T lists")

    @staticmethod
    def from_dict(d: dict) -> "Scenario":
        known = {f: d[f] for f in Scenario.__dataclass_fields__ if f in d}
        for axis in ("alphas", "temps", "lambdas", "gammas"):
            if axis in known:
                known[axis] = tuple(float(x) for x in known[axis])
        return Scenario(**known)

    @staticmethod
    def from_file(path) -> "Scenario":
        with open(path) as fh:
            return Scenario.from_dict(json.load(fh))

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# spec resolution: dicts -> domain objects


_DISPERSIONS = {
    "quadratic": lambda x: x**2,
    "quartic_double_well": lambda x: x**4 - 2.0 * x**2,
    "cosine_band": lambda x: -np.cos(x) + 0.5 * x**2,
}


def resolve_dispersion(spec):
    if isinstance(spec, str):
        try:
            return _DISPERSIONS[spec]
        except KeyError:
            raise ValueError(f"unknown dispersion {spec!r}") from None
    if isinstance(spec, dict) and "poly" in spec:
        poly = np.polynomial.Polynomial(list(spec["poly"]))
        return lambda x: poly(x)
    raise ValueError("dispersion must be a name or {'poly': coeffs}")


def resolve_model(sym: dict, T: Optional[float] = None) -> symbols.FermiModel:
    return symbols.FermiModel(
        h=resolve_dispersion(sym.get("h", "quadratic")),
        mu=float(sym.get("mu", 1.0)),
        T=float(T if T is not None else sym.get("T", 0.1)),
        beta1=float(sym.get("beta1", 2.0)),
        beta2=float(sym.get("beta2", 1.0)),
    )


def resolve_symbol(sym: dict, T: Optional[float] = None) -> symbols.Symbol1D:
    kind = sym.get("kind", "fermi")
    if kind == "fermi":
        return symbols.make_fermi_symbol(resolve_model(sym, T))
    if kind == "indicator":
        comps = tuple((float(s), float(t)) for s, t in sym["intervals"])
        return symbols.make_indicator_symbol(symbols.FermiSea(comps))
    if kind == "gaussian":
        return symbols.gaussian_symbol(
            rate=float(sym.get("rate", 1.0)),
            amplitude=float(sym.get("amplitude", 1.0)),
        )
    if kind == "constant":
        return symbols.constant_symbol(float(sym["value"]))
    if kind == "custom-table":
        data = np.loadtxt(sym["path"], delimiter=",")
        return symbols.table_symbol(data[:, 0], data[:, 1],
                                    label=Path(sym["path"]).stem)
    raise ValueError(f"unknown symbol kind {kind!r}")


def resolve_set(spec: dict) -> opcore.IntervalUnion:
    return opcore.IntervalUnion(
        tuple((float(s), float(t)) for s, t in spec.get("intervals", [])),
        left=spec.get("left"),
        right=spec.get("right"),
    )


def resolve_function(spec: dict) -> specfun.SpectralFunction:
    kind = spec.get("kind", "renyi")
    if kind == "renyi":
        return specfun.eta_gamma(float(spec.get("gamma", 1.0)))
    if kind == "eta":
        return specfun.eta_plain()
    if kind == "resolvent":
        z = spec["z"]
        return specfun.resolvent(complex(z[0], z[1]))
    if kind == "power":
        return specfun.power_abs(float(spec["gamma"]))
    if kind == "poly":
        return specfun.polynomial(spec["coeffs"])
    if kind == "smooth_compact":
        return specfun.bump(
            center=float(spec.get("center", 0.5)),
            width=float(spec.get("width", 0.4)),
            power=int(spec.get("power", 6)),
        )
    if kind == "table":
        data = np.loadtxt(spec["path"], delimiter=",")
        return specfun.from_samples(data[:, 0], data[:, 1],
                                    holder=float(spec.get("holder", 1.0)))
    raise ValueError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# run records and point-level persistence


@dataclass
class RunRecord:
    kind: str
    scenario_hash: str
    version: str
    rows: List[dict]
    fits: dict
    wall_seconds: float
    diagnostics: dict = field(default_factory=dict)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "scenario_hash": self.scenario_hash,
            "version": self.version,
            "rows": self.rows,
            "fits": self.fits,
            "wall_seconds": self.wall_seconds,
            "diagnostics": self.diagnostics,
        }

    def save(self, outdir, columns: Sequence[str], figure=None):
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        base = outdir / f"{self.kind}_{self.scenario_hash}"
        paths = {
            "csv": report.write_csv(base.with_suffix(".csv"), columns, self.rows),
            "json": report.write_json(base.with_suffix(".json"), self.payload()),
        }
        if figure is not None:
            paths["figure"] = figure(base.with_suffix(".png"), self.rows)
        return paths


def _point_key(scenario_hash: str, point: dict) -> str:
    blob = scenario_hash + json.dumps(point, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _run_points(worker, scn: Scenario, points: List[dict], jobs: int,
                outdir: Optional[str]) -> List[dict]:
    """Evaluate sweep points, resuming from per-point JSON files when an
    output directory is given; results return in deterministic point order."""
    cache_dir = None
    if outdir is not None:
        cache_dir = Path(outdir) / "points"
        cache_dir.mkdir(parents=True, exist_ok=True)
    rows: List[Optional[dict]] = [None] * len(points)
    todo = []
    for i, pt in enumerate(points):
        if cache_dir is not None:
            f = cache_dir / f"{_point_key(scn.digest(), pt)}.json"
            if f.exists():
                with open(f) as fh:
                    rows[i] = json.load(fh)
                continue
        todo.append(i)
    scn_dict = asdict(scn)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(worker, [scn_dict] * len(todo),
                                  [points[i] for i in todo]))
    else:
        results = [worker(scn_dict, points[i]) for i in todo]
    for i, row in zip(todo, results):
        rows[i] = row
        if cache_dir is not None:
            f = cache_dir / f"{_point_key(scn.digest(), points[i])}.json"
            report.write_json(f, row)
    return rows  # type: ignore[return-value]


# module-level workers (picklable for the process pool)


def _coefficient_point(scn_dict: dict, point: dict) -> dict:
    scn = Scenario.from_dict(scn_dict)
    f = resolve_function(scn.function)
    T = point.get("T")
    lam = point.get("lam", 1.0)
    a = resolve_symbol(scn.symbol, T)
    if lam != 1.0:
        a = a.scaled(lam)
    res = asymptotics.widom_B(a, f, tol=scn.tol)
    row = {
        "T": T if T is not None else float("nan"),
        "lam": lam,
        "value": res.real,
        "residual": res.extrapolation_residual,
        "n_s": res.grid_spec.get("n_s", 0),
        "n_octaves": res.grid_spec.get("n_octaves_below", 0),
    }
    return row


def _trace_point(scn_dict: dict, point: dict) -> dict:
    scn = Scenario.from_dict(scn_dict)
    f = resolve_function(scn.function)
    iu = resolve_set(scn.set)
    a = resolve_symbol(scn.symbol)
    alpha = point["alpha"]
    td = opcore.trace_D(a, alpha, iu, f, resolution=scn.resolution,
                        estimate_slack=True)
    target = iu.omega * complex(point["B_re"], point["B_im"])
    val = complex(td.value)
    row = {
        "alpha": alpha,
        "trace_d_re": val.real,
        "trace_d_im": val.imag,
        "target_re": target.real,
        "target_im": target.imag,
        "abs_err": abs(val - target),
        "slack": td.slack,
        "dim": td.dim,
    }
    if iu.K > 1:
        parts = 0.0 + 0.0j
        for s, t in iu.intervals:
            parts += complex(
                opcore.trace_D(a, alpha, opcore.interval(s, t), f,
                               resolution=scn.resolution,
                               estimate_slack=False).value
            )
        row["additivity_defect"] = abs(val - parts)
    return row


def _ee_point(scn_dict: dict, point: dict) -> dict:
    scn = Scenario.from_dict(scn_dict)
    iu = resolve_set(scn.set)
    model = resolve_model(scn.symbol, point["T"])
    res = fermions.entanglement_entropy(
        point["gamma"], model, point["alpha"], iu,
        window_L=scn.window.get("L"),
        resolution=scn.resolution,
        sensitivity_factor=scn.window.get("factor", 1.5),
        alpha_T_min=scn.alpha_T_min,
    )
    ed = fermions.entropy_density(point["gamma"], model)
    return {
        "gamma": point["gamma"],
        "T": point["T"],
        "mu": model.mu,
        "alpha": point["alpha"],
        "window_L": res.window_L,
        "H": res.H,
        "trace_inside": res.trace_inside,
        "trace_outside": res.trace_outside,
        "prediction": res.prediction,
        "window_sensitivity": res.window_sensitivity,
        "coefficient": res.coefficient,
        "s_direct": ed.direct,
        "s_pressure": ed.via_pressure,
    }


def _entropy_density_point(scn_dict: dict, point: dict) -> dict:
    scn = Scenario.from_dict(scn_dict)
    model = resolve_model(scn.symbol, point["T"])
    ed = fermions.entropy_density(point["gamma"], model)
    return {
        "gamma": point["gamma"],
        "T": point["T"],
        "mu": model.mu,
        "direct": ed.direct,
        "via_pressure": ed.via_pressure,
        "relative_gap": ed.relative_gap,
    }


# ---------------------------------------------------------------------------
# runners


def run_coefficient(scn: Scenario, outdir=None, jobs: int = 1) -> RunRecord:
    """Coefficient per sweep point, with a |log T| fit for thermal sweeps."""
    t0 = time.time()
    if scn.symbol.get("kind", "fermi") == "fermi":
        points = [{"T": T, "lam": lam} for T in scn.temps for lam in scn.lambdas]
    else:
        points = [{"T": None, "lam": lam} for lam in scn.lambdas]
    rows = _run_points(_coefficient_point, scn, points, jobs, outdir)
    fits = {}
    thermal = [r for r in rows if r["T"] is not None and not math.isnan(r["T"])]
    if len(thermal) >= 2:
        logs = [abs(math.log(r["T"])) for r in thermal]
        slope, intercept = report.fit_line(logs, [r["value"] for r in thermal])
        fits = {"slope_vs_logT": slope, "intercept": intercept}
    rec = RunRecord("coefficient", scn.digest(), VERSION, rows, fits,
                    time.time() - t0)
    if outdir is not None:
        figure = report.render_coefficient_figure if len(thermal) >= 2 else None
        rec.save(outdir, ["T", "lam", "value", "residual", "n_s", "n_octaves"],
                 figure=figure)
    return rec


def run_trace_sweep(scn: Scenario, outdir=None, jobs: int = 1) -> RunRecord:
    """trace_D against omega * B across alpha, with a decay-order fit."""
    t0 = time.time()
    f = resolve_function(scn.function)
    a = resolve_symbol(scn.symbol)
    B = complex(asymptotics.widom_B(a, f, tol=scn.tol).value)
    points = [{"alpha": al, "B_re": B.real, "B_im": B.imag} for al in scn.alphas]
    rows = _run_points(_trace_point, scn, points, jobs, outdir)
    errs = np.array([max(r["abs_err"], 1e-300) for r in rows])
    als = np.array([r["alpha"] for r in rows])
    fits = {}
    if len(rows) >= 2:
        slope, _ = report.fit_line(np.log(als), np.log(errs))
        fits["decay_order"] = -slope
    rec = RunRecord("trace_sweep", scn.digest(), VERSION, rows, fits,
                    time.time() - t0, diagnostics={"B_re": B.real, "B_im": B.imag})
    if outdir is not None:
        cols = list(rows[0].keys())
        rec.save(outdir, cols, figure=report.render_trace_sweep_figure)
    return rec


def run_ee_sweep(scn: Scenario, outdir=None, jobs: int = 1) -> RunRecord:
    """Entanglement-entropy sweep with per-point entropy-density columns."""
    t0 = time.time()
    if scn.pair_alpha_T:
        at_pairs = list(zip(scn.alphas, scn.temps))
    else:
        at_pairs = [(al, T) for al in scn.alphas for T in scn.temps]
    points = [{"gamma": g, "T": T, "alpha": al}
              for g in scn.gammas for al, T in at_pairs]
    rows = _run_points(_ee_point, scn, points, jobs, outdir)
    fits = {}
    for g in scn.gammas:
        sub = [r for r in rows if r["gamma"] == g]
        if len(sub) >= 2:
            logs = [abs(math.log(r["T"])) for r in sub]
            slope, intercept = report.fit_line(logs, [r["H"] for r in sub])
            fits[f"H_slope_gamma_{g}"] = slope
    rec = RunRecord("ee_sweep", scn.digest(), VERSION, rows, fits,
                    time.time() - t0)
    if outdir is not None:
        cols = ["gamma", "T", "mu", "alpha", "window_L", "H", "trace_inside",
                "trace_outside", "prediction", "window_sensitivity",
                "coefficient", "s_direct", "s_pressure"]
        rec.save(outdir, cols, figure=report.render_ee_figure)
    return rec


def run_entropy_density(scn: Scenario, outdir=None, jobs: int = 1) -> RunRecord:
    t0 = time.time()
    points = [{"gamma": g, "T": T} for g in scn.gammas for T in scn.temps]
    rows = _run_points(_entropy_density_point, scn, points, jobs, outdir)
    rec = RunRecord("entropy_density", scn.digest(), VERSION, rows, {},
                    time.time() - t0)
    if outdir is not None:
        rec.save(outdir,
                 ["gamma", "T", "mu", "direct", "via_pressure", "relative_gap"],
                 figure=report.render_entropy_density_figure)
    return rec


def run_oracle(scn: Scenario, outdir=None, jobs: int = 1) -> RunRecord:
    """Log-integral oracle rows over the T axis, plus closed-form U checks."""
    t0 = time.time()
    comps = [tuple(map(float, st)) for st in scn.set.get("intervals", [[0.0, 1.0]])]
    rows = []
    for T in scn.temps:
        num, closed = asymptotics.log_integral_oracle(comps, T, lambda t: 1.0)
        rows.append({"T": T, "numeric": num, "closed_form": closed,
                     "gap": num - closed})
    u_rows = []
    for g in scn.gammas:
        got = specfun.u_functional(1.0, 0.0, specfun.eta_gamma(g), tol=1e-10)
        u_rows.append({"gamma": g, "u_quadrature": got,
                       "u_closed": specfun.u_eta_closed(g)})
    rec = RunRecord("oracle", scn.digest(), VERSION, rows, {},
                    time.time() - t0, diagnostics={"u_checks": u_rows})
    if outdir is not None:
        rec.save(outdir, ["T", "numeric", "closed_form", "gap"])
    return rec


def validate(suite: str = "full", out=None) -> int:
    """Run the acceptance criteria; nonzero exit status on any failure."""
    results = acceptance.run_suite(suite)
    if out is not None:
        payload = [
            {"index": r.index, "name": r.name, "passed": r.passed,
             "measured": r.measured, "detail": r.detail, "seconds": r.seconds}
            for r in results
        ]
        report.write_json(Path(out) / f"validate_{suite}.json", payload)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0
