"""Rendering of sweep results: delimited tables plus matplotlib figures.

Every run writes CSV (17 significant digits, fixed column order) and JSON;
the report path additionally renders a PNG figure per table so results can
be eyeballed without external plotting.
"""

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FLOAT_FMT = "%.17g"


def format_value(v):
    if isinstance(v, float):
        return FLOAT_FMT % v
    if isinstance(v, complex):
        return f"{FLOAT_FMT % v.real}{'+' if v.imag >= 0 else '-'}{FLOAT_FMT % abs(v.imag)}j"
    return str(v)


def write_csv(path, columns, rows):
    """Fixed-column CSV with reproducible float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row[c]) for c in columns])
    return path


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=130)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.3)
    return fig, ax


def fit_line(x, y):
    """Least-squares line fit; returns (slope, intercept)."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


def render_coefficient_figure(path, rows, title="coefficient vs |log T|"):
    """B against |log T| with the fitted line."""
    x = [abs(math.log(r["T"])) for r in rows]
    y = [r["value"] for r in rows]
    fig, ax = _new_axes("|log T|", "coefficient", title)
    ax.plot(x, y, "o", label="computed")
    if len(rows) >= 2:
        s, b = fit_line(x, y)
        xs = np.linspace(min(x), max(x), 50)
        ax.plot(xs, s * xs + b, "-", label=f"fit slope {s:.4f}")
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def render_trace_sweep_figure(path, rows, title="trace error vs alpha"):
    """|trace_D - omega B| against alpha on log-log axes."""
    x = [r["alpha"] for r in rows]
    y = [max(r["abs_err"], 1e-300) for r in rows]
    fig, ax = _new_axes("alpha", "|trace_D - omega B|", title)
    ax.loglog(x, y, "o-")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def render_ee_figure(path, rows, title="entanglement entropy vs |log T|"):
    """H against |log T| with the predicted line."""
    x = [abs(math.log(r["T"])) for r in rows]
    y = [r["H"] for r in rows]
    p = [r["prediction"] for r in rows]
    fig, ax = _new_axes("|log T|", "H", title)
    ax.plot(x, y, "o", label="computed H")
    ax.plot(x, p, "s--", label="predicted")
    if len(rows) >= 2:
        s, b = fit_line(x, y)
        xs = np.linspace(min(x), max(x), 50)
        ax.plot(xs, s * xs + b, "-", alpha=0.7, label=f"fit slope {s:.4f}")
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def render_entropy_density_figure(path, rows, title="entropy density routes"):
    x = [r["gamma"] for r in rows]
    fig, ax = _new_axes("gamma", "s_gamma", title)
    ax.plot(x, [r["direct"] for r in rows], "o-", label="momentum integral")
    ax.plot(x, [r["via_pressure"] for r in rows], "s--", label="pressure route")
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return Path(path)
