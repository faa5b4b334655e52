"""Scenario plumbing, runners, persistence, resume, and the CLI."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from whlab import cli
from whlab.harness import (
    Scenario,
    resolve_dispersion,
    resolve_function,
    resolve_set,
    resolve_symbol,
    run_coefficient,
    run_entropy_density,
    run_oracle,
    run_trace_sweep,
)


class TestScenario:
    def test_roundtrip_and_hash_stability(self):
        scn = Scenario(name="x", temps=(0.1, 0.01), alphas=(5.0,))
        again = Scenario.from_dict(json.loads(scn.canonical_json()))
        assert again == scn
        assert again.digest() == scn.digest()

    def test_axis_validation(self):
        with pytest.raises(ValueError):
            Scenario(alphas=())
        with pytest.raises(ValueError):
            Scenario(pair_alpha_T=True, alphas=(1.0, 2.0), temps=(0.1,))

    def test_from_file(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps({"name": "t", "temps": [0.2]}))
        assert Scenario.from_file(p).temps == (0.2,)


class TestResolvers:
    def test_dispersions(self):
        assert resolve_dispersion("quadratic")(np.array([2.0]))[0] == 4.0
        quartic = resolve_dispersion("quartic_double_well")
        assert quartic(np.array([1.0]))[0] == pytest.approx(-1.0)
        poly = resolve_dispersion({"poly": [0.0, 0.0, 3.0]})
        assert poly(np.array([2.0]))[0] == pytest.approx(12.0)
        with pytest.raises(ValueError):
            resolve_dispersion("unknown")

    def test_symbols(self):
        a = resolve_symbol({"kind": "fermi", "h": "quadratic", "mu": 1.0, "T": 0.2})
        assert a(np.array([1.0]))[0] == pytest.approx(0.5)
        ind = resolve_symbol({"kind": "indicator", "intervals": [[-1, 1]]})
        assert ind(np.array([0.0]))[0] == 1.0
        g = resolve_symbol({"kind": "gaussian", "rate": 2.0})
        assert g(np.array([0.0]))[0] == 1.0
        c = resolve_symbol({"kind": "constant", "value": 0.3})
        assert c.is_constant

    def test_table_symbol(self, tmp_path):
        xs = np.linspace(-2, 2, 41)
        data = np.column_stack([xs, np.exp(-xs**2)])
        p = tmp_path / "tab.csv"
        np.savetxt(p, data, delimiter=",")
        a = resolve_symbol({"kind": "custom-table", "path": str(p)})
        assert a(np.array([0.5]))[0] == pytest.approx(math.exp(-0.25), abs=1e-4)
        assert a(np.array([3.0]))[0] == 0.0

    def test_sets_and_functions(self):
        iu = resolve_set({"intervals": [[0, 1], [2, 3]], "left": -4.0})
        assert iu.omega == 5
        f = resolve_function({"kind": "renyi", "gamma": 2.0})
        assert f(np.array([0.5]))[0] == pytest.approx(math.log(2))
        rz = resolve_function({"kind": "resolvent", "z": [0.0, 2.0]})
        assert rz.is_complex
        with pytest.raises(ValueError):
            resolve_function({"kind": "nope"})


SMALL_COEFF = Scenario(
    name="coeff",
    symbol={"kind": "fermi", "h": "quadratic", "mu": 1.0},
    function={"kind": "poly", "coeffs": [0.0, 0.0, 1.0]},
    temps=(0.2, 0.1),
    tol=1e-5,
)


class TestRunners:
    def test_coefficient_run_and_fit(self, tmp_path):
        rec = run_coefficient(SMALL_COEFF, outdir=tmp_path)
        assert len(rec.rows) == 2
        assert "slope_vs_logT" in rec.fits
        assert (tmp_path / f"coefficient_{SMALL_COEFF.digest()}.csv").exists()
        assert (tmp_path / f"coefficient_{SMALL_COEFF.digest()}.json").exists()
        assert (tmp_path / f"coefficient_{SMALL_COEFF.digest()}.png").exists()

    def test_resume_reuses_points(self, tmp_path):
        rec1 = run_coefficient(SMALL_COEFF, outdir=tmp_path)
        n_points = len(list((tmp_path / "points").glob("*.json")))
        rec2 = run_coefficient(SMALL_COEFF, outdir=tmp_path)
        assert n_points == len(list((tmp_path / "points").glob("*.json")))
        assert rec2.rows == rec1.rows
        assert rec2.wall_seconds < rec1.wall_seconds

    def test_csv_bytes_reproducible(self, tmp_path):
        rec1 = run_coefficient(SMALL_COEFF, outdir=tmp_path / "a")
        rec2 = run_coefficient(SMALL_COEFF, outdir=tmp_path / "b")
        f1 = tmp_path / "a" / f"coefficient_{SMALL_COEFF.digest()}.csv"
        f2 = tmp_path / "b" / f"coefficient_{SMALL_COEFF.digest()}.csv"
        assert f1.read_bytes() == f2.read_bytes()

    def test_constant_scenario_all_zero(self, tmp_path):
        scn = Scenario(
            name="const",
            symbol={"kind": "constant", "value": 0.5},
            function={"kind": "renyi", "gamma": 1.0},
            lambdas=(1.0, 2.0),
        )
        rec = run_coefficient(scn)
        assert all(r["value"] == 0.0 for r in rec.rows)

    def test_trace_sweep_multi_interval_defect(self, tmp_path):
        scn = Scenario(
            name="tr",
            symbol={"kind": "fermi", "h": "quadratic", "mu": 1.0, "T": 0.2},
            set={"intervals": [[0.0, 2.0], [5.0, 7.0]]},
            function={"kind": "resolvent", "z": [0.0, 2.0]},
            alphas=(4.0, 8.0),
            tol=1e-7,
        )
        rec = run_trace_sweep(scn, outdir=tmp_path)
        assert "decay_order" in rec.fits
        assert all("additivity_defect" in r for r in rec.rows)
        assert rec.rows[1]["abs_err"] < rec.rows[0]["abs_err"]

    def test_entropy_density_runner(self, tmp_path):
        scn = Scenario(name="ed", temps=(0.2,), gammas=(0.5, 2.0))
        rec = run_entropy_density(scn, outdir=tmp_path)
        assert all(r["relative_gap"] < 1e-6 for r in rec.rows)

    def test_oracle_runner(self, tmp_path):
        scn = Scenario(name="or", set={"intervals": [[0.0, 1.0]]},
                       temps=(1e-3, 1e-4), gammas=(1.0,))
        rec = run_oracle(scn, outdir=tmp_path)
        gaps = [r["gap"] for r in rec.rows]
        assert abs(gaps[0] - gaps[1]) < 0.05
        assert rec.diagnostics["u_checks"][0]["u_quadrature"] == pytest.approx(
            rec.diagnostics["u_checks"][0]["u_closed"], abs=1e-8
        )

    def test_parallel_jobs_match_serial(self, tmp_path):
        serial = run_coefficient(SMALL_COEFF)
        parallel = run_coefficient(SMALL_COEFF, jobs=2)
        for r1, r2 in zip(serial.rows, parallel.rows):
            assert r1["value"] == r2["value"]


class TestCLI:
    def test_entropy_density_command(self, tmp_path):
        cfg = tmp_path / "scn.json"
        cfg.write_text(json.dumps({
            "name": "ed", "temps": [0.2], "gammas": [2.0],
        }))
        rc = cli.main(["--config", str(cfg), "--out", str(tmp_path / "out"),
                       "entropy-density"])
        assert rc == 0
        assert list((tmp_path / "out").glob("entropy_density_*.csv"))

    def test_oracle_command_default_scenario(self, tmp_path):
        rc = cli.main(["--out", str(tmp_path), "oracle"])
        assert rc == 0

    def test_usage_error_on_unknown_suite(self):
        with pytest.raises(SystemExit):
            cli.main(["validate", "nonsense"])

    def test_module_entrypoint(self):
        out = subprocess.run(
            [sys.executable, "-m", "whlab.cli", "--help"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert "validate" in out.stdout
