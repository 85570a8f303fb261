import csv
import json
import subprocess
import sys

import pytest

from cellquant import cli
from cellquant.channel import discretize
from cellquant.constraints import SeparableConstraint
from cellquant.dp_solver import solve, sweep_beta
from cellquant.oracle import BruteForceResult

from conftest import random_grid

BIAWGN = {
    "channel": {
        "prior": {"p1": 0.5},
        "phi1": {"family": "gaussian", "mean": 1.0, "stddev": 1.0},
        "phi2": {"family": "gaussian", "mean": -1.0, "stddev": 1.0},
    },
    "discretization": {"y_min": -7.0, "y_max": 7.0, "m_atoms": 600},
    "solver": {"n_cells": 2, "beta": 1.0},
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_symmetric_solve(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["solve", _write(tmp_path, BIAWGN), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    rec = report["results"][0]
    assert len(rec["y_cuts"]) == 1 and abs(rec["y_cuts"][0]) < 14 / 600
    cfg = cli.parse_config(BIAWGN)
    grid = discretize(cfg.channel, cfg.y_min, cfg.y_max, cfg.m_atoms)
    dp = solve(grid, 2, 1.0, SeparableConstraint.zero())
    assert abs(rec["mi_xz"] - dp.mi_xz) < 1e-3
    assert report["lemma1_single_threshold"] is True
    assert report["schema"] == cli.SCHEMA
    assert "scalar_scan" in rec


def test_beta_sweep_rows(tmp_path):
    cfg = dict(BIAWGN, solver={"n_cells": 3, "beta_sweep": [0, 0.5, 1, 2, 4, 1e6]},
               constraint={"name": "entropy", "lambda": 0.5})
    out = tmp_path / "out"
    assert cli.main(["solve", _write(tmp_path, cfg), "--out", str(out), "--format", "table"]) == 0
    rows = _rows(out / "frontier.csv")
    assert len(rows) == 6
    mi = [float(r["mi_xz"]) for r in rows]
    assert all(b >= a for a, b in zip(mi, mi[1:]))
    assert not (out / "report.json").exists()


def test_invalid_prior(tmp_path, capsys):
    cfg = json.loads(json.dumps(BIAWGN))
    cfg["channel"]["prior"]["p1"] = 1.2
    assert cli.main(["solve", _write(tmp_path, cfg)]) == cli.EXIT_CONFIG
    assert "prior.p1" in capsys.readouterr().err


@pytest.mark.parametrize("patch,field", [
    (lambda c: c["channel"]["phi1"].update(stddev=-1), "channel.phi1.stddev"),
    (lambda c: c["solver"].update(n_cells=0), "solver.n_cells"),
    (lambda c: c["solver"].update(beta_sweep=[1, -2]), "solver.beta_sweep[1]"),
    (lambda c: c["discretization"].update(m_atoms=1.5), "discretization.m_atoms"),
    (lambda c: c.update(constraint={"terms": [{"name": "linear", "w": 1}]}), "constraint.terms"),
    (lambda c: c.update(flags={"bogus": True}), "flags.bogus"),
    (lambda c: c.update(outputs={"format": "xml"}), "outputs.format"),
])
def test_validation_names_field(patch, field):
    cfg = json.loads(json.dumps(BIAWGN))
    patch(cfg)
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config(cfg)
    assert exc.value.field == field


def test_missing_file(capsys):
    assert cli.main(["solve", "/nonexistent/cfg.json"]) == cli.EXIT_CONFIG


def test_determinism_and_round_trip(tmp_path):
    cfg = dict(BIAWGN, solver={"n_cells": 3, "beta_sweep": [0.5, 2.0]},
               constraint={"name": "entropy", "lambda": 0.2})
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    path = _write(tmp_path, cfg)
    assert cli.main(["solve", path, "--out", str(a)]) == 0
    assert cli.main(["solve", path, "--out", str(b)]) == 0
    assert (a / "frontier.csv").read_bytes() == (b / "frontier.csv").read_bytes()
    echoed = json.loads((a / "report.json").read_text())["config"]
    assert cli.main(["solve", _write(tmp_path, echoed, "echo.json"), "--out", str(c)]) == 0
    assert (a / "frontier.csv").read_bytes() == (c / "frontier.csv").read_bytes()


def test_oracle_command(tmp_path):
    cfg = dict(BIAWGN, discretization={"y_min": -3, "y_max": 3, "m_atoms": 8},
               solver={"n_cells": 3, "beta": 1.0}, constraint={"name": "entropy", "lambda": 0.3})
    out = tmp_path / "out"
    assert cli.main(["oracle", _write(tmp_path, cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["oracle"][0]["gap"] <= 1e-9


def test_oracle_refusal(tmp_path, capsys):
    assert cli.main(["oracle", _write(tmp_path, BIAWGN), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "oracle refused" in capsys.readouterr().err


def test_oracle_mismatch(tmp_path, monkeypatch):
    def fake(grid, n, beta, c):
        return BruteForceResult(quantizer=None, objective=10.0, mi_xz=1.0, constraint_value=0.0, labelings=1)

    monkeypatch.setattr(cli, "brute_force_solve", fake)
    cfg = dict(BIAWGN, discretization={"y_min": -3, "y_max": 3, "m_atoms": 6})
    assert cli.main(["oracle", _write(tmp_path, cfg), "--out", str(tmp_path)]) == cli.EXIT_ORACLE


def test_numeric_failure(tmp_path):
    cfg = {"channel": {"prior": {"p1": 0.5},
                       "phi1": {"family": "uniform", "low": 0, "high": 1},
                       "phi2": {"family": "uniform", "low": 0, "high": 1}},
           "discretization": {"y_min": 5, "y_max": 6, "m_atoms": 10}}
    assert cli.main(["solve", _write(tmp_path, cfg), "--out", str(tmp_path)]) == cli.EXIT_NUMERIC


def test_check_lemma1(tmp_path, capsys):
    cfg = json.loads(json.dumps(BIAWGN))
    cfg["channel"]["phi1"] = {"family": "gaussian", "mean": 0, "stddev": 1}
    cfg["channel"]["phi2"] = {"family": "gaussian", "mean": 0, "stddev": 2}
    assert cli.main(["check-lemma1", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["single_threshold"] is False
    assert (tmp_path / "lemma1.json").exists()


class TestFrontier:
    def test_single(self, rng):
        res = sweep_beta(random_grid(rng, 6), 2, SeparableConstraint.zero(), [1.0])
        assert len(cli.emit_frontier(res)) == 1

    def test_duplicates_kept_in_order(self, rng):
        grid = random_grid(rng, 6)
        c = SeparableConstraint.entropy(0.5)
        res = sweep_beta(grid, 2, c, [2.0, 1.0, 1.0])
        rows = cli.emit_frontier(res)
        assert [r[0] for r in rows] == ["1", "1", "2"]

    def test_constraint_column(self, rng):
        grid = random_grid(rng, 30)
        res = sweep_beta(grid, 3, SeparableConstraint.entropy(1.0), [4, 0, 1, 0.5, 1e6, 2])
        rows = cli.emit_frontier(res)
        assert len(rows) == 6
        cv = [float(r[2]) for r in rows]
        assert all(b >= a for a, b in zip(cv, cv[1:]))

    def test_empty(self):
        with pytest.raises(cli.DomainError):
            cli.emit_frontier([])


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "cellquant", "solve", _write(tmp_path, BIAWGN),
                          "--out", str(tmp_path), "--format", "table"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "frontier.csv").exists()
