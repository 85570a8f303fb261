"""Command-line front end.

Usage::

    cellquant solve CONFIG [--out DIR] [--format table|report|both]
    cellquant oracle CONFIG [--out DIR] [--format ...]
    cellquant check-lemma1 CONFIG [--out DIR]

CONFIG is a JSON file; see README.md for the schema.  Exit codes: 0 success,
2 configuration error, 3 numeric failure, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from cellquant import __version__
from cellquant.channel import (
    BinaryPrior,
    ChannelSpec,
    DensitySpec,
    default_range,
    discretize,
    gaussian,
    laplace,
    tabulated,
    uniform,
)
from cellquant.constraints import SeparableConstraint, entropy_bits, term_from_dict
from cellquant.dp_solver import BACKEND, SolveResult, sweep_beta
from cellquant.errors import CellquantError, ConfigError, DomainError, OracleSizeError
from cellquant.oracle import brute_force_solve
from cellquant.threshold import check_single_threshold, quantizer_y_cuts, scan_scalar_threshold

log = logging.getLogger("cellquant")

SCHEMA = "cellquant.report/1"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ORACLE = 0, 2, 3, 4
IDENTITY_TOL = 1e-9
ORACLE_TOL = 1e-9
FRONTIER_COLUMNS = ("beta", "mi_xz", "constraint_value", "distortion", "objective", "boundaries")


class NumericFailure(CellquantError):
    pass


class OracleMismatch(CellquantError):
    pass


@dataclass
class RunConfig:
    channel: ChannelSpec
    y_min: float
    y_max: float
    m_atoms: int
    n_cells: int
    betas: list[float]
    epsilon: float
    constraint: SeparableConstraint
    out_dir: str = "."
    fmt: str = "both"
    run_oracle: bool = False
    permute_constraints: bool = False
    check_lemma1: bool = True
    probe_points: int = 1001
    raw: dict = field(default_factory=dict)


def _number(v: Any, name: str, *, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(name, f"expected a finite number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(name, f"must be > 0, got {v!r}")
    return int(v) if integer else float(v)


def _num(d: dict, key: str, where: str, default: Any = None, **kw):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}", "required field is missing")
        return default
    return _number(d[key], f"{where}.{key}", **kw)


def _section(cfg: dict, key: str, required=False) -> dict:
    v = cfg.get(key, None)
    if v is None:
        if required:
            raise ConfigError(key, "required section is missing")
        return {}
    if not isinstance(v, dict):
        raise ConfigError(key, "must be an object")
    return v


def _density(d: Any, where: str) -> DensitySpec:
    if not isinstance(d, dict):
        raise ConfigError(where, "must be an object")
    fam = d.get("family")
    try:
        if fam == "gaussian":
            return gaussian(_num(d, "mean", where), _num(d, "stddev", where, positive=True))
        if fam == "laplace":
            return laplace(_num(d, "location", where), _num(d, "scale", where, positive=True))
        if fam == "uniform":
            low, high = _num(d, "low", where), _num(d, "high", where)
            if not low < high:
                raise ConfigError(f"{where}.high", "must exceed low")
            return uniform(low, high)
        if fam == "tabulated":
            if "knots" not in d:
                raise ConfigError(f"{where}.knots", "required field is missing")
            return tabulated(d["knots"])
    except DomainError as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.family", f"unknown density family {fam!r}")


def _constraint(d: dict) -> SeparableConstraint:
    if not d:
        return SeparableConstraint.zero()
    if "terms" in d:
        terms = d["terms"]
        if not isinstance(terms, list) or not terms:
            raise ConfigError("constraint.terms", "must be a nonempty list")
        return SeparableConstraint.of(
            [term_from_dict(t, f"constraint.terms[{i}]") for i, t in enumerate(terms)])
    if "shared" in d:
        return SeparableConstraint((term_from_dict(d["shared"], "constraint.shared"),), shared=True)
    return SeparableConstraint((term_from_dict(d, "constraint"),), shared=True)


def parse_config(cfg: dict) -> RunConfig:
    """Validate a config object; errors name the offending field."""
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    ch = _section(cfg, "channel", required=True)
    prior_d = _section(ch, "prior", required=True)
    p1 = _num(prior_d, "p1", "channel.prior")
    if not 0.0 < p1 < 1.0:
        raise ConfigError("channel.prior.p1", f"must lie in (0, 1), got {p1!r}")
    p2 = _num(prior_d, "p2", "channel.prior", default=1.0 - p1)
    try:
        prior = BinaryPrior(p1, p2)
    except DomainError as exc:
        raise ConfigError("channel.prior.p2", str(exc)) from None
    if "phi1" not in ch or "phi2" not in ch:
        raise ConfigError("channel.phi1" if "phi1" not in ch else "channel.phi2", "required field is missing")
    channel = ChannelSpec(prior, _density(ch["phi1"], "channel.phi1"), _density(ch["phi2"], "channel.phi2"))
    try:
        lo, hi = default_range(channel)
    except DomainError as exc:
        raise ConfigError("channel", str(exc)) from None

    disc = _section(cfg, "discretization")
    y_min = _num(disc, "y_min", "discretization", default=lo)
    y_max = _num(disc, "y_max", "discretization", default=hi)
    if not y_min < y_max:
        raise ConfigError("discretization.y_max", "must exceed y_min")
    m_atoms = _num(disc, "m_atoms", "discretization", default=1000, integer=True)
    if m_atoms < 2:
        raise ConfigError("discretization.m_atoms", "must be >= 2")

    sol = _section(cfg, "solver")
    n_cells = _num(sol, "n_cells", "solver", default=2, integer=True)
    if n_cells < 1:
        raise ConfigError("solver.n_cells", "must be >= 1")
    if "beta_sweep" in sol:
        sweep = sol["beta_sweep"]
        if not isinstance(sweep, list) or not sweep:
            raise ConfigError("solver.beta_sweep", "must be a nonempty list")
        betas = [_number(b, f"solver.beta_sweep[{i}]") for i, b in enumerate(sweep)]
        for i, b in enumerate(betas):
            if b < 0:
                raise ConfigError(f"solver.beta_sweep[{i}]", "must be >= 0")
    else:
        betas = [_num(sol, "beta", "solver", default=1.0)]
        if betas[0] < 0:
            raise ConfigError("solver.beta", "must be >= 0")
    epsilon = _num(sol, "epsilon", "solver", default=1e-4)
    if not 0.0 < epsilon < 0.5:
        raise ConfigError("solver.epsilon", "must lie in (0, 0.5)")

    constraint = _constraint(_section(cfg, "constraint"))
    constraint.terms_for(n_cells)

    outs = _section(cfg, "outputs")
    fmt = outs.get("format", "both")
    if fmt not in ("table", "report", "both"):
        raise ConfigError("outputs.format", f"must be table, report or both, got {fmt!r}")
    out_dir = outs.get("dir", ".")
    if not isinstance(out_dir, str):
        raise ConfigError("outputs.dir", "must be a string")

    flags = _section(cfg, "flags")
    for key in flags:
        if key not in ("run_oracle", "permute_constraints", "check_lemma1", "probe_points"):
            raise ConfigError(f"flags.{key}", "unknown flag")
    for key in ("run_oracle", "permute_constraints", "check_lemma1"):
        if key in flags and not isinstance(flags[key], bool):
            raise ConfigError(f"flags.{key}", "must be true or false")
    permute = flags.get("permute_constraints", False)
    if permute and n_cells > 4:
        raise ConfigError("flags.permute_constraints", "only supported for n_cells <= 4")
    probe_points = _num(flags, "probe_points", "flags", default=1001, integer=True)
    if probe_points < 3:
        raise ConfigError("flags.probe_points", "must be >= 3")

    raw = {
        "channel": {
            "prior": {"p1": prior.p1, "p2": prior.p2},
            "phi1": channel.phi1.to_dict(),
            "phi2": channel.phi2.to_dict(),
        },
        "discretization": {"y_min": y_min, "y_max": y_max, "m_atoms": m_atoms},
        "solver": {"n_cells": n_cells, "beta_sweep": betas, "epsilon": epsilon},
        "constraint": constraint.to_dict(),
        "outputs": {"dir": out_dir, "format": fmt},
        "flags": {
            "run_oracle": flags.get("run_oracle", False),
            "permute_constraints": permute,
            "check_lemma1": flags.get("check_lemma1", True),
            "probe_points": probe_points,
        },
    }
    return RunConfig(
        channel=channel, y_min=y_min, y_max=y_max, m_atoms=m_atoms, n_cells=n_cells,
        betas=betas, epsilon=epsilon, constraint=constraint, out_dir=out_dir, fmt=fmt,
        run_oracle=raw["flags"]["run_oracle"], permute_constraints=permute,
        check_lemma1=raw["flags"]["check_lemma1"], probe_points=probe_points, raw=raw,
    )


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("<config>", f"no such file: {p}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON: {exc}") from None
    return parse_config(cfg)


def fmt_num(x: float) -> str:
    return f"{x:.12g}"


def _round(x: float) -> float:
    return float(fmt_num(x))


def emit_frontier(results: Sequence[SolveResult]) -> list[list[str]]:
    """Frontier table rows (no header), stably sorted by beta."""
    if not results:
        raise DomainError("no results to tabulate")
    rows = []
    for res in sorted(results, key=lambda r: r.beta):
        rows.append([
            fmt_num(res.beta), fmt_num(res.mi_xz), fmt_num(res.constraint_value),
            fmt_num(res.distortion), fmt_num(res.objective),
            " ".join(str(b) for b in res.boundaries),
        ])
    return rows


def frontier_csv(results: Sequence[SolveResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FRONTIER_COLUMNS)
    w.writerows(emit_frontier(results))
    return buf.getvalue()


def _check_record(res: SolveResult) -> None:
    vals = [res.mi_xz, res.constraint_value, res.distortion, res.objective]
    if not all(math.isfinite(v) for v in vals):
        raise NumericFailure(f"non-finite value in result for beta={res.beta}")
    if abs(res.objective - (res.beta * res.mi_xz - res.constraint_value)) > IDENTITY_TOL:
        raise NumericFailure(f"objective identity violated for beta={res.beta}")
    resid = abs(res.mi_xz - (res.mi_xy - res.distortion))
    if resid > IDENTITY_TOL:
        raise NumericFailure(f"distortion identity residual {resid:.3g} for beta={res.beta}")


def _record(grid, res: SolveResult, cfg: RunConfig) -> dict:
    masses = res.cell_masses
    rec = {
        "beta": _round(res.beta),
        "mi_xz": _round(res.mi_xz),
        "constraint_value": _round(res.constraint_value),
        "distortion": _round(res.distortion),
        "objective": _round(res.objective),
        "entropy_z": _round(entropy_bits(masses)),
        "boundaries": list(res.boundaries),
        "r_thresholds": [_round(h) for h in res.quantizer.r_thresholds],
        "y_cuts": [_round(y) for y in quantizer_y_cuts(grid, res.quantizer)],
        "cell_masses": [_round(w) for w in masses],
        "cell_centroids": [None if math.isnan(c.centroid) else _round(c.centroid) for c in res.per_cell],
        "cell_terms": list(res.cell_terms),
        "empty_cells": res.empty_cells,
    }
    if cfg.n_cells == 2:
        st, sres = scan_scalar_threshold(grid, res.beta, cfg.constraint, cfg.epsilon)
        rec["scalar_scan"] = {
            "epsilon": cfg.epsilon,
            "a_star": _round(st.a_star),
            "objective": _round(sres.objective),
            "y_cuts": [_round(y) for y in st.y_cuts],
        }
    return rec


def run(cfg: RunConfig, out_dir: str | None = None, fmt: str | None = None,
        force_oracle: bool = False) -> dict:
    """Solve, verify and write outputs; returns the report object.

    Raises :class:`NumericFailure`, :class:`OracleMismatch` or
    :class:`OracleSizeError` for the corresponding failure modes.
    """
    out = Path(out_dir or cfg.out_dir)
    fmt = fmt or cfg.fmt
    try:
        grid = discretize(cfg.channel, cfg.y_min, cfg.y_max, cfg.m_atoms)
    except DomainError as exc:
        raise ConfigError("discretization", str(exc)) from None
    results = sweep_beta(grid, cfg.n_cells, cfg.constraint, cfg.betas,
                         permute_constraints=cfg.permute_constraints)
    for res in results:
        _check_record(res)

    oracle = None
    if cfg.run_oracle or force_oracle:
        oracle = []
        for res in results:
            bf = brute_force_solve(grid, cfg.n_cells, res.beta, cfg.constraint)
            gap = bf.objective - res.objective
            oracle.append({"beta": _round(res.beta), "oracle_objective": _round(bf.objective),
                           "dp_objective": _round(res.objective), "gap": float(f"{gap:.3g}"),
                           "labelings": bf.labelings})
            if gap > ORACLE_TOL:
                _write(out, fmt, results, _report(cfg, grid, results, oracle, None))
                raise OracleMismatch(f"oracle beats DP by {gap:.3g} at beta={res.beta}")

    lemma = None
    if cfg.check_lemma1:
        lemma = check_single_threshold(cfg.channel, cfg.probe_points, (cfg.y_min, cfg.y_max))
    report = _report(cfg, grid, results, oracle, lemma)
    _write(out, fmt, results, report)
    return report


def _report(cfg, grid, results, oracle, lemma) -> dict:
    return {
        "schema": SCHEMA,
        "header": {
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__,
            "backend": BACKEND,
        },
        "config": cfg.raw,
        "grid": {"m_atoms": grid.size, "mi_xy": _round(grid.mutual_information())},
        "results": [_record(grid, r, cfg) for r in results],
        "lemma1_single_threshold": lemma,
        "oracle": oracle,
    }


def _write(out: Path, fmt: str, results, report) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if fmt in ("table", "both"):
        (out / "frontier.csv").write_text(frontier_csv(results))
    if fmt in ("report", "both"):
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cellquant", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "solve the configured instance"),
                        ("oracle", "solve and compare against exhaustive search"),
                        ("check-lemma1", "test whether a single y threshold suffices")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("table", "report", "both"), default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "check-lemma1":
            verdict = check_single_threshold(cfg.channel, cfg.probe_points, (cfg.y_min, cfg.y_max))
            payload = {"schema": SCHEMA, "single_threshold": verdict,
                       "probe_points": cfg.probe_points, "y_range": [cfg.y_min, cfg.y_max]}
            text = json.dumps(payload, indent=2) + "\n"
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                (Path(args.out) / "lemma1.json").write_text(text)
            sys.stdout.write(text)
            return EXIT_OK
        report = run(cfg, args.out, args.format, force_oracle=args.command == "oracle")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleSizeError as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (NumericFailure, CellquantError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    n = len(report["results"])
    print(f"solved {n} instance(s) on {report['grid']['m_atoms']} atoms "
          f"(I(X;Y) = {report['grid']['mi_xy']} bits)")
    return EXIT_OK

