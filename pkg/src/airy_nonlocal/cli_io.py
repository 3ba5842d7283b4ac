"""Run configuration, orchestration of the solvers and result files.

Configuration files are JSON.  A minimal file::

    {"mode": "solve-invp",
     "problem": {"initial": {"polynomial": [0]}, "weight": {"polynomial": [1]},
                 "boundary0": {"polynomial": [0]}, "boundary1": {"polynomial": [0]},
                 "nonlocal": {"polynomial": [0]}},
     "grid": {"x": [0.25, 0.5], "t": [0.5]}}

``verify-manufactured`` replaces ``problem`` by a ``manufactured`` section,
``zeros`` reads an optional ``zeros`` section of regions.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contour_quadrature import QuadratureSpec, SECTORS
from .invp_solver import SolutionField, SolverConfig, ZeroGateError, solve_invp
from .longtime import eval_longtime
from .periodic_solver import CriterionError, check_criterion, eval_periodic
from .spectral_core import DataError, FunctionSpec, ProblemData, SingularDeltaError
from .verification import (
    BoundaryTooCloseError,
    CircleRegion,
    SectorRegion,
    StripRegion,
    count_delta_zeros,
    make_manufactured_invp,
    make_manufactured_periodic,
    manufactured_error,
)

MODES = ("solve-invp", "solve-periodic", "longtime", "verify-manufactured", "zeros", "criterion")
PERIODIC_MODES = ("solve-periodic", "longtime", "criterion")
CSV_HEADER = ("x", "t", "re_u", "im_u", "est_abs_error")
FUNCTION_FIELDS = ("initial", "weight", "boundary0", "boundary1", "nonlocal")
SOLVER_FIELDS = ("R", "t_prime_policy", "contour_variant", "tilt", "arc_exponent", "check_zeros")
QUAD_FIELDS = ("rel_tol", "abs_tol", "max_panels", "truncation_L", "pv_epsilon", "hard_cap_L")
DEFAULT_ZERO_OUTER = 50.0


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass
class RunConfig:
    mode: str
    problem: ProblemData | None
    solver: SolverConfig = field(default_factory=SolverConfig)
    n_max: int = 64
    x: tuple = ()
    t: tuple = ()
    out_csv: str | None = None
    out_json: str | None = None
    manufactured: dict | None = None
    zeros: tuple = ()
    correction: bool = True

    @property
    def points(self) -> list:
        return [(x, t) for t in self.t for x in self.x]


# ----------------------------------------------------------------------------
# Parsing
# ----------------------------------------------------------------------------

def parse_config(path, mode: str | None = None) -> RunConfig:
    """Read and validate a JSON run configuration."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config_text(text, str(p), mode)


def parse_config_text(text: str, source: str = "<config>", mode: str | None = None) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        line = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n"
                          f"    {line}\n    {' ' * (exc.colno - 1)}^") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return config_from_dict(raw, mode)


def _grid_axis(spec, name: str) -> tuple:
    if isinstance(spec, dict):
        try:
            vals = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["count"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"grid.{name} range needs numeric start, stop, count") from None
        return tuple(float(v) for v in vals)
    if isinstance(spec, (list, tuple)):
        try:
            return tuple(float(v) for v in spec)
        except (TypeError, ValueError):
            raise ConfigError(f"grid.{name} must contain numbers") from None
    raise ConfigError(f"grid.{name} must be a list or a {{start, stop, count}} range")


def _function(d, name: str, default_domain=(0.0, 1.0)) -> FunctionSpec:
    try:
        return FunctionSpec.from_dict(d, default_domain)
    except (DataError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"problem.{name}: {exc}") from None


def _problem(d: dict) -> ProblemData:
    if not isinstance(d, dict):
        raise ConfigError("problem must be an object")
    missing = [k for k in FUNCTION_FIELDS if k not in d]
    if missing:
        raise ConfigError(f"problem is missing {', '.join(missing)}")
    unknown = set(d) - set(FUNCTION_FIELDS) - {"period", "compatibility_tol"}
    if unknown:
        raise ConfigError(f"problem has unknown fields {sorted(unknown)}")
    tdom = (0.0, np.inf)
    f = {k: _function(d[k], k, (0.0, 1.0) if k in ("initial", "weight") else tdom)
         for k in FUNCTION_FIELDS}
    period = d.get("period")
    try:
        return ProblemData(f["initial"], f["weight"], f["boundary0"], f["boundary1"],
                           f["nonlocal"], None if period is None else float(period),
                           float(d.get("compatibility_tol", 1e-8)))
    except DataError as exc:
        raise ConfigError(f"problem: {exc}") from None


def _solver(d: dict) -> SolverConfig:
    unknown = set(d) - set(SOLVER_FIELDS) - set(QUAD_FIELDS)
    if unknown:
        raise ConfigError(f"solver has unknown fields {sorted(unknown)}")
    try:
        quad = QuadratureSpec(**{k: d[k] for k in QUAD_FIELDS if k in d})
        return SolverConfig(quad=quad, **{k: d[k] for k in SOLVER_FIELDS if k in d})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None


def _manufactured(d: dict) -> dict:
    if not isinstance(d, dict) or d.get("type") not in ("invp", "periodic"):
        raise ConfigError("manufactured.type must be 'invp' or 'periodic'")
    out = {"type": d["type"], "weight": d.get("weight", {"polynomial": [1.0]})}
    if d["type"] == "invp":
        modes = d.get("modes")
        if not modes:
            raise ConfigError("manufactured.modes must list {lam, amp_re, amp_im}")
        out["modes"] = [{"lam": m.get("lam", 1.0), "amp_re": float(m.get("amp_re", 1.0)),
                         "amp_im": float(m.get("amp_im", 0.0))} for m in modes]
    else:
        if "omega" not in d:
            raise ConfigError("period required: manufactured periodic case needs omega")
        idx = d.get("mode_indices")
        if not idx:
            raise ConfigError("manufactured.mode_indices must list [n, j] pairs")
        out["omega"] = float(d["omega"])
        out["mode_indices"] = [[int(n), int(j)] for n, j in idx]
    return out


def manufactured_case(spec: dict):
    K = _function(spec["weight"], "weight")
    try:
        if spec["type"] == "invp":
            modes = [(m["lam"] if not isinstance(m["lam"], list) else complex(*m["lam"]),
                      complex(m["amp_re"], m["amp_im"])) for m in spec["modes"]]
            return make_manufactured_invp(modes, K)
        return make_manufactured_periodic([tuple(p) for p in spec["mode_indices"]],
                                          spec["omega"], K)
    except (DataError, ValueError) as exc:
        raise ConfigError(f"manufactured: {exc}") from None


REGION_KINDS = {"sector": ("theta_a", "theta_b", "r_in", "r_out"),
                "strip": ("direction", "s_min", "s_max", "half_width"),
                "circle": ("center", "radius")}


def _region_spec(d: dict) -> dict:
    kind = d.get("type")
    if kind not in REGION_KINDS:
        raise ConfigError(f"zeros region type must be one of {sorted(REGION_KINDS)}")
    missing = [k for k in REGION_KINDS[kind] if k not in d]
    if missing:
        raise ConfigError(f"zeros {kind} region is missing {', '.join(missing)}")
    out = {"type": kind}
    for k in REGION_KINDS[kind]:
        v = d[k]
        out[k] = [float(v[0]), float(v[1])] if isinstance(v, list) else float(v)
    return out


def make_region(d: dict):
    c = lambda v: complex(*v) if isinstance(v, list) else complex(v)
    if d["type"] == "sector":
        return SectorRegion(d["theta_a"], d["theta_b"], d["r_in"], d["r_out"])
    if d["type"] == "strip":
        return StripRegion(c(d["direction"]), d["s_min"], d["s_max"], d["half_width"])
    return CircleRegion(c(d["center"]), d["radius"])


def default_regions(R: float) -> tuple:
    """Closed D sectors from ``R`` to the default outer radius, plus a strip along ``-i``."""
    out = [{"type": "sector", "theta_a": a, "theta_b": b, "r_in": R, "r_out": DEFAULT_ZERO_OUTER}
           for a, b in SECTORS["D_plus"] + SECTORS["D_minus"]]
    out.append({"type": "strip", "direction": [0.0, -1.0], "s_min": R,
                "s_max": DEFAULT_ZERO_OUTER, "half_width": 1.0})
    return tuple(out)


def config_from_dict(raw: dict, mode: str | None = None) -> RunConfig:
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    known = {"mode", "problem", "solver", "grid", "output", "n_max", "manufactured", "zeros",
             "correction"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level fields {sorted(unknown)}")
    solver = _solver(raw.get("solver", {}))
    manufactured = None
    problem = None
    if mode == "verify-manufactured":
        if "manufactured" not in raw:
            raise ConfigError("mode verify-manufactured needs a manufactured section")
        manufactured = _manufactured(raw["manufactured"])
    else:
        if "problem" not in raw:
            raise ConfigError(f"mode {mode} needs a problem section")
        problem = _problem(raw["problem"])
        if mode in PERIODIC_MODES and problem.period is None:
            raise ConfigError(f"period required for mode {mode}")
    grid = raw.get("grid", {})
    xs = _grid_axis(grid["x"], "x") if "x" in grid else ()
    ts = _grid_axis(grid["t"], "t") if "t" in grid else ()
    if mode not in ("zeros", "criterion"):
        if not xs or not ts:
            raise ConfigError("grid needs nonempty x and t")
    bad_x = [v for v in xs if not 0.0 <= v <= 1.0]
    if bad_x:
        raise ConfigError(f"grid.x value {bad_x[0]} outside the grid bounds [0, 1]")
    bad_t = [v for v in ts if not v >= 0.0]
    if bad_t:
        raise ConfigError(f"grid.t value {bad_t[0]} outside the grid bounds [0, inf)")
    out = raw.get("output", {})
    n_max = raw.get("n_max", 64)
    if not isinstance(n_max, int) or n_max < 1:
        raise ConfigError("n_max must be a positive integer")
    zeros = tuple(_region_spec(r) for r in raw.get("zeros", {}).get("regions", ()))
    return RunConfig(mode, problem, solver, n_max, xs, ts, out.get("csv"), out.get("json"),
                     manufactured, zeros, bool(raw.get("correction", True)))


# ----------------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------------

def config_to_dict(cfg: RunConfig) -> dict:
    d = {"mode": cfg.mode, "n_max": cfg.n_max, "correction": cfg.correction,
         "grid": {"x": list(cfg.x), "t": list(cfg.t)}}
    s = cfg.solver
    solver = {k: getattr(s, k) for k in SOLVER_FIELDS}
    solver.update({k: getattr(s.quad, k) for k in QUAD_FIELDS})
    d["solver"] = solver
    if cfg.problem is not None:
        p = cfg.problem
        d["problem"] = {"initial": p.initial.to_dict(), "weight": p.weight.to_dict(),
                        "boundary0": p.boundary0.to_dict(), "boundary1": p.boundary1.to_dict(),
                        "nonlocal": p.nonlocal_.to_dict(), "period": p.period,
                        "compatibility_tol": p.compatibility_tol}
    if cfg.manufactured is not None:
        d["manufactured"] = cfg.manufactured
    if cfg.zeros:
        d["zeros"] = {"regions": list(cfg.zeros)}
    out = {k: v for k, v in (("csv", cfg.out_csv), ("json", cfg.out_json)) if v is not None}
    if out:
        d["output"] = out
    return d


def serialize(cfg: RunConfig) -> str:
    """JSON text that :func:`parse_config_text` maps back to an equal config."""
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return str(obj)


def write_csv(path, field: SolutionField) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for (x, t), u, e in zip(field.points, field.values, field.est_abs_error):
            w.writerow([f"{x:.16e}", f"{t:.16e}", f"{u.real:.16e}", f"{u.imag:.16e}",
                        f"{e:.16e}"])


# ----------------------------------------------------------------------------
# Running
# ----------------------------------------------------------------------------

def _empty_field() -> SolutionField:
    return SolutionField([], np.zeros(0, complex), np.zeros(0), {})


def _zero_reports(K: FunctionSpec, regions) -> list:
    reps = []
    for r in regions:
        rep = count_delta_zeros(K, make_region(r))
        reps.append({"spec": r, **_jsonable(rep)})
    return reps


def execute(cfg: RunConfig) -> tuple[SolutionField, dict]:
    """Run the configured mode; returns the field and the report body."""
    s = cfg.solver
    report = {"mode": cfg.mode, "R": s.R, "truncation_L": s.quad.truncation_L,
              "n_max": cfg.n_max}
    field = _empty_field()
    if cfg.mode == "solve-invp":
        field = solve_invp(cfg.problem, s, cfg.points)
    elif cfg.mode == "solve-periodic":
        report["criterion_report"] = _criterion(cfg.problem, cfg.n_max)
        field = eval_periodic(cfg.problem, cfg.n_max, s.quad, cfg.points)
    elif cfg.mode == "longtime":
        report["criterion_report"] = _criterion(cfg.problem, cfg.n_max)
        field = eval_longtime(cfg.problem, cfg.n_max, s, cfg.points, cfg.correction)
        report["parts"] = field.diagnostics["parts"]
    elif cfg.mode == "verify-manufactured":
        case = manufactured_case(cfg.manufactured)
        if cfg.manufactured["type"] == "invp":
            field = solve_invp(case.data, s, cfg.points)
        else:
            report["criterion_report"] = _criterion(case.data, cfg.n_max)
            field = eval_periodic(case.data, cfg.n_max, s.quad, cfg.points)
        err = manufactured_error(case, cfg.points, field.values)
        report["max_abs_error"] = float(np.max(err))
        report["max_est_abs_error"] = float(np.max(field.est_abs_error))
    elif cfg.mode == "zeros":
        report["zero_counts"] = _zero_reports(cfg.problem.weight, cfg.zeros or default_regions(s.R))
    elif cfg.mode == "criterion":
        report["criterion_report"] = _criterion(cfg.problem, cfg.n_max)
    gate = field.diagnostics.get("zero_gate")
    if gate:
        report["zero_counts"] = _jsonable(gate)
    report["max_cancellation_flags"] = int(field.diagnostics.get("cancellation_count", 0))
    if len(field.points):
        report["max_est_abs_error"] = float(np.max(field.est_abs_error))
    return field, report


def _criterion(data: ProblemData, n_max: int) -> dict:
    rep = check_criterion(data.weight, 2 * np.pi / data.period, n_max)
    body = _jsonable(rep)
    if not rep.passed:
        raise CriterionError(f"periodic solubility criterion fails at n = {rep.failing_n}",
                             rep.failing_n, rep)
    return body


def run(cfg: RunConfig, stream=None) -> int:
    """Execute ``cfg`` and write its files; returns the exit status."""
    stream = stream or sys.stderr
    t0 = time.perf_counter()
    status = 0
    field = _empty_field()
    try:
        field, report = execute(cfg)
    except CriterionError as exc:
        status = 2
        report = {"mode": cfg.mode, "error": str(exc), "failing_n": list(exc.failing_n),
                  "criterion_report": _jsonable(exc.report)}
    except (ZeroGateError, BoundaryTooCloseError, SingularDeltaError) as exc:
        status = 2
        report = {"mode": cfg.mode, "error": str(exc)}
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        status = 1
        report = {"mode": cfg.mode, "error": f"{type(exc).__name__}: {exc}"}
    report["wall_time_seconds"] = time.perf_counter() - t0
    if status:
        print(f"airy-nonlocal {cfg.mode}: {report['error']}", file=stream)
    if cfg.out_csv:
        write_csv(cfg.out_csv, field)
    if cfg.out_json:
        Path(cfg.out_json).write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airy-nonlocal",
                                description="Airy equation with a nonlocal boundary condition")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--rtol", type=float, help="relative quadrature tolerance")
    p.add_argument("--radius", type=float, help="contour radius R")
    p.add_argument("--truncation", type=float, help="fixed truncation length L")
    p.add_argument("--nmax", type=int, help="number of time Fourier modes")
    p.add_argument("--out-csv", help="CSV output path")
    p.add_argument("--out-json", help="JSON report path")
    return p


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    quad = cfg.solver.quad
    if args.rtol is not None or args.truncation is not None:
        quad = dataclasses.replace(
            quad,
            rel_tol=quad.rel_tol if args.rtol is None else args.rtol,
            truncation_L=quad.truncation_L if args.truncation is None else args.truncation)
    solver = cfg.solver.replace(quad=quad, **({} if args.radius is None else {"R": args.radius}))
    return dataclasses.replace(
        cfg, solver=solver,
        n_max=cfg.n_max if args.nmax is None else args.nmax,
        out_csv=args.out_csv or cfg.out_csv, out_json=args.out_json or cfg.out_json)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(parse_config(args.config, args.mode), args)
    except (ConfigError, ValueError) as exc:
        print(f"airy-nonlocal: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
