"""Command-line front end: declarative JSON configs in, CSV/JSON results out.

Subcommands:
  run <config>          solve one problem or run the inequality battery
  sweep <config>        one run per parameter value, resumable by digest
  oracle <config>       dense/quadrature reference outputs for the same config
  schema-check <dir>    validate previously written outputs

Exit codes: 0 success, 2 config/validation error, 3 solver non-convergence
(downgraded to a warning when the solver section sets allow_nonconverged).
Thread count for sweeps comes from NLORLICZ_WORKERS (default 1); results are
byte-identical regardless of worker count.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .energy import assemble
from .errors import NlorliczError, ValidationError
from .grid import GridFunction, bump, make_grid, random_function, to_csv
from .harness import CorpusSpec, battery_csv, config_digest, run_battery
from .kernels import make_kernel, poincare_constant
from .oracles import (
    dense_dirichlet_solve,
    dense_min_eigenvalue,
    node_mass_consistency,
)
from .solvers import (
    mountain_pass_search,
    pohozaev_check,
    power_reaction,
    solve_dirichlet,
    solve_eigen,
    solve_sublinear,
)
from .young import make_young

SPEC_VERSION = 1

_TOP_KEYS = {"spec_version", "kernel", "young", "grid", "problem", "solver",
             "seed", "output_dir"}
_KERNEL_KEYS = {"family", "alpha", "alpha_inner", "alpha_outer", "beta", "mu"}
_YOUNG_KEYS = {"family", "p", "q", "r", "c", "terms"}
_GRID_KEYS = {"shape", "n_per_axis", "bounds"}
_PROBLEM_KEYS = {"type", "data", "reaction_m", "trials", "parameter", "values",
                 "inner", "r"}
_SOLVER_KEYS = {"tol", "max_iter", "path_points", "allow_nonconverged",
                "pair_budget"}
_PROBLEM_TYPES = {"dirichlet", "sublinear", "superlinear", "eigen", "battery",
                  "sweep"}


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    _check_keys(cfg, _TOP_KEYS, "config")
    for key in ("kernel", "young", "grid", "problem"):
        if key not in cfg:
            raise ValidationError(f"config is missing the {key!r} section")
    if cfg.get("spec_version", SPEC_VERSION) != SPEC_VERSION:
        raise ValidationError(f"unsupported spec_version {cfg['spec_version']}")
    _check_keys(cfg["kernel"], _KERNEL_KEYS, "kernel")
    _check_keys(cfg["young"], _YOUNG_KEYS, "young")
    _check_keys(cfg["grid"], _GRID_KEYS, "grid")
    _check_keys(cfg["problem"], _PROBLEM_KEYS, "problem")
    _check_keys(cfg.get("solver", {}), _SOLVER_KEYS, "solver")
    ptype = cfg["problem"].get("type")
    if ptype not in _PROBLEM_TYPES:
        raise ValidationError(f"unknown problem type {ptype!r}")
    if ptype in ("sublinear", "superlinear") and "reaction_m" not in cfg["problem"]:
        raise ValidationError(f"{ptype} needs a 'reaction_m' exponent")
    if ptype == "sweep":
        if not cfg["problem"].get("values"):
            raise ValidationError("sweep needs a non-empty 'values' list")
        inner = cfg["problem"].get("inner")
        if not inner or inner.get("type") not in (_PROBLEM_TYPES - {"sweep", "battery"}):
            raise ValidationError("sweep needs an 'inner' problem section")
        _check_keys(inner, _PROBLEM_KEYS, "problem.inner")
        parameter = cfg["problem"].get("parameter", "reaction_m")
        if parameter == "reaction_m":
            if inner["type"] not in ("sublinear", "superlinear"):
                raise ValidationError(
                    "reaction_m sweeps need a sublinear or superlinear inner problem")
        elif parameter == "kernel_alpha":
            if cfg["kernel"].get("family") != "fractional":
                raise ValidationError("kernel_alpha sweeps need a fractional kernel")
            if inner["type"] in ("sublinear", "superlinear") and "reaction_m" not in inner:
                raise ValidationError(f"{inner['type']} needs a 'reaction_m' exponent")
        else:
            raise ValidationError(f"unknown sweep parameter {parameter!r}")
    return cfg


def _build(cfg: dict):
    kspec = dict(cfg["kernel"])
    yspec = dict(cfg["young"])
    gspec = dict(cfg["grid"])
    grid_dim = 1 if gspec["shape"] == "interval" else 2
    kern = make_kernel(kspec.pop("family"), dim=grid_dim, **kspec)
    yfam = yspec.pop("family")
    if yfam == "power_sum":
        yspec["terms"] = [tuple(t) for t in yspec["terms"]]
    yng = make_young(yfam, **yspec)
    bounds = tuple(gspec["bounds"]) if "bounds" in gspec else None
    g = make_grid(gspec["shape"], int(gspec["n_per_axis"]), bounds)
    budget = int(cfg.get("solver", {}).get("pair_budget", 10**8))
    return assemble(g, kern, yng, pair_budget=budget)


def _problem_data(cfg: dict, asm) -> GridFunction:
    data = cfg["problem"].get("data", {"kind": "bump"})
    kind = data.get("kind", "bump")
    if kind == "bump":
        return bump(asm.grid, asm.grid.center,
                    data.get("radius", 0.5) * asm.grid.inradius,
                    data.get("height", 1.0))
    if kind == "random":
        return random_function(asm.grid, int(cfg.get("seed", 0)),
                               data.get("amplitude", 1.0))
    if kind == "constant":
        return GridFunction(asm.grid,
                            np.full(asm.grid.n_nodes, float(data.get("value", 1.0))))
    raise ValidationError(f"unknown data kind {kind!r}")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _report_json(cfg, asm, rep, extra=None) -> str:
    doc = rep.to_dict()
    doc["config_digest"] = config_digest(asm, int(cfg.get("seed", 0)))
    doc["package_version"] = __version__
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, default=repr) + "\n"


def _run_problem(cfg: dict, asm, ptype: str, problem: dict):
    solver = cfg.get("solver", {})
    tol = float(solver.get("tol", 1e-6 if ptype == "superlinear" else 1e-8))
    max_iter = int(solver.get("max_iter", 20000))
    if ptype == "dirichlet":
        return solve_dirichlet(asm, _problem_data(cfg, asm), tol=tol, max_iter=max_iter)
    if ptype == "sublinear":
        return solve_sublinear(asm, power_reaction(float(problem["reaction_m"])),
                               tol=max(tol, 1e-8), max_iter=max_iter)
    if ptype == "superlinear":
        return mountain_pass_search(
            asm, power_reaction(float(problem["reaction_m"])),
            path_points=int(solver.get("path_points", 33)),
            tol=tol, max_iter=min(max_iter, 3000))
    if ptype == "eigen":
        return solve_eigen(asm, tol=tol, max_iter=max_iter)
    raise ValidationError(f"unhandled problem type {ptype!r}")


def cmd_run(config_path: str) -> int:
    cfg = load_config(config_path)
    asm = _build(cfg)
    out = Path(cfg.get("output_dir", "."))
    ptype = cfg["problem"]["type"]
    seed = int(cfg.get("seed", 0))

    if ptype == "battery":
        spec = CorpusSpec(seed=seed, trials=int(cfg["problem"].get("trials", 100)))
        results = run_battery(asm, spec)
        _write(out / "battery.csv", battery_csv(results))
        doc = {
            "spec_version": SPEC_VERSION,
            "package_version": __version__,
            "config_digest": config_digest(asm, seed),
            "results": [vars(r) | {"passed": r.passed, "extras": None} for r in results],
        }
        _write(out / "battery.json", json.dumps(doc, indent=2, sort_keys=True,
                                                default=repr) + "\n")
        failed = [r.name for r in results if not r.passed]
        if failed:
            print(f"error: battery failures in {failed}", file=sys.stderr)
            return 3
        return 0

    if ptype == "sweep":
        return _fail(2, "sweep configs go through the 'sweep' subcommand")

    rep = _run_problem(cfg, asm, ptype, cfg["problem"])
    extra = {"problem_type": ptype,
             "poincare_constant": poincare_constant(asm.kernel, asm.grid)}
    if ptype in ("sublinear", "superlinear"):
        check = pohozaev_check(asm, power_reaction(float(cfg["problem"]["reaction_m"])),
                               rep.solution)
        extra["pohozaev_ratio"] = check.ratio if check.applicable else None
        extra["pohozaev_note"] = check.note
    _write(out / "solution.csv", to_csv(rep.solution))
    _write(out / "report.json", _report_json(cfg, asm, rep, extra))
    if not rep.converged and not cfg.get("solver", {}).get("allow_nonconverged"):
        print(f"error: solver did not converge (residual {rep.residual_inf:.3e})",
              file=sys.stderr)
        return 3
    return 0


def _sweep_point(args):
    """Worker for one sweep point (top level so process pools can pickle it)."""
    cfg, parameter, value, index, out_dir = args
    point_cfg = json.loads(json.dumps(cfg))
    problem = dict(point_cfg["problem"]["inner"])
    if parameter == "reaction_m":
        problem["reaction_m"] = value
    elif parameter == "kernel_alpha":
        point_cfg["kernel"]["alpha"] = value
    else:
        raise ValidationError(f"unknown sweep parameter {parameter!r}")
    point_cfg["problem"] = problem
    asm = _build(point_cfg)
    digest = hashlib.sha256(
        json.dumps([parameter, value, config_digest(asm, int(cfg.get("seed", 0)))],
                   sort_keys=True).encode()
    ).hexdigest()[:12]
    point_path = Path(out_dir) / f"point_{digest}.json"
    if point_path.exists():
        row = json.loads(point_path.read_text())
        row["recomputed"] = False
        return index, row

    row = {"spec_version": SPEC_VERSION, "parameter": parameter, "value": value,
           "index": index, "digest": digest, "recomputed": True}
    try:
        rep = _run_problem(point_cfg, asm, problem["type"], problem)
        row.update(
            objective=rep.objective,
            residual_inf=rep.residual_inf,
            converged=rep.converged,
            energy_E=rep.energy_E,
            integral_F=rep.integral_F,
        )
        if problem["type"] == "eigen":
            row["lambda1"] = rep.extras["lambda1"]
        if problem["type"] in ("sublinear", "superlinear") and "reaction_m" in problem:
            check = pohozaev_check(asm, power_reaction(float(problem["reaction_m"])),
                                   rep.solution)
            row["pohozaev_ratio"] = check.ratio if check.applicable else None
            row["pohozaev_note"] = check.note
    except NlorliczError as exc:
        row.update(error=f"{type(exc).__name__}: {exc}", converged=False)
    _write(point_path, json.dumps({k: v for k, v in row.items() if k != "recomputed"},
                                  indent=2, sort_keys=True, default=repr) + "\n")
    return index, row


def cmd_sweep(config_path: str) -> int:
    cfg = load_config(config_path)
    if cfg["problem"]["type"] != "sweep":
        return _fail(2, "sweep subcommand needs a problem of type 'sweep'")
    out = Path(cfg.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    parameter = cfg["problem"].get("parameter", "reaction_m")
    values = cfg["problem"]["values"]
    workers = int(os.environ.get("NLORLICZ_WORKERS", "1"))
    jobs = [(cfg, parameter, v, i, str(out)) for i, v in enumerate(values)]
    rows = {}
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for index, row in pool.map(_sweep_point, jobs):
                rows[index] = row
    else:
        for job in jobs:
            index, row = _sweep_point(job)
            rows[index] = row

    cols = ["index", "parameter", "value", "converged", "objective",
            "residual_inf", "energy_E", "integral_F", "lambda1",
            "pohozaev_ratio", "error"]
    lines = [",".join(cols)]
    for i in sorted(rows):
        row = rows[i]
        lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
    _write(out / "sweep.csv", "\n".join(lines) + "\n")
    bad = [r for r in rows.values() if r.get("error")]
    if bad:
        print(f"error: {len(bad)} sweep points failed (recorded in-row)",
              file=sys.stderr)
    return 0


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_oracle(config_path: str) -> int:
    cfg = load_config(config_path)
    asm = _build(cfg)
    out = Path(cfg.get("output_dir", "."))
    doc = {"spec_version": SPEC_VERSION, "package_version": __version__,
           "config_digest": config_digest(asm, int(cfg.get("seed", 0)))}
    total, reference = node_mass_consistency(asm, asm.grid.n_nodes // 2)
    doc["node_mass_total"] = total
    doc["node_mass_reference"] = reference
    if asm.young.family == "power" and abs(asm.young.p - 2.0) < 1e-12:
        lam, vec = dense_min_eigenvalue(asm)
        doc["lambda1_dense"] = lam
        _write(out / "oracle_eigenfunction.csv", to_csv(vec))
        if cfg["problem"]["type"] == "dirichlet":
            u = dense_dirichlet_solve(asm, _problem_data(cfg, asm))
            _write(out / "oracle_solution.csv", to_csv(u))
    else:
        doc["note"] = "dense oracles are available for the quadratic case only"
    _write(out / "oracle.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


_CSV_HEADERS = {
    "battery.csv": "property,trials,failures,worst_margin,config_digest",
    "sweep.csv": "index,parameter,value,converged,objective,residual_inf,"
                 "energy_E,integral_F,lambda1,pohozaev_ratio,error",
}


def cmd_schema_check(directory: str) -> int:
    root = Path(directory)
    if not root.is_dir():
        return _fail(2, f"not a directory: {directory}")
    problems = []
    for path in sorted(root.rglob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            problems.append(f"{path}: invalid JSON ({exc})")
            continue
        if doc.get("spec_version") != SPEC_VERSION:
            problems.append(f"{path}: missing or wrong spec_version")
    for path in sorted(root.rglob("*.csv")):
        head = path.read_text().splitlines()[0] if path.read_text() else ""
        expected = _CSV_HEADERS.get(path.name)
        if expected and head != expected:
            problems.append(f"{path}: unexpected header {head!r}")
        if path.name.startswith("solution") or path.name.startswith("oracle_"):
            if head not in ("x,value", "x,y,value"):
                problems.append(f"{path}: unexpected header {head!r}")
    for msg in problems:
        print(f"error: {msg}", file=sys.stderr)
    return 2 if problems else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlorlicz",
        description="Nonlocal Orlicz-growth energies: solvers and inequality battery",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "oracle"):
        sp = sub.add_parser(name)
        sp.add_argument("config")
    sp = sub.add_parser("schema-check")
    sp.add_argument("directory")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "sweep":
            return cmd_sweep(args.config)
        if args.command == "oracle":
            return cmd_oracle(args.config)
        return cmd_schema_check(args.directory)
    except ValidationError as exc:
        return _fail(2, str(exc))
    except NlorliczError as exc:
        return _fail(3, str(exc))


if __name__ == "__main__":
    sys.exit(main())
