"""Command-line front door.

    infodesign <command> --input spec.json --output result.json [options]

Commands: cav, set, solve, bellman, ri, voters, screen, profile.  The result
JSON is always written; ``cav``, ``set``, ``bellman`` and ``profile`` also
write a CSV next to it (same stem, ``.csv``) unless ``--format json``.
Exit codes: 0 success, 2 infeasible problem, 3 schema error, 4 numerical
failure.  Nothing is written unless the command succeeds.
"""

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as schemas
from .concavify import DEFAULT_RESOLUTION, concavify, concavify_grid, simplex_grid
from .core import value_function_from_dict
from .dynamic import Cost, DynamicSpec, ri_solve, value_iterate
from .exceptions import InfeasiblePrior, InfeasibleProblem, InfoDesignError, NotInSet, SchemaError
from .posset import approximate_set
from .solver import ProblemSpec, resolve_method, solve, value_profile
from .apps.screening import ScreenSpec, screening_solve
from .apps.voters import VoterSpec, voters_solve

COMMANDS = ("cav", "set", "solve", "bellman", "ri", "voters", "screen", "profile")
TABULAR = {"cav", "set", "bellman", "profile"}

EXIT_OK, EXIT_INFEASIBLE, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path
    output: Path
    grid_d: int = None
    directions: int = None
    tol: float = None
    seed: int = 0
    format: str = "both"


def _resolution(cfg, data):
    if cfg.grid_d is not None:
        return cfg.grid_d
    return data.get("resolution") or DEFAULT_RESOLUTION


def _directions(cfg, data):
    return cfg.directions if cfg.directions is not None else data.get("directions")


def _table_csv(points, values, extra=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    k = np.shape(points)[1]
    writer.writerow([f"mu{i}" for i in range(k)] + ["value"] + ([extra[0]] if extra else []))
    for i, (p, v) in enumerate(zip(points, values)):
        row = [repr(float(x)) for x in p] + ["" if v is None else repr(float(v))]
        if extra:
            row.append(extra[1][i] or "")
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def _cav(cfg, data):
    vf = value_function_from_dict(data["value_function"])
    d = _resolution(cfg, data)
    res = concavify(vf, data["mu"], d)
    n = len(data["mu"])
    out = {
        "value": res.value,
        "no_info_value": float(vf(np.asarray(data["mu"], float))),
        "structure": res.structure.to_dict(),
        "grid_resolution": res.grid_resolution,
        "lp_status": res.lp_status,
    }
    return out, _table_csv(simplex_grid(n, d).points, concavify_grid(vf, n, d))


def _set(cfg, data):
    vfuncs = [value_function_from_dict(v) for v in data["vfuncs"]]
    approx = approximate_set(data["mu"], vfuncs, _directions(cfg, data), _resolution(cfg, data))
    return approx.to_dict(), approx.to_csv()


def _problem(data, mu):
    return ProblemSpec.from_dict({
        "mu": mu, "vfuncs": data["vfuncs"], "objective": data["objective"], "constraint": data["constraint"],
    })


def _solve(cfg, data):
    spec = _problem(data, data["mu"])
    method = resolve_method(spec, data["method"])
    kwargs = {"resolution": _resolution(cfg, data)}
    if method == "smooth":
        if cfg.tol is not None:
            kwargs["tol"] = cfg.tol
    else:
        kwargs["directions"] = _directions(cfg, data)
    sol = solve(spec, method, **kwargs)
    out = sol.to_dict()
    out["diagnostics"]["method"] = method
    return out, None


def _profile(cfg, data):
    if data["priors"] is not None:
        priors = np.asarray(data["priors"], dtype=float)
    else:
        p = np.linspace(0.0, 1.0, data["n_priors"] or 33)
        priors = np.column_stack([1.0 - p, p])
    spec = _problem(data, priors[0])
    rows = value_profile(spec, priors, _directions(cfg, data), _resolution(cfg, data))
    out = {"rows": [{"mu": mu.tolist(), "value": v, "error": e} for mu, v, e in rows]}
    csv_text = _table_csv([r[0] for r in rows], [r[1] for r in rows], ("error", [r[2] for r in rows]))
    return out, csv_text


def _bellman(cfg, data):
    spec = DynamicSpec(
        value_function_from_dict(data["F"]),
        Cost(**data["cost"]),
        data["discount"],
        math.inf if data["capacity"] is None else data["capacity"],
        _resolution(cfg, data),
        data["n_states"],
        *([value_function_from_dict(data["H"])] if data["H"] else []),
    )
    tol = cfg.tol if cfg.tol is not None else data["tol"]
    table = value_iterate(spec, tol, data["max_iter"], data["start"])
    out = table.to_dict()
    out["spec"] = spec.to_dict()
    return out, table.to_csv()


def _ri(cfg, data):
    H = value_function_from_dict(data["H"]) if data["H"] else None
    res = ri_solve(value_function_from_dict(data["F"]), Cost(**data["cost"]), data["mu"], H, _resolution(cfg, data))
    return res.to_dict(), None


def _voters(cfg, data):
    spec = VoterSpec.from_dict(data)
    outcome = voters_solve(spec, validate=True, oracle_resolution=data["oracle_resolution"])
    out = outcome.solution.to_dict()
    out["selected"] = outcome.selected
    out["mu_star"] = outcome.mu_star
    return out, None


def _screen(cfg, data):
    spec = ScreenSpec.from_dict(data)
    res = screening_solve(spec, _resolution(cfg, data), data["atoms_cap"], data["starts"], cfg.seed)
    return res.to_dict(), None


HANDLERS = {
    "cav": _cav, "set": _set, "solve": _solve, "profile": _profile,
    "bellman": _bellman, "ri": _ri, "voters": _voters, "screen": _screen,
}


# ---------------------------------------------------------------- driver


def _classify(exc):
    if isinstance(exc, np.linalg.LinAlgError):
        return EXIT_NUMERICAL
    if isinstance(exc, (InfeasiblePrior, InfeasibleProblem, NotInSet)):
        return EXIT_INFEASIBLE
    if isinstance(exc, (SchemaError, ValueError, KeyError, TypeError)):
        return EXIT_SCHEMA
    return EXIT_NUMERICAL


def run(config, stderr=None):
    """Execute one command; returns the process exit code."""
    stderr = sys.stderr if stderr is None else stderr
    try:
        text = Path(config.input).read_text()
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=stderr)
        return EXIT_SCHEMA
    try:
        data = schemas.parse_input(config.command, text)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=stderr)
        return EXIT_SCHEMA
    try:
        result, csv_text = HANDLERS[config.command](config, data)
        result = dict(result)
        result["command"] = config.command
        result["spec_version"] = schemas.SPEC_VERSION
        payload = schemas.dumps(result)
    except (InfoDesignError, ValueError, KeyError, TypeError, np.linalg.LinAlgError) as exc:
        # input-shape problems surface from constructors as ValueError
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return _classify(exc)
    out = Path(config.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(payload)
    if csv_text is not None and config.format in ("csv", "both"):
        out.with_suffix(".csv").write_text(csv_text)
    if "sandwich_gap" in result:
        print(f"sandwich_gap: {result['sandwich_gap']:.6g}", file=stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="infodesign", description="Finite-state information design solvers.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", required=True, type=Path, help="problem JSON")
    parser.add_argument("--output", required=True, type=Path, help="result JSON; CSV goes next to it")
    parser.add_argument("--grid-d", type=int, default=None, help="grid resolution per state dimension")
    parser.add_argument("--directions", type=int, default=None, help="number of sampled support directions")
    parser.add_argument("--tol", type=float, default=None, help="stopping tolerance (bellman, smooth solve)")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized restarts")
    parser.add_argument("--format", choices=("json", "csv", "both"), default="both")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    for name in ("grid_d", "directions"):
        val = getattr(args, name)
        if val is not None and val < 1:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_SCHEMA
    cfg = RunConfig(args.command, args.input, args.output, args.grid_d, args.directions, args.tol, args.seed,
                    args.format)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
