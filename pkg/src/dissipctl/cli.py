"""Command-line front end.

Subcommands: check, synthesize, simulate, scale, models.  Reports are JSON,
trajectories are CSV; all randomness is pinned by --seed so re-runs are
byte-identical.

Exit codes: 0 success/certified, 1 input error, 2 not certified,
3 synthesis infeasible, 4 solver budget exhausted, 5 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import (
    DimensionCapError,
    DissipctlError,
    InfeasibleError,
    InputFormatError,
    SolverBudgetError,
)
from .lindblad import evolve, maximally_mixed, validate_density_state
from .models import REGISTRY, NamedModel, build
from .scalability import (
    check_corollary_commuting,
    check_corollary_d_free,
    check_incremental_ds,
    check_incremental_es,
    check_theorem_ds_aggregation,
    check_theorem_es_aggregation,
    simulate_aggregate,
)
from .serialize import (
    aggregate_from_json,
    aggregate_report_to_dict,
    aggregate_to_json,
    dumps_report,
    matrix_from_json,
    matrix_to_json,
    model_from_json,
    model_to_json,
    stability_report_to_dict,
    synthesis_result_to_dict,
    trajectory_to_csv,
    unitaries_from_json,
    write_text_atomic,
)
from .stability import certify_ground_state_stability
from .synthesis import synthesize

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CERTIFIED = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4
EXIT_DIM_CAP = 5

_SIM_CAP_ENV = "DISSIPCTL_SIM_CAP"


def _sim_cap(args) -> int:
    if getattr(args, "sim_cap", None):
        return int(args.sim_cap)
    return int(os.environ.get(_SIM_CAP_ENV, "64"))


def _load_json(path: str, field: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InputFormatError(field, f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputFormatError(field, f"invalid JSON in {path}: {exc}")


def _emit(args, payload: dict | str, is_csv: bool = False) -> None:
    text = payload if is_csv else dumps_report(payload)
    if getattr(args, "out", None):
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _report_envelope(args, command: str, body: dict) -> dict:
    return {
        "tool": "dissipctl",
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", 0),
        "tol": getattr(args, "tol", 1e-9),
        "report": body,
    }


def _resolve_named(args) -> NamedModel | None:
    if getattr(args, "name", None):
        return build(args.name)
    return None


def _cmd_check(args) -> int:
    named = _resolve_named(args)
    if named is not None:
        model = named.model
        candidates = named.candidates
        v = candidates.get(args.candidate) if args.candidate \
            else next(iter(candidates.values()), None)
        if v is None:
            raise InputFormatError("candidate", f"model has candidates {sorted(candidates)}")
    else:
        if not args.model or not args.v:
            raise InputFormatError("model", "check needs --model and --v (or --name)")
        model = model_from_json(_load_json(args.model, "model"))
        obj = _load_json(args.v, "V")
        v = matrix_from_json(obj["V"] if isinstance(obj, dict) and "V" in obj else obj, "V")
    report = certify_ground_state_stability(
        v, model, simulate=args.simulate, t_final=args.t_final,
        seed=args.seed, tol=args.tol, dim_cap=_sim_cap(args),
    )
    body = stability_report_to_dict(report)
    if not report.certified and "psd" in report.diagnostics:
        body["message"] = "not a Lyapunov operator: V >= 0 fails"
    _emit(args, _report_envelope(args, "check", body))
    return EXIT_OK if report.certified else EXIT_NOT_CERTIFIED


def _cmd_synthesize(args) -> int:
    obj = _load_json(args.v, "V")
    v = matrix_from_json(obj["V"] if isinstance(obj, dict) and "V" in obj else obj, "V")
    c = args.c
    channels = args.channels
    if isinstance(obj, dict):
        # the input file may carry the target constant and channel count
        if c is None and obj.get("c") is not None:
            c = float(obj["c"])
        if channels is None and obj.get("channels") is not None:
            channels = int(obj["channels"])
    result = synthesize(v, c, channels=channels or 1, seed=args.seed, tol=args.tol)
    if isinstance(result, list):
        body = {"channels": [synthesis_result_to_dict(r) for r in result]}
    else:
        body = synthesis_result_to_dict(result)
    _emit(args, _report_envelope(args, "synthesize", body))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    named = _resolve_named(args)
    spec = None
    if named is not None:
        model = named.model
        spec = named.aggregate
    elif args.model:
        model = model_from_json(_load_json(args.model, "model"))
        if args.spec:
            spec = aggregate_from_json(_load_json(args.spec, "spec"))
    elif args.spec:
        spec = aggregate_from_json(_load_json(args.spec, "spec"))
        model = spec.to_model()
    else:
        raise InputFormatError("model", "simulate needs --model, --spec or --name")
    if args.t_final <= 0:
        raise InputFormatError("t-final", f"t_final must be positive, got {args.t_final}")
    cap = _sim_cap(args)
    if model.dim > cap:
        raise DimensionCapError(f"dimension {model.dim} exceeds cap {cap}")
    if args.rho0:
        rho0 = matrix_from_json(_load_json(args.rho0, "rho0"), "rho0")
        validate_density_state(rho0, 1e-8)
    else:
        rho0 = maximally_mixed(model.dim)
    if spec is not None:
        traj = simulate_aggregate(spec, args.t_final, rho0=rho0, dim_cap=cap,
                                  n_samples=args.samples)
    else:
        observables = {}
        if named is not None:
            observables = {name: op for name, op in named.candidates.items()}
        traj = evolve(model, rho0, args.t_final, dt_hint=args.dt_hint,
                      n_samples=args.samples, observables=observables)
    _emit(args, trajectory_to_csv(traj), is_csv=True)
    return EXIT_OK


def _cmd_scale(args) -> int:
    named = _resolve_named(args)
    unitaries = None
    if named is not None:
        spec = named.aggregate
        if spec is None:
            raise InputFormatError("name", f"model {named.name} has no aggregate description")
        unitaries = named.extras.get("unitaries")
        new_couplings = named.extras.get("new_couplings", [])
        c = args.c if args.c is not None else named.extras.get("incremental_c", 1.0)
    else:
        if not args.spec:
            raise InputFormatError("spec", "scale needs --spec or --name")
        obj = _load_json(args.spec, "spec")
        spec = aggregate_from_json(obj)
        unitaries = unitaries_from_json(obj)
        new_couplings = [matrix_from_json(m, f"new_couplings[{i}]")
                         for i, m in enumerate(obj.get("new_couplings", []))]
        c = args.c if args.c is not None else 1.0

    theorem = args.theorem
    if theorem == "es":
        report = check_theorem_es_aggregation(spec, tol=args.tol)
        body = aggregate_report_to_dict(report)
        overall = report.overall
    elif theorem == "ds":
        report = check_theorem_ds_aggregation(spec, tol=args.tol)
        body = aggregate_report_to_dict(report)
        overall = report.overall
    elif theorem == "commuting":
        if unitaries is None:
            raise InputFormatError("spec", "commuting mode needs the unitary factors "
                                           "(extras or a 'unitaries' array in the spec)")
        report = check_corollary_commuting(spec, unitaries, tol=args.tol)
        body = aggregate_report_to_dict(report)
        overall = report.overall
    elif theorem in ("inc-es", "inc-ds", "d-free"):
        n = args.n if args.n is not None else len(spec.terms) - 1
        if theorem == "inc-es":
            holds, info = check_incremental_es(spec, n, new_couplings, c, tol=args.tol)
        elif theorem == "inc-ds":
            holds, info = check_incremental_ds(spec, n, new_couplings, c, tol=args.tol)
        else:
            holds, info = check_corollary_d_free(spec, n, new_couplings, c,
                                                 mode=args.mode, tol=args.tol)
        body = {"theorem": theorem, "holds": holds, "c": c, "n": n, **info}
        overall = holds
    else:
        raise InputFormatError("theorem", f"unknown theorem {args.theorem!r}")
    _emit(args, _report_envelope(args, "scale", body))
    return EXIT_OK if overall else EXIT_NOT_CERTIFIED


def _cmd_models(args) -> int:
    if args.action == "list":
        lines = {}
        for name, fn in sorted(REGISTRY.items()):
            doc = (fn.__doc__ or "").strip().splitlines()[0]
            lines[name] = doc
        _emit(args, {"models": lines})
        return EXIT_OK
    named = build(args.model_name)
    body = {
        "name": named.name,
        "description": named.description,
        "model": model_to_json(named.model),
        "candidates": {k: matrix_to_json(v) for k, v in named.candidates.items()},
        "expected": named.expected,
    }
    if named.aggregate is not None:
        body["spec"] = aggregate_to_json(named.aggregate)
        if "unitaries" in named.extras:
            body["spec"]["unitaries"] = [matrix_to_json(u) for u in named.extras["unitaries"]]
        if "new_couplings" in named.extras:
            body["spec"]["new_couplings"] = [matrix_to_json(l)
                                             for l in named.extras["new_couplings"]]
    _emit(args, body)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--tol", type=float, default=1e-9, help="base tolerance")
    parser.add_argument("--out", help="output path (written atomically)")
    parser.add_argument("--sim-cap", type=int, default=None,
                        help=f"simulation dimension cap (default ${_SIM_CAP_ENV} or 64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dissipctl",
        description="certify ground-state stability of open quantum systems, "
                    "synthesize dissipative couplings, and check aggregation",
    )
    parser.add_argument("--version", action="version", version=f"dissipctl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="certify a candidate stability witness")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--v", help="candidate matrix JSON path")
    p.add_argument("--name", help="built-in model, e.g. three_level")
    p.add_argument("--candidate", help="candidate name for built-in models")
    p.add_argument("--simulate", action="store_true", help="cross-check by simulation")
    p.add_argument("--t-final", type=float, default=20.0)
    _add_common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("synthesize", help="compute a coupling L = U V")
    p.add_argument("--v", required=True, help="candidate matrix JSON path")
    p.add_argument("--c", type=float, default=None, help="target decay constant")
    p.add_argument("--channels", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("simulate", help="integrate the master equation, emit CSV")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--spec", help="aggregate spec JSON path (adds per-term columns)")
    p.add_argument("--name", help="built-in model")
    p.add_argument("--rho0", help="initial state JSON (default maximally mixed)")
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--dt-hint", type=float, default=None)
    p.add_argument("--samples", type=int, default=201)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("scale", help="run an aggregation certificate")
    p.add_argument("--spec", help="aggregate spec JSON path")
    p.add_argument("--name", help="built-in model")
    p.add_argument("--theorem", required=True,
                   choices=["es", "ds", "inc-es", "inc-ds", "commuting", "d-free"])
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--n", type=int, default=None, help="terms already certified")
    p.add_argument("--mode", choices=["es", "ds"], default="es",
                   help="variant for --theorem d-free")
    _add_common(p)
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser("models", help="list or export built-in models")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("model_name", nargs="?", help="model to export")
    _add_common(p)
    p.set_defaults(func=_cmd_models)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "models" and args.action == "export" and not args.model_name:
            raise InputFormatError("model_name", "export needs a model name")
        return args.func(args)
    except InputFormatError as exc:
        print(f"dissipctl: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"dissipctl: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverBudgetError as exc:
        print(f"dissipctl: solver budget exhausted: {exc} "
              f"(best residual {exc.best_residual:.3e})", file=sys.stderr)
        return EXIT_BUDGET
    except DimensionCapError as exc:
        print(f"dissipctl: dimension cap: {exc}", file=sys.stderr)
        return EXIT_DIM_CAP
    except DissipctlError as exc:
        print(f"dissipctl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
