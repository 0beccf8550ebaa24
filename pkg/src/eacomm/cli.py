"""Command-line interface.

Exit codes: 0 success, 1 reproduction mismatch, 2 input error,
3 invariant violation, 4 solver non-convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import io
from . import strategies as S
from .linalg import InvariantError
from .npa import SCENARIOS, ScenarioError, SolverError, npa_problem, solve_sdp, write_sdpa
from .optimizer import ANSATZ_TAGS, OptimizerConfig, make_ansatz, maximize
from .protocol import (
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    behavior_of,
    check_nonadaptive,
    lift_to_adaptive,
)
from .tasks import evaluate, facet_functional, mesd_functional, mesd_rate, rac_functional

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_INVARIANT, EXIT_SOLVER = 0, 1, 2, 3, 4

log = logging.getLogger("eacomm")


class InputError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("EACOMM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"EACOMM_SEED must be an integer, got {env!r}") from None


def _functional(task: str, n_inputs: int | None = None):
    if task == "rac":
        return rac_functional()
    if task == "facet":
        return facet_functional()
    if task == "mesd":
        return mesd_functional(n_inputs or 4)
    raise InputError(f"unknown task {task!r}")


def _emit(human: str, payload: dict, out: str | None) -> None:
    print(human)
    text = json.dumps(payload, indent=1, default=io._json_default)
    if out:
        Path(out).write_text(text)
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    s = io.load_strategy(args.strategy)
    p = behavior_of(s)
    if args.task == "mesd":
        try:
            value = mesd_rate(p)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        f = _functional(args.task)
        if f.dims != p.dims:
            raise InputError(f"strategy has dims {p.dims}; task {args.task} needs {f.dims}")
        value = evaluate(f, p)
    if args.behavior_csv:
        io.write_behavior_csv(p, args.behavior_csv)
    _emit(f"{args.task}: {value:.10f}",
          {"task": args.task, "value": value, "behavior": io.behavior_to_json(p)}, args.json)
    return EXIT_OK


def cmd_check(args) -> int:
    s = io.load_strategy(args.strategy)
    if isinstance(s, NonAdaptiveEAClassicalStrategy):
        s = lift_to_adaptive(s)
    if not isinstance(s, AdaptiveEAClassicalStrategy):
        raise InputError("check needs an entanglement-assisted classical strategy")
    rep = check_nonadaptive(s, args.tol)
    _emit(f"max commutator norm: {rep.max_commutator:.3e}\n{rep.verdict}",
          {"verdict": rep.verdict, "max_commutator": rep.max_commutator, "tol": args.tol,
           "worst": rep.worst}, args.json)
    return EXIT_OK


def cmd_strategy(args) -> int:
    name = args.name
    if name not in S.STRATEGIES:
        raise InputError(f"unknown strategy {name!r}; choose from {sorted(S.STRATEGIES)}")
    if name == "na-ea-trit-rac" and args.theta is not None:
        s = S.na_ea_trit_rac(args.theta)
    elif name == "dense-coding" and args.d is not None:
        s = S.dense_coding_strategy(args.d)
    else:
        s = S.STRATEGIES[name]()
    io.save_strategy(s, args.out, name)
    print(f"wrote {name} to {args.out}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    f = _functional(args.task)
    try:
        ansatz = make_ansatz(args.ansatz, f, D=args.D, local_dims=(args.local_dim, args.local_dim))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=_seed(args))
    res = maximize(f, ansatz, cfg)
    payload = {
        "task": args.task,
        "value": res.value,
        "strategy": io.strategy_to_json(res.strategy),
        "metadata": res.metadata,
        "trace": [vars(t) for t in res.trace],
    }
    _emit(f"{args.task} / {args.ansatz}: best {res.value:.10f} over {args.restarts} restarts",
          payload, args.out)
    return EXIT_OK


def cmd_npa(args) -> int:
    if args.scenario not in SCENARIOS:
        raise InputError(f"unknown scenario {args.scenario!r}; choose from {sorted(SCENARIOS)}")
    f = None if args.task == "chsh" else _functional(args.task)
    try:
        problem = npa_problem(f, args.scenario, args.level, args.nonadaptive, args.symmetrize)
    except (ScenarioError, ValueError) as exc:
        raise InputError(str(exc)) from None
    if args.export:
        write_sdpa(problem, args.export)
        print(f"wrote {problem.n_variables} variables, block size {problem.size} to {args.export}")
    if not args.solve:
        return EXIT_OK
    res = solve_sdp(problem, tol=args.tol)
    payload = {k: getattr(res, k) for k in ("upper", "lower", "gap", "primal_infeasibility",
                                            "dual_infeasibility", "iterations", "converged",
                                            "status", "seconds")}
    payload.update(task=args.task, scenario=args.scenario, level=str(args.level),
                   nonadaptive=args.nonadaptive, symmetrize=args.symmetrize, size=problem.size,
                   variables=problem.n_variables)
    _emit(f"upper bound {res.upper:.10f} (dual {res.lower:.10f}, {res.status})", payload, args.json)
    if not res.converged:
        raise SolverError(f"solver {res.status}", res)
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import ReportConfig, run_report

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    cfg = ReportConfig(seed=_seed(args), restarts=args.restarts, npa_level=args.npa_level,
                       npa_timeout=args.npa_timeout, samples=args.samples,
                       export_dir=out.parent, optimizer=not args.no_optimizer)
    rep = run_report(cfg)
    md = rep.markdown()
    out.write_text(md)
    io.dump_json(rep.to_dict(), out.with_suffix(".json"))
    print(md)
    return EXIT_OK if rep.ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eacomm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a strategy file on a task")
    e.add_argument("--strategy", required=True)
    e.add_argument("--task", required=True, choices=["rac", "facet", "mesd"])
    e.add_argument("--json", help="write the JSON result here instead of stdout")
    e.add_argument("--behavior-csv", help="also write p(b|x,y) as CSV")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("check", help="adaptivity verdict for an EA classical strategy")
    c.add_argument("--strategy", required=True)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--json")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("strategy", help="write an explicit protocol as JSON")
    s.add_argument("name", help=", ".join(sorted(S.STRATEGIES)))
    s.add_argument("--theta", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_strategy)

    o = sub.add_parser("optimize", help="maximize a task over a strategy class")
    o.add_argument("--task", required=True, choices=["rac", "facet", "mesd"])
    o.add_argument("--class", dest="ansatz", required=True,
                   help=", ".join(ANSATZ_TAGS) + " (unassisted-classical-<D>)")
    o.add_argument("--restarts", type=int, default=50)
    o.add_argument("--max-iters", type=int, default=500)
    o.add_argument("--seed", type=int)
    o.add_argument("--D", type=int)
    o.add_argument("--local-dim", type=int, default=2)
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    n = sub.add_parser("npa", help="NPA upper bound (solve or export)")
    n.add_argument("--task", required=True, choices=["rac", "facet", "chsh"])
    n.add_argument("--scenario", required=True, help=", ".join(SCENARIOS))
    n.add_argument("--level", default="2", help="1, 1+AB, 2, 2+AAB or 3")
    n.add_argument("--nonadaptive", action="store_true")
    n.add_argument("--symmetrize", action="store_true")
    n.add_argument("--export", help="write SDPA sparse file")
    n.add_argument("--solve", action="store_true")
    n.add_argument("--tol", type=float, default=1e-7)
    n.add_argument("--json")
    n.set_defaults(func=cmd_npa)

    r = sub.add_parser("report", help="run the reproduction suite")
    r.add_argument("--out", default="report.md")
    r.add_argument("--seed", type=int)
    r.add_argument("--restarts", type=int, default=50)
    r.add_argument("--samples", type=int, default=1000)
    r.add_argument("--npa-level", type=int, default=2)
    r.add_argument("--npa-timeout", type=float, default=1800.0)
    r.add_argument("--no-optimizer", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "command", None) == "npa" and args.level.upper() not in ("1+AB", "2+AAB"):
        try:
            args.level = int(args.level)
        except ValueError:
            print(f"error: bad level {args.level!r}", file=sys.stderr)
            return EXIT_INPUT
    if getattr(args, "command", None) == "npa" and not (args.export or args.solve):
        print("error: npa needs --export PATH and/or --solve", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, io.SchemaError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"invariant violation: {exc} (max violation {exc.violation})", file=sys.stderr)
        return EXIT_INVARIANT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
