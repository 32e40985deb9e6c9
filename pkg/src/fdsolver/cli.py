"""Command-line driver: parse a model, solve it, print the result.

Exit codes: 0 SAT/OPTIMAL, 1 UNSAT/UNKNOWN, 2 parse or usage error,
3 internal error (e.g. arithmetic overflow).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from .generators import gen_nqueens, gen_random
from .model import ArithmeticOverflow, Model, Satisfy, check_assignment
from .parser import ParseError, parse_model
from .search import LnsConfig, SearchConfig, Solution, lns_optimize, solve_optimize, solve_satisfy
from .state import SearchStats

EXIT_OK, EXIT_UNSAT, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3
_HEURISTICS = {"input": "input_order", "ff": "first_fail"}


@dataclass
class RunReport:
    status: str
    solutions: list[Solution] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)
    time_ms: float | None = None
    seed: int = 0
    threads: int = 1
    heuristic: str = "first_fail"

    def exit_code(self) -> int:
        return {"SAT": EXIT_OK, "OPTIMAL": EXIT_OK, "UNSAT": EXIT_UNSAT,
                "UNKNOWN": EXIT_UNSAT}.get(self.status, EXIT_INTERNAL)


def _solution_record(m: Model, sol: Solution) -> dict:
    return {"assignment": sol.named(m), "objective": sol.objective}


def _report_record(rep: RunReport) -> dict:
    return {
        "status": rep.status,
        "solutions": len(rep.solutions),
        "objective": rep.solutions[-1].objective if rep.solutions else None,
        "nodes": rep.stats.nodes,
        "failures": rep.stats.failures,
        "rounds": rep.stats.rounds,
        "time_ms": rep.time_ms,
        "seed": rep.seed,
        "threads": rep.threads,
        "heuristic": rep.heuristic,
    }


def _format_solution(m: Model, sol: Solution) -> str:
    text = " ".join(f"{k}={v}" for k, v in sol.named(m).items())
    if sol.objective is not None:
        text += f"  objective={sol.objective}"
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdsolve", description="Finite-domain constraint solver.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a model file")
    s.add_argument("model", help="model file, or - for stdin")
    count = s.add_mutually_exclusive_group()
    count.add_argument("--all", action="store_true", help="enumerate every solution")
    count.add_argument("--first", type=int, metavar="N", default=1, help="stop after N solutions")
    s.add_argument("--heuristic", choices=sorted(_HEURISTICS), default="ff")
    s.add_argument("--alldiff", choices=("gac", "fc"), default="gac")
    s.add_argument("--threads", type=int, default=1, metavar="K")
    s.add_argument("--seed", type=int, default=0, metavar="S")
    s.add_argument("--json", action="store_true", help="JSON lines output")
    s.add_argument("--stats", action="store_true", help="print search statistics")
    s.add_argument("--timing", action="store_true",
                   help="report wall time (otherwise time_ms is null and output is reproducible)")
    s.add_argument("--lns", action="store_true", help="large neighbourhood search")
    s.add_argument("--destroy", type=float, default=0.3, metavar="R")
    s.add_argument("--iters", type=int, default=10, metavar="I")
    s.add_argument("--neighborhoods", type=int, default=1, metavar="W")
    s.add_argument("--node-limit", type=int, default=1000, metavar="L",
                   help="per-iteration node limit, 0 for none")

    q = sub.add_parser("gen-nqueens", help="print an n-queens model")
    q.add_argument("n", type=int)

    r = sub.add_parser("gen-random", help="print a reproducible random model")
    r.add_argument("--vars", type=int, required=True)
    r.add_argument("--width", type=int, required=True)
    r.add_argument("--constraints", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--goal", choices=("satisfy", "minimize", "maximize"), default="satisfy")
    return p


def _solve(m: Model, args) -> RunReport:
    heuristic = _HEURISTICS[args.heuristic]
    rep = RunReport("UNKNOWN", seed=args.seed, threads=args.threads, heuristic=heuristic)
    if args.lns:
        cfg = LnsConfig(destroy_rate=args.destroy, iterations=args.iters,
                        neighborhoods=args.neighborhoods, seed=args.seed,
                        per_iteration_node_limit=args.node_limit or None,
                        thread_count=args.threads, var_heuristic=heuristic, alldiff=args.alldiff)
        res = lns_optimize(m, cfg)
        rep.stats = res.stats
        if res.solution is None:
            rep.status = "UNSAT"
        else:
            rep.status = "SAT"
            rep.solutions.append(res.solution)
        return rep
    cfg = SearchConfig(var_heuristic=heuristic, thread_count=args.threads, seed=args.seed,
                       alldiff=args.alldiff, max_solutions=None if args.all else args.first)
    if isinstance(m.goal, Satisfy):
        rep.solutions.extend(solve_satisfy(m, cfg, rep.stats))
        rep.status = "SAT" if rep.solutions else "UNSAT"
    else:
        best = solve_optimize(m, cfg, rep.stats)
        rep.status = "UNSAT" if best is None else "OPTIMAL"
        if best is not None:
            rep.solutions.append(best)
    return rep


def _cmd_solve(args, out, err) -> int:
    try:
        text = sys.stdin.read() if args.model == "-" else open(args.model, encoding="utf-8").read()
    except OSError as e:
        print(f"error: {e}", file=err)
        return EXIT_PARSE
    try:
        m = parse_model(text)
    except ParseError as e:
        print(f"{args.model}:{e.line}:{e.column}: {e.kind}: {e.message}", file=err)
        return EXIT_PARSE
    if args.lns and isinstance(m.goal, Satisfy):
        print("error: --lns needs a minimize or maximize goal", file=err)
        return EXIT_PARSE
    if args.threads < 1 or (not args.all and args.first < 1):
        print("error: --threads and --first must be >= 1", file=err)
        return EXIT_PARSE
    t0 = time.perf_counter()
    try:
        rep = _solve(m, args)
    except ArithmeticOverflow as e:
        print(f"error: arithmetic overflow: {e}", file=err)
        if args.json:
            print(json.dumps({"status": "ERROR", "message": str(e)}), file=out)
        return EXIT_INTERNAL
    except ValueError as e:
        print(f"error: {e}", file=err)
        return EXIT_PARSE
    if args.timing:
        rep.time_ms = round((time.perf_counter() - t0) * 1000, 3)
    for sol in rep.solutions:
        # cheap guard against solver bugs leaking into output
        if check_assignment(m, sol.assignment):
            print("error: internal error, emitted assignment violates the model", file=err)
            return EXIT_INTERNAL
    if args.json:
        for sol in rep.solutions:
            print(json.dumps(_solution_record(m, sol)), file=out)
        print(json.dumps(_report_record(rep)), file=out)
    else:
        for sol in rep.solutions:
            print(_format_solution(m, sol), file=out)
        print(rep.status, file=out)
        if args.stats:
            s = rep.stats
            line = f"nodes={s.nodes} failures={s.failures} rounds={s.rounds} solutions={len(rep.solutions)}"
            if rep.time_ms is not None:
                line += f" time_ms={rep.time_ms}"
            print(line, file=out)
    return rep.exit_code()


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        if args.command == "solve":
            return _cmd_solve(args, out, err)
        if args.command == "gen-nqueens":
            out.write(gen_nqueens(args.n))
            return EXIT_OK
        out.write(gen_random(args.vars, args.width, args.constraints, args.seed, args.goal))
        return EXIT_OK
    except ValueError as e:
        print(f"error: {e}", file=err)
        return EXIT_PARSE
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {e!r}", file=err)
        return EXIT_INTERNAL


def main():
    sys.exit(run())
