"""Command line front end.

Exit status: 0 when the property holds (or the command succeeded), 1 when it
is violated or simulation fails, 2 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import List, Optional

from . import kernels
from .abstraction import Partition, check_safe_simulation, coarsest_partition, quotient
from .cegar import CegarConfig, run_cegar
from .cexgen import Counterexample
from .checker import DEFAULT_MEMO_BUDGET, Verdict, model_check
from .errors import BudgetExceeded, CegarError
from .logic import And, Or, Prob, as_bounded_until, holds_in, parse_formula, pretty
from .models import ObservationAdversary, Path, Pomdp, Waz, corresponding_waz
from .modelio import dumps, fraction_text, read_model, read_partition, waz_to_dict

EXIT_OK, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2


def show(x: Fraction) -> str:
    """Exact fraction followed by its decimal value (``~`` marks rounding)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d, twos, fives = x.denominator, 0, 0
    while d % 2 == 0:
        d, twos = d // 2, twos + 1
    while d % 5 == 0:
        d, fives = d // 5, fives + 1
    places = max(twos, fives)
    if d == 1 and places <= 12:
        digits = str(abs(x.numerator) * 10 ** places // x.denominator).rjust(places + 1, "0")
        sign = "-" if x < 0 else ""
        dec = f"{sign}{digits[:-places]}.{digits[-places:]}"
    else:
        dec = "~" + format(float(x), ".10g")
    return f"{fraction_text(x)} ({dec})"


def _as_waz(model) -> Waz:
    return corresponding_waz(model) if isinstance(model, Pomdp) else model


def _path_doc(path: Path, prob: Fraction):
    return {"states": list(path.states), "actions": list(path.actions), "probability": fraction_text(prob)}


def _adversary_doc(adv: Optional[ObservationAdversary]):
    if adv is None:
        return None
    return {"horizon": adv.horizon, "default": adv.default,
            "choices": [{"history": list(h), "action": a} for h, a in adv.table()]}


def _cex_doc(cex: Optional[Counterexample]):
    if cex is None:
        return None
    return {"paths": [_path_doc(p, q) for p, q in cex.paths], "total": fraction_text(cex.total)}


def _history_text(h) -> str:
    return " ".join(h)


# -- check ------------------------------------------------------------------

def _evaluate(node, system: Waz, args, verdicts: List):
    if isinstance(node, Prob):
        spec = as_bounded_until(node)
        v = model_check(system, spec, memo_budget=args.memo_budget)
        verdicts.append((spec, v))
        return v.satisfied
    if isinstance(node, And):
        return _evaluate(node.left, system, args, verdicts) & _evaluate(node.right, system, args, verdicts)
    if isinstance(node, Or):
        return _evaluate(node.left, system, args, verdicts) | _evaluate(node.right, system, args, verdicts)
    return holds_in(system.labels.get(system.initial, frozenset()), node)


def cmd_check(args, out) -> int:
    model = read_model(args.model)
    system = _as_waz(model)
    formula = parse_formula(args.spec)
    verdicts: List = []
    ok = _evaluate(formula, system, args, verdicts)
    if args.format == "json":
        doc = {"command": "check", "spec": pretty(formula), "satisfied": ok, "checks": []}
        for spec, v in verdicts:
            doc["checks"].append({"spec": str(spec), "satisfied": v.satisfied, "value": fraction_text(v.value),
                                  "exact": v.exact, "witness_horizon": v.witness_horizon,
                                  "witness": _adversary_doc(v.witness)})
        out.write(dumps(doc))
    else:
        out.write(f"model: {args.model} ({len(system)} automaton states)\n")
        out.write(f"spec: {pretty(formula)}\n")
        for spec, v in verdicts:
            _write_verdict(out, spec, v)
        out.write(f"result: {'SATISFIED' if ok else 'VIOLATED'}\n")
    return EXIT_OK if ok else EXIT_VIOLATED


def _write_verdict(out, spec, v: Verdict, indent=""):
    if v.satisfied:
        out.write(f"{indent}{spec}: satisfied, max probability {show(v.value)}\n")
        return
    kind = "max probability" if v.exact else f"witness value (deviation found at depth {v.witness_horizon})"
    out.write(f"{indent}{spec}: VIOLATED, {kind} {show(v.value)}\n")
    if v.witness is not None:
        out.write(f"{indent}witness adversary (default action {v.witness.default}):\n")
        for h, a in v.witness.table():
            out.write(f"{indent}  {_history_text(h)} -> {a}\n")


# -- cegar ------------------------------------------------------------------

def _split_text(split, names) -> str:
    moved = ", ".join(split.moved)
    return f"split {{{moved}}} from block {names[split.block]} (new block t{split.new_block})"


def cmd_cegar(args, out) -> int:
    model = read_model(args.model)
    if not isinstance(model, Pomdp):
        raise CegarError("cegar needs a POMDP model")
    spec = as_bounded_until(parse_formula(args.spec))
    config = CegarConfig(memo_budget=args.memo_budget, verify_simulation=args.verify_simulation,
                         warm_start=not args.no_warm_start)
    outcome = run_cegar(model, spec, config)
    if args.format == "json":
        doc = {"command": "cegar", "spec": str(spec), "outcome": outcome.status,
               "degenerated": outcome.degenerated, "iterations": []}
        for it in outcome.iterations:
            doc["iterations"].append({
                "index": it.index, "blocks": it.blocks, "satisfied": it.verdict.satisfied,
                "value": fraction_text(it.verdict.value), "exact": it.verdict.exact,
                "warm_started": it.verdict.warm_started, "simulation_checked": it.simulation_checked,
                "counterexample": _cex_doc(it.counterexample), "spurious": it.spurious,
                "realizable": None if it.realizable is None else fraction_text(it.realizable),
                "splits": [{"j": s.j, "pivot_blocks": [f"t{b}" for b in s.pivot_blocks],
                            "sp_trace": [fraction_text(x) for x in s.sp_trace],
                            "block": f"t{s.block}", "new_block": f"t{s.new_block}", "moved": list(s.moved),
                            "predicted": fraction_text(s.predicted), "realized": fraction_text(s.realized),
                            "remapped_mass": fraction_text(s.remapped_mass)} for s in it.splits],
            })
        doc["partition"] = [list(b) for b in outcome.partition.blocks]
        if not outcome.proved:
            doc["counterexample"] = _cex_doc(outcome.counterexample)
            doc["adversary"] = _adversary_doc(outcome.adversary)
            doc["realizable"] = fraction_text(outcome.realizable)
            if outcome.concrete_paths is not None:
                doc["concrete_paths"] = [_path_doc(p, q) for p, q in outcome.concrete_paths]
        out.write(dumps(doc))
    else:
        out.write(f"spec: {spec}\n")
        for it in outcome.iterations:
            names = [f"t{i}" for i in range(it.blocks)]
            status = "satisfied" if it.verdict.satisfied else "violated"
            warm = " (warm start)" if it.verdict.warm_started else ""
            out.write(f"iteration {it.index}: |partition| = {it.blocks}, {status}{warm}")
            kind = "value" if it.verdict.exact else "witness value"
            out.write(f", {kind} {show(it.verdict.value)}\n")
            if it.counterexample is None:
                continue
            for p, q in it.counterexample.paths:
                out.write(f"  {p}  {show(q)}\n")
            out.write(f"  CE total = {show(it.counterexample.total)}\n")
            out.write(f"  realizable = {show(it.realizable)}, spurious: {'yes' if it.spurious else 'no'}\n")
            for s in it.splits:
                out.write(f"  {_split_text(s, names)}; j = {s.j}, predicted r = {show(s.predicted)}, "
                          f"re-mapped CE mass = {show(s.remapped_mass)}\n")
                names.append(f"t{s.new_block}")
        if outcome.proved:
            out.write(f"outcome: PROVED on {len(outcome.partition)} blocks\n")
        else:
            out.write(f"outcome: DISPROVED, realizable counterexample mass {show(outcome.realizable)}\n")
        if outcome.degenerated:
            out.write("note: refinement reached the discrete partition\n")
    return EXIT_OK if outcome.proved else EXIT_VIOLATED


# -- quotient / simcheck ----------------------------------------------------

def cmd_quotient(args, out) -> int:
    system = _as_waz(read_model(args.model))
    partition = read_partition(args.partition, system) if args.partition else coarsest_partition(system)
    out.write(dumps(waz_to_dict(quotient(system, partition), partition)))
    return EXIT_OK


def cmd_simcheck(args, out) -> int:
    sys1 = _as_waz(read_model(args.model))
    sys2 = _as_waz(read_model(args.abstract))
    rel = check_safe_simulation(sys1, sys2)
    pairs = sorted(rel or (), key=lambda p: (sys1.index(p[0]), sys2.index(p[1])))
    if args.format == "json":
        out.write(dumps({"command": "simcheck", "simulated": rel is not None,
                         "relation": [list(p) for p in pairs]}))
    elif rel is None:
        out.write("NOT SIMULATED\n")
    else:
        out.write(f"SIMULATED: {sys1.initial} <= {sys2.initial}\n")
        for a, b in pairs:
            out.write(f"  {a}  R  {b}\n")
    return EXIT_OK if rel is not None else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pomdp-cegar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="store_true", help="print the version and kernel backend")
    sub = parser.add_subparsers(dest="command")

    def common(p, spec=True):
        p.add_argument("--model", required=True, help="model file (JSON)")
        if spec:
            p.add_argument("--spec", required=True, help='formula, e.g. \'P<=0.45 [ true U<=20 "fail" ]\'')
            p.add_argument("--memo-budget", type=int, default=DEFAULT_MEMO_BUDGET,
                           help="cap on distinct (occupancy, depth) memo entries")
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--timing", action="store_true", help="append wall-clock timing to the report")

    p = sub.add_parser("check", help="check a model directly, without abstraction")
    common(p)
    p = sub.add_parser("cegar", help="run the abstraction-refinement loop")
    common(p)
    p.add_argument("--verify-simulation", action="store_true",
                   help="assert that every quotient safely simulates the concrete system")
    p.add_argument("--no-warm-start", action="store_true", help="do not reuse the previous witness")
    p = sub.add_parser("quotient", help="print the quotient automaton of a partition")
    common(p, spec=False)
    p.add_argument("--partition", help="partition file; default is the coarsest consistent partition")
    p = sub.add_parser("simcheck", help="decide whether --abstract safely simulates --model")
    common(p, spec=False)
    p.add_argument("--abstract", required=True, help="the simulating model file")
    return parser


COMMANDS = {"check": cmd_check, "cegar": cmd_cegar, "quotient": cmd_quotient, "simcheck": cmd_simcheck}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if args.version:
        from . import __version__
        out.write(f"pomdp-cegar {__version__} ({kernels.BACKEND} kernels)\n")
        return EXIT_OK
    if args.command is None:
        parser.print_usage(err)
        return EXIT_ERROR
    if getattr(args, "memo_budget", 1) <= 0:
        err.write("error: --memo-budget must be positive\n")
        return EXIT_ERROR
    start = time.perf_counter()
    try:
        if args.timing and args.format == "json":
            import io

            buf = io.StringIO()
            code = COMMANDS[args.command](args, buf)
            doc = json.loads(buf.getvalue())
            doc["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
            out.write(dumps(doc))
        else:
            code = COMMANDS[args.command](args, out)
            if args.timing:
                out.write(f"time: {time.perf_counter() - start:.3f} s\n")
    except BudgetExceeded as exc:
        err.write(f"error: budget exceeded: {exc}\n")
        return EXIT_ERROR
    except (CegarError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
