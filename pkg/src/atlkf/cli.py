"""Command-line front end.

    atlkf check --model game.amf --spec "<<player>> F win"

Exit codes: 0 the formula holds in every initial state, 1 it fails in some
initial state, 2 usage/parse/validation error, 3 the oracle disagrees with
the engine.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

from . import _kernels
from .amf import load_model
from .errors import CapExceeded, ModelError, ParseError, UnknownAgent, UnknownAtom, EmptyCoalition
from .formula import parse_formula
from .model import reachable
from .oracle import oracle_eval
from .po import PoOptions, eval_fo_result, eval_po

EXIT_HOLDS, EXIT_FAILS, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    parser = _Parser(prog="atlkf", description="Model checker for ATLK with fairness.")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="check a formula against a model")
    check.add_argument("--model", required=True, metavar="FILE.amf")
    spec = check.add_mutually_exclusive_group(required=True)
    spec.add_argument("--spec", metavar="FORMULA")
    spec.add_argument("--spec-file", metavar="FILE")
    check.add_argument("--semantics", choices=("po", "fo"), default="po")
    check.add_argument("--algorithm", choices=("basic", "improved", "auto"), default="auto")
    check.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    check.add_argument("--witness", action="store_true", help="print a winning uniform strategy")
    check.add_argument("--json", action="store_true")
    check.add_argument("--verbose", action="store_true")
    check.add_argument(
        "--reachable-only", action="store_true", help="only list reachable satisfying states"
    )
    check.add_argument("--threads", type=int, default=1, metavar="N")
    return parser


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def run_check(args, out, err):
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = load_model(_read(args.model))
    for w in caught:
        print(f"warning: {w.message}", file=err)
    text = args.spec if args.spec is not None else _read(args.spec_file)
    formula = parse_formula(text)

    started = time.perf_counter()
    if args.semantics == "po":
        options = PoOptions(
            algorithm=args.algorithm,
            parallel=args.threads > 1,
            threads=args.threads,
            witness=args.witness,
        )
        result = eval_po(model, formula, options)
    else:
        result = eval_fo_result(model, formula)
    elapsed = time.perf_counter() - started

    oracle = None
    if args.oracle:
        try:
            expected = oracle_eval(model, formula, args.semantics)
            oracle = "MATCH" if expected == result.sat else "MISMATCH"
        except CapExceeded as exc:
            oracle = "SKIPPED"
            print(f"warning: oracle skipped: {exc}", file=err)

    shown = reachable(model) if args.reachable_only else None
    sat_states = result.sat_names(model, shown)
    diagnostics = {
        "strategiesEnumerated": result.diagnostics.strategies_enumerated,
        "branchesPruned": result.diagnostics.branches_pruned,
        "fixpointIterations": result.diagnostics.fixpoint_iterations,
    }
    if args.verbose:
        diagnostics["elapsedSeconds"] = round(elapsed, 6)
        diagnostics["backend"] = _kernels.BACKEND

    if args.json:
        doc = {
            "formula": result.formula,
            "semantics": args.semantics,
            "algorithm": PoOptions(args.algorithm).resolved if args.semantics == "po" else None,
            "holdsInAllInit": result.holds,
            "initStates": [model.state_name(s) for s in model.init],
            "satStates": sat_states,
            "diagnostics": diagnostics,
            "witness": result.witness,
            "oracle": oracle,
        }
        print(json.dumps(doc, indent=2), file=out)
    else:
        how = args.semantics
        if args.semantics == "po":
            how += f" ({PoOptions(args.algorithm).resolved})"
        print(f"formula: {result.formula}", file=out)
        print(f"semantics: {how}", file=out)
        print(f"holds in all initial states: {'yes' if result.holds else 'no'}", file=out)
        failing = [model.state_name(s) for s in model.init - result.sat]
        if failing:
            print(f"failing initial states: {', '.join(failing)}", file=out)
        print(f"satisfying states ({len(sat_states)}): {', '.join(sat_states)}", file=out)
        if result.witness is not None:
            for state, lines in result.witness.items():
                if lines is None:
                    print(f"witness for {state}: none", file=out)
                    continue
                print(f"witness for {state}:", file=out)
                for line in lines:
                    print(f"  {line}", file=out)
        elif args.witness:
            print("witness: only for top-level <<coalition>> formulas under po", file=out)
        if oracle is not None:
            print(f"oracle: {oracle}", file=out)
        if args.verbose:
            for key, value in diagnostics.items():
                print(f"  {key}: {value}", file=out)

    if oracle == "MISMATCH":
        return EXIT_MISMATCH
    return EXIT_HOLDS if result.holds else EXIT_FAILS


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return run_check(args, out, err)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=err)
    except ParseError as exc:
        print(f"syntax error: {exc}", file=err)
    except ModelError as exc:
        print(f"model error: {exc}", file=err)
    except (UnknownAgent, UnknownAtom, EmptyCoalition) as exc:
        print(f"error: {exc}", file=err)
    return EXIT_ERROR
