"""Command-line front door.

Exit codes are the machine contract: 0 provable/accepted/entailed/passed,
1 the negative outcome, 2 parse errors, 3 base-logic misconfiguration.
Identical invocations print byte-identical output; search order is fixed.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import re
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .baselogic import Verdict
from .featurelogic import entail_check, parse_feature_term
from .grammar import GrammarError, OracleError, compile_out, compile_out_check, load_grammar, membership
from .prover import SearchConfig, proof_to_json, proof_to_text, prove
from .syntax import ParseError, Regime, parse_sequent, render_formula

GRAMMAR_PATH_VAR = "SUBLAMBEK_GRAMMAR_PATH"


def _find_grammar(path: str) -> Path:
    candidate = Path(path)
    if candidate.exists():
        return candidate
    for directory in os.environ.get(GRAMMAR_PATH_VAR, "").split(os.pathsep):
        if directory:
            candidate = Path(directory) / path
            if candidate.exists():
                return candidate
    raise GrammarError(f"grammar file not found: {path}")


def _dump(payload: dict, out) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True), file=out)


def cmd_prove(args, out) -> int:
    grammar = load_grammar(_find_grammar(args.grammar))
    regime = Regime(args.regime) if args.regime else grammar.regime
    sequent = parse_sequent(args.sequent, grammar.base)
    config = SearchConfig(
        regime, allow_cut=args.cut, cut_depth_bound=args.cut_bound if args.cut else 0
    )
    proof = prove(sequent, config, grammar.base)
    if args.json:
        _dump(
            {
                "provable": proof is not None,
                "regime": regime.value,
                "proof": proof_to_json(proof) if proof is not None else None,
            },
            out,
        )
    elif proof is not None:
        print(proof_to_text(proof), file=out)
    else:
        print("not provable", file=out)
    return 0 if proof is not None else 1


def cmd_member(args, out) -> int:
    grammar = load_grammar(_find_grammar(args.grammar))
    report = membership(grammar, args.sentence.split(), max_solutions=args.max_solutions)
    if args.json:
        _dump(report.to_json(), out)
    else:
        print(report.to_text(), file=out)
    return 0 if report.accepted else 1


def cmd_compile_out(args, out) -> int:
    grammar = load_grammar(_find_grammar(args.grammar))
    family = compile_out(grammar)
    payload = {
        "start_types": [render_formula(s) for s in family.start_types],
        "lexicon_sizes": {w: len(fs) for w, fs in sorted(family.lexicon_bar.items())},
    }
    status = 0
    if args.check is not None:
        ok, mismatches, total = compile_out_check(grammar, family, args.check)
        payload["check"] = {
            "max_length": args.check,
            "strings": total,
            "equivalent": ok,
            "mismatches": [
                {"sentence": list(ws), "direct": d, "family": f}
                for ws, d, f in mismatches
            ],
        }
        status = 0 if ok else 1
    if args.json:
        _dump(payload, out)
    else:
        print(f"start types: {len(family.start_types)}", file=out)
        for s in payload["start_types"]:
            print(f"  {s}", file=out)
        print("compiled lexicon sizes:", file=out)
        for w, size in sorted(payload["lexicon_sizes"].items()):
            print(f"  {w}: {size}", file=out)
        if args.check is not None:
            check = payload["check"]
            verdict = "equivalent" if check["equivalent"] else "NOT equivalent"
            print(
                f"language check up to length {check['max_length']}: {verdict} "
                f"({check['strings']} strings)",
                file=out,
            )
            for mism in check["mismatches"]:
                print(
                    f"  mismatch: {' '.join(mism['sentence'])} "
                    f"direct={mism['direct']} family={mism['family']}",
                    file=out,
                )
    return status


def cmd_entail(args, out) -> int:
    left = parse_feature_term(args.left)
    right = parse_feature_term(args.right)
    try:
        verdict = entail_check(left, right)
    except ValueError as exc:
        raise OracleError(str(exc)) from exc
    if args.json:
        _dump({"left": args.left, "right": args.right, "verdict": verdict.value}, out)
    else:
        print(verdict.value, file=out)
    return 0 if verdict is Verdict.ENTAILED else 1


_EXPECT_RE = re.compile(r"expect\s+(\d+)\s*:\s*(.*)")


def cmd_batch(args, out) -> int:
    script = Path(args.script)
    if not script.exists():
        raise GrammarError(f"batch script not found: {args.script}")
    jobs = []
    for ln, raw in enumerate(script.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        expected = 0
        m = _EXPECT_RE.fullmatch(line)
        if m:
            expected = int(m.group(1))
            line = m.group(2)
        jobs.append((ln, expected, line))

    def run(job):
        _ln, expected, line = job
        buffer = io.StringIO()
        code = main(shlex.split(line), out=buffer)
        return code, buffer.getvalue()

    if args.parallel and len(jobs) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    passed = 0
    for (ln, expected, line), (code, _text) in zip(jobs, results):
        if code == expected:
            passed += 1
            print(f"PASS line {ln}: {line}", file=out)
        else:
            print(f"FAIL line {ln} (exit {code}, expected {expected}): {line}", file=out)
    print(f"passed {passed}/{len(jobs)}", file=out)
    return 0 if passed == len(jobs) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sublambek",
        description="Sequent proof search and grammar tools for Lambek calculi "
        "with subtyped basic categories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prove_p = sub.add_parser("prove", help="prove a sequent under a grammar's base logic")
    prove_p.add_argument("sequent", help="e.g. \"a/b , b => a\"")
    prove_p.add_argument("-g", "--grammar", required=True, help="grammar file")
    prove_p.add_argument("--regime", choices=[r.value for r in Regime], help="override the grammar's regime")
    prove_p.add_argument("--cut", action="store_true", help="enable the bounded Cut rule")
    prove_p.add_argument("--cut-bound", type=int, default=3, help="max Cut nesting (with --cut)")
    prove_p.add_argument("--json", action="store_true")
    prove_p.set_defaults(func=cmd_prove)

    member_p = sub.add_parser("member", help="test sentence membership")
    member_p.add_argument("sentence", help="whitespace-separated words")
    member_p.add_argument("-g", "--grammar", required=True)
    member_p.add_argument("--max-solutions", type=int, default=None, help="cap layered readings")
    member_p.add_argument("--json", action="store_true")
    member_p.set_defaults(func=cmd_member)

    compile_p = sub.add_parser("compile-out", help="compile to a pure Lambek grammar family")
    compile_p.add_argument("-g", "--grammar", required=True)
    compile_p.add_argument("--check", type=int, default=None, metavar="N",
                           help="brute-force language equivalence up to length N")
    compile_p.add_argument("--json", action="store_true")
    compile_p.set_defaults(func=cmd_compile_out)

    entail_p = sub.add_parser("entail", help="feature-logic entailment query")
    entail_p.add_argument("left")
    entail_p.add_argument("right")
    entail_p.add_argument("--json", action="store_true")
    entail_p.set_defaults(func=cmd_entail)

    batch_p = sub.add_parser("batch", help="run a script of commands")
    batch_p.add_argument("script")
    batch_p.add_argument("--parallel", action="store_true")
    batch_p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (ParseError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
