"""``covers`` command: read a problem file, print its cover."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence, TextIO

from ..combined import EUF_HANDLE, HANDLES, LRA_HANDLE, Trace, combined_cover
from ..errors import CoverError, OracleLimitError, UnsupportedCombinationError
from ..euf_cover import euf_cover
from ..kernel import Constraint, Formula, Signature, conj, free_vars
from ..lra_cover import LinSystem, lra_cover
from ..solver.entail import entails, simplify_formula
from ..solver.oracle import oracle_language, residue_types
from ..tame import TameProblem, tame_cover
from .problem import ProblemFile, format_formula, parse_problem

log = logging.getLogger("covers")

EXIT_OK, EXIT_ERROR, EXIT_UNSUPPORTED = 0, 1, 2


def _signatures(p: ProblemFile) -> tuple[Signature, Signature]:
    sorts = {s: p.sort(s) for s in p.sorts}
    sorts["Real"] = p.sort("Real")
    functions, predicates = {}, {}
    for f, (dom, cod) in p.functions.items():
        d = tuple(p.sort(s) for s in dom)
        if cod == "Bool":
            predicates[f] = d
        else:
            functions[f] = (d, p.sort(cod))
    sig1 = Signature(sorts=sorts, functions=functions, predicates=predicates, side=1)
    sig2 = Signature(sorts={"Real": p.sort("Real")}, side=2)
    return sig1, sig2


def compute(p: ProblemFile, trace: list | None = None, simplify: bool = True, jobs: int = 1) -> Formula:
    lits = list(p.asserts)
    evars = p.evars
    theory = p.theory
    if theory == "euf":
        return euf_cover(lits, evars, simplify=simplify)
    if theory == "lra":
        return lra_cover(LinSystem.from_constraint(lits, evars), simplify=simplify)
    if theory == "tame":
        sig1, sig2 = _signatures(p)
        phi = [l for l in lits if not any(a.sort.shared for a in l.args)]
        psi = [l for l in lits if any(a.sort.shared for a in l.args)]
        prob = TameProblem(Constraint(tuple(phi)), Constraint(tuple(psi)), tuple(evars), sig1, sig2)
        return tame_cover(prob, trace=trace)
    if theory in ("euf+lra", "idl+euf", "lia+euf"):
        h2 = LRA_HANDLE if theory == "euf+lra" else HANDLES[theory.split("+")[0]]
        phi = Constraint(tuple(lits), tuple(p.params), tuple(evars))
        return combined_cover(phi, evars, EUF_HANDLE, h2, trace=trace, jobs=jobs, simplify=simplify)
    raise CoverError(f"unknown theory {theory}")


def verify(p: ProblemFile, cover: Formula, depth: int = 1) -> list[str]:
    """Residue check plus a bounded-oracle cross-check; returns problems."""
    problems = []
    lits = list(p.asserts)
    if not entails(conj(*lits), cover):
        problems.append("input does not entail the cover")
    try:
        terms, preds, arith = oracle_language(lits, p.evars, depth)
        allowed = set(residue_types(conj(*lits), terms, preds, arith))
        extra = [t for t in residue_types(cover, terms, preds, arith) if t not in allowed]
        if extra:
            problems.append(f"cover admits a type the input rules out: {conj(*extra[0])}")
    except OracleLimitError as err:
        log.info("bounded oracle skipped: %s", err)
    ev = set(p.evars)
    if any(v in ev for v in free_vars(cover)):
        problems.append("cover mentions an existential variable")
    return problems


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covers", description="Compute the cover (uniform interpolant) of a problem file.")
    ap.add_argument("file", help="problem file, or - for standard input")
    ap.add_argument("--verify", action="store_true", help="check the residue property and cross-check with the bounded oracle")
    ap.add_argument("--trace", action="store_true", help="print working-formula transitions to stderr")
    ap.add_argument("--format", choices=("dnf", "raw"), default="dnf", help="simplified DNF (default) or unsimplified output")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for partition branches")
    return ap


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    level = os.environ.get("COVER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=stderr)
    try:
        text = sys.stdin.read() if args.file == "-" else open(args.file, encoding="utf-8").read()
    except OSError as err:
        print(f"error: {err}", file=stderr)
        return EXIT_ERROR
    try:
        p = parse_problem(text)
        trace = Trace() if args.trace else None
        cover = compute(p, trace, simplify=args.format == "dnf", jobs=args.jobs)
        if args.format == "dnf":
            cover = simplify_formula(cover)
        if trace is not None:
            for ev in trace:
                print(ev if not isinstance(ev, tuple) else " ".join(map(str, ev)), file=stderr)
        print(format_formula(cover), file=stdout)
        if args.verify:
            problems = verify(p, cover)
            if problems:
                for msg in problems:
                    print(f"verification failed: {msg}", file=stderr)
                return EXIT_ERROR
            print("verified: residue-check passed", file=stdout)
        return EXIT_OK
    except UnsupportedCombinationError as err:
        print(f"unsupported combination: {err}", file=stderr)
        return EXIT_UNSUPPORTED
    except CoverError as err:
        print(f"error: {err}", file=stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
