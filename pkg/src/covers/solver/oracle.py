"""Brute-force residues over a bounded term language (test oracle only).

The strongest residue of ``exists e. phi`` expressible with atoms over a
finite term set is the disjunction of the complete types (maximal consistent
assignments to those atoms) that are jointly satisfiable with ``phi``.  That
disjunction is equivalent to the conjunction of every entailed clause, and it
is cheap to compare: two formulas over the same term set are equivalent iff
they admit the same complete types.
"""
from __future__ import annotations

import itertools
from typing import Sequence

from ..errors import OracleLimitError
from ..kernel import (
    ARITH_PREDS, EQ, FALSE, Constraint, Formula, Literal, Term, app, conj, disj, eq, free_vars,
    literals_of, lt, neq, to_dnf,
)
from .entail import sat_cnf


def _signature_of(lits: Sequence[Literal]):
    funcs: dict[str, tuple[tuple, object]] = {}
    preds: dict[str, tuple] = {}
    arith = False
    for lit in lits:
        if lit.pred in ARITH_PREDS:
            arith = True
        elif lit.pred != EQ:
            preds.setdefault(lit.pred, tuple(a.sort for a in lit.args))
        for a in lit.args:
            for t in a.subterms():
                if t.is_arith:
                    arith = True
                elif t.is_app:
                    funcs.setdefault(t.name, (tuple(s.sort for s in t.args), t.sort))
    return funcs, preds, arith


def bounded_terms(params: Sequence[Term], funcs, depth: int, max_terms: int = 14) -> list[Term]:
    """Parameters closed under ``funcs`` up to nesting ``depth``."""
    levels = [list(params) + [app(f, sort=cod) for f, (dom, cod) in sorted(funcs.items()) if not dom]]
    every = list(levels[0])
    for d in range(1, depth + 1):
        new = []
        for f, (dom, cod) in sorted(funcs.items()):
            if not dom:
                continue
            pools = [[t for t in every if t.sort == s] for s in dom]
            for args in itertools.product(*pools):
                if max(a.depth for a in args) != d - 1:
                    continue
                t = app(f, *args, sort=cod)
                if t not in every and t not in new:
                    new.append(t)
        levels.append(new)
        every.extend(new)
        if len(every) > max_terms:
            raise OracleLimitError(f"{len(every)} terms at depth {d} exceed the limit of {max_terms}")
    return every


class _Search:
    def __init__(self, disjuncts: list[list[Literal]], max_nodes: int):
        self.disjuncts = disjuncts
        self.max_nodes = max_nodes
        self.nodes = 0

    def ok(self, lits: list[Literal]) -> bool:
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise OracleLimitError(f"type enumeration exceeded {self.max_nodes} nodes")
        return any(sat_cnf(d + lits, ()) for d in self.disjuncts)


def residue_types(f, terms: Sequence[Term], preds=None, arith: bool = False,
                  max_nodes: int = 200_000) -> list[tuple[Literal, ...]]:
    """Complete types over ``terms`` consistent with ``f``.

    A type fixes the partition of ``terms`` into equality classes, the truth
    of each predicate on class representatives and, when ``arith`` is set, the
    strict order of representatives of shared sorts.
    """
    if isinstance(f, Constraint):
        f = f.formula()
    if not isinstance(f, Formula):
        f = conj(*f)
    disjuncts = [list(d.literals) for d in to_dnf(f)]
    preds = preds or {}
    search = _Search(disjuncts, max_nodes)
    out: list[tuple[Literal, ...]] = []

    def atoms_after(reps: list[Term]) -> list[tuple[Literal, Literal]]:
        pairs = []
        if arith:
            for a, b in itertools.combinations(reps, 2):
                if a.sort == b.sort and a.sort.shared:
                    pairs.append((lt(a, b), lt(b, a)))
        for p, dom in sorted(preds.items()):
            pools = [[r for r in reps if r.sort == s] for s in dom]
            for args in itertools.product(*pools):
                l = Literal(p, tuple(args))
                pairs.append((l, ~l))
        return pairs

    def finish(lits: list[Literal], choices, k: int) -> None:
        if k == len(choices):
            out.append(tuple(lits))
            return
        for l in choices[k]:
            if search.ok(lits + [l]):
                finish(lits + [l], choices, k + 1)

    def place(i: int, reps: list[Term], lits: list[Literal]) -> None:
        if i == len(terms):
            finish(lits, atoms_after(reps), 0)
            return
        t = terms[i]
        same = [r for r in reps if r.sort == t.sort]
        for r in same:
            cand = lits + [eq(t, r)]
            if search.ok(cand):
                place(i + 1, reps, cand)
        cand = lits + [neq(t, r) for r in same]
        if search.ok(cand):
            place(i + 1, reps + [t], cand)

    if disjuncts and search.ok([]):
        place(0, [], [])
    return out


def bounded_residue_oracle(phi, evars: Sequence[Term], depth: int, max_terms: int = 14,
                           max_nodes: int = 200_000) -> Formula:
    """Strongest residue of ``exists evars. phi`` over parameter terms of
    depth at most ``depth``, as a disjunction of complete types."""
    lits = list(phi.literals if isinstance(phi, Constraint) else literals_of(phi) if isinstance(phi, Formula) else phi)
    evs = set(evars)
    params = [v for v in free_vars(lits) if v not in evs]
    funcs, preds, arith = _signature_of(lits)
    terms = bounded_terms(params, funcs, depth, max_terms)
    f = phi if isinstance(phi, Formula) else conj(*lits)
    types = residue_types(f, terms, preds, arith, max_nodes)
    if not types:
        return FALSE
    return disj(*(conj(*t) for t in types))


def oracle_language(phi, evars: Sequence[Term], depth: int, max_terms: int = 14):
    """``(terms, preds, arith)`` of the bounded language used by the oracle."""
    lits = list(phi.literals if isinstance(phi, Constraint) else phi)
    evs = set(evars)
    params = [v for v in free_vars(lits) if v not in evs]
    funcs, preds, arith = _signature_of(lits)
    return bounded_terms(params, funcs, depth, max_terms), preds, arith
