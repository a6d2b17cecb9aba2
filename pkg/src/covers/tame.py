"""Covers for tame multi-sorted combinations.

In a tame combination the shared sorts occur in the first signature only as
codomains, so first-theory terms can appear inside second-theory literals
but never the other way round.  The cover is computed in three steps:

1. flatten: name every first-theory term at a shared-sort position of the
   second constraint by a fresh variable ``eta'``;
2. take the first-theory cover of ``phi & eta' = t(e, x)`` with ``x`` and
   ``eta'`` as parameters and split each DNF disjunct into literals on
   non-shared sorts and (dis)equalities on shared sorts, abstracting every
   shared-sort term ``t'(x)`` by a fresh variable ``xi'``;
3. take the second-theory cover of the shared-sort part together with the
   flattened second constraint, eliminating ``eta`` and ``eta'``, and put
   ``t'(x)`` back for ``xi'``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .combined import EUF_HANDLE, LRA_HANDLE, TheoryHandle
from .errors import InternalError, UnsupportedCombinationError
from .kernel import (
    ARITH_FUNCS, FALSE, Constraint, FreshNames, Formula, Literal, Signature, Term, conj, disj, eq,
    free_vars, substitute, to_dnf,
)
from .solver.entail import simplify_formula


def shared_sorts(sig1: Signature, sig2: Signature) -> set:
    return {s for name, s in sig1.sorts.items() if name in sig2.sorts}


def check_tame(sig1: Signature, sig2: Signature) -> bool:
    """No first-signature symbol takes an argument of a shared sort."""
    shared = shared_sorts(sig1, sig2)
    for dom, _ in sig1.functions.values():
        if any(s in shared for s in dom):
            return False
    for dom in sig1.predicates.values():
        if any(s in shared for s in dom):
            return False
    return True


@dataclass
class TameProblem:
    """``exists evars (phi & psi)``: ``phi`` over the first signature,
    ``psi`` over the second with first-signature terms allowed at
    shared-sort argument positions."""

    phi: Constraint
    psi: Constraint
    evars: tuple[Term, ...]
    sig1: Signature
    sig2: Signature

    @property
    def params(self) -> tuple[Term, ...]:
        ev = set(self.evars)
        return tuple(v for v in free_vars(list(self.phi.literals) + list(self.psi.literals)) if v not in ev)


@dataclass
class FlatTame:
    phi: list[Literal]
    psi: list[Literal]
    eta: list[Term]
    defs: list[tuple[Term, Term]] = field(default_factory=list)


def _is_first(t: Term, sig1: Signature) -> bool:
    if not t.is_app or t.name in ARITH_FUNCS:
        return False
    return not sig1.functions or t.name in sig1.functions


def tame_flatten(p: TameProblem, fresh: FreshNames | None = None) -> FlatTame:
    """Abstract first-signature terms inside ``psi`` by fresh ``eta'``."""
    lits = list(p.phi.literals) + list(p.psi.literals)
    fresh = fresh or FreshNames((v.name for v in free_vars(lits)), prefix="eta")
    memo: dict[Term, Term] = {}
    defs: list[tuple[Term, Term]] = []

    def walk(t: Term) -> Term:
        if _is_first(t, p.sig1):
            d = memo.get(t)
            if d is None:
                d = fresh.new(t.sort)
                memo[t] = d
                defs.append((d, t))
            return d
        if not t.args:
            return t
        return Term(t.kind, t.name, tuple(walk(a) for a in t.args), t.sort, t.value)

    psi = [Literal(l.pred, tuple(walk(a) for a in l.args), l.positive) for l in p.psi.literals]
    phi = list(p.phi.literals) + [eq(d, t) for d, t in defs]
    return FlatTame(phi, psi, [d for d, _ in defs], defs)


def _abstract(lit: Literal, shared: set, memo: dict, order: list, fresh: FreshNames) -> Literal:
    def walk(t: Term) -> Term:
        if t.is_app and t.sort in shared:
            d = memo.get(t)
            if d is None:
                d = fresh.new(t.sort, prefix="xi")
                memo[t] = d
                order.append((d, t))
            return d
        return t

    return Literal(lit.pred, tuple(walk(a) for a in lit.args), lit.positive)


def tame_cover(p: TameProblem, h1: TheoryHandle = EUF_HANDLE, h2: TheoryHandle = LRA_HANDLE,
               trace: list | None = None) -> Formula:
    if not check_tame(p.sig1, p.sig2):
        raise UnsupportedCombinationError("combination is not tame: a first-signature symbol has a shared-sort argument")
    for h in (h1, h2):
        if not h.stably_infinite:
            raise UnsupportedCombinationError(f"theory {h.name} is not stably infinite on the shared sorts")
    shared = shared_sorts(p.sig1, p.sig2) or {s for s in (v.sort for v in p.params) if s.shared}
    names = [v.name for v in free_vars(list(p.phi.literals) + list(p.psi.literals))]
    fresh = FreshNames(names, prefix="eta")
    flat = tame_flatten(p, fresh)
    ev = set(p.evars)
    e1 = [v for v in free_vars(flat.phi) if v in ev]
    cov1 = h1.cover(flat.phi, e1)
    if trace is not None:
        trace.append(("T1-cover", cov1))
    memo: dict[Term, Term] = {}
    order: list[tuple[Term, Term]] = []
    out: list[Formula] = []
    for d in to_dnf(cov1):
        first, second = [], []
        for lit in d.literals:
            if any(a.sort in shared for a in lit.args):
                a = _abstract(lit, shared, memo, order, fresh)
                if not (a.pred == "=" and all(x.is_var for x in a.args)):
                    raise InternalError(f"shared-sort part of the first cover is not a variable (dis)equality: {lit}")
                second.append(a)
            else:
                first.append(lit)
        drop = [v for v in free_vars(second + flat.psi) if v in ev or v in set(flat.eta)]
        cov2 = h2.cover(second + flat.psi, drop)
        back = {x: t for x, t in order}
        piece = conj(*first, substitute(cov2, back))
        if trace is not None:
            trace.append(("disjunct", conj(*d.literals), cov2))
        out.append(piece)
    result = disj(*out) if out else FALSE
    return simplify_formula(result)
