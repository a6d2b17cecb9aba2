"""Covers and equality-interpolating terms for EUF.

A class of the congruence closure is *representable* when it contains a
parameter, a constant, or an application whose arguments are all
representable; its representative is the smallest such parameter-only term.
Everything the constraint says about parameters is carried by representable
classes, except what would follow from identifying two of them.  The only
identifications that matter are those that make two applications (or two
opposite predicate literals), at least one of them mentioning a class with
no parameter-only term, congruent; those pairs are decided by case
splitting.  Once every such pair is decided, the literals over
representatives of a branch form its cover; the cover of the input is the
disjunction over branches.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InternalError
from .kernel import (
    FALSE, TRUE, Constraint, FreshNames, Formula, Literal, Term, conj, disj, eq, free_vars,
    neg, neq, substitute,
)
from .solver.cc import EGraph
from .solver.entail import simplify_formula

MAX_BRANCHES = 10_000


def _lits(phi) -> list[Literal]:
    if isinstance(phi, Constraint):
        return list(phi.literals)
    if isinstance(phi, Literal):
        return [phi]
    return list(phi)


def _representatives(g: EGraph, is_base) -> dict[int, Term]:
    """Smallest base-built term for every class that has one."""
    rep: dict[int, Term] = {}
    changed = True
    while changed:
        changed = False
        for i, t in enumerate(g.terms):
            if t.is_var:
                if not is_base(t):
                    continue
                cand = t
            elif t.is_num or not t.args:
                cand = t
            else:
                kids = [rep.get(g.find(g.ids[a])) for a in t.args]
                if any(k is None for k in kids):
                    continue
                cand = Term(t.kind, t.name, tuple(kids), t.sort, t.value)
            r = g.find(i)
            cur = rep.get(r)
            if cur is None or cand.key() < cur.key():
                rep[r] = cand
                changed = True
    return rep


def _decided(g: EGraph, a: int, b: int) -> bool:
    f = g.find
    return f(a) == f(b) or any({f(x), f(y)} == {f(a), f(b)} for x, y in g.diseqs)


def _relevant_pairs(g: EGraph, rep: dict[int, Term]) -> list[tuple[int, int]]:
    """Undecided pairs of representable classes whose identification would
    make two applications, or two opposite predicate literals, congruent."""
    f = g.find
    groups: dict[tuple, list[tuple[int, tuple[int, ...]]]] = {}
    for i, t in enumerate(g.terms):
        if t.is_app and t.args:
            groups.setdefault(("f", t.name, t.sort, len(t.args)), []).append(
                (f(i), tuple(g.ids[a] for a in t.args)))
    for p, ids, pol in g.preds:
        groups.setdefault(("p", p, len(ids)), []).append((pol, ids))
    found: dict[tuple[int, int], None] = {}
    for key, items in groups.items():
        for (c1, a1), (c2, a2) in itertools.combinations(items, 2):
            if key[0] == "f" and f(c1) == f(c2):
                continue
            if key[0] == "p" and c1 == c2:
                continue
            if all(f(x) in rep for x in a1 + a2):
                # both sides already described over representatives
                continue
            diffs = []
            for x, y in zip(a1, a2):
                rx, ry = f(x), f(y)
                if rx == ry:
                    continue
                if rx in rep and ry in rep:
                    diffs.append((rx, ry))
                else:
                    diffs = None
                    break
            if not diffs:
                continue
            for rx, ry in diffs:
                if not _decided(g, rx, ry):
                    found[(min(rx, ry), max(rx, ry))] = None
    return sorted(found, key=lambda p: tuple(sorted((rep[p[0]].key(), rep[p[1]].key()))))


def _describe(g: EGraph, rep: dict[int, Term], is_base) -> list[Literal]:
    """Literals over representatives entailed by the closure."""
    f = g.find
    out: dict[Literal, None] = {}
    for i, t in enumerate(g.terms):
        r = f(i)
        if r not in rep:
            continue
        if t.is_var:
            if not is_base(t):
                continue
            cand = t
        elif t.is_num or not t.args:
            cand = t
        else:
            kids = [rep.get(f(g.ids[a])) for a in t.args]
            if any(k is None for k in kids):
                continue
            cand = Term(t.kind, t.name, tuple(kids), t.sort, t.value)
        if cand is not rep[r]:
            out[eq(cand, rep[r])] = None
    for a, b in g.diseqs:
        ra, rb = f(a), f(b)
        if ra in rep and rb in rep:
            out[neq(rep[ra], rep[rb])] = None
    for p, ids, pol in g.preds:
        roots = [f(i) for i in ids]
        if all(r in rep for r in roots):
            out[Literal(p, tuple(rep[r] for r in roots), pol)] = None
    return sorted(out, key=str)


def euf_branches(phi, evars: Iterable[Term]) -> list[list[Literal]]:
    """Cover of ``exists evars. phi`` as a list of conjunctions (one per
    consistent case split)."""
    lits = _lits(phi)
    ev = set(evars)
    is_base = lambda v: v not in ev
    out: list[list[Literal]] = []

    def walk(decisions: list[Literal]) -> None:
        g = EGraph(lits + decisions)
        if not g.consistent():
            return
        rep = _representatives(g, is_base)
        pairs = _relevant_pairs(g, rep)
        if not pairs:
            out.append(_describe(g, rep, is_base))
            if len(out) > MAX_BRANCHES:
                raise InternalError(f"EUF case split exceeded {MAX_BRANCHES} branches")
            return
        a, b = rep[pairs[0][0]], rep[pairs[0][1]]
        walk(decisions + [eq(a, b)])
        walk(decisions + [neq(a, b)])

    walk([])
    return out


def euf_cover(phi, evars: Iterable[Term], simplify: bool = True) -> Formula:
    """Cover of ``exists evars. phi`` for a conjunction of EUF literals
    (``FALSE`` when ``phi`` is unsatisfiable)."""
    branches = euf_branches(phi, evars)
    f = disj(*(conj(*b) for b in branches)) if branches else FALSE
    return simplify_formula(f) if simplify else f


# ---------------------------------------------------------------------------
# saturated presentation

@dataclass
class OrderedLiteralSet:
    """A convergent presentation of a congruence closure.

    ``rules`` are oriented equations ``lhs -> rhs`` with ``rhs`` the class
    representative; parameter-only terms are preferred as representatives,
    so any term that mentions an existential sits on the left of a rule or
    is the representative of a class with no parameter-only member.
    """

    rules: list[tuple[Term, Term]] = field(default_factory=list)
    disequalities: list[tuple[Term, Term]] = field(default_factory=list)
    predicates: list[Literal] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    evars: tuple[Term, ...] = ()

    def literals(self) -> list[Literal]:
        return ([eq(l, r) for l, r in self.rules] + [neq(a, b) for a, b in self.disequalities]
                + list(self.predicates))

    def residue(self) -> list[Literal]:
        """The existential-free part (a residue, not the cover in general)."""
        ev = set(self.evars)
        return [l for l in self.literals() if not any(v in ev for v in l.vars())]


def euf_saturate(phi, evars: Iterable[Term]) -> OrderedLiteralSet:
    lits = _lits(phi)
    ev = tuple(evars)
    evs = set(ev)
    g = EGraph()
    log = []
    for lit in lits:
        g.assert_literal(lit)
        log.append(f"assert {lit}")
    rep = _representatives(g, lambda v: v not in evs)
    full = dict(rep)
    # classes with no parameter-only term get their smallest term overall
    for r, t in _representatives(g, lambda v: True).items():
        full.setdefault(r, t)
    out = OrderedLiteralSet(evars=ev, log=log)
    f = g.find
    seen: dict[tuple[Term, Term], None] = {}
    for i, t in enumerate(g.terms):
        r = f(i)
        if t.is_var or t.is_num or not t.args:
            cand = t
        else:
            cand = Term(t.kind, t.name, tuple(full[f(g.ids[a])] for a in t.args), t.sort, t.value)
        if cand is not full[r]:
            seen[(cand, full[r])] = None
    out.rules = sorted(seen, key=lambda p: (str(p[0]), str(p[1])))
    out.disequalities = sorted(dict.fromkeys(
        tuple(sorted((full[f(a)], full[f(b)]), key=Term.key, reverse=True)) for a, b in g.diseqs), key=str)
    out.predicates = sorted(dict.fromkeys(
        Literal(p, tuple(full[f(i)] for i in ids), pol) for p, ids, pol in g.preds), key=str)
    if not g.consistent():
        out.log.append("inconsistent")
    return out


# ---------------------------------------------------------------------------
# implicit definitions

def euf_interpolating_term(constraint_a, constraint_b, e: Term, params: Sequence[Term] | None = None) -> Term | None:
    """A parameter-only term ``t`` with ``A & B |= e = t``, or ``None``.

    ``params`` defaults to the variables of ``A`` not listed among its
    existentials (other than ``e``).
    """
    lits = _lits(constraint_a) + _lits(constraint_b or ())
    if params is None:
        ex = set(constraint_a.existentials) if isinstance(constraint_a, Constraint) else set()
        ex.add(e)
        base = lambda v: v not in ex
    else:
        ps = set(params)
        base = lambda v: v in ps
    g = EGraph(lits)
    if not g.consistent():
        return None
    rep = _representatives(g, base)
    return rep.get(g.find(g.add(e)))


def rename_apart(phi, keep: Iterable[Term], fresh: FreshNames) -> tuple[list[Literal], dict[Term, Term]]:
    keep = set(keep)
    mapping = {v: fresh.prime(v) for v in free_vars(_lits(phi)) if v not in keep}
    return substitute(_lits(phi), mapping), mapping


def euf_impl_def(psi, e: Term, params: Sequence[Term]) -> Formula:
    """Condition on ``params`` under which ``psi`` determines ``e`` uniquely:
    the negation of the cover of ``psi & psi' & e != e'`` where ``psi'``
    renames every non-parameter."""
    lits = _lits(psi)
    fresh = FreshNames(v.name for v in free_vars(lits))
    ps = set(params)
    if e in ps:
        return TRUE
    copy, mapping = rename_apart(lits, params, fresh)
    if e not in mapping:
        mapping[e] = fresh.prime(e)
    evs = [v for v in free_vars(lits) if v not in ps] + list(mapping.values())
    cov = euf_cover(lits + copy + [neq(e, mapping[e])], evs)
    return simplify_formula(neg(cov))
