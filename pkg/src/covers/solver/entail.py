"""Entailment between quantifier-free formulas and a DNF simplifier."""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from ..kernel import (
    EQ, FALSE, TRUE, Constraint, Formula, Literal, conj, disj, normalize_term, to_dnf,
)
from .lra import LinAtom, _test, from_literal, is_arith_literal
from .nelson_oppen import is_sat_conj


def _as_formula(x) -> Formula:
    if isinstance(x, Formula):
        return x
    if isinstance(x, Constraint):
        return x.formula()
    return conj(*x)


def normalize_literal(lit: Literal):
    """Canonical literal, or ``True``/``False`` when it is trivially decided."""
    if is_arith_literal(lit):
        a = from_literal(lit)
        if a.ground:
            return _test(a.const, a.rel)
        return a.to_literal(lit.args[0].sort)
    args = tuple(normalize_term(t) for t in lit.args)
    out = Literal(lit.pred, args, lit.positive)
    if out.pred == EQ and out.args[0] is out.args[1]:
        return out.positive
    return out


def _normalize_conj(lits: Iterable[Literal]) -> list[Literal] | None:
    out: dict[Literal, None] = {}
    for l in lits:
        n = normalize_literal(l)
        if n is True:
            continue
        if n is False:
            return None
        out[n] = None
    if any(~l in out for l in out):
        return None
    return list(out)


def _sat_search(base: list[Literal], clauses: list[list[Literal]]) -> bool:
    if not is_sat_conj(base):
        return False
    have = set(base)
    best = None
    for cl in clauses:
        if any(l in have for l in cl):
            continue
        live = [l for l in cl if ~l not in have]
        if not live:
            return False
        if best is None or len(live) < len(best):
            best = live
    if best is None:
        return True
    return any(_sat_search(base + [l], clauses) for l in best)


def sat_cnf(base: Sequence[Literal], clauses: Sequence[Sequence[Literal]]) -> bool:
    """Is ``base`` together with the clause set satisfiable (modulo EUF + LRA)?"""
    base = _normalize_conj(base)
    if base is None:
        return False
    cls = []
    for cl in clauses:
        lits = []
        taut = False
        for l in cl:
            n = normalize_literal(l)
            if n is True:
                taut = True
                break
            if n is not False:
                lits.append(n)
        if not taut:
            cls.append(lits)
    return _sat_search(base, cls)


def is_sat(f) -> bool:
    return any(sat_cnf(d.literals, ()) for d in to_dnf(_as_formula(f)))


def _negated_clauses(f: Formula) -> list[list[Literal]]:
    return [[~l for l in d.literals] for d in to_dnf(f)]


def entails(h, c) -> bool:
    """``h |= c`` modulo EUF + LRA."""
    hf, cf = _as_formula(h), _as_formula(c)
    clauses = _negated_clauses(cf)
    return not any(sat_cnf(d.literals, clauses) for d in to_dnf(hf))


def equivalent(a, b) -> bool:
    return entails(a, b) and entails(b, a)


# ---------------------------------------------------------------------------
# simplification

def _merge_literals(p: Literal, q: Literal) -> Literal | None:
    """A single literal equivalent to ``p | q``, if there is an obvious one."""
    if is_arith_literal(p) and is_arith_literal(q):
        a, b = from_literal(p), from_literal(q)
        for x, y in ((a, b), (b, a)):
            if x.rel == "<" and y.rel == "<":
                if LinAtom.make({v: -c for v, c in x.coeffs}, -x.const, "<") == y:
                    return LinAtom.make(x.cmap, x.const, "!=").to_literal(p.args[0].sort)
            if x.rel == "<" and y.rel == "=" and LinAtom.make(x.cmap, x.const, "=") == y:
                return LinAtom.make(x.cmap, x.const, "<=").to_literal(p.args[0].sort)
    return None


def _drop_redundant(lits: list[Literal], context: Sequence[Literal]) -> list[Literal]:
    cur = sorted(lits, key=lambda l: (l.positive and l.pred == EQ, len(str(l))), reverse=True)
    i = 0
    while i < len(cur):
        rest = cur[:i] + cur[i + 1:]
        if not sat_cnf(rest + list(context), [[~cur[i]]]):
            cur = rest
        else:
            i += 1
    return cur


def simplify_formula(f, context: Sequence[Literal] = ()) -> Formula:
    """An equivalent (modulo ``context``) DNF with fewer, canonical literals.

    Unsatisfiable disjuncts and entailed literals are dropped, a disjunct
    that entails another is removed, and pairs differing in one literal are
    merged (``C & l | C & ~l`` to ``C``, ``a<b | b<a`` to ``a!=b``,
    ``a<b | a=b`` to ``a<=b``).  The result is sorted deterministically.
    """
    context = list(context)
    cur: list[list[Literal]] = []
    for d in to_dnf(_as_formula(f)):
        lits = _normalize_conj(d.literals)
        if lits is None or not sat_cnf(lits + context, ()):
            continue
        cur.append(_drop_redundant(lits, context))
    changed = True
    while changed:
        changed = False
        for i, j in itertools.permutations(range(len(cur)), 2):
            if not sat_cnf(cur[i] + context, _negated_clauses(conj(*cur[j]))):
                cur.pop(i)
                changed = True
                break
        if changed:
            continue
        for i, j in itertools.combinations(range(len(cur)), 2):
            si, sj = set(cur[i]), set(cur[j])
            xi, xj = si - sj, sj - si
            if len(xi) != 1 or len(xj) != 1:
                continue
            (p,), (q,) = xi, xj
            common = [l for l in cur[i] if l in sj]
            if normalize_literal(~p) == q:
                merged = common
            else:
                m = _merge_literals(p, q)
                if m is None:
                    continue
                merged = common + [m]
            cur = [d for k, d in enumerate(cur) if k not in (i, j)]
            cur.append(_drop_redundant(merged, context))
            changed = True
            break
    if any(not d for d in cur):
        return TRUE
    cur = [sorted(d, key=str) for d in cur]
    cur.sort(key=lambda d: [str(l) for l in d])
    return disj(*(conj(*d) for d in cur)) if cur else FALSE
