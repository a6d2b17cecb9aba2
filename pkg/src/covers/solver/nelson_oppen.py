"""Combined satisfiability for EUF + LRA by equality propagation."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from ..kernel import Constraint, FreshNames, Literal, Term, enumerate_partitions, eq, free_vars, purify
from .cc import EGraph, SatVerdict
from .lra import LinAtom, atoms_of, lra_entails, lra_model, lra_sat


def _split(lits: tuple[Literal, ...]):
    fresh = FreshNames((v.name for v in free_vars(lits)), prefix="_n")
    psi1, psi2, _ = purify(Constraint(lits), fresh)
    return list(psi1.literals), atoms_of(psi2.literals)


def _shared(euf: list[Literal], ari: list[LinAtom]) -> list[Term]:
    left = {v: None for l in euf for v in l.vars()}
    right = {v for a in ari for v in a.vars()}
    return [v for v in left if v in right and v.sort.shared]


def _var_eq(v: Term, w: Term) -> LinAtom:
    return LinAtom.make({v: Fraction(1), w: Fraction(-1)}, 0, "=")


def nelson_oppen_sat(c: Iterable[Literal], arrangements: bool = False) -> SatVerdict:
    """Decide a conjunction of EUF + LRA literals.

    Both theories are convex, so propagating single entailed equalities
    between shared variables until fixpoint is complete.  ``arrangements``
    switches to guessing every arrangement of the shared variables instead.
    """
    lits = tuple(c)
    euf, ari = _split(lits)
    shared = _shared(euf, ari)
    if arrangements:
        return _by_arrangement(lits, euf, ari, shared)
    g = EGraph(euf)
    if not g.consistent():
        return SatVerdict(False, core=lits)
    known: set[tuple[Term, Term]] = set()
    while True:
        m = lra_model(ari)
        if m is None:
            return SatVerdict(False, core=lits)
        progress = False
        groups: dict[int, list[Term]] = {}
        for v in shared:
            groups.setdefault(g.find(g.add(v)), []).append(v)
        for vs in groups.values():
            for w in vs[1:]:
                if (vs[0], w) not in known:
                    known.add((vs[0], w))
                    if m.get(vs[0], Fraction(0)) != m.get(w, Fraction(0)):
                        progress = True
                    ari.append(_var_eq(vs[0], w))
        if progress:
            continue
        for i, v in enumerate(shared):
            for w in shared[i + 1:]:
                if g.find(g.ids[v]) == g.find(g.ids[w]):
                    continue
                if m.get(v, Fraction(0)) != m.get(w, Fraction(0)):
                    continue
                if lra_entails(ari, _var_eq(v, w)):
                    g.merge(g.ids[v], g.ids[w])
                    progress = True
        if not progress:
            return SatVerdict(True)
        if not g.consistent():
            return SatVerdict(False, core=lits)


def _by_arrangement(lits, euf, ari, shared) -> SatVerdict:
    for part, diseqs in enumerate_partitions(shared):
        extra = [eq(b[0], v) for b in part.blocks for v in b[1:]] + list(diseqs.literals)
        g = EGraph(euf + extra)
        if not g.consistent():
            continue
        if lra_sat(ari + atoms_of(extra)):
            return SatVerdict(True, arrangement=[list(b) for b in part.blocks])
    return SatVerdict(False, core=lits)


@lru_cache(maxsize=1 << 17)
def _sat_cached(lits: frozenset) -> bool:
    return nelson_oppen_sat(sorted(lits, key=str)).sat


def is_sat_conj(lits: Iterable[Literal]) -> bool:
    return _sat_cached(frozenset(lits))
