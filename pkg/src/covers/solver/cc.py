"""Congruence closure over hash-consed terms (ground EUF)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..errors import TheoryError
from ..kernel import ARITH_PREDS, EQ, Literal, Term


class EGraph:
    """Union-find over term nodes with a congruence table.

    Nodes are registered for every subterm of every literal.  Predicate
    literals are kept aside as ``(pred, arg class ids, polarity)`` and checked
    for clashes after closure.
    """

    def __init__(self, literals: Iterable[Literal] = ()):
        self.parent: list[int] = []
        self.terms: list[Term] = []
        self.ids: dict[Term, int] = {}
        self.uses: list[list[int]] = []
        self.sig: dict[tuple, int] = {}
        self.diseqs: list[tuple[int, int]] = []
        self.preds: list[tuple[str, tuple[int, ...], bool]] = []
        self.conflict = False
        for lit in literals:
            self.assert_literal(lit)

    # -- union-find
    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def add(self, t: Term) -> int:
        i = self.ids.get(t)
        if i is not None:
            return i
        kids = tuple(self.add(a) for a in t.args)
        i = len(self.terms)
        self.terms.append(t)
        self.parent.append(i)
        self.uses.append([])
        self.ids[t] = i
        if kids:
            key = (t.name, t.sort, tuple(self.find(k) for k in kids))
            other = self.sig.get(key)
            for k in dict.fromkeys(self.find(k) for k in kids):
                self.uses[k].append(i)
            if other is None:
                self.sig[key] = i
            else:
                self.merge(i, other)
        return i

    def _key(self, i: int) -> tuple:
        t = self.terms[i]
        return (t.name, t.sort, tuple(self.find(self.ids[a]) for a in t.args))

    def merge(self, a: int, b: int) -> None:
        pending = [(a, b)]
        while pending:
            x, y = pending.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if len(self.uses[rx]) > len(self.uses[ry]):
                rx, ry = ry, rx
            # rx joins ry
            moved = self.uses[rx]
            self.parent[rx] = ry
            self.uses[rx] = []
            for u in moved:
                key = self._key(u)
                other = self.sig.get(key)
                if other is None:
                    self.sig[key] = u
                elif self.find(other) != self.find(u):
                    pending.append((u, other))
                self.uses[ry].append(u)

    def assert_literal(self, lit: Literal) -> None:
        if lit.pred in ARITH_PREDS:
            raise TheoryError(f"arithmetic literal in EUF: {lit}")
        for a in lit.args:
            if a.is_arith and not a.is_num:
                raise TheoryError(f"arithmetic term in EUF: {a}")
        if lit.pred == EQ:
            a, b = (self.add(x) for x in lit.args)
            if lit.positive:
                self.merge(a, b)
            else:
                self.diseqs.append((a, b))
        else:
            ids = tuple(self.add(x) for x in lit.args)
            self.preds.append((lit.pred, ids, lit.positive))

    def consistent(self) -> bool:
        f = self.find
        for a, b in self.diseqs:
            if f(a) == f(b):
                return False
        seen: dict[tuple, bool] = {}
        for p, ids, pol in self.preds:
            key = (p, tuple(f(i) for i in ids))
            if seen.setdefault(key, pol) != pol:
                return False
        return True

    def equal(self, s: Term, t: Term) -> bool:
        return self.find(self.add(s)) == self.find(self.add(t))

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.terms)):
            out.setdefault(self.find(i), []).append(i)
        return out


@dataclass
class SatVerdict:
    sat: bool
    arrangement: list[list[Term]] | None = None
    core: tuple[Literal, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.sat


def cc_sat(c: Iterable[Literal]) -> SatVerdict:
    lits = tuple(c)
    g = EGraph(lits)
    if g.consistent():
        return SatVerdict(True)
    return SatVerdict(False, core=lits)
