"""Covers, implicit definitions and interpolating terms for linear rational
arithmetic.  The theory has quantifier elimination, so the cover of a
constraint is its Fourier-Motzkin projection."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .kernel import TRUE, Constraint, FreshNames, Formula, Term, from_linear
from .solver.entail import simplify_formula
from .solver.lra import (
    LinAtom, atoms_formula, fm_eliminate, fm_project, from_literal, lra_entails, negate_dnf_atoms,
    simplify_dnf_atoms,
)


@dataclass
class LinSystem:
    atoms: list[LinAtom]
    evars: tuple[Term, ...] = ()

    @staticmethod
    def from_constraint(c, evars: Iterable[Term] | None = None) -> "LinSystem":
        lits = c.literals if isinstance(c, Constraint) else tuple(c)
        if evars is None:
            evars = c.existentials if isinstance(c, Constraint) else ()
        return LinSystem([a if isinstance(a, LinAtom) else from_literal(a) for a in lits], tuple(evars))

    def vars(self) -> list[Term]:
        seen: dict[Term, None] = {}
        for a in self.atoms:
            for v in a.vars():
                seen[v] = None
        return list(seen)


def _system(sys) -> LinSystem:
    return sys if isinstance(sys, LinSystem) else LinSystem.from_constraint(sys)


def _atoms(x) -> list[LinAtom]:
    if x is None:
        return []
    if isinstance(x, LinSystem):
        return list(x.atoms)
    lits = x.literals if isinstance(x, Constraint) else x
    return [a if isinstance(a, LinAtom) else from_literal(a) for a in lits]


def lra_cover(sys, simplify: bool = True) -> Formula:
    s = _system(sys)
    return fm_eliminate(s.atoms, s.evars, simplify=simplify)


def _equations(atoms: Sequence[LinAtom]) -> list[dict]:
    """``=`` atoms plus the inequalities that are tight under ``atoms``."""
    rows = []
    for a in atoms:
        if a.rel == "=":
            rows.append(a)
        elif a.rel == "<=":
            tight = LinAtom.make(a.cmap, a.const, "=")
            if lra_entails(atoms, tight):
                rows.append(tight)
    out = []
    for a in rows:
        r = a.cmap
        r[None] = a.const
        out.append(r)
    return out


def lra_interpolating_term(sys, e: Term, condition=None, params: Sequence[Term] | None = None) -> Term | None:
    """A parameter-only term ``t`` with ``sys & condition |= e = t``.

    The equality subsystem (explicit equations and tight inequalities) is
    solved by Gaussian elimination on the existential columns, taken in
    their listed order, pivoting on the first row that mentions the column.
    """
    s = _system(sys)
    atoms = list(s.atoms) + _atoms(condition)
    if params is None:
        ex = list(s.evars) if s.evars else [e]
    else:
        ps = set(params)
        ex = [v for v in (list(s.evars) + [v for a in atoms for v in a.vars()]) if v not in ps]
    ex = list(dict.fromkeys(ex))
    if e not in ex:
        ex.append(e)
    rows = _equations(atoms)
    pivots: dict[Term, dict] = {}
    for v in ex:
        row = next((r for r in rows if r.get(v, 0) != 0 and all(r is not p for p in pivots.values())), None)
        if row is None:
            continue
        c = row[v]
        for k in list(row):
            row[k] = row[k] / c
        for other in rows:
            if other is row:
                continue
            d = other.get(v, 0)
            if d != 0:
                for k, val in row.items():
                    other[k] = other.get(k, Fraction(0)) - d * val
                    if other[k] == 0 and k is not None:
                        del other[k]
        pivots[v] = row
    row = pivots.get(e)
    if row is None:
        return None
    exs = set(ex)
    if any(k is not None and k is not e and k in exs and c != 0 for k, c in row.items()):
        return None
    coeffs = {k: -c for k, c in row.items() if k is not None and k is not e and c != 0}
    t = from_linear(coeffs, -row.get(None, Fraction(0)), e.sort)
    return t


def lra_impl_def(sys, e: Term, params: Sequence[Term], simplify: bool = True) -> Formula:
    """Condition on ``params`` under which ``sys`` determines ``e``: the
    negation of the projection of ``sys & sys' & e != e'`` where ``sys'``
    renames every non-parameter."""
    s = _system(sys)
    ps = set(params)
    allv = s.vars()
    if e not in allv:
        allv.append(e)
    fresh = FreshNames(v.name for v in allv)
    mapping = {v: fresh.prime(v) for v in allv if v not in ps}
    if e not in mapping:
        return TRUE

    def rename(a: LinAtom) -> LinAtom:
        return LinAtom.make({mapping.get(v, v): c for v, c in a.coeffs}, a.const, a.rel)

    base = list(s.atoms) + [rename(a) for a in s.atoms]
    drop = list(mapping) + list(mapping.values())
    # e < e' and e' < e give the same projection up to swapping the
    # two copies, and both copies are projected away, so one side suffices
    side = LinAtom.make({e: Fraction(1), mapping[e]: Fraction(-1)}, 0, "<")
    projected = simplify_dnf_atoms(fm_project(base + [side], drop))
    f = atoms_formula(negate_dnf_atoms(projected), e.sort)
    return simplify_formula(f) if simplify else f

