"""Linear rational arithmetic: normalized atoms, Fourier-Motzkin projection,
model construction and implied-equality detection.  All arithmetic is exact
(``fractions.Fraction``)."""
from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ..errors import InfeasibleError, TheoryError
from ..kernel import (
    ARITH_PREDS, EQ, REAL, Formula, Literal, Term, conj, disj, eq, from_linear,
    le, linearize, lt, neq, normalize_term, num,
)

RELS = ("<=", "<", "=", "!=")


@dataclass(frozen=True)
class LinAtom:
    """``sum(c * v) + const  rel  0`` with ``rel`` one of ``<=, <, =, !=``."""

    coeffs: tuple[tuple[Term, Fraction], ...]
    const: Fraction
    rel: str

    @staticmethod
    def make(coeffs: Mapping[Term, Fraction], const, rel: str) -> "LinAtom":
        items = sorted(((v, c if type(c) is Fraction else Fraction(c)) for v, c in coeffs.items() if c != 0),
                       key=lambda kv: kv[0].key())
        if type(const) is not Fraction:
            const = Fraction(const)
        if items:
            lead = items[0][1]
            scale = 1 / abs(lead) if rel in ("<=", "<") else 1 / lead
            items = [(v, c * scale) for v, c in items]
            const *= scale
        return LinAtom(tuple(items), const, rel)

    @property
    def cmap(self) -> dict[Term, Fraction]:
        return dict(self.coeffs)

    def coeff(self, v: Term) -> Fraction:
        for u, c in self.coeffs:
            if u is v:
                return c
        return Fraction(0)

    def vars(self) -> tuple[Term, ...]:
        return tuple(v for v, _ in self.coeffs)

    @property
    def ground(self) -> bool:
        return not self.coeffs

    def value(self, model: Mapping[Term, Fraction]) -> Fraction:
        return sum((c * model.get(v, Fraction(0)) for v, c in self.coeffs), self.const)

    def holds(self, model: Mapping[Term, Fraction]) -> bool:
        return _test(self.value(model), self.rel)

    def negate(self) -> "LinAtom":
        m = self.cmap
        if self.rel == "<=":
            return LinAtom.make({v: -c for v, c in m.items()}, -self.const, "<")
        if self.rel == "<":
            return LinAtom.make({v: -c for v, c in m.items()}, -self.const, "<=")
        return LinAtom.make(m, self.const, "!=" if self.rel == "=" else "=")

    def strict_sides(self) -> tuple["LinAtom", "LinAtom"]:
        """``s != 0`` as the two strict alternatives ``s < 0`` and ``s > 0``."""
        m = self.cmap
        return (LinAtom.make(m, self.const, "<"), LinAtom.make({v: -c for v, c in m.items()}, -self.const, "<"))

    def to_literal(self, sort=REAL) -> Literal:
        pos = {v: c for v, c in self.coeffs if c > 0}
        negs = {v: -c for v, c in self.coeffs if c < 0}
        if not pos and self.rel in ("=", "!="):
            pos, negs = negs, {}
            lhs = from_linear(pos, Fraction(0), sort) if pos else num(0, sort)
            rhs = from_linear(negs, self.const, sort)
        else:
            lhs = from_linear(pos, Fraction(0), sort) if pos else num(0, sort)
            rhs = from_linear(negs, -self.const, sort)
        if self.rel == "<=":
            return le(lhs, rhs)
        if self.rel == "<":
            return lt(lhs, rhs)
        return eq(lhs, rhs) if self.rel == "=" else neq(lhs, rhs)

    def __str__(self) -> str:
        return str(self.to_literal())


def _test(val: Fraction, rel: str) -> bool:
    if rel == "<=":
        return val <= 0
    if rel == "<":
        return val < 0
    if rel == "=":
        return val == 0
    return val != 0


def is_arith_literal(lit: Literal) -> bool:
    return lit.pred in ARITH_PREDS or (lit.pred == EQ and lit.args[0].sort.shared)


def from_literal(lit: Literal) -> LinAtom:
    if not is_arith_literal(lit):
        raise TheoryError(f"not an arithmetic literal: {lit}")
    a, b = lit.args
    ca, ka = linearize(normalize_term(a))
    cb, kb = linearize(normalize_term(b))
    diff = dict(ca)
    for v, c in cb.items():
        diff[v] = diff.get(v, Fraction(0)) - c
    const = ka - kb
    neg = {v: -c for v, c in diff.items()}
    if lit.pred == EQ:
        return LinAtom.make(diff, const, "=" if lit.positive else "!=")
    if lit.positive:
        return LinAtom.make(diff, const, lit.pred)
    # not (a < b)  ==  b - a <= 0 ; not (a <= b) == b - a < 0
    return LinAtom.make(neg, -const, "<=" if lit.pred == "<" else "<")


def atoms_of(lits: Iterable[Literal]) -> list[LinAtom]:
    return [from_literal(l) for l in lits]


# ---------------------------------------------------------------------------
# elementary operations

def _substitute(atom: LinAtom, v: Term, expr: Mapping[Term, Fraction], k: Fraction) -> LinAtom:
    c = atom.coeff(v)
    if c == 0:
        return atom
    m = atom.cmap
    del m[v]
    for u, d in expr.items():
        m[u] = m.get(u, Fraction(0)) + c * d
    return LinAtom.make(m, atom.const + c * k, atom.rel)


def _solve_for(atom: LinAtom, v: Term) -> tuple[dict[Term, Fraction], Fraction]:
    c = atom.coeff(v)
    expr = {u: -d / c for u, d in atom.coeffs if u is not v}
    return expr, -atom.const / c


def _combine(lo: LinAtom, up: LinAtom, v: Term) -> LinAtom:
    a = lo.coeff(v)  # < 0
    b = up.coeff(v)  # > 0
    m: dict[Term, Fraction] = {}
    for u, c in lo.coeffs:
        m[u] = m.get(u, Fraction(0)) + b * c
    for u, c in up.coeffs:
        m[u] = m.get(u, Fraction(0)) - a * c
    m.pop(v, None)
    rel = "<" if "<" in (lo.rel, up.rel) else "<="
    return LinAtom.make(m, b * lo.const - a * up.const, rel)


def _prune(atoms: Iterable[LinAtom]) -> list[LinAtom] | None:
    """Drop ground-true and dominated atoms; ``None`` on a ground contradiction."""
    best: dict[tuple, LinAtom] = {}
    rest: dict[LinAtom, None] = {}
    for a in atoms:
        if a.ground:
            if not _test(a.const, a.rel):
                return None
            continue
        if a.rel in ("<=", "<"):
            key = a.coeffs
            cur = best.get(key)
            if cur is None or a.const > cur.const or (a.const == cur.const and a.rel == "<"):
                best[key] = a
        else:
            rest[a] = None
    return list(rest) + list(best.values())


def _all_vars(atoms: Iterable[LinAtom]) -> list[Term]:
    seen: dict[Term, None] = {}
    for a in atoms:
        for v in a.vars():
            seen[v] = None
    return sorted(seen, key=Term.key)


def _pick_var(atoms: Sequence[LinAtom], candidates: Iterable[Term]) -> Term | None:
    best = None
    for v in candidates:
        lo = up = 0
        has_eq = False
        present = False
        for a in atoms:
            c = a.coeff(v)
            if c == 0:
                continue
            present = True
            if a.rel == "=":
                has_eq = True
            elif a.rel == "!=":
                lo += 1
                up += 1
            elif c > 0:
                up += 1
            else:
                lo += 1
        if not present:
            continue
        cost = -(10**9) if has_eq else lo * up - lo - up
        if best is None or cost < best[0]:
            best = (cost, v)
    return None if best is None else best[1]


# ---------------------------------------------------------------------------
# satisfiability and models

def _model_closed(atoms: Sequence[LinAtom]) -> dict[Term, Fraction] | None:
    """Model of a system without ``!=`` atoms, or ``None``."""
    steps = []
    cur = _prune(atoms)
    if cur is None:
        return None
    while True:
        v = _pick_var(cur, _all_vars(cur))
        if v is None:
            break
        eqa = next((a for a in cur if a.rel == "=" and a.coeff(v) != 0), None)
        if eqa is not None:
            expr, k = _solve_for(eqa, v)
            steps.append(("eq", v, expr, k))
            nxt = [_substitute(a, v, expr, k) for a in cur if a is not eqa]
        else:
            lows = [a for a in cur if a.coeff(v) < 0]
            ups = [a for a in cur if a.coeff(v) > 0]
            steps.append(("bd", v, lows, ups))
            nxt = [a for a in cur if a.coeff(v) == 0]
            nxt += [_combine(l, u, v) for l in lows for u in ups]
        cur = _prune(nxt)
        if cur is None:
            return None
    model: dict[Term, Fraction] = {}
    for step in reversed(steps):
        if step[0] == "eq":
            _, v, expr, k = step
            model[v] = sum((d * model.get(u, Fraction(0)) for u, d in expr.items()), k)
            continue
        _, v, lows, ups = step
        lo = up = None
        lo_strict = up_strict = False
        for a in lows:
            c = a.coeff(v)
            bound = a.value(model) / -c
            if lo is None or bound > lo or (bound == lo and a.rel == "<"):
                lo, lo_strict = bound, a.rel == "<"
        for a in ups:
            c = a.coeff(v)
            rest = a.value(model)
            bound = -rest / c
            if up is None or bound < up or (bound == up and a.rel == "<"):
                up, up_strict = bound, a.rel == "<"
        if lo is not None and up is not None:
            val = lo if lo == up else (lo + up) / 2
        elif lo is not None:
            val = lo + 1 if lo_strict else lo
        elif up is not None:
            val = up - 1 if up_strict else up
        else:
            val = Fraction(0)
        model[v] = val
    return model


def lra_model(atoms: Iterable[LinAtom]) -> dict[Term, Fraction] | None:
    """A rational model of the conjunction, or ``None`` if unsatisfiable.

    Disequalities are handled without case splitting: a convex set avoids a
    finite union of hyperplanes iff it avoids each one, and a point avoiding
    all of them is found on segments between per-hyperplane witnesses.
    """
    atoms = list(atoms)
    closed = [a for a in atoms if a.rel != "!="]
    diseqs = [a for a in atoms if a.rel == "!="]
    q = _model_closed(closed)
    if q is None:
        return None
    for v in _all_vars(atoms):
        q.setdefault(v, Fraction(0))
    for h in diseqs:
        if h.holds(q):
            continue
        p = None
        for side in h.strict_sides():
            p = _model_closed(closed + [side])
            if p is not None:
                break
        if p is None:
            return None
        for v in q:
            p.setdefault(v, Fraction(0))
        done = [g for g in diseqs if g.holds(q)]
        for n in itertools.count(2):
            t = Fraction(1, n)
            cand = {v: (1 - t) * q[v] + t * p.get(v, Fraction(0)) for v in q}
            if h.holds(cand) and all(g.holds(cand) for g in done):
                q = cand
                break
    return q


@lru_cache(maxsize=1 << 16)
def _sat_cached(atoms: frozenset) -> bool:
    return lra_model(sorted(atoms, key=str)) is not None


def lra_sat(atoms: Iterable[LinAtom]) -> bool:
    return _sat_cached(frozenset(atoms))


def lra_entails(atoms: Sequence[LinAtom], goal: LinAtom) -> bool:
    if goal.ground:
        return _test(goal.const, goal.rel) or not lra_sat(atoms)
    return not lra_sat(list(atoms) + [goal.negate()])


def implied_equalities_lra(atoms: Sequence[LinAtom], pairs: Iterable[tuple[Term, Term]]) -> list[tuple[Term, Term]]:
    """Pairs ``(v, w)`` whose equality is entailed by ``atoms``."""
    atoms = list(atoms)
    m = lra_model(atoms)
    if m is None:
        raise InfeasibleError("implied equalities requested for an unsatisfiable system")
    out = []
    for v, w in pairs:
        if m.get(v, Fraction(0)) != m.get(w, Fraction(0)):
            continue
        d = LinAtom.make({v: Fraction(1), w: Fraction(-1)} if v is not w else {}, 0, "=")
        if d.ground or lra_entails(atoms, d):
            out.append((v, w))
    return out


# ---------------------------------------------------------------------------
# projection

def _combine_strict(lo: LinAtom, up: LinAtom, v: Term) -> LinAtom:
    a = _combine(lo, up, v)
    return LinAtom.make(a.cmap, a.const, "<")


def eliminate_var(atoms: Sequence[LinAtom], v: Term) -> list[list[LinAtom]]:
    """Exact projection of one variable, as a list of alternative systems.

    Disequalities on ``v`` are not split: the interval of ``v`` minus
    finitely many points is nonempty iff the interval has positive length,
    or it is a single point (one of the non-strict lower bounds) that
    misses every excluded value.
    """
    eqa = next((a for a in atoms if a.rel == "=" and a.coeff(v) != 0), None)
    if eqa is not None:
        expr, k = _solve_for(eqa, v)
        out = _prune(_substitute(a, v, expr, k) for a in atoms if a is not eqa)
        return [] if out is None else [out]
    diseqs = [a for a in atoms if a.rel == "!=" and a.coeff(v) != 0]
    rest = [a for a in atoms if a.coeff(v) == 0]
    lows = [a for a in atoms if a.rel != "!=" and a.coeff(v) < 0]
    ups = [a for a in atoms if a.rel != "!=" and a.coeff(v) > 0]
    if not diseqs or not lows or not ups:
        pruned = _prune(rest + [_combine(l, u, v) for l in lows for u in ups])
        return [] if pruned is None else [pruned]
    results = []
    wide = _prune(rest + [_combine_strict(l, u, v) for l in lows for u in ups])
    if wide is not None:
        results.append(wide)
    for lo in lows:
        if lo.rel != "<=":
            continue
        expr, k = _solve_for(lo, v)
        point = _prune(_substitute(a, v, expr, k) for a in atoms if a is not lo)
        if point is not None:
            results.append(point)
    return results


def fm_project(atoms: Sequence[LinAtom], drop: Iterable[Term]) -> list[list[LinAtom]]:
    """DNF (list of conjunctions) equivalent over the rationals to ``exists drop. atoms``."""
    drop = list(drop)
    start = _prune(atoms)
    if start is None:
        return []
    work = [start]
    done: list[list[LinAtom]] = []
    while work:
        sys = work.pop()
        v = _pick_var(sys, drop)
        if v is None:
            if lra_sat(sys):
                done.append(sys)
            continue
        branches = eliminate_var(sys, v)
        if len(branches) > 1:
            branches = [b for b in branches if lra_sat(b)]
        work.extend(reversed(branches))
    return done


def simplify_conjunction(atoms: Sequence[LinAtom], context: Sequence[LinAtom] = ()) -> list[LinAtom] | None:
    """Remove atoms entailed by the others (and ``context``); fold ``a<=b & a!=b``."""
    atoms = _prune(atoms)
    if atoms is None or not lra_sat(list(atoms) + list(context)):
        return None
    # a <= 0 together with a != 0 is a < 0
    for i, a in enumerate(atoms):
        if a.rel != "!=":
            continue
        for j, b in enumerate(atoms):
            if b.rel == "<=":
                for strict in a.strict_sides():
                    if strict.coeffs == b.coeffs and strict.const == b.const:
                        atoms[j] = strict
    atoms = list(dict.fromkeys(atoms))
    cur = sorted(atoms, key=lambda a: (a.rel == "=", len(a.coeffs), str(a)), reverse=True)
    i = 0
    while i < len(cur):
        rest = cur[:i] + cur[i + 1:]
        if lra_entails(rest + list(context), cur[i]):
            cur = rest
        else:
            i += 1
    return sorted(cur, key=str)


def _merge_pair(d1: list[LinAtom], d2: list[LinAtom]) -> list[LinAtom] | None:
    s1, s2 = set(d1), set(d2)
    x1, x2 = s1 - s2, s2 - s1
    if len(x1) != 1 or len(x2) != 1:
        return None
    a, = x1
    b, = x2
    common = [c for c in d1 if c in s2]
    for p, q in ((a, b), (b, a)):
        if p.rel == "<" and q.rel == "<":
            m = {v: -c for v, c in p.coeffs}
            if LinAtom.make(m, -p.const, "<") == q:
                return common + [LinAtom.make(p.cmap, p.const, "!=")]
        if p.rel == "<" and q.rel == "=":
            if LinAtom.make(p.cmap, p.const, "=") == q:
                return common + [LinAtom.make(p.cmap, p.const, "<=")]
    return None


def negate_dnf_atoms(disjuncts: Sequence[Sequence[LinAtom]]) -> list[list[LinAtom]]:
    """DNF of the negation of a disjunction of conjunctions, built one
    disjunct at a time and pruned of unsatisfiable and subsumed parts."""
    cur: list[list[LinAtom]] = [[]]
    for d in disjuncts:
        nxt: dict[frozenset, list[LinAtom]] = {}
        for c in cur:
            if any(a.negate() in c for a in d):
                nxt.setdefault(frozenset(c), c)
                continue
            for a in d:
                cand = c + [a.negate()]
                key = frozenset(cand)
                if key not in nxt and lra_sat(cand):
                    nxt[key] = cand
        keys = sorted(nxt, key=len)
        kept: list[frozenset] = []
        for k in keys:
            if not any(j <= k for j in kept):
                kept.append(k)
        cur = [nxt[k] for k in kept]
        if not cur:
            break
    return cur


def simplify_dnf_atoms(disjuncts: Sequence[Sequence[LinAtom]]) -> list[list[LinAtom]]:
    """Simplify a disjunction of conjunctions: drop unsat and subsumed
    disjuncts, merge complementary strict splits back into ``!=`` / ``<=``."""
    cur = []
    for d in disjuncts:
        s = simplify_conjunction(list(d))
        if s is not None:
            cur.append(s)
    changed = True
    while changed:
        changed = False
        # subsumption: drop d if it entails another disjunct
        for i, d in enumerate(cur):
            for j, e in enumerate(cur):
                if i != j and all(lra_entails(d, a) for a in e):
                    cur.pop(i)
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        for i, j in itertools.combinations(range(len(cur)), 2):
            m = _merge_pair(cur[i], cur[j])
            if m is not None:
                s = simplify_conjunction(m)
                cur = [d for k, d in enumerate(cur) if k not in (i, j)]
                if s is not None:
                    cur.append(s)
                changed = True
                break
    return sorted(cur, key=lambda d: [str(a) for a in d])


def atoms_formula(disjuncts: Sequence[Sequence[LinAtom]], sort=REAL) -> Formula:
    return disj(*(conj(*(a.to_literal(sort) for a in d)) for d in disjuncts))


def fm_eliminate(c: Iterable[Literal | LinAtom], drop: Iterable[Term], simplify: bool = True) -> Formula:
    """Quantifier elimination of ``drop`` from a conjunction of linear literals."""
    atoms = [a if isinstance(a, LinAtom) else from_literal(a) for a in c]
    proj = fm_project(atoms, drop)
    if simplify:
        proj = simplify_dnf_atoms(proj)
    return atoms_formula(proj)
