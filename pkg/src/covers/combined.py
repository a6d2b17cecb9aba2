"""Covers in the combination of two convex, stably infinite, equality
interpolating theories (shipped: EUF and LRA).

The input is purified, existentials with an explicit definition are moved to
the defined variables, and every arrangement of the remaining existentials is
guessed.  Each arrangement starts a working formula ``(ExplDef, psi1, psi2)``
that is expanded into terminal working formulas: either no remaining
existential is implicitly definable on either side (Step1 adds a disjunct of
the negated definability conditions), or one existential is made definable
by a disjunct ``L`` of its condition and acquires the explicit definition
``e := t`` from the side's interpolating term (Step2.i).  The cover of a
terminal formula is the conjunction of the two side covers with the
definitions unravelled; the overall cover is the disjunction of outcomes.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

from .errors import DanglingDefError, InternalError, UnsupportedCombinationError
from .euf_cover import euf_cover, euf_impl_def, euf_interpolating_term
from .kernel import (
    EQ, FALSE, TRUE, And, Constraint, FreshNames, Formula, Literal, Partition, Term, conj, disj, eq,
    enumerate_partitions, free_vars, from_linear, literals_of, neg, purify, substitute, to_dnf,
)
from .lra_cover import LinSystem, lra_cover, lra_impl_def, lra_interpolating_term
from .solver.entail import entails, equivalent, is_sat, simplify_formula
from .solver.lra import LinAtom, from_literal, is_arith_literal
from .solver.nelson_oppen import is_sat_conj

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# theory handles

@dataclass(frozen=True)
class TheoryHandle:
    """Procedures one side of the combination must provide.

    ``cover(lits, evars)``, ``impl_def(lits, e, params)`` and
    ``term(lits, e, condition, params)`` work on pure conjunctions.
    """

    name: str
    cover: Callable
    impl_def: Callable
    term: Callable
    convex: bool = True
    stably_infinite: bool = True
    equality_interpolating: bool = True
    arithmetic: bool = False


EUF_HANDLE = TheoryHandle(
    "euf",
    cover=lambda lits, ev: euf_cover(lits, ev),
    impl_def=lambda lits, e, ps: euf_impl_def(lits, e, ps),
    term=lambda lits, e, cond, ps: euf_interpolating_term(lits, cond, e, ps),
)

LRA_HANDLE = TheoryHandle(
    "lra",
    cover=lambda lits, ev: lra_cover(LinSystem.from_constraint(lits, ev)),
    impl_def=lambda lits, e, ps: lra_impl_def(lits, e, ps),
    term=lambda lits, e, cond, ps: lra_interpolating_term(lits, e, cond, ps),
    arithmetic=True,
)

# Integer difference logic and linear integer arithmetic are not convex
# (x = 1 | x = 2 follows from 0 < x < 3); their combination with EUF can
# lack covers altogether, so these handles exist only to be refused.
IDL_HANDLE = replace(LRA_HANDLE, name="idl", convex=False)
LIA_HANDLE = replace(LRA_HANDLE, name="lia", convex=False)

HANDLES = {"euf": EUF_HANDLE, "lra": LRA_HANDLE, "idl": IDL_HANDLE, "lia": LIA_HANDLE}


def check_handles(*handles: TheoryHandle) -> None:
    for h in handles:
        missing = [flag for flag in ("convex", "stably_infinite", "equality_interpolating") if not getattr(h, flag)]
        if missing:
            raise UnsupportedCombinationError(f"theory {h.name} is not {', '.join(missing).replace('_', ' ')}")


# ---------------------------------------------------------------------------
# working formulas and tracing

@dataclass(frozen=True)
class WorkingFormula:
    """``exists z (ExplDef(z, x) & exists e (psi1 & psi2))``."""

    expl: tuple[tuple[Term, Term], ...]
    psi1: tuple[Literal, ...]
    psi2: tuple[Literal, ...]
    params: tuple[Term, ...]
    existentials: tuple[Term, ...]

    @property
    def defined(self) -> tuple[Term, ...]:
        return tuple(z for z, _ in self.expl)

    @property
    def known(self) -> tuple[Term, ...]:
        """Parameters and defined variables: what ImplDef may mention."""
        return self.params + self.defined

    def side(self, k: int) -> tuple[Literal, ...]:
        return self.psi1 if k == 1 else self.psi2

    def with_side(self, k: int, lits: Iterable[Literal]) -> "WorkingFormula":
        lits = tuple(dict.fromkeys(lits))
        return replace(self, psi1=lits) if k == 1 else replace(self, psi2=lits)

    def __str__(self) -> str:
        defs = ", ".join(f"{z} := {t}" for z, t in self.expl) or "-"
        ex = ", ".join(map(str, self.existentials)) or "-"
        return (f"ExplDef [{defs}] exists [{ex}]\n"
                f"    psi1: {conj(*self.psi1)}\n    psi2: {conj(*self.psi2)}")


@dataclass
class TraceEvent:
    label: str
    partition: str
    text: str
    data: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return f"[{self.partition}] {self.label}: {self.text}"


class Trace(list):
    """Collected :class:`TraceEvent` records in emission order."""

    def find(self, label: str, **data) -> list[TraceEvent]:
        return [ev for ev in self if ev.label == label and all(ev.data.get(k) == v for k, v in data.items())]


# ---------------------------------------------------------------------------
# the engine

class CoverEngine:
    """State shared by one cover computation: the two handles, the ImplDef
    cache and the trace sink."""

    def __init__(self, h1: TheoryHandle = EUF_HANDLE, h2: TheoryHandle = LRA_HANDLE,
                 trace: list | None = None, partition: str = "", check_terminal: bool = True):
        check_handles(h1, h2)
        self.h = {1: h1, 2: h2}
        self.trace = trace
        self.partition = partition
        self.check_terminal = check_terminal
        self._impl: dict = {}
        self._cover: dict = {}

    def emit(self, label: str, text: str, **data) -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(label, self.partition, text, data))
        log.debug("[%s] %s: %s", self.partition, label, text)

    def _applies(self, k: int, e: Term) -> bool:
        return k == 1 or e.sort.shared

    # -- side covers and ImplDef
    def side_cover(self, w: WorkingFormula, k: int) -> Formula:
        lits = w.side(k)
        key = (k, frozenset(lits), w.existentials)
        out = self._cover.get(key)
        if out is None:
            ev = [e for e in w.existentials if self._applies(k, e)]
            out = self.h[k].cover(list(lits), ev) if lits else TRUE
            self._cover[key] = out
        return out

    def impl_def(self, w: WorkingFormula, k: int, e: Term) -> Formula:
        """The definability condition of ``e`` on side ``k``, simplified
        modulo the side's cover (so it agrees with the raw condition on
        every model of ``psi_k``)."""
        lits = w.side(k)
        key = (k, frozenset(lits), e, w.known)
        out = self._impl.get(key)
        if out is not None:
            return out
        if not self._applies(k, e):
            out = FALSE
        else:
            raw = self.h[k].impl_def(list(lits), e, w.known)
            out = simplify_modulo(raw, self.side_cover(w, k))
        self._impl[key] = out
        self.emit("ImplDef", f"ImplDef(psi{k}, {e}) = {out}", side=k, var=str(e), formula=out)
        return out

    # -- explicit definitions
    def _syntactic_def(self, w: WorkingFormula, k: int, e: Term) -> Term | None:
        known = set(w.known)
        for lit in w.side(k):
            if not (lit.pred == EQ and lit.positive):
                continue
            if k == 2 and is_arith_literal(lit):
                atom = from_literal(lit)
                c = atom.coeff(e)
                if c == 0 or any(v is not e and v not in known for v in atom.vars()):
                    continue
                if any(not v.is_var for v in atom.vars()):
                    continue
                return from_linear({v: -d / c for v, d in atom.coeffs if v is not e}, -atom.const / c, e.sort)
            if k == 1:
                a, b = lit.args
                for x, t in ((a, b), (b, a)):
                    if x is e and e not in t.vars() and all(v in known for v in t.vars()):
                        return t
        return None

    def detect_explicit_defs(self, w: WorkingFormula) -> WorkingFormula:
        changed = True
        while changed:
            changed = False
            for how in ("syntactic", "entailed"):
                for e in w.existentials:
                    for k in (1, 2):
                        if not self._applies(k, e):
                            continue
                        if how == "syntactic":
                            t = self._syntactic_def(w, k, e)
                        else:
                            t = self.h[k].term(list(w.side(k)), e, [], list(w.known))
                        if t is not None and e not in t.vars():
                            w = replace(w, expl=w.expl + ((e, t),),
                                        existentials=tuple(v for v in w.existentials if v is not e))
                            self.emit("Define", f"{e} := {t} ({how}, psi{k})", var=str(e), term=t, side=k)
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break
        return w

    # -- consistency
    def consistent(self, w: WorkingFormula) -> bool:
        return is_sat_conj(w.psi1 + w.psi2 + tuple(eq(z, t) for z, t in w.expl))

    # -- the two alternatives
    def step1(self, w: WorkingFormula) -> list[WorkingFormula]:
        per_side = []
        for k in (1, 2):
            conds = [neg(self.impl_def(w, k, e)) for e in w.existentials]
            per_side.append([list(d.literals) for d in to_dnf(conj(*conds))] if conds else [[]])
        out = []
        for d1 in per_side[0]:
            for d2 in per_side[1]:
                w2 = replace(w, psi1=tuple(dict.fromkeys(w.psi1 + tuple(d1))),
                             psi2=tuple(dict.fromkeys(w.psi2 + tuple(d2))))
                if self.consistent(w2):
                    self.emit("Step1", f"add {conj(*d1)} to psi1, {conj(*d2)} to psi2", add1=d1, add2=d2)
                    out.append(w2)
        return out

    def step2i(self, w: WorkingFormula, e: Term, k: int) -> list[WorkingFormula]:
        cond = self.impl_def(w, k, e)
        out = []
        for d in to_dnf(cond):
            L = list(d.literals)
            lits = w.side(k) + tuple(L)
            t = self.h[k].term(list(lits), e, [], list(w.known))
            if t is None or e in t.vars():
                raise InternalError(f"no interpolating term for {e} on side {k} under {conj(*L)}")
            self.emit("Term", f"{e} := {t} under {conj(*L)} (psi{k})", var=str(e), term=t, side=k, condition=L)
            w2 = replace(w.with_side(k, lits), expl=w.expl + ((e, t),),
                         existentials=tuple(v for v in w.existentials if v is not e))
            if not self.consistent(w2):
                continue
            w2 = self.detect_explicit_defs(w2)
            self.emit("Step2.i", f"{e} on psi{k} with {conj(*L)}:\n    {w2}", var=str(e), side=k)
            out.append(w2)
        return out

    def is_terminal(self, w: WorkingFormula) -> bool:
        for e in w.existentials:
            for k in (1, 2):
                if self._applies(k, e) and not entails(conj(*w.side(k)), neg(self.impl_def(w, k, e))):
                    return False
        return True

    def to_terminal(self, w: WorkingFormula) -> list[WorkingFormula]:
        out = self.step1(w)
        if self.check_terminal:
            for t in out:
                if not self.is_terminal(t):
                    raise InternalError(f"Step1 produced a non-terminal working formula:\n{t}")
        for e in w.existentials:
            for k in (1, 2):
                if not self._applies(k, e):
                    continue
                for w2 in self.step2i(w, e, k):
                    out.extend(self.to_terminal(w2))
        return out

    def terminal_cover(self, w: WorkingFormula) -> Formula:
        theta = conj(self.side_cover(w, 1), self.side_cover(w, 2))
        return simplify_formula(unravel(w.expl, theta, w.defined))

    # -- one arrangement
    def cover_from(self, w: WorkingFormula) -> list[Formula]:
        w = self.detect_explicit_defs(w)
        if not self.consistent(w):
            self.emit("Pruned", "inconsistent arrangement")
            return []
        self.emit("Start", str(w))
        results: list[Formula] = []
        for t in self.to_terminal(w):
            c = self.terminal_cover(t)
            if any(equivalent(c, r) for r in results):
                self.emit("Duplicate", f"{c}")
                continue
            self.emit("Terminal", f"{t}\n    cover: {c}", formula=c)
            results.append(c)
        return results


# ---------------------------------------------------------------------------
# module-level operations

def simplify_modulo(f: Formula, theta: Formula) -> Formula:
    """A formula equivalent to ``f`` on every model of ``theta``.

    Disjuncts inconsistent with ``theta`` are dropped, literals entailed by
    ``theta`` and the rest of their disjunct are dropped, and an inequality
    that ``theta`` and its disjunct force to be tight becomes an equality.
    """
    out = []
    for d in to_dnf(f):
        lits = list(d.literals)
        if not is_sat(conj(theta, *lits)):
            continue
        for i, l in enumerate(lits):
            if l.pred in ("<=", "<") and is_arith_literal(l):
                a = from_literal(l)
                if a.rel == "<=":
                    tight = LinAtom.make(a.cmap, a.const, "=").to_literal(l.args[0].sort)
                    if entails(conj(theta, *lits), tight):
                        lits[i] = tight
        i = 0
        while i < len(lits):
            rest = lits[:i] + lits[i + 1:]
            if entails(conj(theta, *rest), lits[i]):
                lits = rest
            else:
                i += 1
        out.append(conj(*lits))
    return simplify_formula(disj(*out)) if out else FALSE


def unravel(expl: Sequence[tuple[Term, Term]], f: Formula, defined: Iterable[Term] | None = None) -> Formula:
    """Replace defined variables by their definitions, last definition first."""
    if defined is not None:
        bound = {z for z, _ in expl}
        dangling = [str(v) for v in free_vars(f) if v in set(defined) and v not in bound]
        if dangling:
            raise DanglingDefError(f"no definition for {', '.join(dangling)}")
    for z, t in reversed(list(expl)):
        f = substitute(f, {z: t})
    return f


def _literals(phi) -> list[Literal]:
    if isinstance(phi, Constraint):
        return list(phi.literals)
    if isinstance(phi, Formula) and not isinstance(phi, Literal):
        return list(literals_of(phi))
    if isinstance(phi, Literal):
        return [phi]
    return list(phi)


def _is_conjunction(f: Formula) -> bool:
    if isinstance(f, Literal):
        return True
    return isinstance(f, And) and all(_is_conjunction(a) for a in f.args)


def initial_working_formula(phi, evars: Sequence[Term]) -> tuple[WorkingFormula, FreshNames]:
    lits = _literals(phi)
    evars = tuple(dict.fromkeys(evars))
    evs = set(evars)
    params = tuple(v for v in free_vars(lits) if v not in evs)
    if isinstance(phi, Constraint):
        params = tuple(dict.fromkeys(tuple(v for v in phi.params if v not in evs) + params))
    fresh = FreshNames(v.name for v in free_vars(lits) + evars)
    psi1, psi2, _ = purify(Constraint(tuple(lits), params, evars), fresh)
    w = WorkingFormula((), psi1.literals, psi2.literals, params, psi1.existentials)
    return w, fresh


def arrange(w: WorkingFormula, part: Partition) -> WorkingFormula:
    """Identify the existentials of each block and make blocks distinct."""
    sub = part.substitution()
    diseqs = part.disequalities().literals
    psi1 = tuple(substitute(list(w.psi1), sub)) + diseqs
    psi2 = tuple(substitute(list(w.psi2), sub)) + tuple(l for l in diseqs if l.args[0].sort.shared)
    norm = lambda lits: tuple(l for l in dict.fromkeys(lits) if not (l.pred == EQ and l.positive and l.args[0] is l.args[1]))
    return replace(w, psi1=norm(psi1), psi2=norm(psi2), existentials=part.representatives)


def combined_cover(phi, evars: Sequence[Term], h1: TheoryHandle = EUF_HANDLE, h2: TheoryHandle = LRA_HANDLE,
                   trace: list | None = None, verify: bool = True, jobs: int = 1,
                   check_terminal: bool = True, simplify: bool = True) -> Formula:
    """Cover of ``exists evars. phi`` over the union signature.

    ``phi`` is normally a conjunction of literals; any other formula is put
    in DNF and the covers of its disjuncts are joined, since existential
    quantification distributes over disjunction.
    """
    check_handles(h1, h2)
    if isinstance(phi, Formula) and not _is_conjunction(phi):
        pieces = [combined_cover(list(d.literals), evars, h1, h2, trace, verify, jobs, check_terminal, simplify)
                  for d in to_dnf(phi)]
        result = disj(*pieces) if pieces else FALSE
        return simplify_formula(result) if simplify else result
    lits = _literals(phi)
    w0, _ = initial_working_formula(lits if not isinstance(phi, Constraint) else phi, evars)
    pre = CoverEngine(h1, h2, trace, "-", check_terminal).detect_explicit_defs(w0)
    parts = enumerate_partitions(pre.existentials)

    def run(part: Partition) -> tuple[list[Formula], list]:
        local: list | None = [] if trace is not None else None
        eng = CoverEngine(h1, h2, local, str(part) or "-", check_terminal)
        eng.emit("Partition", str(part) or "(no existentials)")
        return eng.cover_from(arrange(pre, part)), local or []

    if jobs > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, [p for p, _ in parts]))
    else:
        outcomes = [run(p) for p, _ in parts]
    pieces: list[Formula] = []
    for covers, events in outcomes:
        pieces.extend(covers)
        if trace is not None:
            trace.extend(events)
    result = disj(*pieces) if pieces else FALSE
    if simplify:
        result = simplify_formula(result)
    leaked = [str(v) for v in free_vars(result) if v in set(evars) or v not in set(w0.params)]
    if leaked:
        raise InternalError(f"cover mentions non-parameters: {leaked}")
    if verify and not entails(conj(*lits), result):
        raise InternalError("computed cover is not implied by the input")
    return result


# thin functional wrappers over a default EUF + LRA engine

def _engine(engine: CoverEngine | None) -> CoverEngine:
    return engine if engine is not None else CoverEngine()


def detect_explicit_defs(w: WorkingFormula, engine: CoverEngine | None = None) -> WorkingFormula:
    return _engine(engine).detect_explicit_defs(w)


def step1(w: WorkingFormula, engine: CoverEngine | None = None) -> list[WorkingFormula]:
    return _engine(engine).step1(w)


def step2i(w: WorkingFormula, e: Term, side: int, engine: CoverEngine | None = None) -> list[WorkingFormula]:
    return _engine(engine).step2i(w, e, side)


def to_terminal(w: WorkingFormula, engine: CoverEngine | None = None) -> list[WorkingFormula]:
    return _engine(engine).to_terminal(w)


def is_terminal(w: WorkingFormula, engine: CoverEngine | None = None) -> bool:
    return _engine(engine).is_terminal(w)


def terminal_cover(w: WorkingFormula, engine: CoverEngine | None = None) -> Formula:
    return _engine(engine).terminal_cover(w)
