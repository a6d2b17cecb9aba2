"""Sorted terms, literals, quantifier-free formulas and the bookkeeping shared
by every engine: substitution, DNF, partition guessing and purification.

Terms are hash-consed: building the same term twice returns the same object,
so term equality is an identity test.  Everything here is immutable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import SortError


# ---------------------------------------------------------------------------
# sorts and signatures

@dataclass(frozen=True)
class Sort:
    name: str
    shared: bool = False

    def __str__(self) -> str:
        return self.name


REAL = Sort("Real", shared=True)
INT = Sort("Int", shared=True)

ADD = "+"
MUL = "*"
ARITH_FUNCS = frozenset({ADD, MUL})
ARITH_PREDS = frozenset({"<", "<="})
EQ = "="


@dataclass
class Signature:
    """Symbols of one side of a combination.

    ``side`` is ``1`` for the uninterpreted side, ``2`` for arithmetic.
    """

    sorts: dict[str, Sort] = field(default_factory=dict)
    functions: dict[str, tuple[tuple[Sort, ...], Sort]] = field(default_factory=dict)
    predicates: dict[str, tuple[Sort, ...]] = field(default_factory=dict)
    side: int = 1

    def symbols(self) -> set[str]:
        return set(self.functions) | set(self.predicates)

    def check_term(self, t: "Term") -> None:
        if t.is_app and t.name in self.functions:
            dom, cod = self.functions[t.name]
            if len(dom) != len(t.args):
                raise SortError(f"{t.name} expects {len(dom)} arguments, got {len(t.args)}")
            for s, a in zip(dom, t.args):
                if a.sort != s:
                    raise SortError(f"argument {a} of {t.name} has sort {a.sort}, expected {s}")
            if cod != t.sort:
                raise SortError(f"{t} has sort {t.sort}, expected {cod}")
        for a in t.args:
            self.check_term(a)


# ---------------------------------------------------------------------------
# terms

class Term:
    """A hash-consed first-order term: variable, application or rational numeral."""

    __slots__ = ("kind", "name", "args", "sort", "value", "_str", "depth", "_vars", "__weakref__")
    _table: dict = {}

    kind: str
    name: str
    args: tuple["Term", ...]
    sort: Sort
    value: Fraction | None

    def __new__(cls, kind: str, name: str, args: tuple = (), sort: Sort = REAL, value=None):
        key = (kind, name, args, sort, value)
        t = cls._table.get(key)
        if t is not None:
            return t
        t = object.__new__(cls)
        t.kind = kind
        t.name = name
        t.args = args
        t.sort = sort
        t.value = value
        t.depth = 1 + max((a.depth for a in args), default=-1) if kind == "app" else 0
        t._str = None
        t._vars = None
        return cls._table.setdefault(key, t)

    def __reduce__(self):
        return (Term, (self.kind, self.name, self.args, self.sort, self.value))

    @property
    def is_var(self) -> bool:
        return self.kind == "var"

    @property
    def is_app(self) -> bool:
        return self.kind == "app"

    @property
    def is_num(self) -> bool:
        return self.kind == "num"

    @property
    def is_arith(self) -> bool:
        return self.kind == "num" or (self.kind == "app" and self.name in ARITH_FUNCS)

    def key(self):
        return (self.depth, str(self))

    def vars(self) -> tuple["Term", ...]:
        if self._vars is None:
            if self.is_var:
                self._vars = (self,)
            else:
                seen: dict[Term, None] = {}
                for a in self.args:
                    for v in a.vars():
                        seen[v] = None
                self._vars = tuple(seen)
        return self._vars

    def subterms(self) -> Iterator["Term"]:
        for a in self.args:
            yield from a.subterms()
        yield self

    def __str__(self) -> str:
        if self._str is None:
            self._str = _render(self)
        return self._str

    def __repr__(self) -> str:
        return f"Term({self})"

    def __lt__(self, other: "Term") -> bool:
        return self.key() < other.key()


def _fmt_num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _render(t: Term) -> str:
    if t.is_var:
        return t.name
    if t.is_num:
        return _fmt_num(t.value)
    if t.name == ADD:
        out = str(t.args[0])
        for a in t.args[1:]:
            s = str(a)
            out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
        return out
    if t.name == MUL:
        c, b = t.args
        inner = f"({b})" if b.is_app and b.name == ADD else str(b)
        if c.value == 1:
            return inner
        if c.value == -1:
            return f"-{inner}"
        return f"{_fmt_num(c.value)}*{inner}"
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(str(a) for a in t.args)})"


def var(name: str, sort: Sort = REAL) -> Term:
    return Term("var", name, (), sort)


def app(name: str, *args: Term, sort: Sort = REAL) -> Term:
    return Term("app", name, tuple(args), sort)


def num(value, sort: Sort = REAL) -> Term:
    return Term("num", "", (), sort, Fraction(value))


def add(*ts: Term) -> Term:
    flat: list[Term] = []
    for t in ts:
        flat.extend(t.args if t.is_app and t.name == ADD else (t,))
    if len(flat) == 1:
        return flat[0]
    if not flat:
        return num(0)
    return app(ADD, *flat, sort=flat[0].sort)


def mul(c, t: Term) -> Term:
    return app(MUL, num(c, t.sort), t, sort=t.sort)


def sub(a: Term, b: Term) -> Term:
    return add(a, mul(-1, b))


def linearize(t: Term) -> tuple[dict[Term, Fraction], Fraction]:
    """Split an arithmetic term into coefficients over its non-arithmetic atoms."""
    coeffs: dict[Term, Fraction] = {}
    const = Fraction(0)

    def walk(u: Term, c: Fraction) -> None:
        nonlocal const
        if u.is_num:
            const += c * u.value
        elif u.is_app and u.name == ADD:
            for a in u.args:
                walk(a, c)
        elif u.is_app and u.name == MUL:
            walk(u.args[1], c * u.args[0].value)
        else:
            coeffs[u] = coeffs.get(u, Fraction(0)) + c

    walk(t, Fraction(1))
    return {k: v for k, v in coeffs.items() if v != 0}, const


def from_linear(coeffs: Mapping[Term, Fraction], const: Fraction, sort: Sort = REAL) -> Term:
    parts = [mul(c, a) if c != 1 else a for a, c in sorted(coeffs.items(), key=lambda kv: kv[0].key()) if c != 0]
    if const != 0 or not parts:
        parts.append(num(const, sort))
    return add(*parts)


def normalize_term(t: Term) -> Term:
    """Canonical form: arithmetic subterms as sorted linear sums, recursively."""
    if t.is_var or t.is_num:
        return t
    if t.is_arith:
        coeffs, const = linearize(t)
        merged: dict[Term, Fraction] = {}
        for a, c in coeffs.items():
            na = normalize_term(a)
            merged[na] = merged.get(na, Fraction(0)) + c
        return from_linear({a: c for a, c in merged.items() if c != 0}, const, t.sort)
    return app(t.name, *(normalize_term(a) for a in t.args), sort=t.sort)


# ---------------------------------------------------------------------------
# literals and formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True, eq=True)
class Literal(Formula):
    pred: str
    args: tuple[Term, ...]
    positive: bool = True

    def __post_init__(self):
        if self.pred == EQ:
            a, b = self.args
            if a.sort != b.sort:
                raise SortError(f"equality between sorts {a.sort} and {b.sort}: {a}, {b}")
            if b.key() > a.key():
                object.__setattr__(self, "args", (b, a))

    def __invert__(self) -> "Literal":
        return Literal(self.pred, self.args, not self.positive)

    @property
    def is_eq(self) -> bool:
        return self.pred == EQ

    def vars(self) -> tuple[Term, ...]:
        seen: dict[Term, None] = {}
        for a in self.args:
            for v in a.vars():
                seen[v] = None
        return tuple(seen)

    def key(self):
        return (str(self), )

    def __str__(self) -> str:
        if self.pred == EQ:
            op = "=" if self.positive else "!="
            return f"{self.args[0]} {op} {self.args[1]}"
        if self.pred in ARITH_PREDS:
            a, b = self.args
            if self.positive:
                return f"{a} {self.pred} {b}"
            return f"{b} {'<=' if self.pred == '<' else '<'} {a}"
        s = f"{self.pred}({', '.join(map(str, self.args))})" if self.args else self.pred
        return s if self.positive else f"~{s}"

    def __repr__(self) -> str:
        return f"Literal({self})"


def eq(a: Term, b: Term) -> Literal:
    return Literal(EQ, (a, b))


def neq(a: Term, b: Term) -> Literal:
    return Literal(EQ, (a, b), False)


def lt(a: Term, b: Term) -> Literal:
    return Literal("<", (a, b))


def le(a: Term, b: Term) -> Literal:
    return Literal("<=", (a, b))


def pred(name: str, *args: Term) -> Literal:
    return Literal(name, tuple(args))


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.args:
            return "true"
        return " & ".join(f"({a})" if isinstance(a, Or) and a.args else str(a) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.args:
            return "false"
        if len(self.args) == 1:
            return str(self.args[0])
        return " | ".join(f"({a})" if isinstance(a, And) and len(a.args) > 1 else str(a) for a in self.args)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"~({self.arg})"


TRUE = And(())
FALSE = Or(())


def conj(*fs: Formula) -> Formula:
    out: list[Formula] = []
    for f in fs:
        if f == FALSE:
            return FALSE
        if isinstance(f, And):
            out.extend(f.args)
        else:
            out.append(f)
    out = list(dict.fromkeys(out))
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*fs: Formula) -> Formula:
    out: list[Formula] = []
    for f in fs:
        if f == TRUE:
            return TRUE
        if isinstance(f, Or):
            out.extend(f.args)
        else:
            out.append(f)
    out = list(dict.fromkeys(out))
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Literal):
        return ~f
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, And):
        return disj(*(neg(a) for a in f.args))
    if isinstance(f, Or):
        return conj(*(neg(a) for a in f.args))
    raise TypeError(f"not a formula: {f!r}")


def literals_of(f: Formula) -> Iterator[Literal]:
    if isinstance(f, Literal):
        yield f
    elif isinstance(f, Not):
        yield from literals_of(f.arg)
    else:
        for a in f.args:
            yield from literals_of(a)


def free_vars(obj) -> tuple[Term, ...]:
    """Free variables in order of first occurrence."""
    seen: dict[Term, None] = {}
    if isinstance(obj, Term):
        return obj.vars()
    if isinstance(obj, Constraint):
        lits: Iterable[Literal] = obj.literals
    elif isinstance(obj, Formula):
        lits = literals_of(obj)
    else:
        lits = obj
    for lit in lits:
        for v in lit.vars():
            seen[v] = None
    return tuple(seen)


# ---------------------------------------------------------------------------
# constraints

@dataclass(frozen=True)
class Constraint:
    """A conjunction of literals with variable roles.

    ``params`` are the variables kept by a cover, ``existentials`` the ones
    eliminated, and ``defined`` the existentials already given an explicit
    definition in terms of parameters.
    """

    literals: tuple[Literal, ...]
    params: tuple[Term, ...] = ()
    existentials: tuple[Term, ...] = ()
    defined: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(dict.fromkeys(self.literals)))

    def __iter__(self):
        return iter(self.literals)

    def __len__(self):
        return len(self.literals)

    def formula(self) -> Formula:
        return conj(*self.literals)

    def validate(self) -> None:
        roles = [set(self.params), set(self.existentials), set(self.defined)]
        for i, j in itertools.combinations(range(3), 2):
            if roles[i] & roles[j]:
                raise SortError(f"variables with two roles: {sorted(map(str, roles[i] & roles[j]))}")
        allv = roles[0] | roles[1] | roles[2]
        missing = [str(v) for v in free_vars(self) if v not in allv]
        if missing:
            raise SortError(f"variables without a role: {missing}")

    def with_literals(self, lits: Iterable[Literal]) -> "Constraint":
        return Constraint(tuple(lits), self.params, self.existentials, self.defined)

    def __str__(self) -> str:
        return str(self.formula())


# ---------------------------------------------------------------------------
# substitution

def substitute(obj, mapping: Mapping[Term, Term]):
    """Capture-free replacement of variables; works on terms, literals,
    formulas and constraints."""
    for k, v in mapping.items():
        if k.sort != v.sort:
            raise SortError(f"cannot replace {k}:{k.sort} by {v}:{v.sort}")
    if not mapping:
        return obj
    cache: dict[Term, Term] = {}

    def on_term(t: Term) -> Term:
        r = cache.get(t)
        if r is None:
            if t.is_var:
                r = mapping.get(t, t)
            elif t.args:
                r = Term(t.kind, t.name, tuple(on_term(a) for a in t.args), t.sort, t.value)
            else:
                r = t
            cache[t] = r
        return r

    def on_formula(f: Formula) -> Formula:
        if isinstance(f, Literal):
            return Literal(f.pred, tuple(on_term(a) for a in f.args), f.positive)
        if isinstance(f, Not):
            return Not(on_formula(f.arg))
        if isinstance(f, And):
            return And(tuple(on_formula(a) for a in f.args))
        return Or(tuple(on_formula(a) for a in f.args))

    if isinstance(obj, Term):
        return on_term(obj)
    if isinstance(obj, Formula):
        return on_formula(obj)
    if isinstance(obj, Constraint):
        keep = lambda vs: tuple(v for v in vs if v not in mapping)
        return Constraint(
            tuple(on_formula(l) for l in obj.literals),
            keep(obj.params), keep(obj.existentials), keep(obj.defined),
        )
    if isinstance(obj, (tuple, list)):
        return type(obj)(substitute(o, mapping) for o in obj)
    raise TypeError(f"cannot substitute into {obj!r}")


# ---------------------------------------------------------------------------
# disjunctive normal form

def _nnf_dnf(f: Formula, positive: bool) -> list[tuple[Literal, ...]]:
    if isinstance(f, Literal):
        return [(f if positive else ~f,)]
    if isinstance(f, Not):
        return _nnf_dnf(f.arg, not positive)
    is_and = isinstance(f, And) == positive
    parts = [_nnf_dnf(a, positive) for a in f.args]
    if not is_and:
        return [c for p in parts for c in p]
    out: list[tuple[Literal, ...]] = [()]
    for p in parts:
        nxt = []
        for left in out:
            for right in p:
                merged = tuple(dict.fromkeys(left + right))
                if not _complementary(merged):
                    nxt.append(merged)
        out = nxt
        if not out:
            break
    return out


def _complementary(lits: Sequence[Literal]) -> bool:
    s = set(lits)
    return any(~l in s for l in lits)


def to_dnf(f: Formula) -> list[Constraint]:
    """Propositional DNF; disjuncts with complementary literals are dropped."""
    out: dict[tuple[Literal, ...], None] = {}
    for c in _nnf_dnf(f, True):
        if not _complementary(c):
            out[c] = None
    return [Constraint(c) for c in out]


def from_dnf(disjuncts: Iterable[Constraint | Sequence[Literal]]) -> Formula:
    return disj(*(conj(*c) for c in disjuncts))


# ---------------------------------------------------------------------------
# partition guessing

@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[Term, ...], ...]

    @property
    def representatives(self) -> tuple[Term, ...]:
        return tuple(b[0] for b in self.blocks)

    def substitution(self) -> dict[Term, Term]:
        return {v: b[0] for b in self.blocks for v in b[1:]}

    def disequalities(self) -> Constraint:
        reps = self.representatives
        return Constraint(tuple(neq(a, b) for a, b in itertools.combinations(reps, 2) if a.sort == b.sort))

    def __str__(self) -> str:
        return " ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)


def _rgs(n: int) -> Iterator[tuple[int, ...]]:
    def rec(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in range(top + 2):
            prefix.append(k)
            yield from rec(prefix, max(top, k))
            prefix.pop()

    if n == 0:
        yield ()
    else:
        yield from rec([0], 0)


def enumerate_partitions(evars: Sequence[Term]) -> list[tuple[Partition, Constraint]]:
    """All set partitions of ``evars`` (sort-respecting), finest first.

    Blocks are keyed by restricted growth strings; the list is the reverse of
    their lexicographic order, so the all-distinct partition comes first and
    the all-identified one last.  The representative of a block is its
    lowest-index member.
    """
    evars = list(evars)
    out = []
    for code in reversed(list(_rgs(len(evars)))):
        blocks: dict[int, list[Term]] = {}
        for v, k in zip(evars, code):
            blocks.setdefault(k, []).append(v)
        if any(len({v.sort for v in b}) > 1 for b in blocks.values()):
            continue
        p = Partition(tuple(tuple(b) for _, b in sorted(blocks.items())))
        out.append((p, p.disequalities()))
    return out


# ---------------------------------------------------------------------------
# fresh names and purification

class FreshNames:
    """Deterministic fresh-variable supply, local to one cover invocation."""

    def __init__(self, taken: Iterable[str] = (), prefix: str = "d"):
        self.taken = set(taken)
        self.prefix = prefix
        self.counter = 0

    def reserve(self, names: Iterable[str]) -> None:
        self.taken.update(names)

    def new(self, sort: Sort = REAL, prefix: str | None = None) -> Term:
        p = prefix or self.prefix
        while True:
            name = f"{p}{self.counter}"
            self.counter += 1
            if name not in self.taken:
                self.taken.add(name)
                return var(name, sort)

    def prime(self, v: Term) -> Term:
        name = v.name + "'"
        while name in self.taken:
            name += "'"
        self.taken.add(name)
        return var(name, v.sort)


def term_side(t: Term) -> int:
    """0 for variables, 1 for uninterpreted symbols, 2 for arithmetic."""
    if t.is_var:
        return 0
    return 2 if t.is_arith else 1


def literal_side(lit: Literal) -> int:
    if lit.pred in ARITH_PREDS:
        return 2
    if lit.pred != EQ:
        return 1
    for a in lit.args:
        s = term_side(a)
        if s:
            return s
    return 0


def is_pure(lit: Literal, side: int) -> bool:
    want = literal_side(lit)
    if want not in (0, side):
        return False

    def ok(t: Term) -> bool:
        return term_side(t) in (0, side) and all(ok(a) for a in t.args if not (t.name == MUL and a.is_num))

    return all(ok(a) for a in lit.args)


def purify(phi: Constraint, fresh: FreshNames | None = None):
    """Abstract alien subterms by fresh existential variables.

    Returns ``(psi1, psi2, defs)`` where ``psi1`` holds the uninterpreted
    literals, ``psi2`` the arithmetic ones and ``defs`` lists each fresh
    variable with the (purified) term it names.  Equalities between two
    variables of a shared sort go to both sides.  Identical alien terms share
    one fresh variable; abstraction proceeds innermost-first, left-to-right.
    """
    if fresh is None:
        fresh = FreshNames(v.name for v in free_vars(phi))
    memo: dict[Term, Term] = {}
    defs: list[tuple[Term, Term]] = []
    side_lits: dict[int, list[Literal]] = {1: [], 2: []}

    def pure(t: Term, ctx: int) -> Term:
        if t.is_var:
            return t
        s = term_side(t)
        if t.is_app:
            if t.name == MUL:
                inner = (t.args[0], pure(t.args[1], s))
            else:
                inner = tuple(pure(a, s) for a in t.args)
            t2 = Term(t.kind, t.name, inner, t.sort, t.value)
        else:
            t2 = t
        if s == ctx:
            return t2
        d = memo.get(t2)
        if d is None:
            d = fresh.new(t2.sort)
            memo[t2] = d
            defs.append((d, t2))
            side_lits[s].append(eq(d, t2))
        return d

    for lit in phi.literals:
        s = literal_side(lit)
        if s == 0:
            side_lits[1].append(lit)
            if lit.args[0].sort.shared:
                side_lits[2].append(lit)
            continue
        args = tuple(pure(a, s) for a in lit.args)
        side_lits[s].append(Literal(lit.pred, args, lit.positive))

    new_ex = phi.existentials + tuple(d for d, _ in defs)
    psi1 = Constraint(tuple(side_lits[1]), phi.params, new_ex, phi.defined)
    psi2 = Constraint(tuple(side_lits[2]), phi.params, new_ex, phi.defined)
    return psi1, psi2, defs
