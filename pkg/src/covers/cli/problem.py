"""S-expression problem files: parsing, printing and formula output.

Grammar::

    (declare-sort elem)
    (declare-fun f (elem) Real)        ; Bool codomain declares a predicate
    (declare-var x Real :role param)   ; or :role exists
    (set-theory euf+lra)               ; euf | lra | euf+lra | tame | idl+euf | lia+euf
    (assert (<= (+ x e) 3))
    (compute-cover)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ParseError, SortError
from ..kernel import (
    ADD, EQ, INT, MUL, REAL, And, Formula, Literal, Not, Or, Sort, Term, add, app, eq, le, lt,
    mul, neq, num, var,
)

THEORIES = ("euf", "lra", "euf+lra", "tame", "idl+euf", "lia+euf")
BUILTIN_SORTS = {"Real": REAL, "Int": INT}


@dataclass
class Tok:
    text: str
    line: int
    col: int


class SList(list):
    line = 0
    col = 0


def tokenize(text: str) -> list[Tok]:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            out.append(Tok(c, line, col))
            i += 1
            col += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] not in "();":
            j += 1
        out.append(Tok(text[i:j], line, col))
        col += j - i
        i = j
    return out


def read_sexprs(text: str) -> list:
    toks = tokenize(text)
    stack: list[SList] = []
    top: list = []
    for t in toks:
        if t.text == "(":
            s = SList()
            s.line, s.col = t.line, t.col
            stack.append(s)
        elif t.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", t.line, t.col)
            s = stack.pop()
            (stack[-1] if stack else top).append(s)
        else:
            (stack[-1] if stack else top).append(t)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col)
    return top


def _pos(x) -> tuple[int, int]:
    return (x.line, x.col)


@dataclass
class VarDecl:
    name: str
    sort: str
    role: str


@dataclass
class ProblemFile:
    sorts: list[str] = field(default_factory=list)
    functions: dict[str, tuple[tuple[str, ...], str]] = field(default_factory=dict)
    variables: list[VarDecl] = field(default_factory=list)
    theory: str = "euf+lra"
    asserts: list[Literal] = field(default_factory=list)
    compute: bool = False

    def sort(self, name: str) -> Sort:
        if name in BUILTIN_SORTS:
            return BUILTIN_SORTS[name]
        return Sort(name)

    def var_terms(self, role: str | None = None) -> list[Term]:
        return [var(d.name, self.sort(d.sort)) for d in self.variables if role is None or d.role == role]

    @property
    def params(self) -> list[Term]:
        return self.var_terms("param")

    @property
    def evars(self) -> list[Term]:
        return self.var_terms("exists")

    def to_text(self) -> str:
        lines = [f"(declare-sort {s})" for s in self.sorts]
        for f, (dom, cod) in self.functions.items():
            lines.append(f"(declare-fun {f} ({' '.join(dom)}) {cod})")
        for d in self.variables:
            lines.append(f"(declare-var {d.name} {d.sort} :role {d.role})")
        lines.append(f"(set-theory {self.theory})")
        for l in self.asserts:
            lines.append(f"(assert {format_literal(l)})")
        if self.compute:
            lines.append("(compute-cover)")
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return (self.sorts, self.functions, self.variables, self.theory, self.compute) == (
            other.sorts, other.functions, other.variables, other.theory, other.compute) and [
            str(a) for a in self.asserts] == [str(b) for b in other.asserts] and self.asserts == other.asserts


# ---------------------------------------------------------------------------
# parsing

class _Parser:
    def __init__(self):
        self.p = ProblemFile()
        self.vars: dict[str, Term] = {}

    def atom(self, x, what: str) -> str:
        if not isinstance(x, Tok):
            raise ParseError(f"expected {what}", *_pos(x))
        return x.text

    def sort_of(self, x) -> str:
        name = self.atom(x, "a sort")
        if name not in BUILTIN_SORTS and name not in self.p.sorts and name != "Bool":
            raise ParseError(f"undeclared sort {name}", *_pos(x))
        return name

    def command(self, s) -> None:
        if not isinstance(s, SList) or not s:
            raise ParseError("expected a command", *_pos(s))
        head = self.atom(s[0], "a command name")
        if head == "declare-sort":
            if len(s) != 2:
                raise ParseError("declare-sort takes one name", *_pos(s))
            name = self.atom(s[1], "a sort name")
            if name in self.p.sorts or name in BUILTIN_SORTS:
                raise ParseError(f"sort {name} declared twice", *_pos(s[1]))
            self.p.sorts.append(name)
        elif head == "declare-fun":
            if len(s) != 4 or not isinstance(s[2], SList):
                raise ParseError("declare-fun takes a name, a domain list and a codomain", *_pos(s))
            name = self.atom(s[1], "a function name")
            if name in self.p.functions or name in self.vars:
                raise ParseError(f"symbol {name} declared twice", *_pos(s[1]))
            dom = tuple(self.sort_of(d) for d in s[2])
            self.p.functions[name] = (dom, self.sort_of(s[3]))
        elif head == "declare-var":
            if len(s) != 5 or self.atom(s[3], ":role") != ":role":
                raise ParseError("declare-var takes a name, a sort and :role param|exists", *_pos(s))
            name = self.atom(s[1], "a variable name")
            if name in self.vars or name in self.p.functions:
                raise ParseError(f"symbol {name} declared twice", *_pos(s[1]))
            sort = self.sort_of(s[2])
            role = self.atom(s[4], "a role")
            if role not in ("param", "exists"):
                raise ParseError(f"unknown role {role}", *_pos(s[4]))
            self.p.variables.append(VarDecl(name, sort, role))
            self.vars[name] = var(name, self.p.sort(sort))
        elif head == "set-theory":
            th = self.atom(s[1], "a theory name") if len(s) == 2 else None
            if th not in THEORIES:
                raise ParseError(f"unknown theory {th}; expected one of {', '.join(THEORIES)}", *_pos(s))
            self.p.theory = th
        elif head == "assert":
            if len(s) != 2:
                raise ParseError("assert takes one literal", *_pos(s))
            self.p.asserts.append(self.literal(s[1]))
        elif head == "compute-cover":
            self.p.compute = True
        else:
            raise ParseError(f"unknown command {head}", *_pos(s[0]))

    # -- terms
    def number(self, t: Tok) -> Fraction | None:
        try:
            return Fraction(t.text)
        except (ValueError, ZeroDivisionError):
            return None

    def term(self, x) -> Term:
        if isinstance(x, Tok):
            v = self.number(x)
            if v is not None:
                return num(v)
            if x.text in self.vars:
                return self.vars[x.text]
            if x.text in self.p.functions:
                dom, cod = self.p.functions[x.text]
                if dom:
                    raise ParseError(f"{x.text} expects {len(dom)} arguments", *_pos(x))
                return app(x.text, sort=self.p.sort(cod))
            raise ParseError(f"undeclared symbol {x.text}", *_pos(x))
        if not x:
            raise ParseError("empty term", *_pos(x))
        head = self.atom(x[0], "a function symbol")
        args = [self.term(a) for a in x[1:]]
        try:
            if head == "+":
                return add(*_unify(args))
            if head == "-":
                args = _unify(args)
                if len(args) == 1:
                    return _scale(Fraction(-1), args[0], x)
                return add(args[0], *(_scale(Fraction(-1), a, x) for a in args[1:]))
            if head == "*":
                consts = [a for a in args if a.is_num]
                rest = [a for a in args if not a.is_num]
                c = Fraction(1)
                for k in consts:
                    c *= k.value
                if len(rest) > 1:
                    raise ParseError("nonlinear product", *_pos(x))
                if not rest:
                    return num(c)
                return _scale(c, rest[0], x)
            if head == "/":
                if len(args) != 2 or not args[1].is_num or args[1].value == 0:
                    raise ParseError("division by a nonzero numeral only", *_pos(x))
                if args[0].is_num:
                    return num(args[0].value / args[1].value)
                return _scale(1 / args[1].value, args[0], x)
        except SortError as err:
            raise ParseError(str(err), *_pos(x)) from None
        if head not in self.p.functions:
            raise ParseError(f"undeclared function {head}", *_pos(x[0]))
        dom, cod = self.p.functions[head]
        if cod == "Bool":
            raise ParseError(f"predicate {head} used as a term", *_pos(x[0]))
        if len(dom) != len(args):
            raise ParseError(f"{head} expects {len(dom)} arguments, got {len(args)}", *_pos(x))
        args = [_coerce(a, self.p.sort(s)) for a, s in zip(args, dom)]
        for a, s in zip(args, dom):
            if a.sort != self.p.sort(s):
                raise ParseError(f"argument {a} of {head} has sort {a.sort}, expected {s}", *_pos(x))
        return app(head, *args, sort=self.p.sort(cod))

    def literal(self, x, positive: bool = True) -> Literal:
        if isinstance(x, Tok) or not x:
            if isinstance(x, Tok) and x.text in self.p.functions and self.p.functions[x.text][1] == "Bool":
                return Literal(x.text, (), positive)
            raise ParseError("expected a literal", *_pos(x))
        head = self.atom(x[0], "a predicate")
        if head == "not":
            if len(x) != 2:
                raise ParseError("not takes one literal", *_pos(x))
            return self.literal(x[1], not positive)
        args = [self.term(a) for a in x[1:]]
        try:
            if head in ("=", "distinct", "<", "<=", ">", ">="):
                if len(args) != 2:
                    raise ParseError(f"{head} takes two arguments", *_pos(x))
                a, b = _unify(args)
                if head in ("<", "<=", ">", ">=") and not a.sort.shared:
                    raise ParseError(f"ordering on non-arithmetic sort {a.sort}", *_pos(x))
                lit = {"=": lambda: eq(a, b), "distinct": lambda: neq(a, b), "<": lambda: lt(a, b),
                       "<=": lambda: le(a, b), ">": lambda: lt(b, a), ">=": lambda: le(b, a)}[head]()
                return lit if positive else ~lit
        except SortError as err:
            raise ParseError(str(err), *_pos(x)) from None
        if head not in self.p.functions or self.p.functions[head][1] != "Bool":
            raise ParseError(f"undeclared predicate {head}", *_pos(x[0]))
        dom, _ = self.p.functions[head]
        if len(dom) != len(args):
            raise ParseError(f"{head} expects {len(dom)} arguments, got {len(args)}", *_pos(x))
        args = [_coerce(a, self.p.sort(s)) for a, s in zip(args, dom)]
        return Literal(head, tuple(args), positive)


def _coerce(t: Term, sort: Sort) -> Term:
    """Numerals are read as reals; give them the sort their position needs."""
    if t.is_num and t.sort != sort and sort.shared:
        return num(t.value, sort)
    return t


def _unify(args: list[Term]) -> list[Term]:
    target = next((a.sort for a in args if not a.is_num), None)
    return [_coerce(a, target) if target is not None else a for a in args]


def _scale(c: Fraction, t: Term, where) -> Term:
    if not t.sort.shared:
        raise ParseError(f"arithmetic on non-arithmetic sort {t.sort}", *_pos(where))
    if t.is_num:
        return num(c * t.value, t.sort)
    return t if c == 1 else mul(c, t)


def parse_problem(text: str) -> ProblemFile:
    p = _Parser()
    for s in read_sexprs(text):
        p.command(s)
    return p.p


# ---------------------------------------------------------------------------
# printing

def _fmt_num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator) if v >= 0 else f"(- {-v.numerator})"
    inner = f"(/ {abs(v.numerator)} {v.denominator})"
    return inner if v > 0 else f"(- {inner})"


def format_term(t: Term) -> str:
    if t.is_var:
        return t.name
    if t.is_num:
        return _fmt_num(t.value)
    if t.name == ADD:
        return f"(+ {' '.join(format_term(a) for a in t.args)})"
    if t.name == MUL:
        return f"(* {_fmt_num(t.args[0].value)} {format_term(t.args[1])})"
    if not t.args:
        return t.name
    return f"({t.name} {' '.join(format_term(a) for a in t.args)})"


def format_literal(l: Literal) -> str:
    args = " ".join(format_term(a) for a in l.args)
    if l.pred == EQ:
        return f"(= {args})" if l.positive else f"(distinct {args})"
    core = f"({l.pred} {args})" if l.args else l.pred
    return core if l.positive else f"(not {core})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Literal):
        return format_literal(f)
    if isinstance(f, Not):
        return f"(not {format_formula(f.arg)})"
    if isinstance(f, And):
        if not f.args:
            return "true"
        if len(f.args) == 1:
            return format_formula(f.args[0])
        return f"(and {' '.join(format_formula(a) for a in f.args)})"
    if isinstance(f, Or):
        if not f.args:
            return "false"
        if len(f.args) == 1:
            return format_formula(f.args[0])
        return f"(or {' '.join(format_formula(a) for a in f.args)})"
    raise TypeError(f"not a formula: {f!r}")
