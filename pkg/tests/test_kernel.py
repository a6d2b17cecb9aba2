from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from covers.errors import SortError
from covers.kernel import (
    FALSE, REAL, TRUE, Constraint, FreshNames, Sort, add, app, conj, disj, enumerate_partitions, eq,
    free_vars, le, linearize, lt, mul, neg, neq, normalize_term, num, purify, substitute, to_dnf, var,
)

x, y, z = var("x"), var("y"), var("z")
f = lambda t: app("f", t)


def test_terms_are_hash_consed():
    assert var("x") is x
    assert app("f", var("x")) is f(x)
    assert num(Fraction(1, 2)) is num(Fraction(2, 4))


def test_linearize_collects_coefficients():
    coeffs, const = linearize(add(mul(2, x), y, mul(-1, x), num(3)))
    assert coeffs == {x: 1, y: 1}
    assert const == 3


def test_normalize_term_is_canonical():
    a = normalize_term(add(y, x, num(1)))
    b = normalize_term(add(num(1), x, y))
    assert a is b


def test_equality_orientation_is_canonical():
    assert eq(x, f(x)) == eq(f(x), x)


def test_mixed_sort_equality_rejected():
    u = var("u", Sort("U"))
    with pytest.raises(SortError):
        eq(u, x)


def test_conj_disj_units():
    assert conj() == TRUE
    assert disj() == FALSE
    assert conj(TRUE, lt(x, y)) == lt(x, y)
    assert disj(FALSE, lt(x, y)) == lt(x, y)


def test_to_dnf_distributes_and_drops_complements():
    a, b = lt(x, y), eq(x, z)
    f_ = conj(disj(a, b), disj(neg(a), b))
    ds = {frozenset(d.literals) for d in to_dnf(f_)}
    assert frozenset({a, neg(a)}) not in ds
    assert frozenset({b}) in ds or frozenset({a, b}) in ds


def test_substitute_replaces_variables_only():
    assert substitute(f(x), {x: y}) is f(y)
    c = Constraint((eq(f(x), z),), (z,), (x,))
    assert substitute(c, {x: y}).literals == (eq(f(y), z),)


def test_constraint_validate_roles():
    Constraint((lt(x, y),), (x,), (y,)).validate()
    with pytest.raises(SortError):
        Constraint((lt(x, y),), (x,), ()).validate()
    with pytest.raises(SortError):
        Constraint((lt(x, y),), (x, y), (y,)).validate()


def test_partitions_finest_first():
    parts = enumerate_partitions([x, y, z])
    assert len(parts) == 5  # Bell(3)
    assert [len(p.blocks) for p, _ in parts][0] == 3
    assert [len(p.blocks) for p, _ in parts][-1] == 1
    first, diseqs = parts[0]
    assert len(diseqs) == 3


def test_partitions_respect_sorts():
    u = var("u", Sort("U"))
    parts = enumerate_partitions([x, u])
    assert len(parts) == 1


def test_fresh_names_avoid_taken():
    fr = FreshNames(["d0", "d1"])
    assert fr.new().name == "d2"
    assert fr.prime(x).name == "x'"
    assert fr.prime(x).name == "x''"


def test_purify_separates_sides():
    c = Constraint((le(add(x, f(y)), z), eq(f(add(x, y)), z)))
    psi1, psi2, defs = purify(c)
    for lit in psi1:
        assert not any(a.is_arith for l in [lit] for t in l.args for a in t.subterms())
    for lit in psi2:
        assert not any(a.is_app and not a.is_arith for t in lit.args for a in t.subterms())
    assert len(defs) == 2


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.integers(-5, 5))
def test_linearize_round_trip(cs, k):
    t = add(mul(cs[0], x), mul(cs[1], y), mul(cs[2], z), num(k))
    coeffs, const = linearize(t)
    t2 = add(*[mul(c, v) for v, c in coeffs.items()], num(const))
    assert linearize(t2) == (coeffs, const)


@given(st.integers(1, 5))
def test_partition_count_is_bell(n):
    bell = [1, 1, 2, 5, 15, 52]
    assert len(enumerate_partitions([var(f"v{i}") for i in range(n)])) == bell[n]


def test_free_vars_in_order():
    assert free_vars(conj(lt(y, x), eq(f(z), x))) == (y, x, z)
