import itertools
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from covers.kernel import Sort, add, app, conj, disj, eq, le, lt, mul, neg, neq, num, var
from covers.solver import (
    cc_sat, entails, equivalent, fm_project, is_sat, lra_entails, lra_model, lra_sat, nelson_oppen_sat,
    normalize_literal, simplify_formula,
)
from covers.solver.lra import LinAtom, from_literal, implied_equalities_lra

from generators import lra_system, mixed_instance

U = Sort("U")
ux, uy = var("x", U), var("y", U)
uf = lambda t: app("f", t, sort=U)
UTERMS = [ux, uy, uf(ux), uf(uy)]

x, y, z = var("x"), var("y"), var("z")
f = lambda t: app("f", t)

SETTINGS = settings(max_examples=60, deadline=None)


def _eval(t, env, ftab):
    if t.is_var:
        return env[t]
    return ftab[_eval(t.args[0], env, ftab)]


def brute_force_euf(lits):
    """Search every interpretation over a domain as large as the term set."""
    n = len(UTERMS)
    for vals in itertools.product(range(n), repeat=2):
        env = {ux: vals[0], uy: vals[1]}
        for ftab in itertools.product(range(n), repeat=n):
            if all((_eval(l.args[0], env, ftab) == _eval(l.args[1], env, ftab)) == l.positive for l in lits):
                return True
    return False


euf_literal = st.builds(
    lambda a, b, pos: eq(a, b) if pos else neq(a, b),
    st.sampled_from(UTERMS), st.sampled_from(UTERMS), st.booleans(),
).filter(lambda l: l.args[0] is not l.args[1])


@SETTINGS
@given(st.lists(euf_literal, min_size=1, max_size=5))
def test_cc_agrees_with_finite_models(lits):
    assert bool(cc_sat(lits)) == brute_force_euf(lits)


@SETTINGS
@given(st.integers(0, 10_000))
def test_lra_model_satisfies_or_projection_is_empty(seed):
    lits, _, _ = lra_system(random.Random(seed))
    atoms = [from_literal(l) for l in lits]
    m = lra_model(atoms)
    if m is None:
        allv = {v for a in atoms for v in a.vars()}
        assert fm_project(atoms, allv) == []
    else:
        assert all(a.holds(m) for a in atoms)


@SETTINGS
@given(st.integers(0, 10_000))
def test_nelson_oppen_matches_single_theory(seed):
    rng = random.Random(seed)
    lits, _, _ = lra_system(rng)
    assert bool(nelson_oppen_sat(lits)) == lra_sat([from_literal(l) for l in lits])
    euf = [eq(rng.choice(UTERMS), rng.choice(UTERMS)) for _ in range(2)]
    euf = [l for l in euf if l.args[0] is not l.args[1]] + [neq(uf(ux), uy)]
    assert bool(nelson_oppen_sat(euf)) == bool(cc_sat(euf))


@SETTINGS
@given(st.integers(0, 10_000))
def test_nelson_oppen_arrangements_agree(seed):
    lits, _, _ = mixed_instance(random.Random(seed), max_lits=5)
    assert bool(nelson_oppen_sat(lits)) == bool(nelson_oppen_sat(lits, arrangements=True))


def test_nelson_oppen_needs_propagation():
    # x <= y, y <= x forces x = y, hence f(x) = f(y)
    lits = [le(x, y), le(y, x), neq(f(x), f(y))]
    assert not nelson_oppen_sat(lits)
    # f(x) - f(y) = 1 with x = y is unsatisfiable only through EUF
    lits = [eq(x, y), eq(add(f(x), mul(-1, f(y))), num(1))]
    assert not nelson_oppen_sat(lits)


@SETTINGS
@given(st.integers(0, 10_000))
def test_implied_equalities_are_exact(seed):
    lits, _, _ = lra_system(random.Random(seed))
    atoms = [from_literal(l) for l in lits]
    if not lra_sat(atoms):
        return
    vs = sorted({v for a in atoms for v in a.vars()}, key=str)
    pairs = list(itertools.combinations(vs, 2))
    found = set(implied_equalities_lra(atoms, pairs))
    for v, w in pairs:
        d = LinAtom.make({v: Fraction(1), w: Fraction(-1)}, 0, "=")
        assert ((v, w) in found) == lra_entails(atoms, d)


@SETTINGS
@given(st.integers(0, 10_000))
def test_entailment_reflexive_and_transitive(seed):
    rng = random.Random(seed)
    a, _, _ = mixed_instance(rng, max_lits=4)
    assert entails(a, a)
    weaker = a[: max(1, len(a) // 2)]
    weakest = weaker[:1]
    assert entails(a, weaker) and entails(weaker, weakest) and entails(a, weakest)


def test_entails_modulo_combination():
    assert entails(conj(eq(x, y)), eq(f(x), f(y)))
    assert entails(conj(le(x, y), le(y, x)), eq(f(x), f(y)))
    assert not entails(le(x, y), eq(f(x), f(y)))
    assert entails(lt(x, y), disj(lt(x, z), lt(z, y)))


@SETTINGS
@given(st.integers(0, 10_000))
def test_simplify_preserves_meaning(seed):
    rng = random.Random(seed)
    a, _, _ = mixed_instance(rng, max_lits=3)
    b, _, _ = mixed_instance(rng, max_lits=3)
    f_ = disj(conj(*a), conj(*b))
    assert equivalent(simplify_formula(f_), f_)


def test_simplify_merges_splits():
    assert simplify_formula(disj(lt(x, y), lt(y, x))) == normalize_literal(neq(x, y))
    assert simplify_formula(disj(lt(x, y), eq(x, y))) == normalize_literal(le(x, y))
    assert equivalent(simplify_formula(conj(le(x, y), neg(eq(x, y)))), lt(x, y))
    assert not is_sat(conj(lt(x, y), lt(y, x)))
