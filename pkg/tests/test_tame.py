import pathlib

import pytest

from covers.cli.main import compute, verify
from covers.cli.problem import parse_problem
from covers.errors import UnsupportedCombinationError
from covers.kernel import REAL, Constraint, Signature, Sort, app, eq, free_vars, le, lt, to_dnf, var
from covers.solver import equivalent
from covers.tame import TameProblem, check_tame, shared_sorts, tame_cover, tame_flatten

ELEM = Sort("elem")
TAME = sorted((pathlib.Path(__file__).parent.parent / "problems" / "tame").glob("*.smt"))

x, e = var("x", ELEM), var("e", ELEM)
r, h = var("r"), var("h")
price = lambda t: app("price", t)

SIG1 = Signature(sorts={"elem": ELEM, "Real": REAL}, functions={"price": ((ELEM,), REAL)})
SIG2 = Signature(sorts={"Real": REAL}, side=2)


def problem(phi, psi, evars):
    return TameProblem(Constraint(tuple(phi)), Constraint(tuple(psi)), tuple(evars), SIG1, SIG2)


def test_shared_sorts_and_tameness():
    assert shared_sorts(SIG1, SIG2) == {REAL}
    assert check_tame(SIG1, SIG2)
    bad = Signature(sorts=SIG1.sorts, functions={"g": ((REAL,), ELEM)})
    assert not check_tame(bad, SIG2)
    with pytest.raises(UnsupportedCombinationError):
        tame_cover(TameProblem(Constraint(()), Constraint(()), (), bad, SIG2))


def test_flatten_names_first_signature_terms():
    p = problem([], [le(h, price(e)), lt(price(e), price(x))], [e, h])
    flat = tame_flatten(p)
    assert [str(t) for _, t in flat.defs] == ["price(e)", "price(x)"]
    assert all(not any(a.is_app and a.name == "price" for t in l.args for a in t.subterms()) for l in flat.psi)
    assert len(flat.phi) == 2


def test_price_example():
    p = problem([~eq(e, x)], [le(h, price(e)), lt(price(e), price(x)), lt(r, h)], [e, h])
    assert equivalent(tame_cover(p), lt(r, price(x)))


def test_defined_record():
    p = problem([eq(e, x)], [eq(h, price(e)), le(h, r)], [e, h])
    assert equivalent(tame_cover(p), le(price(x), r))


def _second_kind_ok(cov1, evars) -> bool:
    ev = set(evars)
    for d in to_dnf(cov1):
        for lit in d.literals:
            if not any(a.sort.shared for a in lit.args):
                continue
            if lit.pred != "=":
                return False
            # each side is a variable or a parameter-only first-signature term
            for a in lit.args:
                if not a.is_var and set(free_vars(a)) & ev:
                    return False
    return True


@pytest.mark.parametrize("path", TAME, ids=lambda p: p.stem)
def test_tame_corpus(path):
    p = parse_problem(path.read_text())
    trace = []
    cover = compute(p, trace)
    assert verify(p, cover) == []
    cov1 = [c for tag, c, *_ in trace if tag == "T1-cover"][0]
    assert _second_kind_ok(cov1, p.evars)
