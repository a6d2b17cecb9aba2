import io
import pathlib
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from covers.cli.main import compute, run
from covers.cli.problem import ProblemFile, VarDecl, parse_problem
from covers.errors import ParseError
from covers.kernel import free_vars
from covers.solver import equivalent

from generators import mixed_instance

ROOT = pathlib.Path(__file__).parent.parent
PROBLEMS = ROOT / "problems"


def invoke(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin)
    try:
        code = run(list(argv), out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def as_problem(lits, evars, params) -> ProblemFile:
    funcs = {}
    for l in lits:
        for a in l.args:
            for t in a.subterms():
                if t.is_app and not t.is_arith:
                    funcs[t.name] = (tuple("Real" for _ in t.args), "Real")
    evs = set(evars)
    decls = [VarDecl(v.name, "Real", "exists" if v in evs else "param") for v in free_vars(lits)]
    decls += [VarDecl(v.name, "Real", "exists") for v in evars if v not in set(free_vars(lits))]
    return ProblemFile([], dict(sorted(funcs.items())), decls, "euf+lra", list(lits), True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_round_trip(seed):
    p = as_problem(*mixed_instance(random.Random(seed)))
    q = parse_problem(p.to_text())
    assert q == p
    assert parse_problem(q.to_text()).to_text() == p.to_text()


def test_golden_file_verifies():
    code, out, err = invoke(str(PROBLEMS / "golden.smt"), "--verify")
    assert code == 0, err
    assert out.splitlines()[-1] == "verified: residue-check passed"
    assert out.splitlines()[0].startswith("(or ")


def test_non_convex_exits_2_without_output():
    code, out, err = invoke(str(PROBLEMS / "idl_euf.smt"))
    assert code == 2
    assert out == ""
    assert "unsupported combination" in err


def test_parse_error_has_location():
    text = "(declare-var x Real :role param)\n(assert (< x y))\n"
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert (info.value.line, info.value.col) == (2, 14)
    code, out, err = invoke("-", stdin=text)
    assert code == 1 and out == ""
    assert "2:14" in err


def test_unbalanced_parenthesis():
    with pytest.raises(ParseError, match="unclosed"):
        parse_problem("(assert (< x 1)")


def test_missing_file_is_an_error():
    code, _, err = invoke(str(PROBLEMS / "does-not-exist.smt"))
    assert code == 1 and "error" in err


def test_stdin_matches_file_and_raw_is_equivalent():
    text = (PROBLEMS / "golden.smt").read_text()
    code, from_stdin, _ = invoke("-", stdin=text)
    assert code == 0
    assert from_stdin == invoke(str(PROBLEMS / "golden.smt"))[1]
    code, raw, _ = invoke("-", "--format", "raw", stdin=text)
    assert code == 0 and raw.startswith("(")
    p = parse_problem(text)
    assert equivalent(compute(p, simplify=False), compute(p))


def test_trace_goes_to_stderr():
    code, out, err = invoke(str(PROBLEMS / "golden.smt"), "--trace")
    assert code == 0
    assert "ImplDef(psi2, e3)" in err
    assert "ImplDef" not in out


def test_deterministic_across_processes():
    cmd = [sys.executable, "-m", "covers", str(PROBLEMS / "golden.smt")]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b and a.strip()
