"""Acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL verdict that is printed in the
pytest terminal summary under "acceptance criteria".
"""
import contextlib
import itertools
import pathlib
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from covers.cli.main import compute, verify
from covers.cli.problem import parse_problem
from covers.combined import Trace, combined_cover
from covers.euf_cover import euf_cover
from covers.kernel import conj, disj, free_vars, literals_of, normalize_term, to_dnf
from covers.lra_cover import LinSystem, lra_cover
from covers.solver import entails, equivalent
from covers.solver import lra as lra_mod
from covers.solver import nelson_oppen
from covers.solver.lra import LinAtom, from_literal, lra_model
from covers.solver.oracle import oracle_language, residue_types

import golden as G
from generators import euf_oracle_instance, lra_system, mixed_instance

ROOT = pathlib.Path(__file__).parent.parent
PROBLEMS = ROOT / "problems"


@contextlib.contextmanager
def criterion(n: int, name: str, detail: dict):
    try:
        yield
    except BaseException as err:
        ACCEPTANCE[n] = f"FAIL  {n}. {name}: {type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''}"
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    ACCEPTANCE[n] = f"PASS  {n}. {name}" + (f" ({extra})" if extra else "")


def _clear_caches():
    lra_mod._sat_cached.cache_clear()
    nelson_oppen._sat_cached.cache_clear()


# ---------------------------------------------------------------------------
# 1

def test_1_golden_example():
    d = {}
    with criterion(1, "golden example reproduced with trace values, < 1 s", d):
        _clear_caches()
        tr = Trace()
        t0 = time.perf_counter()
        res = combined_cover(G.PHI, G.EVARS, trace=tr)
        elapsed = time.perf_counter() - t0
        d["seconds"] = f"{elapsed:.2f}"
        assert equivalent(res, disj(G.RES11, G.RES12, G.RES2)), f"result {res}"
        impl = [ev.data["formula"] for ev in tr.find("ImplDef", side=2, var="e3") if ev.partition == G.DISTINCT]
        assert impl and equivalent(conj(*G.PSI2_DISTINCT, impl[0]), conj(*G.PSI2_DISTINCT, G.IMPLDEF_PSI2_E3))
        terms = {ev.data["var"]: ev.data["term"] for ev in tr.find("Term") if ev.partition == G.DISTINCT}
        assert normalize_term(terms["e3"]) is normalize_term(G.TERM_E3)
        assert normalize_term(terms["e4"]) is normalize_term(G.TERM_E4)
        euf = [ev.data["formula"] for ev in tr.find("ImplDef", side=1) if ev.partition == G.DISTINCT]
        assert euf and all(equivalent(f, disj()) for f in euf)
        assert elapsed < 1.0, f"took {elapsed:.2f} s"


# ---------------------------------------------------------------------------
# 2

@pytest.fixture(scope="module")
def random_covers():
    rng = random.Random(20240601)
    out, t0 = [], time.perf_counter()
    for _ in range(1000):
        lits, evars, params = mixed_instance(rng)
        out.append((lits, evars, params, combined_cover(lits, evars, verify=False)))
    return out, time.perf_counter() - t0


def test_2_residue_soundness(random_covers):
    d = {}
    with criterion(2, "1000 random EUF+LRA instances entail their cover, < 60 s", d):
        rows, build = random_covers
        t0 = time.perf_counter()
        bad = [i for i, (lits, _, _, c) in enumerate(rows) if not entails(lits, c)]
        total = build + time.perf_counter() - t0
        d.update(instances=len(rows), failures=len(bad), seconds=f"{total:.1f}")
        assert not bad, f"instances {bad[:5]} do not entail their cover"
        assert total < 60, f"took {total:.1f} s"


# ---------------------------------------------------------------------------
# 3

def test_3_oracle_equivalence():
    d = {}
    with criterion(3, "200 pure-EUF covers equal the depth-2 bounded oracle", d):
        rng = random.Random(77)
        checked = skipped = 0
        mismatches = []
        while checked < 200:
            lits, evars, _ = euf_oracle_instance(rng)
            c = euf_cover(lits, evars)
            if any(t.depth > 2 for l in literals_of(c) for a in l.args for t in a.subterms()):
                skipped += 1
                continue
            terms, preds, arith = oracle_language(lits, evars, 2)
            if set(residue_types(c, terms, preds, arith)) != set(residue_types(conj(*lits), terms, preds, arith)):
                mismatches.append([str(l) for l in lits])
            checked += 1
        d.update(checked=checked, not_expressible=skipped, mismatches=len(mismatches))
        assert not mismatches, mismatches[:3]


# ---------------------------------------------------------------------------
# 4

def _holds(f, m) -> bool:
    return any(all(from_literal(l).holds(m) for l in dj.literals) for dj in to_dnf(f))


def _restrict(atoms, m):
    out = []
    for a in atoms:
        coeffs = {v: c for v, c in a.coeffs if v not in m}
        const = a.const + sum((c * m[v] for v, c in a.coeffs if v in m), Fraction(0))
        out.append(LinAtom.make(coeffs, const, a.rel))
    return out


def _witness(atoms, m, evars, grid):
    if len(evars) <= 2:
        for vals in itertools.product(grid, repeat=len(evars)):
            w = {**m, **dict(zip(evars, vals))}
            if all(a.holds(w) for a in atoms):
                return w
    sol = lra_model(_restrict(atoms, m))
    if sol is None:
        return None
    w = {**m, **{v: sol.get(v, Fraction(0)) for v in evars}}
    return w if all(a.holds(w) for a in atoms) else None


def test_4_fm_exactness():
    d = {}
    with criterion(4, "500 random linear systems: projection exact under two-way sampling", d):
        rng = random.Random(4242)
        counter = []
        forward = backward = 0
        for i in range(500):
            lits, evars, params = lra_system(rng)
            atoms = [from_literal(l) for l in lits]
            c = lra_cover(LinSystem.from_constraint(lits, evars))
            bound = 2 + int(max((abs(a.const) for a in atoms), default=0))
            grid = [Fraction(k, 2) for k in range(-2 * bound, 2 * bound + 1)]
            allv = params + evars
            # system => cover, on grid points and on solver-found points in random boxes
            for _ in range(20):
                m = {v: rng.choice(grid) for v in allv}
                if all(a.holds(m) for a in atoms):
                    forward += 1
                    if not _holds(c, m):
                        counter.append(("forward", i, m))
            for _ in range(5):
                centre = {v: rng.choice(grid) for v in allv}
                box = [LinAtom.make({v: 1}, -centre[v] - 1, "<=") for v in allv]
                box += [LinAtom.make({v: -1}, centre[v] - 1, "<=") for v in allv]
                s = lra_model(atoms + box)
                if s is not None:
                    m = {v: s.get(v, Fraction(0)) for v in allv}
                    assert all(a.holds(m) for a in atoms)
                    forward += 1
                    if not _holds(c, m):
                        counter.append(("forward", i, m))
            # cover => exists witness, and no witness outside the cover
            for _ in range(10):
                m = {v: rng.choice(grid) for v in params}
                w = _witness(atoms, m, evars, grid)
                backward += 1
                if _holds(c, m) != (w is not None):
                    counter.append(("backward", i, m))
        d.update(systems=500, forward_points=forward, backward_points=backward, counterexamples=len(counter))
        assert not counter, counter[:3]


# ---------------------------------------------------------------------------
# 5

def test_5_non_convex_guard():
    d = {}
    with criterion(5, "non-convex idl+euf input exits 2 with no cover", d):
        r = subprocess.run([sys.executable, "-m", "covers", str(PROBLEMS / "idl_euf.smt")],
                           capture_output=True, text=True)
        d.update(exit=r.returncode)
        assert r.returncode == 2
        assert r.stdout == ""
        assert "unsupported combination" in r.stderr


# ---------------------------------------------------------------------------
# 6

def test_6_idempotence_and_purity(random_covers):
    d = {}
    with criterion(6, "covers are pure and idempotent under zero existentials", d):
        rows, _ = random_covers
        covers = [(evars, c) for _, evars, _, c in rows]
        covers.append((G.EVARS, combined_cover(G.PHI, G.EVARS)))
        impure, changed = [], []
        for i, (evars, c) in enumerate(covers):
            if set(free_vars(c)) & set(evars):
                impure.append(i)
            if not equivalent(combined_cover(c, []), c):
                changed.append(i)
        d.update(covers=len(covers), impure=len(impure), not_idempotent=len(changed))
        assert not impure and not changed


# ---------------------------------------------------------------------------
# 7

def test_7_tame_pipeline():
    d = {}
    with criterion(7, "tame corpus passes the residue check and the shared-sort assertion", d):
        files = sorted((PROBLEMS / "tame").glob("*.smt"))
        failed = []
        for path in files:
            p = parse_problem(path.read_text())
            trace = []
            cover = compute(p, trace)
            problems = verify(p, cover)
            ev = set(p.evars)
            cov1 = [c for tag, c, *_ in trace if tag == "T1-cover"][0]
            for dj in to_dnf(cov1):
                for lit in dj.literals:
                    if any(a.sort.shared for a in lit.args):
                        if lit.pred != "=" or any(not a.is_var and set(free_vars(a)) & ev for a in lit.args):
                            problems.append(f"second-kind literal {lit}")
            if problems:
                failed.append((path.name, problems))
        d.update(cases=len(files), failures=len(failed))
        assert len(files) == 10
        assert not failed, failed


# ---------------------------------------------------------------------------
# 8

def _corpus_run() -> bytes:
    out = []
    for path in sorted(PROBLEMS.rglob("*.smt")):
        r = subprocess.run([sys.executable, "-m", "covers", str(path)], capture_output=True)
        out.append(path.name.encode() + b"\n" + r.stdout + r.stderr + str(r.returncode).encode())
    return b"\n".join(out)


def test_8_determinism():
    d = {}
    with criterion(8, "two runs over the problem corpus are byte-identical", d):
        a, b = _corpus_run(), _corpus_run()
        d.update(files=len(list(PROBLEMS.rglob("*.smt"))), bytes=len(a))
        assert a == b
