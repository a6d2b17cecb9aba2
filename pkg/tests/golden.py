"""Two unary uses of f mixed with linear constraints: input and reference values."""
from covers.kernel import add, app, conj, eq, le, lt, mul, neq, num, var

x1, x2, e1, e2, e3, e4 = (var(n) for n in ("x1", "x2", "e1", "e2", "e3", "e4"))
f = lambda t: app("f", t)

PHI = [
    eq(e1, f(x1)), eq(e2, f(x2)), eq(f(e3), e3), eq(f(e4), x1),
    le(add(x1, e1), e3), le(e3, add(x2, e2)), eq(e4, add(x2, e3)),
]
EVARS = [e1, e2, e3, e4]
PARAMS = [x1, x2]

RES11 = conj(neq(x2, num(0)), eq(add(x1, f(x1)), add(x2, f(x2))),
             eq(f(add(mul(2, x2), f(x2))), x1), eq(f(add(x1, f(x1))), add(x1, f(x1))))
RES12 = conj(lt(add(x1, f(x1)), add(x2, f(x2))), neq(x2, num(0)))
RES2 = conj(eq(x2, num(0)), eq(f(x1), x1), le(x1, num(0)), le(x1, f(num(0))))

# arithmetic side of the all-distinct arrangement of e3, e4
PSI2_DISTINCT = [le(add(x1, e1), e3), le(e3, add(x2, e2)), eq(e4, add(x2, e3)), neq(e3, e4)]
IMPLDEF_PSI2_E3 = conj(eq(add(x1, e1), add(x2, e2)), neq(x2, num(0)))
TERM_E3 = add(x1, e1)
TERM_E4 = add(x1, e1, x2)
DISTINCT = "{e3} {e4}"
