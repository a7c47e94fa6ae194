import random

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from stablci.errors import ArityMismatch, NonSquareSystem, RingMismatch
from stablci.polycore import (
    DEGREVLEX,
    LEX,
    ParamRational,
    Poly,
    PolyRing,
    TermOrder,
    canonical,
    clear_denominators,
    content_normalize,
    dense_coeffs,
    determinant,
    evaluate,
    jacobian_det,
    jacobian_symbolic,
    linear_part_at_zero,
    param_gcd,
    partial_derivative,
    poly_arith,
    same_up_to_scalar,
    specialize_params,
    squarefree_factors,
    substitute_linear,
    taylor_tail,
    to_param_poly,
    to_rational,
    translate,
)

from conftest import make_ring, to_sympy

R2, G2 = make_ring((), ("x", "y"))
x, y = G2["x"], G2["y"]


def random_poly(rng, ring, terms=4, deg=3, coeff=5):
    p = ring.zero()
    for _ in range(terms):
        e = tuple(rng.randint(0, deg) for _ in range(ring.nvars))
        c = mpq(rng.randint(-coeff, coeff), rng.randint(1, 3))
        p = p + ring.monomial(e, c)
    return p


def test_to_rational_decimal_is_exact():
    assert to_rational("0.25") == mpq(1, 4)
    assert to_rational("3/4") == mpq(3, 4)
    assert to_rational(0.5) == mpq(1, 2)
    with pytest.raises(ValueError):
        to_rational(float("nan"))


def test_poly_arith_examples():
    assert poly_arith(x + 1, x - 1, "mul") == x**2 - 1
    assert poly_arith(x * y - 6, R2.zero(), "add") == x * y - 6
    assert poly_arith(x * y - 6, R2.const(mpq(1, 2)), "mul") == mpq(1, 2) * x * y - 3
    with pytest.raises(RingMismatch):
        poly_arith(x, PolyRing((), ("x",)).gen("x"), "add")


def test_no_zero_coefficients_stored():
    p = (x + y) - (x + y)
    assert not p.terms
    assert all(c for c in ((x + 1) * (x - 1)).terms.values())


def test_evaluate_examples():
    assert evaluate(x * y - 6, [2, 3]) == 0
    assert evaluate(x**2 + y**2 - 13, [3, 2]) == 0
    assert evaluate(R2.const(5), [mpq(7, 3), -1]) == 5
    with pytest.raises(ArityMismatch):
        evaluate(x, [1])


def test_partial_derivative_examples():
    R, g = make_ring(("a1", "a2"), ("x", "y"))
    assert partial_derivative(x * y - 6, 0) == y
    p = g["x"] ** 2 + g["a1"] * g["y"] ** 2 - 1
    assert partial_derivative(p, 1) == 2 * g["a1"] * g["y"]
    assert partial_derivative(R2.const(7), 0) == 0


def test_jacobian_symbolic_examples():
    R, g = make_ring(("a1", "a2"), ("x", "y"))
    J = jacobian_symbolic([g["x"] ** 2 + g["a1"] * g["y"] ** 2 - 1, g["y"] ** 2 + g["a2"] * g["x"]])
    assert J == [[2 * g["x"], 2 * g["a1"] * g["y"]], [g["a2"] + 0, 2 * g["y"]]]
    assert jacobian_symbolic([x * y + 1, x**2 + y**2 - 5]) == [[y, x], [2 * x, 2 * y]]
    A = [[mpq(2), mpq(-1)], [mpq(1, 3), mpq(4)]]
    lin = [A[0][0] * x + A[0][1] * y - 1, A[1][0] * x + A[1][1] * y + 2]
    assert jacobian_symbolic(lin) == [[R2.const(c) for c in row] for row in A]
    with pytest.raises(NonSquareSystem):
        jacobian_symbolic([x])


def test_jacobian_det_examples():
    R, g = make_ring(("a1", "a2"), ("x1", "x2"))
    a1, a2, x1, x2 = g["a1"], g["a2"], g["x1"], g["x2"]
    D = jacobian_det([x1**2 + a1 * x2**2 - 1, x2**2 + a2 * x1])
    assert D == -2 * a1 * a2 * x2 + 4 * x1 * x2
    R, g = make_ring(("a1", "a2"), ("x", "y"))
    D = jacobian_det([g["x"] * g["y"] + g["a1"] * g["x"] + 1, g["x"] ** 2 + g["y"] ** 2 + g["a2"]])
    assert D == -2 * g["x"] ** 2 + 2 * g["y"] ** 2 + 2 * g["a1"] * g["y"]
    assert jacobian_det([x**2, y**2]) == 4 * x * y


def test_bareiss_matches_sympy_on_4x4():
    rng = random.Random(3)
    R, g = make_ring(("a",), ("u",))
    M = [[random_poly(rng, R, terms=2, deg=2) for _ in range(4)] for _ in range(4)]
    ours = determinant(M)
    S = sp.Matrix([[to_sympy(e) for e in row] for row in M])
    assert sp.expand(S.det(method="berkowitz") - to_sympy(ours)) == 0


def test_specialize_params_examples():
    R, g = make_ring(("a",), ("x", "y"))
    a, X, Y = g["a"], g["x"], g["y"]
    U = R.unknown_ring()
    ux, uy = U.gen("x"), U.gen("y")
    assert specialize_params(a * X**3 - Y, [1]) == ux**3 - uy
    assert specialize_params(X * Y - a * Y**2 + a * Y, [2]) == ux * uy - 2 * uy**2 + 2 * uy
    R0, g0 = make_ring(("a",), ("x",))
    assert specialize_params(g0["x"] ** 2 + 1, [0]) == R0.unknown_ring().gen("x") ** 2 + 1
    with pytest.raises(ArityMismatch):
        specialize_params(a * X, [1, 2])


def test_linear_part_at_zero_examples():
    R1, g1 = make_ring((), ("t",))
    t = g1["t"]
    assert linear_part_at_zero(t**2, [1]) == -1
    # root of g: value is -Jac_g(p) p
    g = x * y - 6
    assert linear_part_at_zero(g, [2, 3]) == -(3 * 2 + 2 * 3)
    assert linear_part_at_zero(3 * x - 2 * y - 7, [5, mpq(1, 3)]) == -7


def test_linear_part_matches_taylor_tail_oracle():
    rng = random.Random(11)
    for _ in range(20):
        g = random_poly(rng, R2, terms=5, deg=3)
        p = [mpq(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(2)]
        tail = taylor_tail(g, p, 2)
        assert linear_part_at_zero(g, p) == evaluate(g, [0, 0]) - evaluate(tail, [0, 0])


def test_translate_and_linear_substitution():
    g = x**2 * y - 3 * x + 1
    s = translate(g, [1, -2])
    assert evaluate(s, [0, 0]) == evaluate(g, [1, -2])
    M = [[1, 2], [0, 1]]
    h = substitute_linear(g, M)
    assert evaluate(h, [3, 5]) == evaluate(g, [3 + 10, 5])


def test_param_gcd_examples():
    R, g = make_ring(("a1", "a2"), ())
    a1, a2 = g["a1"], g["a2"]
    assert same_up_to_scalar(param_gcd(a1**2 * a2, a1 * a2**2), a1 * a2)
    Ra, ga = make_ring(("a",), ())
    a = ga["a"]
    assert same_up_to_scalar(param_gcd(a**2 - 1, a - 1), a - 1)
    assert param_gcd(Ra.zero(), a + 3) == a + 3


def test_param_gcd_random_coprime_products():
    rng = random.Random(5)
    R, g = make_ring(("a1", "a2"), ())
    a1, a2 = g["a1"], g["a2"]
    for _ in range(15):
        common = random_poly(rng, R, terms=3, deg=2)
        if common.is_constant():
            continue
        u = a1 + rng.randint(1, 5) * a2 + rng.randint(-3, 3)
        v = a1**2 - rng.randint(1, 5) * a2 + 7
        got = param_gcd(common * u, common * v)
        expect = sp.gcd(to_sympy(common * u), to_sympy(common * v))
        assert sp.expand(sp.Poly(to_sympy(got), *sp.symbols("a1 a2")).monic().as_expr()
                         - sp.Poly(expect, *sp.symbols("a1 a2")).monic().as_expr()) == 0


def test_squarefree_factors_with_multiplicity():
    Ra, ga = make_ring(("a",), ())
    a = ga["a"]
    assert squarefree_factors((a - 1) ** 2 * (a + 2)) == [(a + 2, 1), (a - 1, 2)]


def test_param_rational_normal_form():
    R, g = make_ring(("a",), ())
    a = g["a"]
    r = ParamRational((a**2 - 1) * 3, (a - 1) * -6)
    assert r.num == mpq(-1, 2) * (a + 1)
    assert r.den == R.one()
    s = ParamRational(a, 2 * a**2 - 4)
    assert s.den == a**2 - 2
    assert s.num == mpq(1, 2) * a
    t = ParamRational(a, 4 - 2 * a**2)
    assert t.den == a**2 - 2 and t.num == mpq(-1, 2) * a
    again = ParamRational(s.num, s.den)
    assert (again.num, again.den) == (s.num, s.den)


def test_param_rational_field_ops_against_sympy():
    R, g = make_ring(("a", "b"), ())
    a, b = g["a"], g["b"]
    u = ParamRational(a + b, a - 1)
    v = ParamRational(b, a**2 - 1)
    A, B = sp.symbols("a b")
    su = (A + B) / (A - 1)
    sv = B / (A**2 - 1)
    for ours, theirs in ((u + v, su + sv), (u * v, su * sv), (u / v, su / sv), (u - v, su - sv)):
        val = sp.cancel(to_sympy(ours.num) / to_sympy(ours.den) - theirs)
        assert val == 0


def test_clear_denominators_roundtrip():
    R, g = make_ring(("a",), ("x",))
    a, X = g["a"], g["x"]
    pp = to_param_poly(X**2 + a) * ParamRational(R.param_ring().one(), R.param_ring().gen("a") + 1)
    poly, L = clear_denominators(pp, R)
    assert same_up_to_scalar(L, R.param_ring().gen("a") + 1)
    assert poly == X**2 + a


def test_content_normalize_positive_primitive():
    p = content_normalize(mpq(-2, 3) * x**2 + mpq(4, 9) * y)
    assert p.leading_coeff() > 0
    assert p == 3 * x**2 - 2 * y


def test_dense_coeffs_univariate():
    R1, g1 = make_ring((), ("t",))
    t = g1["t"]
    assert dense_coeffs(t**3 - 2 * t + 5) == [5, -2, 0, 1]


def test_term_orders():
    # lex x > y: x beats y^5; degrevlex: y^5 beats x
    assert LEX.key((1, 0)) > LEX.key((0, 5))
    assert DEGREVLEX.key((0, 5)) > DEGREVLEX.key((1, 0))
    # degrevlex tie-break: x*z < y^2 in x > y > z
    assert DEGREVLEX.key((0, 2, 0)) > DEGREVLEX.key((1, 0, 1))
    blk = TermOrder.block_elim(1, 3)
    assert blk.key((1, 0, 0)) > blk.key((0, 7, 7))


# --- invariants --------------------------------------------------------------

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monos = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monos, coeffs, max_size=5).map(lambda d: Poly(R2, {m: c for m, c in d.items()}))


@settings(max_examples=120, deadline=None)
@given(polys, polys, polys)
def test_ring_laws(p, q2, r):
    assert (p + q2) + r == p + (q2 + r)
    assert p * q2 == q2 * p
    assert (p * q2) * r == p * (q2 * r)
    assert p * (q2 + r) == p * q2 + p * r


@settings(max_examples=100, deadline=None)
@given(polys, polys, st.tuples(coeffs, coeffs))
def test_evaluate_is_homomorphism(p, q2, pt):
    assert evaluate(p * q2, pt) == evaluate(p, pt) * evaluate(q2, pt)
    assert evaluate(p + q2, pt) == evaluate(p, pt) + evaluate(q2, pt)


@settings(max_examples=100, deadline=None)
@given(polys, polys)
def test_leibniz_rule(p, q2):
    for v in (0, 1):
        lhs = partial_derivative(p * q2, v)
        assert lhs == partial_derivative(p, v) * q2 + p * partial_derivative(q2, v)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.sampled_from([(0, 0), (1, 0), (0, 1)]), coeffs, max_size=3), st.tuples(coeffs, coeffs))
def test_linear_part_of_affine_is_constant_term(d, pt):
    g = Poly(R2, d)
    assert linear_part_at_zero(g, pt) == evaluate(g, [0, 0])


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_param_rational_normalisation_idempotent(p, q2):
    Ra = PolyRing(("x", "y"), ())
    num = Poly(Ra, p.terms)
    den = Poly(Ra, q2.terms)
    if not den:
        return
    r = ParamRational(num, den)
    s = ParamRational(r.num, r.den)
    assert (s.num, s.den) == (r.num, r.den)
