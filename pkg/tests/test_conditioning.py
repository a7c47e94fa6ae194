import math

import numpy as np
import pytest

from stablci.conditioning import (
    PerturbationSetup,
    admissibility_norm_check,
    amplification,
    condition_report,
    displacement_bound,
    first_order_displacement,
    local_condition_number,
    relative_error_bound,
    taylor_difference,
    true_displacement,
)
from stablci.errors import Inadmissible, OriginRoot, SingularMatrix
from stablci.numeric import matrix_inverse, matrix_norm, vector_norm
from stablci.polycore import mpq, translate
from stablci.systemfile import load_system

from conftest import SYSTEMS, make_ring

R, g = make_ring((), ("x", "y"))
x, y = g["x"], g["y"]
F = [x * y - 6, x**2 + y**2 - 13]
NORMS = (1, 2, "inf")


def ex1(alpha):
    sf = load_system(SYSTEMS / "ex1_f.sys")
    return sf.seed(), sf.perturbation([mpq(alpha)])


def linear_system(ring, A, b):
    X = [ring.gen(n) for n in ring.unknowns]
    n = len(X)
    return [sum((A[i][j] * X[j] for j in range(n)), ring.zero()) - b[i] for i in range(n)]


def test_kappa_examples():
    f, _ = ex1(0)
    assert local_condition_number(f, [0, 1]) == pytest.approx(8, abs=1e-9)
    f2 = load_system(SYSTEMS / "ex2_f.sys").seed()
    assert local_condition_number(f2, [1, 0, 0]) == pytest.approx(123, abs=1e-9)
    c, s = math.cos(0.3), math.sin(0.3)
    rot = linear_system(R, [[mpq(c), mpq(-s)], [mpq(s), mpq(c)]], [mpq(0), mpq(0)])
    assert local_condition_number(rot, [0.5, 0.5]) == pytest.approx(1, abs=1e-12)


def test_tau_on_ex1_is_sqrt65_alpha():
    for al in ("1/1000", "-3/1000", "1/200"):
        f, eps = ex1(al)
        tau, ok = admissibility_norm_check(PerturbationSetup(f, eps, [0, 1]))
        assert tau == pytest.approx(math.sqrt(65) * abs(float(mpq(al))), rel=1e-12)
        assert ok


def test_tau_for_quadratic_perturbation_at_23():
    # eps = {d1, d2*y^2 + d3}: tau^2 = 117/25 d2^2
    for d2 in (0.01, 0.3, -0.5, 1.1):
        eps = [R.const(mpq(1, 7)), mpq(d2) * y**2 + mpq(2, 3)]
        tau, ok = admissibility_norm_check(PerturbationSetup(F, eps, [2, 3]))
        assert tau**2 == pytest.approx(117 / 25 * d2**2, rel=1e-12)
        assert ok == (abs(d2) < 5 * math.sqrt(13) / 39)


def test_zero_perturbation():
    zero = [R.zero(), R.zero()]
    s = PerturbationSetup(F, zero, [2, 3])
    assert admissibility_norm_check(s) == (0.0, True)
    assert np.array_equal(first_order_displacement(s), [0, 0])
    assert displacement_bound(s) == 0
    assert relative_error_bound(s) == 0
    rep = condition_report(s, with_true=True)
    assert rep.lam == 1 and rep.rel_true == 0


def test_constant_shift_first_order():
    A = [[mpq(2), mpq(1)], [mpq(-1), mpq(3)]]
    f = linear_system(R, A, [mpq(3), mpq(2)])
    db = np.array([0.01, -0.02])
    eps = [R.const(-mpq(float(v))) for v in db]
    s = PerturbationSetup(f, eps, [1, 1])
    assert np.allclose(first_order_displacement(s), np.linalg.solve(np.array(A, dtype=float), db), atol=1e-15)


def test_first_order_vs_true_displacement_singular_example():
    eps = [R.const(2), mpq(5, 4) * y**2]
    s = PerturbationSetup(F, eps, [3, 2])
    # Jac of f+eps is singular at (3, 2): first-order step is unavailable
    with pytest.raises(SingularMatrix):
        first_order_displacement(s)
    small = [R.const(mpq(1, 50)), mpq(1, 80) * y**2]
    s = PerturbationSetup(F, small, [3, 2])
    d1 = first_order_displacement(s)
    d = true_displacement(s)
    assert np.all(np.isfinite(d1)) and np.all(np.isfinite(d))
    assert 0.5 < vector_norm(d1) / vector_norm(d) < 2


def test_inadmissible_and_origin_root():
    eps = [R.zero(), y**2]
    with pytest.raises(Inadmissible):
        displacement_bound(PerturbationSetup(F, eps, [2, 3]))
    f0 = [x + y, x - 2 * y]
    with pytest.raises(OriginRoot):
        relative_error_bound(PerturbationSetup(f0, [R.const(mpq(1, 100)), R.zero()], [0, 0]))
    with pytest.raises(ValueError):
        PerturbationSetup(F, [R.zero(), R.zero()], [2, 2])


def test_translation_removes_origin_root():
    f0 = [x + y + x * y, x - 2 * y + x**2]
    eps = [R.const(mpq(1, 100)), mpq(1, 50) * x]
    shift = [mpq(1), mpq(-2)]
    ft = [translate(p, shift) for p in f0]
    et = [translate(p, shift) for p in eps]
    p = [-1.0, 2.0]
    assert relative_error_bound(PerturbationSetup(ft, et, p)) > 0
    assert local_condition_number(ft, p) == pytest.approx(local_condition_number(f0, [0, 0]), rel=1e-12)


# --- properties --------------------------------------------------------------------

rng = np.random.default_rng(23)


def random_setup(n=3, pert=1e-2):
    Rn, _ = make_ring((), tuple("xyzw"[:n]))
    A = rng.normal(size=(n, n)) + 3 * np.eye(n)
    while np.linalg.cond(A) > 20:
        A = rng.normal(size=(n, n)) + 3 * np.eye(n)
    p = rng.normal(size=n)
    Aq = [[mpq(float(v)) for v in r] for r in A]
    pq = [mpq(float(v)) for v in p]
    bq = [sum(Aq[i][j] * pq[j] for j in range(n)) for i in range(n)]
    dA = rng.normal(size=(n, n)) * pert
    db = rng.normal(size=n) * pert
    dAq = [[mpq(float(v)) for v in r] for r in dA]
    dbq = [mpq(float(v)) for v in db]
    f = linear_system(Rn, Aq, bq)
    eps = linear_system(Rn, dAq, dbq)
    bf = np.array([float(v) for v in bq])
    return Rn, f, eps, p, np.array(Aq, dtype=float), bf, np.array(dAq, dtype=float), np.array(dbq, dtype=float)


def classical_bound(A, b, dA, db, r):
    Ai = matrix_inverse(A)
    nA, nAi, ndA = matrix_norm(A, r), matrix_norm(Ai, r), matrix_norm(dA, r)
    return nAi * nA / (1 - nAi * ndA) * (ndA / nA + vector_norm(db, r) / vector_norm(b, r))


def test_linear_case_factor_identity():
    for _ in range(100):
        Rn, f, eps, p, A, b, dA, db = random_setup()
        for r in NORMS:
            s = PerturbationSetup(f, eps, p, r)
            tau, _ = admissibility_norm_check(s)
            ub = relative_error_bound(s)
            # the bracket and kappa are exactly the classical ones
            assert np.allclose(-taylor_difference(f, p), b, rtol=0, atol=1e-12 * np.abs(b).max())
            assert np.allclose(-taylor_difference(eps, p), db, rtol=0, atol=1e-15)
            classical = classical_bound(A, b, dA, db, r)
            nAi, ndA = matrix_norm(matrix_inverse(A), r), matrix_norm(dA, r)
            assert ub / amplification(tau) == pytest.approx(classical * (1 - nAi * ndA), rel=1e-12)
            assert ub <= classical * (1 + 1e-12)


def test_linear_case_equality_for_scalar_matrix_perturbation():
    # dA = t*I makes ||A^-1 dA|| = ||A^-1|| ||dA||, so both amplification factors agree
    for _ in range(50):
        Rn, f, _, p, A, b, _, db = random_setup()
        t = mpq(float(rng.uniform(-0.05, 0.05)))
        dAq = [[t if i == j else mpq(0) for j in range(3)] for i in range(3)]
        dbq = [mpq(float(v)) for v in db]
        eps = linear_system(Rn, dAq, dbq)
        for r in NORMS:
            ub = relative_error_bound(PerturbationSetup(f, eps, p, r))
            assert ub == pytest.approx(classical_bound(A, b, np.array(dAq, dtype=float), db, r), rel=1e-12)


def test_bound_dominates_first_order_displacement():
    for _ in range(60):
        _, f, eps, p, *_ = random_setup(pert=rng.choice([1e-3, 1e-2, 5e-2]))
        for r in NORMS:
            s = PerturbationSetup(f, eps, p, r)
            d1 = vector_norm(first_order_displacement(s), r)
            assert displacement_bound(s) >= d1 - 1e-9
            assert relative_error_bound(s) * vector_norm(p, r) >= d1 - 1e-9
    f, _ = ex1(0)
    for al in np.linspace(-0.01, 0.01, 9):
        _, eps = ex1(mpq(float(al)))
        s = PerturbationSetup(f, eps, [0, 1])
        d1 = vector_norm(first_order_displacement(s))
        assert relative_error_bound(s) >= d1 - 1e-9 and displacement_bound(s) >= d1 - 1e-9


def test_bound_monotone_in_perturbation_size():
    f, eps1 = ex1("1/200")
    last = -1.0
    for t in np.linspace(0.05, 1, 12):
        _, eps = ex1(mpq(1, 200) * mpq(float(t)))
        b = displacement_bound(PerturbationSetup(f, eps, [0, 1]))
        assert b > last
        last = b


def test_kappa_invariances():
    f, _ = ex1(0)
    base = local_condition_number(f, [0, 1])
    for gamma in rng.uniform(-50, 50, size=50):
        if abs(gamma) < 1e-3:
            continue
        scaled = [p.scale(mpq(float(gamma))) for p in f]
        for r in NORMS:
            k = local_condition_number(f, [0, 1], r)
            assert abs(local_condition_number(scaled, [0, 1], r) - k) <= 1e-9 * k
    for _ in range(10):
        shift = [mpq(int(v), 7) for v in rng.integers(-20, 20, size=2)]
        moved = [translate(p, shift) for p in f]
        pt = [0 - float(shift[0]), 1 - float(shift[1])]
        assert abs(local_condition_number(moved, pt) - base) <= 1e-9 * base


def test_kappa_at_least_one():
    for _ in range(50):
        _, f, _, p, *_ = random_setup()
        for r in NORMS:
            assert local_condition_number(f, p, r) >= 1 - 1e-12
