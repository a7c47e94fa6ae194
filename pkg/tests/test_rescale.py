import warnings

import numpy as np
import pytest

from stablci.conditioning import local_condition_number
from stablci.errors import SingularTransform, ZeroGradient
from stablci.groebner import buchberger
from stablci.numeric import eval_jacobian
from stablci.polycore import DEGREVLEX, mpq
from stablci.rescale import (
    apply_transform,
    gram_error_2norm,
    gram_residual,
    orthonormal_rescale,
    orthonormalizing_matrix,
    rationalize,
    row_norms_at,
    unitary_rescale,
)
from stablci.systemfile import load_system

from conftest import SYSTEMS, make_ring

R, g = make_ring((), ("x", "y"))
x, y = g["x"], g["y"]
F = [x * y - 6, x**2 + y**2 - 13]
EX1 = load_system(SYSTEMS / "ex1_f.sys").seed()
EX2 = load_system(SYSTEMS / "ex2_f.sys").seed()
P1 = [0.0, 1.0]
P2 = [1.0, 0.0, 0.0]
rng = np.random.default_rng(31)


def test_row_norms():
    assert np.allclose(row_norms_at(EX1, P1), [1, 1], atol=1e-15)
    assert np.allclose(row_norms_at(EX2, P2), [1, 1, 1], atol=1e-15)
    assert np.array_equal(row_norms_at([2 * x, 3 * y], [0.7, -1.1]), [2, 3])
    for p in rng.normal(size=(20, 2)):
        a, b, c = (row_norms_at(F, p, r) for r in ("inf", 2, 1))
        assert np.all(a <= b + 1e-12) and np.all(b <= c + 1e-12)


def test_unitary_examples():
    rs = unitary_rescale(EX1, P1)
    assert rs.transform == [1, 1]
    assert rs.gens == EX1
    rs = unitary_rescale([2 * x, 3 * y], [1.0, 2.0])
    assert rs.transform == [mpq(1, 2), mpq(1, 3)]
    assert rs.gens == [x, y]
    with pytest.raises(ZeroGradient):
        unitary_rescale([x**2 - 1 + y**2 - y**2, y * x], [0.0, 0.0])


def random_gamma_kappa(f, p, r, n_draws):
    J = eval_jacobian(f, p)
    out = []
    for _ in range(n_draws):
        gam = rng.lognormal(0, 1.5, size=len(f)) * rng.choice([-1, 1], size=len(f))
        gJ = np.diag(gam) @ J
        out.append(np.linalg.norm(gJ, r) * np.linalg.norm(np.linalg.inv(gJ), r))
    return np.array(out)


def test_row_equilibration_minimises_inf_condition():
    for f, p in ((F, [2.0, 3.0]), (EX1, P1), (EX2, P2)):
        u = unitary_rescale(f, p, 1)
        k_u = local_condition_number(u.gens, p, "inf")
        sampled = random_gamma_kappa(f, p, np.inf, 500)
        assert k_u <= sampled.min() + 1e-9


def test_unitary_within_root_n_of_any_scaling():
    n_checked = 0
    for f, p in ((F, [2.0, 3.0]), (F, [-3.0, -2.0]), (EX2, P2)):
        n = len(f)
        for r1, r2 in ((1, "inf"), (2, 2)):
            u = unitary_rescale(f, p, r2)
            k_u = local_condition_number(u.gens, p, r1)
            for k in random_gamma_kappa(f, p, r1, 200 // 3 + 1):
                assert k_u <= n ** (1 / r1) * k + 1e-9
                n_checked += 1
    assert n_checked >= 200


def test_orthonormalizing_matrix_gram():
    for f, p in ((EX1, P1), (EX2, P2), (F, [2.0, 3.0])):
        C = orthonormalizing_matrix(f, p)
        J = eval_jacobian(f, p)
        assert gram_error_2norm(C, J) < 1e-9
        assert np.allclose((C @ J) @ (C @ J).T, np.eye(len(f)), atol=1e-10)
    rot = [mpq(3, 5) * x - mpq(4, 5) * y, mpq(4, 5) * x + mpq(3, 5) * y]
    C = orthonormalizing_matrix(rot, [0.3, 0.1])
    assert np.allclose(np.abs(C), np.eye(2), atol=1e-15)


def test_reference_transforms_reach_kappa_one():
    C1 = [[1, 0], [mpq(63, 16), mpq(-65, 16)]]
    g1 = apply_transform(EX1, C1)
    assert g1[0] == EX1[0] and g1[1] == mpq(63, 16) * EX1[0] - mpq(65, 16) * EX1[1]
    assert local_condition_number(g1, P1) == pytest.approx(1, abs=1e-9)
    C2 = [[1, 0, 0], [mpq(7564, 123), mpq(-7565, 123), 0], [0, 0, 1]]
    g2 = apply_transform(EX2, C2)
    assert g2[2] == EX2[2]
    assert local_condition_number(g2, P2) == pytest.approx(1, abs=1e-9)
    # both represent the same Gram matrix as our Cholesky factor
    J1 = eval_jacobian(EX1, P1)
    assert gram_error_2norm(np.array(C1, dtype=float), J1) < 1e-9
    ours = np.array(orthonormal_rescale(EX1, P1).transform, dtype=float)
    assert np.allclose(ours.T @ ours, np.array(C1, dtype=float).T @ np.array(C1, dtype=float), atol=1e-9)


def test_ex2_printed_gram_system():
    C2 = [[mpq(1), mpq(0), mpq(0)], [mpq(7564, 123), mpq(-7565, 123), mpq(0)], [mpq(0), mpq(0), mpq(1)]]
    s, t = mpq(57229225, 15129), mpq(-57221660, 15129)
    target = [[s, t, 0], [t, s, 0], [0, 0, 1]]
    assert gram_residual(C2, target) == 0


def test_orthonormal_rescale_certificate():
    for f, p in ((EX1, P1), (EX2, P2)):
        rs = orthonormal_rescale(f, p)
        assert rs.certificate == pytest.approx(1, abs=1e-6)
        assert local_condition_number(rs.gens, p) == pytest.approx(1, abs=1e-6)
        Jg = eval_jacobian(rs.gens, p)
        assert np.allclose(Jg @ Jg.T, np.eye(len(f)), atol=1e-10)


def test_unequal_degrees_warn_but_proceed():
    f = [x * y - 6, x**3 - 8 + y - 3]
    with pytest.warns(UserWarning):
        orthonormalizing_matrix(f, [2.0, 3.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rs = orthonormal_rescale(f, [2.0, 3.0])
    assert any("degree" in w for w in rs.warnings)


def test_apply_transform_identity_and_singular():
    assert apply_transform(F, [[1, 0], [0, 1]]) == F
    with pytest.raises(SingularTransform):
        apply_transform(F, [[1, 2], [2, 4]])
    with pytest.raises(SingularTransform):
        apply_transform(F, [[1, 0]])


def test_rationalize_bound():
    r = rationalize(np.pi)
    assert r.denominator <= 10**12 and abs(float(r) - np.pi) < 1e-15
    assert rationalize(0.25) == mpq(1, 4)


def test_ideal_preserved_both_ways():
    for _ in range(5):
        C = rng.integers(-5, 6, size=(2, 2))
        if round(np.linalg.det(C)) == 0:
            continue
        G = apply_transform(F, [[int(v) for v in row] for row in C])
        gb_new = buchberger(G, DEGREVLEX)
        gb_old = buchberger(F, DEGREVLEX)
        assert all(gb_new.contains(p) for p in F)
        assert all(gb_old.contains(p) for p in G)


def test_min2norm_equivalence_on_random_instances():
    for _ in range(30):
        pt = rng.normal(size=2)
        pq = [mpq(float(v)) for v in pt]
        A = rng.integers(-4, 5, size=(2, 2))
        if round(np.linalg.det(A)) == 0:
            continue
        f = [
            int(A[0, 0]) * (x - pq[0]) + int(A[0, 1]) * (y - pq[1]) + (x - pq[0]) * (y - pq[1]),
            int(A[1, 0]) * (x - pq[0]) + int(A[1, 1]) * (y - pq[1]) + (y - pq[1]) ** 2,
        ]
        rs = orthonormal_rescale(f, pt)
        Cf = np.array(rs.transform, dtype=float)
        ok_kappa = abs(local_condition_number(rs.gens, pt) - 1) <= 1e-9
        ok_gram = gram_error_2norm(Cf, eval_jacobian(f, pt)) <= 1e-9
        assert ok_kappa == ok_gram
        # a perturbed transform breaks both together
        bad = Cf + np.array([[0.0, 0.01], [0.0, 0.0]])
        gb = apply_transform(f, [[rationalize(v) for v in row] for row in bad])
        assert abs(local_condition_number(gb, pt) - 1) > 1e-9
        assert gram_error_2norm(bad, eval_jacobian(f, pt)) > 1e-9
