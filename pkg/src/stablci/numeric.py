"""Floating-point evaluation, induced norms, Jacobi SVD, LU and Newton."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ArityMismatch, NoConvergence, SingularMatrix
from .polycore import Poly, jacobian_symbolic, rational_to_float

SVD_TOL = 1e-13
PIVOT_TOL = 1e-12


def as_matrix(M):
    """Finite float64 2-D array copy of ``M``."""
    A = np.array(M, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(v):
    a = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


# ---------------------------------------------------------------------------
# evaluation


class CompiledPoly:
    """Nested Horner evaluator for one polynomial in its unknowns."""

    __slots__ = ("nvars", "tree")

    def __init__(self, p: Poly):
        ring = p.ring
        if ring.m and p.involves(range(ring.m)):
            raise ValueError("specialise parameters before numeric evaluation")
        m = ring.m
        terms = {mono[m:]: rational_to_float(c) for mono, c in p.terms.items()}
        self.nvars = ring.n
        self.tree = _build(terms, 0, ring.n)

    def __call__(self, x):
        if len(x) != self.nvars:
            raise ArityMismatch(f"point has {len(x)} coordinates, expected {self.nvars}")
        return _horner(self.tree, x, 0)


def _build(terms, var, n):
    if var == n:
        return sum(terms.values()) if terms else 0.0
    groups = {}
    for mono, c in terms.items():
        groups.setdefault(mono[var], {})[mono] = c
    if not groups:
        return 0.0
    deg = max(groups)
    return [_build(groups.get(e, {}), var + 1, n) for e in range(deg + 1)]


def _horner(node, x, var):
    if not isinstance(node, list):
        return node
    xv = x[var]
    acc = 0.0
    for child in reversed(node):
        acc = acc * xv + _horner(child, x, var + 1)
    return acc


@lru_cache(maxsize=1024)
def _compiled(p):
    return CompiledPoly(p)


@lru_cache(maxsize=256)
def _compiled_jacobian(system):
    J = jacobian_symbolic(list(system))
    return [[_compiled(e) for e in row] for row in J]


def _check_arity(system, p):
    if system and len(p) != system[0].ring.n:
        raise ArityMismatch(f"point has {len(p)} coordinates, expected {system[0].ring.n}")


def eval_system(system, p):
    """Float values of each polynomial at ``p``."""
    p = as_vector(p)
    system = tuple(system)
    _check_arity(system, p)
    return np.array([_compiled(g)(p) for g in system], dtype=float)


def eval_jacobian(system, p):
    """n x n float Jacobian with respect to the unknowns."""
    p = as_vector(p)
    system = tuple(system)
    _check_arity(system, p)
    rows = _compiled_jacobian(system)
    return np.array([[e(p) for e in row] for row in rows], dtype=float)


# ---------------------------------------------------------------------------
# norms


def _norm_tag(r):
    if r in ("inf", "∞", math.inf, np.inf):
        return math.inf
    r = float(r)
    if r < 1:
        raise ValueError("norm index must be >= 1")
    return r


def vector_norm(v, r=2):
    v = np.abs(as_vector(v))
    r = _norm_tag(r)
    if v.size == 0:
        return 0.0
    if r == math.inf:
        return float(v.max())
    if r == 1:
        return float(v.sum())
    if r == 2:
        scale = v.max()
        if scale == 0:
            return 0.0
        return float(scale * math.sqrt(np.sum((v / scale) ** 2)))
    return float(np.sum(v**r) ** (1.0 / r))


def jacobi_svd(M, tol=SVD_TOL, max_sweeps=100):
    """One-sided Jacobi SVD: returns ``U, s, Vt`` with ``s`` non-increasing."""
    A = as_matrix(M)
    transposed = A.shape[0] < A.shape[1]
    if transposed:
        A = A.T
    m, n = A.shape
    U = A.copy()
    V = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = float(U[:, i] @ U[:, i])
                b = float(U[:, j] @ U[:, j])
                c = float(U[:, i] @ U[:, j])
                if c == 0.0 or abs(c) <= tol * math.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * c)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                ui = U[:, i].copy()
                U[:, i] = cs * ui - sn * U[:, j]
                U[:, j] = sn * ui + cs * U[:, j]
                vi = V[:, i].copy()
                V[:, i] = cs * vi - sn * V[:, j]
                V[:, j] = sn * vi + cs * V[:, j]
        if not rotated:
            break
    s = np.sqrt(np.sum(U * U, axis=0))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    U = U[:, order]
    V = V[:, order]
    for k in range(n):
        if s[k] > 0:
            U[:, k] /= s[k]
    if transposed:
        return V, s, U.T
    return U, s, V.T


def singular_values(M):
    return jacobi_svd(M)[1]


def matrix_norm(M, r=2):
    """Induced matrix norm for r in {1, 2, inf}."""
    A = as_matrix(M)
    r = _norm_tag(r)
    if A.size == 0:
        return 0.0
    if r == 1:
        return float(np.abs(A).sum(axis=0).max())
    if r == math.inf:
        return float(np.abs(A).sum(axis=1).max())
    if r == 2:
        return float(singular_values(A)[0])
    raise ValueError("matrix norms are supported for r in {1, 2, inf}")


# ---------------------------------------------------------------------------
# LU


def lu_factor(M):
    """Partial-pivot LU; returns (LU, perm). Raises SingularMatrix on a tiny pivot."""
    A = as_matrix(M)
    n, k = A.shape
    if n != k:
        raise ValueError("LU needs a square matrix")
    scale = float(np.abs(A).sum(axis=1).max()) if n else 0.0
    thresh = PIVOT_TOL * scale
    perm = np.arange(n)
    for c in range(n):
        piv = c + int(np.argmax(np.abs(A[c:, c])))
        if abs(A[piv, c]) <= thresh or A[piv, c] == 0.0:
            raise SingularMatrix(f"pivot {abs(A[piv, c]):.3e} below tolerance")
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            perm[[c, piv]] = perm[[piv, c]]
        A[c + 1 :, c] /= A[c, c]
        A[c + 1 :, c + 1 :] -= np.outer(A[c + 1 :, c], A[c, c + 1 :])
    return A, perm


def lu_solve(factored, b):
    LU, perm = factored
    b = np.array(b, dtype=float)
    y = b[perm].copy()
    n = LU.shape[0]
    for i in range(n):
        y[i] -= LU[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - LU[i, i + 1 :] @ y[i + 1 :]) / LU[i, i]
    return y


def solve(M, b):
    return lu_solve(lu_factor(M), b)


def matrix_inverse(M):
    A = as_matrix(M)
    f = lu_factor(A)
    n = A.shape[0]
    return np.column_stack([lu_solve(f, e) for e in np.eye(n)]) if n else A.copy()


# ---------------------------------------------------------------------------
# Newton


def newton_refine(system, start, tol=1e-12, max_iter=50):
    """Newton iteration until the 2-norm residual is at most ``tol``."""
    x = as_vector(start).copy()
    system = tuple(system)
    _check_arity(system, x)
    for _ in range(max_iter + 1):
        F = eval_system(system, x)
        if vector_norm(F, 2) <= tol:
            return x
        J = eval_jacobian(system, x)
        step = solve(J, F)
        x = x - step
        if not np.all(np.isfinite(x)):
            break
    raise NoConvergence(f"Newton did not reach residual {tol} in {max_iter} iterations")
