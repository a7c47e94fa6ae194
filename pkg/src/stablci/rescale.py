"""Rescaling a system at a root: unit gradient rows, or full orthonormalisation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .conditioning import local_condition_number
from .errors import SingularTransform, ZeroGradient
from .numeric import as_matrix, eval_jacobian, lu_factor, matrix_norm, vector_norm
from .polycore import mpq, rational_to_float, to_rational

DENOM_BOUND = 10**12
KAPPA_SLACK = 1e-6


def rationalize(x, bound=DENOM_BOUND):
    """Best rational approximation with denominator at most ``bound``."""
    fr = Fraction(float(x)).limit_denominator(bound)
    return mpq(fr.numerator, fr.denominator)


@dataclass
class RescaledSystem:
    gens: list
    transform: list
    kind: str
    certificate: float
    transform_float: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "kind": self.kind,
            "kappa": self.certificate,
            "transform": [[str(c) for c in row] for row in self.transform]
            if self.kind == "orthonormal"
            else [str(c) for c in self.transform],
            "gens": [str(g) for g in self.gens],
            "warnings": list(self.warnings),
        }


def row_norms_at(f, p, r=2):
    J = eval_jacobian(f, p)
    return np.array([vector_norm(row, r) for row in J])


def unitary_rescale(f, p, r2=2):
    """Divide each equation by the r2-norm of its gradient at ``p``."""
    norms = row_norms_at(f, p, r2)
    if np.any(norms == 0):
        raise ZeroGradient("a gradient vanishes at p")
    gammas = [rationalize(1.0 / v) for v in norms]
    gens = [g.scale(c) for g, c in zip(f, gammas)]
    return RescaledSystem(
        gens=gens,
        transform=gammas,
        kind="unitary",
        certificate=local_condition_number(gens, p, r2),
        transform_float=1.0 / norms,
    )


def orthonormalizing_matrix(f, p):
    """C = L⁻¹ with J·Jᵗ = L·Lᵗ, so that CᵗC = (J·Jᵗ)⁻¹ and C·J is orthogonal."""
    degs = {g.total_degree() for g in f}
    if len(degs) > 1:
        warnings.warn("equations have different degrees", stacklevel=2)
    J = eval_jacobian(f, p)
    lu_factor(J)
    L = np.linalg.cholesky(J @ J.T)
    n = L.shape[0]
    C = np.zeros_like(L)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        x = np.zeros(n)
        for i in range(n):
            x[i] = (e[i] - L[i, :i] @ x[:i]) / L[i, i]
        C[:, k] = x
    return C


def apply_transform(f, C):
    """Exact recombination g_i = Σ_j C_ij f_j; float entries are rationalised."""
    n = len(f)
    Cq = [[x if isinstance(x, type(mpq())) else (rationalize(x) if isinstance(x, float) else to_rational(x)) for x in row] for row in C]
    if len(Cq) != n or any(len(r) != n for r in Cq):
        raise SingularTransform("transform must be n x n")
    if not _det(Cq):
        raise SingularTransform("transform is singular")
    ring = f[0].ring
    out = []
    for row in Cq:
        g = ring.zero()
        for c, fj in zip(row, f):
            if c:
                g = g + fj.scale(c)
        out.append(g)
    return out


def _det(rows):
    A = [list(r) for r in rows]
    n = len(A)
    d = mpq(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k]), None)
        if piv is None:
            return mpq(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            d = -d
        d *= A[k][k]
        for i in range(k + 1, n):
            t = A[i][k] / A[k][k]
            for j in range(k, n):
                A[i][j] -= t * A[k][j]
    return d


def orthonormal_rescale(f, p, bound=DENOM_BOUND):
    """Recombine ``f`` so that its Jacobian at ``p`` is orthogonal (κ₂ = 1)."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        C = orthonormalizing_matrix(f, p)
    Cq = [[rationalize(x, bound) for x in row] for row in C]
    gens = apply_transform(f, Cq)
    kappa = local_condition_number(gens, p, 2)
    notes = [str(w.message) for w in caught]
    if kappa > 1 + KAPPA_SLACK:
        notes.append(f"rationalised transform gives kappa {kappa:.9g}")
    return RescaledSystem(
        gens=gens,
        transform=Cq,
        kind="orthonormal",
        certificate=kappa,
        transform_float=C,
        warnings=notes,
    )


def gram_residual(C, target):
    """max |(CᵗC - target)_ij| with exact arithmetic when both are rational."""
    n = len(C)
    worst = mpq(0) if all(isinstance(x, type(mpq())) for row in C for x in row) else 0.0
    for i in range(n):
        for j in range(n):
            s = sum(C[k][i] * C[k][j] for k in range(n)) - target[i][j]
            worst = max(worst, abs(s))
    return worst


def gram_error_2norm(C, J):
    """‖CᵗC - (J·Jᵗ)⁻¹‖₂ for float matrices."""
    C = as_matrix(C)
    J = as_matrix(J)
    return matrix_norm(C.T @ C - np.linalg.inv(J @ J.T), 2)
