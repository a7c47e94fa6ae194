"""Local condition numbers and first-order perturbation bounds at a real root."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityMismatch, Inadmissible, OriginRoot, RingMismatch, SingularMatrix
from .numeric import (
    _norm_tag,
    as_vector,
    eval_jacobian,
    eval_system,
    matrix_inverse,
    matrix_norm,
    newton_refine,
    solve,
    vector_norm,
)
from .polycore import linear_part_at_zero, mpq, rational_to_float

ROOT_TOL = 1e-9


def norm_label(r):
    r = _norm_tag(r)
    return "inf" if r == math.inf else str(int(r)) if r == int(r) else str(r)


@dataclass
class PerturbationSetup:
    f: list
    eps: list
    p: np.ndarray
    norm: object = 2

    def __post_init__(self):
        self.f = list(self.f)
        self.eps = list(self.eps)
        self.p = as_vector(self.p)
        self.norm = _norm_tag(self.norm)
        if len(self.f) != len(self.eps):
            raise ArityMismatch("f and eps must have the same length")
        ring = self.f[0].ring
        if any(g.ring != ring for g in self.f + self.eps):
            raise RingMismatch("f and eps must share one ring")
        if len(self.p) != ring.n:
            raise ArityMismatch(f"point has {len(self.p)} coordinates, expected {ring.n}")
        resid = vector_norm(eval_system(self.f, self.p), 2)
        if resid > ROOT_TOL:
            raise ValueError(f"p is not a root of f (residual {resid:.3e})")

    @property
    def perturbed(self):
        return [a + b for a, b in zip(self.f, self.eps)]


@dataclass
class ConditionReport:
    kappa: float
    tau: float
    lam: float
    delta_p1: np.ndarray
    ub1: float | None
    norm: str
    displacement_bound: float = math.nan
    rel_first_order: float | None = None
    rel_true: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "norm": self.norm,
            "kappa": self.kappa,
            "tau": self.tau,
            "lambda": self.lam,
            "delta_p1": [float(v) for v in self.delta_p1],
            "displacement_bound": self.displacement_bound,
            "ub1": self.ub1,
            "rel_first_order": self.rel_first_order,
            "rel_true": self.rel_true,
            **self.extras,
        }


def local_condition_number(f, p, norm=2):
    """‖J⁻¹‖·‖J‖ for the Jacobian of ``f`` at ``p``."""
    J = eval_jacobian(f, p)
    return matrix_norm(matrix_inverse(J), norm) * matrix_norm(J, norm)


def admissibility_norm_check(setup):
    """(tau, tau < 1) with tau = ‖Jf(p)⁻¹ Jε(p)‖."""
    Jf = eval_jacobian(setup.f, setup.p)
    Je = eval_jacobian(setup.eps, setup.p)
    tau = matrix_norm(matrix_inverse(Jf) @ Je, setup.norm)
    return tau, tau < 1


def amplification(tau):
    """1/(1 - tau); infinite when tau >= 1."""
    return 1.0 / (1.0 - tau) if tau < 1 else math.inf


def first_order_displacement(setup):
    """Δp¹ = -J_{f+ε}(p)⁻¹ ε(p)."""
    J = eval_jacobian(setup.perturbed, setup.p)
    e = eval_system(setup.eps, setup.p)
    if not np.any(e):
        return np.zeros_like(setup.p)
    return -solve(J, e)


def displacement_bound(setup):
    """Λ·‖Jf(p)⁻¹‖·‖ε(p)‖, an upper bound for ‖Δp¹‖."""
    tau, ok = admissibility_norm_check(setup)
    if not ok:
        raise Inadmissible(f"tau = {tau:.6g} >= 1")
    Jinv = matrix_inverse(eval_jacobian(setup.f, setup.p))
    return amplification(tau) * matrix_norm(Jinv, setup.norm) * vector_norm(
        eval_system(setup.eps, setup.p), setup.norm
    )


def _exact_point(p):
    return [mpq(float(v)) for v in p]


def taylor_difference(system, p):
    """Float vector of g(p) - Jac_g(p)·p, computed exactly at the float point ``p``."""
    q = _exact_point(p)
    return np.array([rational_to_float(linear_part_at_zero(g, q)) for g in system], dtype=float)


def relative_error_bound(setup):
    """First-order relative error bound at ``p``.

    Λ·κ·(‖Jε‖/‖Jf‖ + ‖ε(p) - Jε(p)p‖ / ‖f(p) - Jf(p)p‖).
    """
    if not np.any(setup.p):
        raise OriginRoot("root at the origin; translate the system first")
    tau, ok = admissibility_norm_check(setup)
    if not ok:
        raise Inadmissible(f"tau = {tau:.6g} >= 1")
    r = setup.norm
    Jf = eval_jacobian(setup.f, setup.p)
    Je = eval_jacobian(setup.eps, setup.p)
    nJf = matrix_norm(Jf, r)
    kappa = matrix_norm(matrix_inverse(Jf), r) * nJf
    num = vector_norm(taylor_difference(setup.eps, setup.p), r)
    den = vector_norm(taylor_difference(setup.f, setup.p), r)
    if den == 0.0:
        raise SingularMatrix("f(p) - Jf(p)p vanishes")
    return amplification(tau) * kappa * (matrix_norm(Je, r) / nJf + num / den)


def true_displacement(setup, tol=1e-12, max_iter=50):
    """Root of f+ε reached by Newton from p, minus p."""
    q = newton_refine(setup.perturbed, setup.p, tol=tol, max_iter=max_iter)
    return q - setup.p


def condition_report(setup, with_true=False):
    kappa = local_condition_number(setup.f, setup.p, setup.norm)
    tau, ok = admissibility_norm_check(setup)
    if not ok:
        raise Inadmissible(f"tau = {tau:.6g} >= 1")
    dp1 = first_order_displacement(setup)
    pn = vector_norm(setup.p, setup.norm)
    ub1 = relative_error_bound(setup) if pn > 0 else None
    rep = ConditionReport(
        kappa=kappa,
        tau=tau,
        lam=amplification(tau),
        delta_p1=dp1,
        ub1=ub1,
        norm=norm_label(setup.norm),
        displacement_bound=displacement_bound(setup),
        rel_first_order=vector_norm(dp1, setup.norm) / pn if pn > 0 else None,
    )
    if with_true and pn > 0:
        rep.rel_true = vector_norm(true_displacement(setup), setup.norm) / pn
    return rep
