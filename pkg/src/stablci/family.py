"""Parametric families of square polynomial systems and their good loci.

A family F(a, x) is free over ``d(a) != 0`` (constant staircase of the
generic Groebner basis), smooth over ``h(a) != 0`` (fibers avoid the
Jacobian determinant) and optimal where both hold.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    GenericPositiveDimensional,
    NonSquareSystem,
    NoSmoothSubscheme,
    NotZeroDimensional,
)
from .groebner import (
    INFINITE,
    GroebnerBasis,
    buchberger,
    groebner_basis,
    interpolated_basis,
    elimination_ideal,
    eliminate_to_univariate,
)
from .polycore import (
    DEGREVLEX,
    Poly,
    PolyRing,
    TermOrder,
    canonical,
    change_ring,
    denominators_lcm,
    format_monomial,
    jacobian_det,
    mpq,
    specialize_params,
    to_param_poly,
    to_rational,
)


@dataclass(frozen=True)
class Family:
    ring: PolyRing
    gens: tuple
    base_point: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        if len(self.gens) != self.ring.n:
            raise NonSquareSystem(f"{len(self.gens)} equations in {self.ring.n} unknowns")
        for g in self.gens:
            if g.ring != self.ring:
                raise ValueError("family generators must share the family ring")
        if self.base_point is not None:
            bp = tuple(to_rational(v) for v in self.base_point)
            if len(bp) != self.ring.m:
                raise ArityMismatch("base point length must equal the number of parameters")
            object.__setattr__(self, "base_point", bp)

    @property
    def params(self):
        return self.ring.params

    @property
    def unknowns(self):
        return self.ring.unknowns

    def jacobian_det(self):
        return jacobian_det(list(self.gens))

    def seed_system(self):
        if self.base_point is None:
            raise ValueError("family has no base point")
        return specialize_fiber(self, self.base_point)


@dataclass
class LocusReport:
    d: Poly
    h: Poly | None
    H_gens: list
    T: list
    mu: int
    smooth_exists: bool
    gb: GroebnerBasis | None = None
    D: Poly | None = None
    order: TermOrder = DEGREVLEX

    @property
    def u_poly(self):
        """Product d*h; the optimal locus is where it does not vanish."""
        return canonical(self.d * self.h)

    def to_dict(self):
        names = self.gb.ring.gens if self.gb is not None else ()
        return {
            "d": self.d.to_str(self.order),
            "h": self.h.to_str(self.order) if self.h is not None else None,
            "H": [g.to_str(self.order) for g in self.H_gens],
            "mu": self.mu,
            "staircase": [format_monomial(m, names) or "1" for m in self.T] if names else [],
            "smooth_exists": self.smooth_exists,
            "free_locus": f"{self.d.to_str(self.order)} != 0",
            "smooth_locus": f"{self.h.to_str(self.order)} != 0" if self.h is not None else None,
            "optimal_locus": f"{self.u_poly.to_str(self.order)} != 0" if self.h is not None else None,
        }


def check_independent_params(fam):
    """True iff the ideal of the family meets K[a] only in zero."""
    if not fam.ring.m:
        return True
    return not elimination_ideal(list(fam.gens), list(fam.unknowns))


def free_locus(fam, order=DEGREVLEX, method="auto"):
    """Reduced basis over K(a) and the lcm ``d`` of its coefficient denominators.

    ``method`` is ``"direct"`` (Buchberger over K(a)), ``"interpolate"``
    (fibers at integer parameters, one parameter only) or ``"auto"``, which
    interpolates for one-parameter families.
    """
    if method == "auto":
        method = "interpolate" if fam.ring.m == 1 else "direct"
    if method == "interpolate":
        gb = interpolated_basis(list(fam.gens), order)
    elif method == "direct":
        gb = groebner_basis([to_param_poly(g) for g in fam.gens], order)
    else:
        raise ValueError(f"unknown method {method!r}")
    if gb.multiplicity == INFINITE:
        raise GenericPositiveDimensional("the generic member of the family is positive-dimensional")
    d = denominators_lcm(gb.gens)
    return gb, change_ring_params(d, fam.ring)


def change_ring_params(p, ring):
    """Widen a parameters-only polynomial into the full family ring."""
    pr = ring.param_ring()
    if p.ring != pr:
        raise ValueError("expected a parameters-only polynomial")
    out = {m + (0,) * ring.n: c for m, c in p.terms.items()}
    return Poly._raw(ring, out)


def smooth_locus(fam):
    """Generators of (F, det Jac_F) ∩ K[a] and whether that ideal is nonzero."""
    gens = list(fam.gens) + [fam.jacobian_det()]
    unk = list(fam.unknowns)
    if fam.ring.m == 1:
        try:
            h = eliminate_to_univariate(gens, fam.params[0])
            H = [canonical(h)]
            return H, True
        except NotZeroDimensional:
            pass
    H = [canonical(g) for g in elimination_ideal(gens, unk)]
    return H, bool(H)


def optimal_locus(fam, order=DEGREVLEX):
    D = fam.jacobian_det()
    H, exists = smooth_locus(fam)
    if not exists:
        raise NoSmoothSubscheme(fam.ring.m)
    gb, d = free_locus(fam, order)
    h = fam.ring.one()
    for g in H:
        h = h * g
    h = canonical(h)
    return LocusReport(
        d=d, h=h, H_gens=H, T=list(gb.staircase), mu=gb.multiplicity, smooth_exists=True, gb=gb, D=D, order=order
    )


def specialize_fiber(fam, alpha):
    if len(alpha) != fam.ring.m:
        raise ArityMismatch(f"expected {fam.ring.m} parameter values, got {len(alpha)}")
    return [specialize_params(g, alpha) for g in fam.gens]


def fiber_diagnostics(fam, alpha):
    """(mu_alpha, smooth) for the fiber over ``alpha``.

    ``smooth`` means the fiber ideal plus the specialised Jacobian
    determinant is the unit ideal.
    """
    fiber = specialize_fiber(fam, alpha)
    nonzero = [g for g in fiber if g]
    if not nonzero:
        raise NotZeroDimensional("fiber is the zero ideal")
    gb = buchberger(nonzero, DEGREVLEX)
    if gb.multiplicity == INFINITE:
        raise NotZeroDimensional("fiber is positive-dimensional")
    Dal = specialize_params(fam.jacobian_det(), alpha)
    smooth = gb.is_unit() or buchberger(nonzero + ([Dal] if Dal else []), DEGREVLEX).is_unit()
    return gb.multiplicity, smooth


def random_rational(rng, bound=1000):
    """Rational with numerator in [-bound, bound] and denominator in [1, bound]."""
    num = int(rng.integers(-bound, bound + 1))
    den = int(rng.integers(1, bound + 1))
    return mpq(num, den)


def random_alpha(rng, m, bound=1000):
    return tuple(random_rational(rng, bound) for _ in range(m))
