"""Real roots: Sturm chains, isolation, shape position and Sturm-Habicht signs."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from gmpy2 import gcd, lcm, mpz

from .errors import DegenerateSequence, NotZeroDimensional, OnBoundary, ShapeFailed
from .groebner import INFINITE, buchberger, fglm, groebner_basis
from .polycore import (
    DEGREVLEX,
    LEX,
    Poly,
    PolyRing,
    clear_denominators,
    determinant,
    dense_coeffs,
    evaluate,
    mpq,
    poly_from_dense,
    primitive_scale,
    specialize_params,
    substitute_linear,
    to_param_poly,
    to_rational,
)

# ---------------------------------------------------------------------------
# dense univariate arithmetic over QQ (coefficient lists, low to high)


def _trim(a):
    a = list(a)
    while a and not a[-1]:
        a.pop()
    return a


def _deriv(a):
    return [a[i] * i for i in range(1, len(a))]


def _rem(a, b):
    a = _trim(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and a:
        f = a[-1] / lb
        s = len(a) - 1 - db
        for i in range(db):
            a[s + i] -= f * b[i]
        a.pop()
        a = _trim(a)
    return a


def _eval(a, x):
    v = mpq(0)
    for c in reversed(a):
        v = v * x + c
    return v


def _sign(v):
    return (v > 0) - (v < 0)


def _sign_at(a, x):
    """Sign at a rational point, or at -inf/+inf when ``x`` is None with a side."""
    return _sign(_eval(a, x))


def _sign_inf(a, positive):
    if not a:
        return 0
    s = _sign(a[-1])
    if not positive and (len(a) - 1) % 2:
        s = -s
    return s


def _variations(signs):
    signs = [s for s in signs if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _as_dense(p):
    if isinstance(p, (list, tuple)):
        return _trim([to_rational(c) for c in p])
    return _trim(dense_coeffs(p))


# ---------------------------------------------------------------------------
# dense univariate arithmetic over ZZ (mpz lists, low to high)

_CHECK_PRIME = (1 << 61) - 1


def _content(a):
    g = mpz(0)
    for c in a:
        g = gcd(g, c)
        if g == 1:
            break
    return g


def _primitive(a):
    """Positive-content primitive part; signs are kept."""
    g = _content(a)
    return [c // g for c in a] if g > 1 else list(a)


def _prem(a, b):
    """lc(b)^(deg a - deg b + 1) * a mod b over ZZ."""
    a = _trim(a)
    db = len(b) - 1
    lb = b[-1]
    if len(a) - 1 < db:
        return a
    for _ in range(len(a) - 1 - db + 1):
        top = a[-1]
        s = len(a) - 1 - db
        a = [c * lb for c in a]
        for i in range(db):
            a[s + i] -= top * b[i]
        a.pop()
    return _trim(a)


def _int_chain(a):
    """Sturm chain of integer ``a`` up to positive factors, via primitive pseudo-remainders."""
    chain = [_primitive(a), _primitive(_trim(_deriv(a)))]
    while chain[-1]:
        u, v = chain[-2], chain[-1]
        delta = len(u) - len(v) + 1
        r = _prem(u, v)
        # prem = lc(v)^delta * rem; the chain wants -rem up to a positive factor
        neg = not (v[-1] < 0 and delta % 2)
        r = _primitive(r)
        chain.append([-c for c in r] if neg else r)
    chain.pop()
    return chain


def _int_gcd(a, b):
    a, b = _primitive(a), _primitive(b)
    while b:
        a, b = b, _primitive(_prem(a, b))
    return a


def _int_divexact(a, b):
    """a / b over ZZ; ``b`` primitive and dividing ``a``."""
    a = list(a)
    db = len(b) - 1
    q = [mpz(0)] * (len(a) - db)
    for s in range(len(a) - 1 - db, -1, -1):
        f, r = divmod(a[s + db], b[-1])
        if r:
            raise ArithmeticError("inexact polynomial division")
        q[s] = f
        if f:
            for i in range(db + 1):
                a[s + i] -= f * b[i]
    return _trim(q)


def _coprime_mod(a, b, p):
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    while b:
        inv = pow(int(b[-1]), -1, p)
        a = list(a)
        db = len(b) - 1
        while len(a) - 1 >= db and a:
            f = a[-1] * inv % p
            s = len(a) - 1 - db
            for i in range(db):
                a[s + i] = (a[s + i] - f * b[i]) % p
            a.pop()
            a = _trim(a)
        a, b = b, a
    return len(a) == 1


def _sqfree_int(a):
    """Primitive squarefree part of a rational or integer coefficient list."""
    a = _integer_scaled(_trim(a))
    if len(a) <= 2:
        return a
    da = _trim(_deriv(a))
    # a trivial gcd mod p (with p not dividing lc) is trivial over QQ
    if a[-1] % _CHECK_PRIME and _coprime_mod(a, da, _CHECK_PRIME):
        return a
    g = _int_gcd(a, da)
    if len(g) == 1:
        return a
    q = _int_divexact(a, g)
    return [-c for c in q] if (q[-1] < 0) != (a[-1] < 0) else q


# ---------------------------------------------------------------------------
# Sturm sequences


@dataclass
class SturmSequence:
    polys: list
    source: object

    @classmethod
    def of(cls, p):
        """Signed-remainder chain of ``p`` (a univariate Poly)."""
        a = _as_dense(p)
        if not a:
            raise ValueError("Sturm sequence of the zero polynomial")
        chain = [a, _trim(_deriv(a))]
        while chain[-1]:
            r = _rem(chain[-2], chain[-1])
            chain.append([-c for c in r])
        chain.pop()
        var = _univariate_var(p)
        polys = [poly_from_dense(p.ring, var, c) for c in chain] if isinstance(p, Poly) else chain
        return cls(polys=polys, source=p)

    def dense(self):
        return [_as_dense(q) for q in self.polys]

    def variations_at(self, x):
        chain = self.dense()
        if x is None or x == float("inf"):
            return _variations([_sign_inf(c, True) for c in chain])
        if x == float("-inf"):
            return _variations([_sign_inf(c, False) for c in chain])
        x = to_rational(x)
        return _variations([_sign_at(c, x) for c in chain])


def _univariate_var(p):
    if not isinstance(p, Poly):
        return 0
    used = p.variables()
    if len(used) > 1:
        raise ValueError("expected a univariate polynomial")
    return next(iter(used)) if used else 0


def _integer_scaled(a):
    """Positive multiple of ``a`` with coprime integer coefficients (signs preserved)."""
    den = mpz(1)
    for c in a:
        den = lcm(den, c.denominator)
    ints = [mpz(c * den) for c in a]
    g = mpz(0)
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints] if g > 1 else ints


class _IntChain:
    """Sturm chain with integer coefficients; signs at dyadic or rational points."""

    def __init__(self, sf):
        self.polys = _int_chain(sf)
        self.inf_pos = [_sign_inf(c, True) for c in self.polys]
        self.inf_neg = [_sign_inf(c, False) for c in self.polys]

    def variations(self, x):
        if x is None:
            raise ValueError("use the infinite variants")
        num, den = mpz(x.numerator), mpz(x.denominator)
        return _variations([_int_sign(c, num, den) for c in self.polys])

    def count(self, lo, hi):
        vlo = _variations(self.inf_neg) if lo is None else self.variations(lo)
        vhi = _variations(self.inf_pos) if hi is None else self.variations(hi)
        return vlo - vhi


def _int_sign(c, num, den):
    """Sign of the integer polynomial ``c`` at num/den with den > 0."""
    v = mpz(0)
    dp = mpz(1)
    # homogeneous Horner: sum c_i num^i den^(deg-i), same sign as c(num/den)
    for coef in reversed(c):
        v = v * num + coef * dp
        dp *= den
    return _sign(v)


def _count_dense(sf, lo, hi, chain=None):
    """Distinct roots of squarefree ``sf`` in (lo, hi]; None means infinite."""
    if len(sf) <= 1:
        return 0
    chain = chain or _IntChain(sf)
    return chain.count(lo, hi)


def _bound(v):
    if v is None:
        return None
    if isinstance(v, float) and v in (float("inf"), float("-inf")):
        return None
    return to_rational(v)


def sturm_count(p, interval=(None, None)):
    """Number of distinct real roots of ``p`` in (lo, hi]; None or ±inf for open ends."""
    a = _as_dense(p)
    if not a:
        raise ValueError("sturm_count of the zero polynomial")
    lo, hi = _bound(interval[0]), _bound(interval[1])
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    return _count_dense(_sqfree_int(a), lo, hi)


# ---------------------------------------------------------------------------
# isolation


@dataclass(frozen=True)
class RootInterval:
    lo: object
    hi: object

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    @property
    def width(self):
        return self.hi - self.lo

    def __iter__(self):
        return iter((self.lo, self.hi))

    def as_floats(self):
        return (float(self.lo), float(self.hi))


def _root_bound(a):
    """Integer strictly above every root modulus of integer ``a``."""
    lc = abs(a[-1])
    return 2 + max((abs(c) // lc for c in a[:-1]), default=mpz(0))


def _taylor_shift(a, c=1):
    """Coefficients of a(x + c) for an integer shift."""
    a = list(a)
    n = len(a) - 1
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            a[j] += c * a[j + 1]
    return a


def _window_poly(P, lo, hi):
    """Integer primitive Q with Q(t) a positive multiple of P(lo + (hi - lo) t)."""
    n = len(P) - 1
    num, den = mpz(lo.numerator), mpz(lo.denominator)
    # den^n P(y / den), then y -> y + num
    R = _taylor_shift([c * den ** (n - i) for i, c in enumerate(P)], num)
    w = (hi - lo) * den
    p, q = mpz(w.numerator), mpz(w.denominator)
    return _primitive([c * p**i * q ** (n - i) for i, c in enumerate(R)])


def _descartes(q):
    """Sign variations bounding the roots of ``q`` in the open unit interval."""
    return _variations([_sign(c) for c in _taylor_shift(q[::-1])])


def _unit_roots(Q):
    """Roots of squarefree ``Q`` in (0, 1), left to right.

    Yields ``("iv", a, k)`` for an isolating interval (a/2^k, (a+1)/2^k) or
    ``("pt", a, k)`` for an exact root a/2^k.
    """
    stack = [("node", Q, mpz(0), 0)]
    while stack:
        item = stack.pop()
        if item[0] == "pt":
            yield item
            continue
        _, q, a, k = item
        v = _descartes(q)
        if v == 0:
            continue
        if v == 1:
            yield ("iv", a, k)
            continue
        n = len(q) - 1
        left = [c << (n - i) for i, c in enumerate(q)]
        right = _taylor_shift(left)
        # right is pushed first so the left half is explored first
        if not right[0]:
            stack.append(("node", _primitive(right[1:]), 2 * a + 1, k + 1))
            stack.append(("pt", 2 * a + 1, k + 1))
        else:
            stack.append(("node", _primitive(right), 2 * a + 1, k + 1))
        stack.append(("node", _primitive(left), 2 * a, k + 1))


def _psign(P, x):
    return _int_sign(P, mpz(x.numerator), mpz(x.denominator))


def _isolated_near(P, x, width):
    """Interval of width <= ``width`` around the exact root ``x`` with no other root of P."""
    lin = [-mpz(x.numerator), mpz(x.denominator)]
    rest = _int_divexact(P, lin)
    e = width / 2
    while True:
        if len(rest) <= 1 or not _descartes(_window_poly(rest, x - e, x + e)):
            return RootInterval(x - e, x + e)
        e /= 2


def _refine(P, l, h, width):
    """Bisect an isolating interval of squarefree P until it is narrow with non-root ends."""
    dP = _trim(_deriv(P))
    # sign just right of l; a root at l is simple so P' decides
    sl = _psign(P, l) or _psign(dP, l)
    while h - l > width or not _psign(P, l) or not _psign(P, h):
        m = (l + h) / 2
        sm = _psign(P, m)
        if not sm:
            return _isolated_near(P, m, min(width, h - l) / 2)
        if sm == sl:
            l = m
        else:
            h = m
    return RootInterval(l, h)


def _roots_between(P, lo, hi, width):
    """Lazily yield isolating intervals of the roots of squarefree P in (lo, hi), ascending."""
    if len(P) <= 1:
        return
    Q = _window_poly(P, lo, hi)
    while not Q[0]:
        Q = Q[1:]
    span = hi - lo
    for kind, a, k in _unit_roots(Q):
        scale = mpq(1, 2**k) * span
        if kind == "pt":
            yield _isolated_near(P, lo + a * scale, width)
        else:
            yield _refine(P, lo + a * scale, lo + (a + 1) * scale, width)


def isolate_real_roots(p, width=mpq(1, 10**6), lo=None, hi=None):
    """Disjoint open intervals, one per distinct real root in (lo, hi), each no wider than ``width``.

    No endpoint is a root.
    """
    a = _as_dense(p)
    if not a:
        raise ValueError("cannot isolate roots of the zero polynomial")
    P = _sqfree_int(a)
    if len(P) <= 1:
        return []
    B = _root_bound(P)
    L = mpq(-B) if lo is None else to_rational(lo)
    H = mpq(B) if hi is None else to_rational(hi)
    if not L < H:
        raise ValueError("interval must satisfy lo < hi")
    return list(_roots_between(P, L, H, to_rational(width)))


def refine_root(p, interval, width):
    """Shrink an isolating interval by bisection until it is narrower than ``width``."""
    P = _sqfree_int(_as_dense(p))
    l, h = interval
    return _refine(P, to_rational(l), to_rational(h), to_rational(width))


def nearest_roots(p, center=0, width=mpq(1, 10**9)):
    """Isolating intervals of the nearest real root below and above ``center``.

    Either entry is None when no root exists on that side. A root at
    ``center`` itself counts on neither side.
    """
    a = _as_dense(p)
    if not a:
        raise ValueError("cannot isolate roots of the zero polynomial")
    P = _sqfree_int(a)
    if len(P) <= 1:
        return None, None
    c = to_rational(center)
    B = _root_bound(P) + abs(c)
    width = to_rational(width)
    above = next(_roots_between(P, c, c + B, width), None)
    # mirror x -> -x so the root just below c is the first one above -c
    M = [-v if i % 2 else v for i, v in enumerate(P)]
    m = next(_roots_between(M, -c, -c + B, width), None)
    below = RootInterval(-m.hi, -m.lo) if m is not None else None
    return below, above


# ---------------------------------------------------------------------------
# shape position


def shape_lemma_extract(gb):
    """Return ``(h, back_subs)`` when a Lex basis is in shape position, else None.

    ``h`` is the monic univariate generator in the last unknown and
    ``back_subs[i]`` expresses unknown ``i`` as a polynomial in the last one.
    """
    ring = gb.ring
    n = ring.nvars
    gens = gb.gens
    if len(gens) != n or n == 0:
        return None
    last = n - 1
    ordered = sorted(gens, key=lambda g: LEX.key(g.leading_monomial(LEX)), reverse=True)
    subs = []
    for i, g in enumerate(ordered[:-1]):
        lm = g.leading_monomial(LEX)
        target = tuple(1 if k == i else 0 for k in range(n))
        if lm != target:
            return None
        rest = {m: c for m, c in g.terms.items() if m != lm}
        if any(any(m[k] for k in range(last)) for m in rest):
            return None
        subs.append(-Poly._raw(ring, rest))
    h = ordered[-1]
    if any(any(m[k] for k in range(last)) for m in h.terms):
        return None
    return h.monic(LEX), subs


@dataclass
class RealCountReport:
    mu_real: int
    shape_poly: Poly
    coordinate_change: list | None = None
    mu: int | None = None
    back_subs: list = field(default_factory=list)

    def to_dict(self):
        return {
            "mu_real": self.mu_real,
            "mu": self.mu,
            "shape_poly": str(self.shape_poly),
            "coordinate_change": (
                [[str(c) for c in row] for row in self.coordinate_change]
                if self.coordinate_change
                else None
            ),
        }


def random_coordinate_change(rng, n):
    """Integer matrix with entries in [-3, 3] and nonzero determinant."""
    while True:
        M = rng.integers(-3, 4, size=(n, n))
        if round(abs(np.linalg.det(M))) >= 1:
            from .polycore import Poly as _P  # noqa: F401

            rows = [[mpq(int(v)) for v in row] for row in M]
            if _exact_det(rows):
                return rows


def _exact_det(rows):
    A = [list(r) for r in rows]
    n = len(A)
    det = mpq(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k]), None)
        if piv is None:
            return mpq(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
    return det


def real_fiber_count(system, seed=0, max_retries=5):
    """Distinct real solutions of a zero-dimensional radical system over QQ."""
    system = [g for g in system if g]
    if not system:
        raise NotZeroDimensional("empty system")
    ring = system[0].ring
    if ring.m:
        raise ValueError("specialise parameters before counting real points")
    drl = buchberger(system, DEGREVLEX)
    if drl.multiplicity == INFINITE:
        raise NotZeroDimensional("system is positive-dimensional")
    mu = drl.multiplicity
    if mu == 0:
        return RealCountReport(0, ring.one(), None, 0)
    rng = np.random.default_rng(seed)
    M = None
    current = system
    for attempt in range(max_retries + 1):
        gb = fglm(drl, LEX) if attempt == 0 else groebner_basis(current, LEX)
        got = shape_lemma_extract(gb)
        if got is not None:
            h, subs = got
            if h.total_degree() == mu:
                return RealCountReport(sturm_count(h), h, M, mu, subs)
        if attempt == max_retries:
            break
        M = random_coordinate_change(rng, ring.n)
        current = [substitute_linear(g, M) for g in system]
    raise ShapeFailed(f"no shape position after {max_retries} coordinate changes")


# ---------------------------------------------------------------------------
# Sturm-Habicht over QQ(a)


def _to_param_univariate(h):
    """Coefficient list (low to high) in Q[a] of a univariate polynomial.

    Accepts a polynomial over QQ(a) in one unknown, or a polynomial in
    QQ[a, y].  Returns ``(coeffs, L)`` where the coefficients are those of
    ``L * h`` and ``L`` is the lcm of the denominators.
    """
    ring = h.ring
    if ring.n != 1:
        used = {i for i in h.variables() if i >= ring.m}
        if len(used) != 1:
            raise ValueError("expected a polynomial in exactly one unknown")
        (k,) = used
        sub = PolyRing(ring.params, (ring.gens[k],), ring.field)
        keep = list(range(ring.m)) + [k]
        h = Poly._raw(sub, {tuple(mono[i] for i in keep): c for mono, c in h.terms.items()})
        ring = sub
    if ring.m == 0 and hasattr(ring.field, "params"):
        poly, L = clear_denominators(h)
    else:
        poly, L = h, ring.param_ring().one()
    pring = poly.ring.param_ring()
    m = poly.ring.m
    deg = max(mono[m] for mono in poly.terms)
    coeffs = [dict() for _ in range(deg + 1)]
    for mono, c in poly.terms.items():
        coeffs[mono[m]][mono[:m]] = c
    return [Poly._raw(pring, t) for t in coeffs], L


def _principal_subresultant(P, Q, j):
    """Principal coefficient of the j-th subresultant, via a Sylvester minor."""
    p = len(P) - 1
    q = len(Q) - 1
    size = p + q - 2 * j
    zero = P[0].ring.zero()
    rows = []
    for k in range(q - j - 1, -1, -1):
        rows.append(_shift_row(P, k, p + q - j - 1, size, zero))
    for k in range(p - j - 1, -1, -1):
        rows.append(_shift_row(Q, k, p + q - j - 1, size, zero))
    return determinant(rows)


def _shift_row(A, shift, top, size, zero):
    """Coefficients of x^shift * A at degrees top, top-1, ... (``size`` columns)."""
    row = []
    for col in range(size):
        deg = top - col - shift
        row.append(A[deg] if 0 <= deg < len(A) else zero)
    return row


def sturm_habicht_coefficients(coeffs):
    """Principal Sturm-Habicht coefficients (index p down to 0) of a polynomial in Q[a][y]."""
    p = len(coeffs) - 1
    if p < 1:
        raise ValueError("degree must be at least 1")
    deriv = [coeffs[i] * i for i in range(1, p + 1)]
    out = [coeffs[p], deriv[p - 1]]
    for j in range(p - 2, -1, -1):
        k = p - j
        delta = -1 if (k * (k - 1) // 2) % 2 else 1
        s = _principal_subresultant(coeffs, deriv, j)
        out.append(s if delta > 0 else -s)
    return out


def _positive_primitive(c):
    if not c:
        return c
    return c.scale(primitive_scale(c))


def sturm_habicht_param(h):
    """Sign-faithful principal Sturm-Habicht coefficients of ``h`` over QQ(a).

    Each entry is a parameter polynomial scaled by a positive rational to be
    primitive over the integers.  Raises DegenerateSequence when an entry is
    identically zero.
    """
    coeffs, L = _to_param_univariate(h)
    chain = sturm_habicht_coefficients(coeffs)
    if not L.is_constant():
        chain = [c * L for c in chain]
    out = [_positive_primitive(c) for c in chain]
    for j, c in enumerate(out):
        if not c:
            raise DegenerateSequence(f"principal coefficient {len(out) - 1 - j} vanishes identically")
    return out


def permanences_minus_variations(signs):
    """Real-root count from nonzero principal Sturm-Habicht signs."""
    total = 0
    for u, v in zip(signs, signs[1:]):
        total += 1 if u == v else -1
    return total


@dataclass
class RegionReport:
    signs: list
    count: int
    chain: list
    values: list

    def to_dict(self):
        return {
            "signs": ["+" if s > 0 else "-" for s in self.signs],
            "count": self.count,
            "values": [str(v) for v in self.values],
            "chain": [str(c) for c in self.chain],
        }


@lru_cache(maxsize=32)
def family_shape_chain(fam):
    """(shape polynomial over QQ(a), Sturm-Habicht chain, denominator lcm d) of a family."""
    from .polycore import denominators_lcm

    gb = groebner_basis([to_param_poly(g) for g in fam.gens], LEX)
    got = shape_lemma_extract(gb)
    if got is None:
        raise ShapeFailed("the generic Lex basis of the family is not in shape position")
    h, _ = got
    return h, sturm_habicht_param(h), denominators_lcm(gb.gens)


def classify_region(fam, alpha):
    """Signs of the principal Sturm-Habicht coefficients at ``alpha`` and the real count."""
    alpha = [to_rational(v) for v in alpha]
    h, chain, d = family_shape_chain(fam)
    if not evaluate(d, alpha):
        raise OnBoundary("parameter point lies where the generic basis does not specialise")
    values = [evaluate(c, alpha) for c in chain]
    signs = [(v > 0) - (v < 0) for v in values]
    if 0 in signs:
        raise OnBoundary("a principal Sturm-Habicht coefficient vanishes at this point")
    return RegionReport(signs=signs, count=permanences_minus_variations(signs), chain=chain, values=values)
