"""Exact multivariate polynomials.

A :class:`PolyRing` orders its variables as parameters ``a1..am`` followed by
unknowns ``x1..xn``.  Polynomials over QQ carry ``gmpy2.mpq`` coefficients;
polynomials over the parameter field QQ(a) carry :class:`ParamRational`
coefficients.  Monomials are dense exponent tuples.  Every value is treated
as immutable once built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product as _iproduct
from math import comb

import gmpy2
from gmpy2 import mpq, mpz

from .errors import ArityMismatch, NonSquareSystem, RingMismatch

Rational = type(mpq())
_MPZ = type(mpz())


def to_rational(value):
    """Convert ints, Fractions, exact-binary floats and strings to ``mpq``.

    Strings accept integer, decimal and ``p/q`` forms; decimals are exact
    (``"0.25"`` is 1/4).
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, _MPZ)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return mpq(value)
    if isinstance(value, str):
        return mpq(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def rational_to_float(q):
    """Round an exact rational to the nearest double."""
    return int(q.numerator) / int(q.denominator)


# ---------------------------------------------------------------------------
# monomials


def mono_mul(a, b):
    return tuple([x + y for x, y in zip(a, b)])


def mono_div(a, b):
    return tuple([x - y for x, y in zip(a, b)])


def mono_divides(a, b):
    """True when monomial ``a`` divides ``b``."""
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def mono_lcm(a, b):
    return tuple([x if x > y else y for x, y in zip(a, b)])


def mono_deg(a):
    return sum(a)


class TermOrder:
    """Multiplicative total order on exponent tuples.

    ``kind`` is ``"lex"``, ``"degrevlex"`` or ``"block"``.  For lex and
    degrevlex, ``priority`` lists variable indices from largest to smallest
    (default: ring order).  A block order compares the blocks one after the
    other, each by degrevlex; the first block dominates, which makes it an
    elimination order for the variables in that block.
    """

    __slots__ = ("kind", "priority", "blocks", "_key", "_neg")

    def __init__(self, kind, priority=None, blocks=None):
        if kind not in ("lex", "degrevlex", "block"):
            raise ValueError(f"unknown term order {kind!r}")
        if kind == "block" and not blocks:
            raise ValueError("block order needs blocks")
        self.kind = kind
        self.priority = tuple(priority) if priority is not None else None
        self.blocks = tuple(tuple(b) for b in blocks) if blocks else None
        self._key = {}
        self._neg = {}

    @classmethod
    def lex(cls, priority=None):
        return cls("lex", priority=priority)

    @classmethod
    def degrevlex(cls, priority=None):
        return cls("degrevlex", priority=priority)

    @classmethod
    def block_elim(cls, k, nvars):
        """First ``k`` variables form the dominant block."""
        return cls("block", blocks=(tuple(range(k)), tuple(range(k, nvars))))

    @classmethod
    def elimination(cls, drop, nvars):
        drop = tuple(sorted(set(drop)))
        keep = tuple(i for i in range(nvars) if i not in drop)
        blocks = tuple(b for b in (drop, keep) if b)
        return cls("block", blocks=blocks)

    @classmethod
    def from_name(cls, name):
        name = name.lower()
        if name == "lex":
            return cls.lex()
        if name in ("degrevlex", "drl", "grevlex"):
            return cls.degrevlex()
        raise ValueError(f"unknown term order {name!r}")

    def _compute(self, m):
        if self.kind == "block":
            out = []
            for blk in self.blocks:
                out.append(sum(m[i] for i in blk))
                out.extend(-m[i] for i in reversed(blk))
            return tuple(out)
        prio = self.priority if self.priority is not None else range(len(m))
        if self.kind == "lex":
            return tuple(m[i] for i in prio)
        prio = tuple(prio)
        return (sum(m[i] for i in prio),) + tuple(-m[i] for i in reversed(prio))

    def key(self, m):
        k = self._key.get(m)
        if k is None:
            k = self._key[m] = self._compute(m)
        return k

    def neg_key(self, m):
        k = self._neg.get(m)
        if k is None:
            k = self._neg[m] = tuple(-v for v in self.key(m))
        return k

    def __eq__(self, other):
        return (
            isinstance(other, TermOrder)
            and (self.kind, self.priority, self.blocks)
            == (other.kind, other.priority, other.blocks)
        )

    def __hash__(self):
        return hash((self.kind, self.priority, self.blocks))

    def __repr__(self):
        if self.kind == "block":
            return f"TermOrder(block, {self.blocks})"
        if self.priority is None:
            return f"TermOrder({self.kind})"
        return f"TermOrder({self.kind}, priority={self.priority})"


DEGREVLEX = TermOrder.degrevlex()
LEX = TermOrder.lex()


# ---------------------------------------------------------------------------
# coefficient fields


class RationalField:
    """The field QQ, realised by ``gmpy2.mpq``."""

    zero = mpq(0)
    one = mpq(1)

    def convert(self, value):
        if isinstance(value, ParamRational):
            if value.is_constant():
                return value.constant_value()
            raise TypeError("non-constant rational function in QQ context")
        return to_rational(value)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __reduce__(self):
        return (RationalField, ())


QQ = RationalField()


@dataclass(frozen=True)
class RationalFunctionField:
    """QQ(a1..am); elements are :class:`ParamRational`."""

    params: tuple

    @property
    def ring(self):
        return PolyRing(self.params, ())

    @property
    def zero(self):
        return ParamRational(self.ring.zero())

    @property
    def one(self):
        return ParamRational(self.ring.one())

    def convert(self, value):
        if isinstance(value, ParamRational):
            if value.num.ring.params != self.params:
                raise RingMismatch("rational function over different parameters")
            return value
        if isinstance(value, Poly):
            return ParamRational(value)
        return ParamRational(self.ring.const(value))

    def __repr__(self):
        return "QQ(" + ",".join(self.params) + ")"


# ---------------------------------------------------------------------------
# rings and polynomials


@dataclass(frozen=True)
class PolyRing:
    """Variable roster: parameters first, then unknowns."""

    params: tuple = ()
    unknowns: tuple = ()
    field: object = QQ

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        names = self.params + self.unknowns
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @property
    def gens(self):
        return self.params + self.unknowns

    @property
    def nvars(self):
        return len(self.params) + len(self.unknowns)

    @property
    def m(self):
        return len(self.params)

    @property
    def n(self):
        return len(self.unknowns)

    def index(self, name):
        try:
            return self.gens.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a variable of {self}") from None

    def zero(self):
        return Poly._raw(self, {})

    def one(self):
        return self.const(1)

    def const(self, c):
        c = self.field.convert(c)
        if not c:
            return self.zero()
        return Poly._raw(self, {(0,) * self.nvars: c})

    def gen(self, name):
        e = [0] * self.nvars
        e[self.index(name) if isinstance(name, str) else name] = 1
        return Poly._raw(self, {tuple(e): self.field.one})

    def monomial(self, exps, coeff=1):
        return Poly(self, {tuple(exps): coeff})

    def param_ring(self):
        return PolyRing(self.params, ())

    def unknown_ring(self):
        return PolyRing((), self.unknowns)

    def fraction_ring(self):
        """Ring of polynomials in the unknowns over QQ(params)."""
        return PolyRing((), self.unknowns, RationalFunctionField(self.params))

    def all_variables_ring(self):
        """Same variables, all treated as unknowns over QQ."""
        return PolyRing((), self.gens)

    def __str__(self):
        return f"{self.field}[{','.join(self.gens)}]"


class Poly:
    """Sparse polynomial: ``terms`` maps exponent tuples to nonzero coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring, terms=None):
        self.ring = ring
        self._hash = None
        clean = {}
        if terms:
            conv = ring.field.convert
            nv = ring.nvars
            for m, c in terms.items():
                m = tuple(int(e) for e in m)
                if len(m) != nv or any(e < 0 for e in m):
                    raise ValueError(f"bad exponent vector {m} for {ring}")
                c = conv(c)
                if c:
                    clean[m] = clean.get(m, ring.field.zero) + c
            clean = {m: c for m, c in clean.items() if c}
        self.terms = clean

    @classmethod
    def _raw(cls, ring, terms):
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        p._hash = None
        return p

    # -- basic queries -----------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self):
        return self.terms.get((0,) * self.ring.nvars, self.ring.field.zero)

    def total_degree(self):
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, var):
        i = self._var_index(var)
        return max((m[i] for m in self.terms), default=-1)

    def variables(self):
        """Indices of variables that actually occur."""
        used = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return used

    def involves(self, indices):
        idx = set(indices)
        return any(m[i] for m in self.terms for i in idx)

    def _var_index(self, var):
        return self.ring.index(var) if isinstance(var, str) else var

    def leading_term(self, order=DEGREVLEX):
        m = max(self.terms, key=order.key)
        return m, self.terms[m]

    def leading_monomial(self, order=DEGREVLEX):
        return max(self.terms, key=order.key)

    def leading_coeff(self, order=DEGREVLEX):
        return self.terms[max(self.terms, key=order.key)]

    def monic(self, order=DEGREVLEX):
        if not self.terms:
            return self
        return self.scale(self.ring.field.one / self.leading_coeff(order))

    def sorted_terms(self, order=DEGREVLEX):
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = self.ring.field.convert(c)
        if not c:
            return self.ring.zero()
        return Poly._raw(self.ring, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._coerce(other)
        if len(other.terms) == 1:
            (om, oc), = other.terms.items()
            return Poly._raw(self.ring, {mono_mul(m, om): c * oc for m, c in self.terms.items()})
        out = {}
        get = out.get
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple([x + y for x, y in zip(m1, m2)])
                v = get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return Poly._raw(self.ring, {m: c for m, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_monomial(self, mono, c=None):
        if c is None:
            return Poly._raw(self.ring, {mono_mul(m, mono): v for m, v in self.terms.items()})
        return Poly._raw(self.ring, {mono_mul(m, mono): v * c for m, v in self.terms.items()})

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        try:
            return self == self.ring.const(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # -- printing ----------------------------------------------------------
    def to_str(self, order=DEGREVLEX):
        return format_poly(self, order)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, {self.ring})"


def poly_arith(p, q, op):
    """Exact ``add``, ``sub`` or ``mul`` of two polynomials in one ring."""
    if not isinstance(p, Poly) or not isinstance(q, Poly):
        raise TypeError("poly_arith expects two polynomials")
    if p.ring != q.ring:
        raise RingMismatch(f"{p.ring} vs {q.ring}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


def _format_coeff(c):
    if isinstance(c, ParamRational):
        return str(c)
    return str(c)


def format_monomial(m, names):
    parts = []
    for name, e in zip(names, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p, order=DEGREVLEX):
    if not p.terms:
        return "0"
    names = p.ring.gens
    out = []
    for m, c in p.sorted_terms(order):
        mono = format_monomial(m, names)
        if isinstance(c, ParamRational):
            if c.is_constant():
                c = c.constant_value()
            else:
                body = f"({c})"
                out.append(("+", body + ("*" + mono if mono else "")))
                continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        out.append((sign, body))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


# ---------------------------------------------------------------------------
# evaluation, derivatives, specialisation


def _check_point(p, point):
    n = p.ring.nvars
    if len(point) != n:
        raise ArityMismatch(
            f"point has {len(point)} coordinates, ring {p.ring} has {n} variables"
        )


def evaluate(p, point):
    """Exact value of ``p`` at ``point`` (one coordinate per ring variable).

    For a ring with parameters, either pass values for all variables or
    specialise the parameters first.
    """
    _check_point(p, point)
    vals = [to_rational(v) if not isinstance(v, ParamRational) else v for v in point]
    total = p.ring.field.zero
    powers = [dict() for _ in vals]
    for m, c in p.terms.items():
        t = c
        for i, e in enumerate(m):
            if e:
                cache = powers[i]
                v = cache.get(e)
                if v is None:
                    v = cache[e] = vals[i] ** e
                t = t * v
        total = total + t
    return total


def partial_derivative(p, var):
    """Formal derivative.  ``var`` is a variable name or an unknown index."""
    if isinstance(var, str):
        i = p.ring.index(var)
    else:
        if not 0 <= var < p.ring.n:
            raise IndexError(f"unknown index {var} out of range")
        i = p.ring.m + var
    out = {}
    for m, c in p.terms.items():
        e = m[i]
        if e:
            nm = m[:i] + (e - 1,) + m[i + 1 :]
            out[nm] = c * e
    return Poly._raw(p.ring, out)


def _check_square(system):
    if not system:
        raise NonSquareSystem("empty system")
    ring = system[0].ring
    for g in system:
        if g.ring != ring:
            raise RingMismatch("system polynomials live in different rings")
    if len(system) != ring.n:
        raise NonSquareSystem(f"{len(system)} polynomials in {ring.n} unknowns")
    return ring


def jacobian_symbolic(system):
    """n x n matrix of partials with respect to the unknowns only."""
    ring = _check_square(system)
    return [[partial_derivative(g, j) for j in range(ring.n)] for g in system]


def exact_quotient(p, q):
    """``p / q`` when ``q`` divides ``p`` exactly; raises ArithmeticError otherwise."""
    if not q:
        raise ZeroDivisionError("division by zero polynomial")
    if not p:
        return p
    if q.is_constant():
        return p.scale(p.ring.field.one / q.constant_value())
    order = LEX
    qm, qc = q.leading_term(order)
    qtail = [(m, c) for m, c in q.terms.items() if m != qm]
    rem = dict(p.terms)
    quot = {}
    while rem:
        m = max(rem, key=order.key)
        c = rem.pop(m)
        if not mono_divides(qm, m):
            raise ArithmeticError("inexact polynomial division")
        t = mono_div(m, qm)
        f = c / qc
        quot[t] = f
        for tm, tc in qtail:
            nm = mono_mul(tm, t)
            v = rem.get(nm)
            v = -f * tc if v is None else v - f * tc
            if v:
                rem[nm] = v
            else:
                rem.pop(nm, None)
    return Poly._raw(p.ring, quot)


def determinant(matrix):
    """Exact determinant of a square matrix of polynomials.

    Cofactor expansion for n <= 3, Bareiss fraction-free elimination above.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise NonSquareSystem("determinant of a non-square matrix")
    if n == 0:
        raise NonSquareSystem("empty matrix")
    if n <= 3:
        return _cofactor_det(matrix)
    return _bareiss_det(matrix)


def _cofactor_det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = None
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        t = M[0][j] * _cofactor_det(minor)
        if j % 2:
            t = -t
        total = t if total is None else total + t
    if total is None:
        return M[0][0].ring.zero()
    return total


def _bareiss_det(M):
    A = [list(row) for row in M]
    n = len(A)
    ring = A[0][0].ring
    sign = 1
    prev = ring.one()
    for k in range(n - 1):
        if not A[k][k]:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return ring.zero()
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = exact_quotient(A[i][j] * A[k][k] - A[i][k] * A[k][j], prev)
        prev = A[k][k]
    det = A[n - 1][n - 1]
    return det if sign > 0 else -det


def jacobian_det(system):
    """D = det(Jac_F) with respect to the unknowns."""
    return determinant(jacobian_symbolic(system))


def specialize_params(p, alpha):
    """Substitute parameter values; the result lives in the unknowns-only ring."""
    ring = p.ring
    if len(alpha) != ring.m:
        raise ArityMismatch(f"expected {ring.m} parameter values, got {len(alpha)}")
    vals = [to_rational(v) for v in alpha]
    target = ring.unknown_ring()
    m = ring.m
    out = {}
    for mono, c in p.terms.items():
        v = c
        for i in range(m):
            if mono[i]:
                v = v * vals[i] ** mono[i]
        if not v:
            continue
        key = mono[m:]
        w = out.get(key)
        out[key] = v if w is None else w + v
    return Poly._raw(target, {k: c for k, c in out.items() if c})


def change_ring(p, ring):
    """Reinterpret ``p`` in a ring with the same variable list (e.g. params as unknowns)."""
    if ring.gens != p.ring.gens:
        raise RingMismatch("change_ring needs the same variable list")
    return Poly._raw(ring, dict(p.terms))


def embed(p, ring):
    """Map ``p`` into ``ring`` by variable name; every variable of ``p`` must exist there."""
    idx = [ring.index(name) for name in p.ring.gens]
    out = {}
    for m, c in p.terms.items():
        e = [0] * ring.nvars
        for i, k in enumerate(m):
            e[idx[i]] += k
        out[tuple(e)] = ring.field.convert(c)
    return Poly._raw(ring, out)


def substitute_linear(p, matrix):
    """Compose ``p`` with the linear change of unknowns ``x = M y`` (exact)."""
    ring = p.ring
    n = ring.n
    if len(matrix) != n or any(len(r) != n for r in matrix):
        raise ArityMismatch("coordinate change must be n x n")
    images = []
    for i in range(n):
        img = ring.zero()
        for j in range(n):
            c = to_rational(matrix[i][j])
            if c:
                img = img + ring.gen(ring.m + j).scale(c)
        images.append(img)
    return compose_unknowns(p, images)


def compose_unknowns(p, images):
    """Substitute polynomials for the unknowns, keeping parameters."""
    ring = p.ring
    m = ring.m
    result = ring.zero()
    cache = {}
    for mono, c in p.terms.items():
        term = ring.monomial(mono[:m] + (0,) * ring.n, c)
        for j, e in enumerate(mono[m:]):
            if e:
                key = (j, e)
                pw = cache.get(key)
                if pw is None:
                    pw = cache[key] = images[j] ** e
                term = term * pw
        result = result + term
    return result


def translate(g, shift):
    """``g(x + shift)`` for a polynomial in the unknowns (exact)."""
    ring = g.ring
    if len(shift) != ring.n:
        raise ArityMismatch("shift length must match the number of unknowns")
    m = ring.m
    images = [ring.gen(m + j) + to_rational(shift[j]) for j in range(ring.n)]
    return compose_unknowns(g, images)


def taylor_tail(g, p, d):
    """Sum of the Taylor terms of order >= d of ``g`` at ``p``, as a polynomial in x."""
    shifted = translate(g, p)
    m = g.ring.m
    kept = {mono: c for mono, c in shifted.terms.items() if sum(mono[m:]) >= d}
    tail = Poly._raw(g.ring, kept)
    return translate(tail, [-to_rational(v) for v in p])


def linear_part_at_zero(g, p):
    """``g(p) - Jac_g(p) . p``, equal to ``g(0) - g^{>=2}(0, p)`` exactly.

    ``g`` must not involve parameters; ``p`` has one entry per unknown.
    """
    ring = g.ring
    if len(p) != ring.n:
        raise ArityMismatch(f"point has {len(p)} coordinates, expected {ring.n}")
    pt = [to_rational(v) for v in p]
    full = [0] * ring.m + pt if ring.m else pt
    if ring.m and g.involves(range(ring.m)):
        raise ValueError("specialise parameters before taking the linear part")
    if ring.m:
        full = [mpq(0)] * ring.m + pt
    value = evaluate(g, full)
    for j in range(ring.n):
        value -= evaluate(partial_derivative(g, j), full) * pt[j]
    return value


# ---------------------------------------------------------------------------
# gcd machinery (polynomials over QQ)


def content_normalize(p, order=DEGREVLEX):
    """Scale ``p`` to a primitive integer polynomial with positive leading coefficient."""
    if not p.terms:
        return p
    s = primitive_scale(p)
    if p.leading_coeff(order) * s < 0:
        s = -s
    return p.scale(s)


def primitive_scale(p):
    """Positive rational ``s`` such that ``s*p`` has coprime integer coefficients."""
    den = mpz(1)
    num = mpz(0)
    for c in p.terms.values():
        den = gmpy2.lcm(den, c.denominator)
    for c in p.terms.values():
        num = gmpy2.gcd(num, (c * den).numerator)
    return mpq(den, num)


def _split(p, v):
    """Coefficients of ``p`` as a polynomial in variable index ``v``."""
    out = {}
    for m, c in p.terms.items():
        e = m[v]
        key = m[:v] + (0,) + m[v + 1 :]
        out.setdefault(e, {})[key] = c
    return {e: Poly._raw(p.ring, t) for e, t in out.items()}


def _join(coeffs, v, ring):
    out = {}
    for e, cp in coeffs.items():
        for m, c in cp.terms.items():
            nm = m[:v] + (e,) + m[v + 1 :]
            out[nm] = c
    return Poly._raw(ring, out)


def _content_in(p, v):
    g = None
    for cp in _split(p, v).values():
        g = cp if g is None else _gcd(g, cp)
        if g.is_constant():
            return p.ring.one()
    return g


def _univariate_gcd(p, q, v):
    """Euclid over QQ for polynomials in the single variable ``v``."""
    a = {e: c.constant_value() for e, c in _split(p, v).items()}
    b = {e: c.constant_value() for e, c in _split(q, v).items()}
    a_list = _dense(a)
    b_list = _dense(b)
    while b_list:
        a_list, b_list = b_list, _dense_rem(a_list, b_list)
    lc = a_list[-1]
    return _join({e: p.ring.const(c / lc) for e, c in enumerate(a_list) if c}, v, p.ring)


def _dense(d):
    if not d:
        return []
    n = max(d)
    out = [mpq(0)] * (n + 1)
    for e, c in d.items():
        out[e] = c
    return out


def _dense_rem(a, b):
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and a:
        f = a[-1] / lb
        shift = len(a) - 1 - db
        for i in range(db + 1):
            a[shift + i] -= f * b[i]
        a.pop()
        while a and not a[-1]:
            a.pop()
    return a


def _uni_coeffs(p, v):
    parts = _split(p, v)
    deg = max(parts)
    return deg, parts


def _prem(A, B, v):
    """Pseudo-remainder of A by B in variable ``v`` (coefficients in the other variables)."""
    da, pa = _uni_coeffs(A, v)
    db, pb = _uni_coeffs(B, v)
    ring = A.ring
    lb = pb[db]
    rem = dict(pa)
    delta = da - db + 1
    for k in range(da, db - 1, -1):
        ck = rem.get(k)
        # multiply whole remainder by lb and subtract ck * x^(k-db) * B
        new = {}
        for e, c in rem.items():
            if e == k:
                continue
            new[e] = c * lb
        if ck is not None and ck:
            for e, c in pb.items():
                if e == db:
                    continue
                t = e + k - db
                val = new.get(t, ring.zero()) - ck * c
                new[t] = val
        rem = {e: c for e, c in new.items() if c}
        delta -= 1
    if delta > 0:
        f = lb ** delta
        rem = {e: c * f for e, c in rem.items()}
    return _join(rem, v, ring) if rem else ring.zero()


def _lc_in(p, v):
    d, parts = _uni_coeffs(p, v)
    return parts[d]


def _subresultant_gcd(A, B, v):
    """gcd of two primitive (in ``v``) polynomials via the subresultant PRS."""
    if A.degree_in(v) < B.degree_in(v):
        A, B = B, A
    g = A.ring.one()
    h = A.ring.one()
    while True:
        delta = A.degree_in(v) - B.degree_in(v)
        R = _prem(A, B, v)
        if not R:
            break
        if R.degree_in(v) == 0:
            return A.ring.one()
        A, B = B, exact_quotient(R, g * h ** delta)
        g = _lc_in(A, v)
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = exact_quotient(g ** delta, h ** (delta - 1))
    return exact_quotient(B, _content_in(B, v))


def _gcd(p, q):
    if not p:
        return q
    if not q:
        return p
    vp, vq = p.variables(), q.variables()
    allv = vp | vq
    if not allv:
        return p.ring.one()
    v = max(allv)
    if v not in vp:
        return _gcd(p, _content_in(q, v))
    if v not in vq:
        return _gcd(_content_in(p, v), q)
    if len(allv) == 1:
        return _univariate_gcd(p, q, v)
    cp, cq = _content_in(p, v), _content_in(q, v)
    pp, qq = exact_quotient(p, cp), exact_quotient(q, cq)
    c = _gcd(cp, cq)
    return c * _subresultant_gcd(pp, qq, v)


def param_gcd(p, q):
    """Canonical gcd of two polynomials over QQ; gcd(0, q) = q (normalised)."""
    if p.ring != q.ring:
        raise RingMismatch(f"{p.ring} vs {q.ring}")
    if p.ring.field != QQ:
        raise TypeError("param_gcd works over QQ")
    if not p and not q:
        return p
    return content_normalize(_gcd(p, q))


def poly_lcm(p, q):
    if not p or not q:
        return p.ring.zero()
    g = param_gcd(p, q)
    return content_normalize(exact_quotient(p * q, g))


def squarefree_factors(p):
    """Yun-style squarefree decomposition over QQ, all variables.

    Returns a list of (factor, multiplicity) with canonical factors whose
    product equals ``p`` up to a nonzero rational constant.
    """
    if p.is_constant():
        return []
    factors = {}
    rest = content_normalize(p)
    for v in sorted(rest.variables()):
        if v not in rest.variables():
            continue
        for f, k in _yun(rest, v):
            factors[f] = factors.get(f, 0) + k
            rest = exact_quotient(rest, f ** k)
        rest = content_normalize(rest)
        if rest.is_constant():
            break
    out = {}
    for f, k in factors.items():
        if not f.is_constant():
            out[content_normalize(f)] = out.get(content_normalize(f), 0) + k
    return sorted(out.items(), key=lambda t: (t[1], str(t[0])))


def _yun(p, v):
    d = _deriv_index(p, v)
    a = _gcd(p, d)
    b = exact_quotient(p, a)
    c = exact_quotient(d, a)
    dd = c - _deriv_index(b, v)
    i = 1
    out = []
    while not b.is_constant():
        a = _gcd(b, dd)
        b = exact_quotient(b, a)
        if not a.is_constant():
            out.append((content_normalize(a), i))
        c = exact_quotient(dd, a)
        dd = c - _deriv_index(b, v)
        i += 1
    return out


def _deriv_index(p, i):
    out = {}
    for m, c in p.terms.items():
        e = m[i]
        if e:
            out[m[:i] + (e - 1,) + m[i + 1 :]] = c * e
    return Poly._raw(p.ring, out)


# ---------------------------------------------------------------------------
# rational functions in the parameters


class ParamRational:
    """Normalised quotient of two parameter polynomials.

    Numerator and denominator are coprime; the denominator is a primitive
    integer polynomial whose degrevlex leading coefficient is positive.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if den is None:
            den = num.ring.one()
        if num.ring != den.ring:
            raise RingMismatch("numerator and denominator in different rings")
        if num.ring.unknowns or num.ring.field != QQ:
            raise RingMismatch("ParamRational needs a parameters-only ring over QQ")
        if not den:
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = _normalize_fraction(num, den)
        self._hash = None

    @classmethod
    def from_coprime(cls, num, den):
        """Normalise a quotient already known to be in lowest terms (skips the gcd)."""
        ring = num.ring
        if not num:
            return cls._make(ring.zero(), ring.one())
        if den.is_constant():
            return cls._make(num.scale(mpq(1) / den.constant_value()), ring.one())
        s = primitive_scale(den)
        if den.leading_coeff() * s < 0:
            s = -s
        return cls._make(num.scale(s), den.scale(s))

    @classmethod
    def _make(cls, num, den):
        r = cls.__new__(cls)
        r.num = num
        r.den = den
        r._hash = None
        return r

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        return self.num.constant_value() / self.den.constant_value()

    def __bool__(self):
        return bool(self.num.terms)

    def _lift(self, other):
        if isinstance(other, ParamRational):
            return other
        if isinstance(other, Poly):
            return ParamRational(other)
        ring = self.num.ring
        return ParamRational._make(ring.const(other), ring.one())

    def __add__(self, other):
        o = self._lift(other)
        if not o.num:
            return self
        if not self.num:
            return o
        if self.den == o.den:
            if self.den.is_constant():
                return ParamRational._make(self.num + o.num, self.den)
            return ParamRational(self.num + o.num, self.den)
        return ParamRational(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return ParamRational._make(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (Rational, int)):
            if not other:
                return ParamRational._make(self.num.ring.zero(), self.num.ring.one())
            return ParamRational._make(self.num.scale(other), self.den)
        o = self._lift(other)
        if not o.num or not self.num:
            return ParamRational._make(self.num.ring.zero(), self.num.ring.one())
        if self.den.is_constant() and o.den.is_constant():
            return ParamRational._make(self.num * o.num, self.den)
        g1 = _gcd_or_one(self.num, o.den)
        g2 = _gcd_or_one(o.num, self.den)
        num = _q(self.num, g1) * _q(o.num, g2)
        den = _q(self.den, g2) * _q(o.den, g1)
        s = primitive_scale(den)
        if den.leading_coeff() * s < 0:
            s = -s
        return ParamRational._make(num.scale(s), den.scale(s))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        num, den = self.den, self.num
        s = primitive_scale(den)
        if den.leading_coeff() * s < 0:
            s = -s
        return ParamRational._make(num.scale(s), den.scale(s))

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return ParamRational._make(self.num ** k, self.den ** k)

    def __eq__(self, other):
        if isinstance(other, ParamRational):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (Rational, int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def evaluate(self, alpha):
        d = evaluate(self.den, alpha)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the given point")
        return evaluate(self.num, alpha) / d

    def __str__(self):
        if self.den.is_constant():
            return format_poly(self.num)
        return f"({format_poly(self.num)})/({format_poly(self.den)})"

    __repr__ = __str__


def _q(p, g):
    return p if g.is_constant() else exact_quotient(p, g)


def _gcd_or_one(p, q):
    if p.is_constant() or q.is_constant():
        return p.ring.one()
    return _gcd(p, q)


def _normalize_fraction(num, den):
    ring = num.ring
    if not num:
        return ring.zero(), ring.one()
    if den.is_constant():
        return num.scale(mpq(1) / den.constant_value()), ring.one()
    if not num.is_constant():
        g = _gcd(num, den)
        if not g.is_constant():
            num = exact_quotient(num, g)
            den = exact_quotient(den, g)
    if den.is_constant():
        return num.scale(mpq(1) / den.constant_value()), ring.one()
    s = primitive_scale(den)
    if den.leading_coeff() * s < 0:
        s = -s
    return num.scale(s), den.scale(s)


def to_param_poly(p):
    """View ``p`` in K[a, x] as a polynomial in x over QQ(a)."""
    ring = p.ring
    target = ring.fraction_ring()
    pring = ring.param_ring()
    m = ring.m
    groups = {}
    for mono, c in p.terms.items():
        groups.setdefault(mono[m:], {})[mono[:m]] = c
    out = {}
    for xm, t in groups.items():
        out[xm] = ParamRational._make(Poly._raw(pring, t), pring.one())
    return Poly._raw(target, out)


def clear_denominators(pp, ring=None):
    """Turn a polynomial over QQ(a) into one over QQ[a, x].

    Returns ``(poly, L)`` where ``L`` is the lcm of the coefficient
    denominators and ``poly = L * pp``.
    """
    field = pp.ring.field
    if not isinstance(field, RationalFunctionField):
        raise TypeError("expected a polynomial over QQ(a)")
    if ring is None:
        ring = PolyRing(field.params, pp.ring.unknowns)
    pring = ring.param_ring()
    L = pring.one()
    for c in pp.terms.values():
        if not c.den.is_constant():
            L = poly_lcm(L, c.den)
    m = ring.m
    out = {}
    for xm, c in pp.terms.items():
        coeff = exact_quotient(c.num * L, c.den)
        for am, v in coeff.terms.items():
            out[am + xm] = v
    return Poly._raw(ring, out), L


def denominators_lcm(polys):
    """lcm of all coefficient denominators of polynomials over QQ(a), canonical."""
    L = None
    for pp in polys:
        for c in pp.terms.values():
            L = c.den if L is None else poly_lcm(L, c.den)
    if L is None:
        raise ValueError("no coefficients")
    return content_normalize(L)


def canonical(p):
    """Canonical representative up to a nonzero rational scalar."""
    return content_normalize(p)


def same_up_to_scalar(p, q):
    return canonical(p) == canonical(q)


def poly_from_dense(ring, var, coeffs):
    """Univariate helper: coefficients low-to-high in variable ``var``."""
    i = ring.index(var) if isinstance(var, str) else var
    out = {}
    for e, c in enumerate(coeffs):
        c = ring.field.convert(c)
        if c:
            m = [0] * ring.nvars
            m[i] = e
            out[tuple(m)] = c
    return Poly._raw(ring, out)


def dense_coeffs(p, var=None):
    """Low-to-high coefficient list of a univariate polynomial."""
    used = p.variables()
    if var is None:
        if len(used) > 1:
            raise ValueError("polynomial is not univariate")
        i = next(iter(used)) if used else 0
    else:
        i = p.ring.index(var) if isinstance(var, str) else var
        if used - {i}:
            raise ValueError("polynomial involves other variables")
    if not p.terms:
        return []
    deg = max(m[i] for m in p.terms) if p.ring.nvars else 0
    out = [p.ring.field.zero] * (deg + 1)
    for m, c in p.terms.items():
        out[m[i] if p.ring.nvars else 0] = c
    return out


def monomials_up_to(nvars, bounds):
    """All exponent tuples with ``e[i] < bounds[i]``."""
    return [tuple(e) for e in _iproduct(*[range(b) for b in bounds])]


def product(polys, ring):
    return reduce(lambda a, b: a * b, polys, ring.one())
