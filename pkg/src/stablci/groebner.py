"""Buchberger's algorithm, normal forms, staircases and elimination.

Works over any coefficient field exposed through Python operators (``mpq``
or :class:`~stablci.polycore.ParamRational`); a coefficient is zero exactly
when it is falsy.
"""
from __future__ import annotations

import heapq
from math import gcd, isqrt
from dataclasses import dataclass, field
from itertools import product as iproduct

from gmpy2 import mpz, next_prime

from .errors import NotZeroDimensional
from .polycore import (
    DEGREVLEX,
    LEX,
    Poly,
    PolyRing,
    TermOrder,
    change_ring,
    mono_deg,
    mono_div,
    mono_divides,
    mono_lcm,
    mono_mul,
    mpq,
)

INFINITE = float("inf")


@dataclass
class GroebnerBasis:
    order: TermOrder
    gens: list
    staircase: list | None = None
    multiplicity: int | float | None = None
    ring: PolyRing | None = None

    def __post_init__(self):
        if self.ring is None and self.gens:
            self.ring = self.gens[0].ring
        if self.staircase is None:
            T, mu = staircase_of(self.leading_monomials(), self.unknown_indices())
            self.staircase = T
            self.multiplicity = mu

    def unknown_indices(self):
        return list(range(self.ring.m, self.ring.nvars)) if self.ring else []

    def leading_monomials(self):
        return [g.leading_monomial(self.order) for g in self.gens]

    def is_unit(self):
        return any(g.is_constant() and g for g in self.gens)

    def reduce(self, p):
        return normal_form(p, self.gens, self.order)

    def contains(self, p):
        return not self.reduce(p)

    def __len__(self):
        return len(self.gens)

    def __iter__(self):
        return iter(self.gens)


# ---------------------------------------------------------------------------
# reduction


class _Reducer:
    """Divisor lookup for a fixed list of polynomials."""

    def __init__(self, basis, order):
        self.order = order
        self.items = []
        for g in basis:
            if not g:
                continue
            lm = g.leading_monomial(order)
            lc = g.terms[lm]
            tail = [(m, c) for m, c in g.terms.items() if m != lm]
            self.items.append((lm, lc, tail))
        self._cache = {}

    def find(self, m):
        hit = self._cache.get(m, -1)
        if hit != -1:
            return hit
        out = None
        for item in self.items:
            if mono_divides(item[0], m):
                out = item
                break
        self._cache[m] = out
        return out


def _reduce_terms(terms, reducer, order, ring, full=True):
    """Return the remainder (as a term dict) of ``terms`` modulo the reducer."""
    rem = dict(terms)
    if not rem:
        return {}
    neg = order.neg_key
    heap = [(neg(m), m) for m in rem]
    heapq.heapify(heap)
    queued = set(rem)
    out = {}
    while heap:
        _, m = heapq.heappop(heap)
        queued.discard(m)
        c = rem.pop(m, None)
        if c is None:
            continue
        item = reducer.find(m)
        if item is None:
            out[m] = c
            if not full:
                out.update(rem)
                return out
            continue
        lm, lc, tail = item
        f = c / lc
        t = mono_div(m, lm)
        for tm, tc in tail:
            nm = tuple([a + b for a, b in zip(tm, t)])
            v = rem.get(nm)
            if v is None:
                rem[nm] = -(f * tc)
                if nm not in queued:
                    queued.add(nm)
                    heapq.heappush(heap, (neg(nm), nm))
            else:
                v = v - f * tc
                if v:
                    rem[nm] = v
                else:
                    del rem[nm]
    return out


def normal_form(p, basis, order=DEGREVLEX):
    """Fully reduced remainder of ``p`` by ``basis``."""
    if not basis:
        raise ValueError("normal_form needs a nonempty basis")
    reducer = _Reducer(basis, order)
    return Poly._raw(p.ring, _reduce_terms(p.terms, reducer, order, p.ring))


def s_polynomial(f, g, order=DEGREVLEX):
    fm, fc = f.leading_term(order)
    gm, gc = g.leading_term(order)
    L = mono_lcm(fm, gm)
    return f.mul_monomial(mono_div(L, fm), 1 / fc if not hasattr(fc, "inverse") else fc.inverse()) - g.mul_monomial(
        mono_div(L, gm), 1 / gc if not hasattr(gc, "inverse") else gc.inverse()
    )


def _monic(p, order):
    lc = p.leading_coeff(order)
    inv = lc.inverse() if hasattr(lc, "inverse") else 1 / lc
    return Poly._raw(p.ring, {m: c * inv for m, c in p.terms.items()})


# ---------------------------------------------------------------------------
# Buchberger


def _coprime(a, b):
    return all(not (x and y) for x, y in zip(a, b))


def buchberger(gens, order=DEGREVLEX):
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    gens = [g for g in gens if g]
    if not gens:
        raise ValueError("buchberger needs at least one nonzero generator")
    ring = gens[0].ring
    polys = []  # all basis elements ever added
    lms = []
    sugar = []
    active = []  # indices currently in G
    pairs = []  # heap of (sugar, i, j, lcm)

    def add(h, s):
        k = len(polys)
        polys.append(h)
        lm = h.leading_monomial(order)
        lms.append(lm)
        sugar.append(s)
        update(k)

    def update(k):
        nonlocal active, pairs
        hk = lms[k]
        cands = []
        for i in active:
            L = mono_lcm(lms[i], hk)
            s = max(sugar[i] + mono_deg(L) - mono_deg(lms[i]), sugar[k] + mono_deg(L) - mono_deg(hk))
            cands.append((i, L, s, _coprime(lms[i], hk)))
        # chain criterion among the new pairs
        kept = []
        for idx, (i, L, s, cop) in enumerate(cands):
            if cop:
                kept.append((i, L, s, cop))
                continue
            dominated = False
            for jdx, (j, L2, _, _) in enumerate(cands):
                if jdx == idx:
                    continue
                if mono_divides(L2, L) and (L2 != L or jdx < idx):
                    dominated = True
                    break
            if not dominated:
                kept.append((i, L, s, cop))
        # product criterion: drop coprime pairs after using them for the chain test
        new_pairs = [(s, i, k, L) for (i, L, s, cop) in kept if not cop]
        # old pairs made redundant by the new element
        filtered = []
        for s, i, j, L in pairs:
            if (
                mono_divides(hk, L)
                and mono_lcm(lms[i], hk) != L
                and mono_lcm(lms[j], hk) != L
            ):
                continue
            filtered.append((s, i, j, L))
        filtered.extend(new_pairs)
        heapq.heapify(filtered)
        pairs = filtered
        active = [i for i in active if not mono_divides(hk, lms[i])] + [k]

    start = sorted(
        (_monic(g, order) for g in gens),
        key=lambda g: order.key(g.leading_monomial(order)),
    )
    for g in start:
        red = normal_form(g, [polys[i] for i in active], order) if active else g
        if red:
            add(_monic(red, order), g.total_degree())
            if red.is_constant():
                return _finish(ring, order, [ring.one()])

    while pairs:
        s, i, j, L = heapq.heappop(pairs)
        sp = s_polynomial(polys[i], polys[j], order)
        if not sp:
            continue
        reducer = _Reducer([polys[k] for k in active], order)
        h = Poly._raw(ring, _reduce_terms(sp.terms, reducer, order, ring))
        if not h:
            continue
        h = _monic(h, order)
        if h.is_constant():
            return _finish(ring, order, [ring.one()])
        add(h, s)

    return _finish(ring, order, [polys[i] for i in active])


def _finish(ring, order, basis):
    # minimal basis
    lm = [g.leading_monomial(order) for g in basis]
    keep = []
    for i, g in enumerate(basis):
        redundant = False
        for j in range(len(basis)):
            if j == i:
                continue
            if mono_divides(lm[j], lm[i]) and (lm[j] != lm[i] or j < i):
                redundant = True
                break
        if not redundant:
            keep.append(g)
    # interreduce
    reduced = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1 :]
        if others:
            reducer = _Reducer(others, order)
            lmg = g.leading_monomial(order)
            tail = {m: c for m, c in g.terms.items() if m != lmg}
            red = _reduce_terms(tail, reducer, order, ring)
            red[lmg] = g.terms[lmg]
            g = Poly._raw(ring, red)
        reduced.append(_monic(g, order))
    reduced.sort(key=lambda g: order.key(g.leading_monomial(order)), reverse=True)
    return GroebnerBasis(order=order, gens=reduced, ring=ring)


# ---------------------------------------------------------------------------
# staircase


def staircase_of(leading, unknowns):
    """Standard monomials in the given variable indices.

    Returns ``(T, mu)``; ``T`` is None and ``mu`` is INFINITE when some
    unknown has no pure power among the leading monomials.  Leading
    monomials involving other variables are ignored.
    """
    if not leading:
        return None, INFINITE
    nv = len(leading[0])
    unk = list(unknowns)
    others = [i for i in range(nv) if i not in unk]
    lead = [m for m in leading if not any(m[i] for i in others)]
    if any(not any(m) for m in lead):
        return [], 0
    bounds = []
    for i in unk:
        pure = [m[i] for m in lead if m[i] and all(m[k] == 0 for k in unk if k != i)]
        if not pure:
            return None, INFINITE
        bounds.append(min(pure))
    T = []
    for e in iproduct(*[range(b) for b in bounds]):
        mono = [0] * nv
        for i, v in zip(unk, e):
            mono[i] = v
        mono = tuple(mono)
        if not any(mono_divides(m, mono) for m in lead):
            T.append(mono)
    T.sort(key=lambda m: DEGREVLEX.key(m))
    return T, len(T)


def staircase(gb):
    """(T, mu) of a reduced basis; mu is INFINITE for positive dimension."""
    return gb.staircase, gb.multiplicity


def is_zero_dimensional(gb):
    return gb.multiplicity != INFINITE


# ---------------------------------------------------------------------------
# verification helpers


def verify_groebner(gb):
    """Recheck the Buchberger criterion directly (all S-polynomials reduce to 0)."""
    gens = gb.gens
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if normal_form(s_polynomial(gens[i], gens[j], gb.order), gens, gb.order):
                return False
    return True


def verify_reduced(gb):
    order = gb.order
    for i, g in enumerate(gb.gens):
        lc = g.leading_coeff(order)
        if lc != 1:
            return False
        lms = [h.leading_monomial(order) for k, h in enumerate(gb.gens) if k != i]
        for m in g.terms:
            if any(mono_divides(l, m) for l in lms):
                return False
    return True


# ---------------------------------------------------------------------------
# elimination


def elimination_ideal(gens, drop):
    """Generators of the ideal intersected with the subring without ``drop``.

    ``drop`` holds variable names or indices.  Parameters are treated as
    ordinary variables here; the result is a reduced basis of the
    elimination ideal (empty list for the zero ideal).
    """
    gens = [g for g in gens if g]
    if not gens:
        return []
    ring = gens[0].ring
    flat = ring.all_variables_ring() if ring.m else ring
    idx = sorted({ring.index(d) if isinstance(d, str) else d for d in drop})
    order = TermOrder.elimination(idx, ring.nvars)
    gb = buchberger([change_ring(g, flat) for g in gens], order)
    out = [g for g in gb.gens if not g.involves(idx)]
    return [change_ring(g, ring) for g in out]


def eliminate_to_univariate(gens, keep):
    """Monic generator of ``I ∩ K[keep]`` for a zero-dimensional ideal.

    Computes a degrevlex basis, then the minimal polynomial of the kept
    variable in the finite-dimensional quotient by linear algebra.  Raises
    NotZeroDimensional when the quotient is infinite-dimensional.
    """

    gens = [g for g in gens if g]
    ring = gens[0].ring
    flat = ring.all_variables_ring() if ring.m else ring
    k = ring.index(keep) if isinstance(keep, str) else keep
    gb = buchberger([change_ring(g, flat) for g in gens], DEGREVLEX)
    if gb.is_unit():
        return ring.one()
    T, mu = staircase_of(gb.leading_monomials(), range(flat.nvars))
    if mu == INFINITE:
        raise NotZeroDimensional("ideal is not zero-dimensional")
    pos = {m: i for i, m in enumerate(T)}
    reducer = _Reducer(gb.gens, DEGREVLEX)
    var = flat.gen(k)
    rows = []  # echelon rows: (pivot, vector, combination)
    power = flat.one()
    for d in range(mu + 1):
        vec = [mpq(0)] * mu
        for m, c in power.terms.items():
            vec[pos[m]] = c
        comb = {d: mpq(1)}
        for piv, rv, rc in rows:
            f = vec[piv]
            if f:
                for t in range(mu):
                    if rv[t]:
                        vec[t] -= f * rv[t]
                for e, c in rc.items():
                    comb[e] = comb.get(e, mpq(0)) - f * c
        piv = next((t for t in range(mu) if vec[t]), None)
        if piv is None:
            coeffs = {e: c for e, c in comb.items() if c}
            out = {}
            for e, c in coeffs.items():
                m = [0] * ring.nvars
                m[k] = e
                out[tuple(m)] = c
            return Poly._raw(ring, out).monic(LEX)
        inv = 1 / vec[piv]
        vec = [v * inv for v in vec]
        comb = {e: c * inv for e, c in comb.items()}
        rows.append((piv, vec, comb))
        nxt = power * var
        power = Poly._raw(flat, _reduce_terms(nxt.terms, reducer, DEGREVLEX, flat))
    raise AssertionError("minimal polynomial degree exceeds quotient dimension")


# ---------------------------------------------------------------------------
# change of order for zero-dimensional ideals


def _field_zero(ring):
    return ring.field.zero


def multiplication_vectors(gb):
    """Normal forms of x_i * t for each unknown x_i and standard monomial t.

    Returns ``(T, index, mult)`` where ``mult[i][k]`` is a dict from staircase
    position to coefficient.
    """
    if gb.multiplicity == INFINITE:
        raise NotZeroDimensional("change of order needs a zero-dimensional ideal")
    ring = gb.ring
    T = list(gb.staircase)
    pos = {m: k for k, m in enumerate(T)}
    reducer = _Reducer(gb.gens, gb.order)
    mult = []
    for i in range(ring.m, ring.nvars):
        e = tuple(1 if k == i else 0 for k in range(ring.nvars))
        row = []
        for t in T:
            m = mono_mul(t, e)
            if m in pos:
                row.append({pos[m]: ring.field.one})
            else:
                red = _reduce_terms({m: ring.field.one}, reducer, gb.order, ring)
                row.append({pos[mm]: c for mm, c in red.items()})
        mult.append(row)
    return T, pos, mult


def fglm(gb, order):
    """Reduced basis of the same zero-dimensional ideal for another term order."""
    ring = gb.ring
    if gb.is_unit():
        return GroebnerBasis(order=order, gens=[ring.one()], ring=ring)
    T, pos, mult = multiplication_vectors(gb)
    mu = len(T)
    zero = ring.field.zero
    one = ring.field.one
    nvars = ring.nvars
    unk = list(range(ring.m, nvars))

    def apply(i, vec):
        out = {}
        row = mult[i]
        for k, c in vec.items():
            for j, v in row[k].items():
                w = out.get(j)
                w = c * v if w is None else w + c * v
                if w:
                    out[j] = w
                else:
                    out.pop(j, None)
        return out

    one_mono = (0,) * nvars
    start = {pos[one_mono]: one} if one_mono in pos else {}
    echelon = []  # (pivot, vec, combo) with vec[pivot] == 1
    staircase = []  # new standard monomials
    vectors = {}
    new_gens = []
    lead = []
    queue = {one_mono: start}
    while queue:
        m = min(queue, key=order.key)
        vec = queue.pop(m)
        if any(mono_divides(l, m) for l in lead):
            continue
        # reduce vec against echelon, tracking the combination of staircase monomials
        v = dict(vec)
        combo = {}
        for piv, ev, ec in echelon:
            c = v.get(piv)
            if c:
                for j, w in ev.items():
                    x = v.get(j)
                    x = -(c * w) if x is None else x - c * w
                    if x:
                        v[j] = x
                    else:
                        v.pop(j, None)
                for t, w in ec.items():
                    x = combo.get(t)
                    x = -(c * w) if x is None else x - c * w
                    if x:
                        combo[t] = x
                    else:
                        combo.pop(t, None)
        if not v:
            terms = {m: one}
            for t, c in combo.items():
                terms[t] = terms.get(t, zero) + c
            new_gens.append(Poly._raw(ring, {k: c for k, c in terms.items() if c}))
            lead.append(m)
            continue
        piv = min(v, key=lambda j: j)
        inv = one / v[piv]
        v = {j: w * inv for j, w in v.items()}
        combo = {t: w * inv for t, w in combo.items()}
        combo[m] = combo.get(m, zero) + inv
        # keep echelon fully reduced on the pivot column
        for idx, (p2, ev, ec) in enumerate(echelon):
            c = ev.get(piv)
            if c:
                nev = dict(ev)
                for j, w in v.items():
                    x = nev.get(j)
                    x = -(c * w) if x is None else x - c * w
                    if x:
                        nev[j] = x
                    else:
                        nev.pop(j, None)
                nec = dict(ec)
                for t, w in combo.items():
                    x = nec.get(t)
                    x = -(c * w) if x is None else x - c * w
                    if x:
                        nec[t] = x
                    else:
                        nec.pop(t, None)
                echelon[idx] = (p2, nev, nec)
        echelon.append((piv, v, combo))
        staircase.append(m)
        vectors[m] = vec
        if len(staircase) > mu:
            raise AssertionError("change of order produced too many standard monomials")
        for k, i in enumerate(unk):
            nm = tuple(e + (1 if j == i else 0) for j, e in enumerate(m))
            if nm not in queue and nm not in vectors:
                queue[nm] = apply(k, vec)
    # express new generators in terms of monomials: combos refer to staircase monomials
    new_gens = [_monic(g, order) for g in new_gens]
    return _finish(ring, order, new_gens)


def groebner_basis(gens, order=DEGREVLEX):
    """Reduced basis for ``order``; zero-dimensional ideals go through degrevlex and FGLM."""
    if order == DEGREVLEX:
        return buchberger(gens, order)
    drl = buchberger(gens, DEGREVLEX)
    if drl.multiplicity == INFINITE:
        return buchberger(gens, order)
    return fglm(drl, order)


# ---------------------------------------------------------------------------
# one-parameter bases rebuilt from specialised fibers


def _mod_interpolate(xs, ys, p):
    """Dense coefficients mod p (low to high) of the interpolating polynomial."""
    n = len(xs)
    dd = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) * pow(xs[i] - xs[i - j], -1, p) % p
    out = [dd[-1]]
    for i in range(n - 2, -1, -1):
        nxt = [0] * (len(out) + 1)
        for k, c in enumerate(out):
            nxt[k + 1] += c
            nxt[k] -= c * xs[i]
        nxt[0] += dd[i]
        out = [c % p for c in nxt]
    while out and not out[-1]:
        out.pop()
    return out


def _mod_divmod(a, b, p):
    r = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(r) >= len(b) and r:
        c = r[-1] * inv % p
        k = len(r) - len(b)
        q[k] = c
        for i, v in enumerate(b):
            r[k + i] = (r[k + i] - c * v) % p
        while r and not r[-1]:
            r.pop()
    return q, r


def _mod_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            out[i + j] += u * v
    out = [c % p for c in out]
    while out and not out[-1]:
        out.pop()
    return out


def _mod_sub(a, b, p):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    while out and not out[-1]:
        out.pop()
    return out


def _mod_eval(c, x, p):
    acc = 0
    for v in reversed(c):
        acc = (acc * x + v) % p
    return acc


def _mod_rational_function(xs, ys, p):
    """(num, den) mod p with den monic and deg num < len(xs)/2, or None."""
    k = len(xs)
    P = _mod_interpolate(xs, ys, p)
    M = [1]
    for x in xs:
        M = _mod_mul(M, [-x % p, 1], p)
    r0, r1 = M, P
    t0, t1 = [], [1]
    while r1 and len(r1) - 1 >= k // 2:
        q, r = _mod_divmod(r0, r1, p)
        r0, r1 = r1, r
        t0, t1 = t1, _mod_sub(t0, _mod_mul(q, t1, p), p)
    if not t1:
        return None
    # lowest terms mod p implies lowest terms over QQ (den stays monic)
    a, b = t1, r1
    while b:
        a, b = b, _mod_divmod(a, b, p)[1]
    if len(a) > 1:
        return None
    inv = pow(t1[-1], -1, p)
    return [c * inv % p for c in r1], [c * inv % p for c in t1]


def _int_rational(u, modulus):
    """a/b congruent to u modulo ``modulus`` with |a|, |b| <= sqrt(modulus/2), or None."""
    bound = isqrt(modulus // 2)
    r0, r1 = modulus, u % modulus
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound or gcd(r1, t1) != 1:
        return None
    return mpq(r1, t1)


def _residue(v, p):
    den = int(v.denominator) % p
    if not den:
        return None
    return int(v.numerator) * pow(den, -1, p) % p


def _uni_eval(c, x):
    acc = mpq(0)
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _reconstruct_coefficient(bx, vals, tx, tvals, max_primes=400):
    """Rational function through (bx, vals) confirmed exactly on (tx, tvals), or None."""
    prime = mpz(2) ** 62
    shape = None
    residues = None
    modulus = mpz(1)
    last = None
    for _ in range(max_primes):
        prime = int(next_prime(prime))
        ys = [_residue(v, prime) for v in vals]
        if any(y is None for y in ys) or any(_residue(v, prime) is None for v in tvals):
            continue
        res = _mod_rational_function([int(x) % prime for x in bx], ys, prime)
        if res is None:
            continue
        num, den = res
        if any(_mod_eval(den, int(x) % prime, prime) == 0 for x in tx):
            continue
        ok = all(
            _mod_eval(num, int(x) % prime, prime) * pow(_mod_eval(den, int(x) % prime, prime), -1, prime) % prime
            == _residue(v, prime)
            for x, v in zip(tx, tvals)
        )
        if not ok:
            if shape is None:
                return None  # too few points for this coefficient
            continue
        key = (len(num), len(den))
        if shape is None:
            shape = key
            residues = num + den
            modulus = mpz(prime)
        elif key != shape:
            continue
        else:
            combined = []
            inv = int(pow(modulus, -1, prime))
            for old, new in zip(residues, num + den):
                combined.append(old + modulus * ((new - old) * inv % prime))
            residues = combined
            modulus *= prime
        cand = [_int_rational(mpz(r), modulus) for r in residues]
        if any(c is None for c in cand):
            continue
        if cand != last:
            last = cand
            continue
        n_num = shape[0]
        N, D = cand[:n_num], cand[n_num:]
        if all(_uni_eval(D, x) and _uni_eval(N, x) / _uni_eval(D, x) == v for x, v in zip(tx, tvals)):
            return N, D
    return None


def _sample_points():
    k = 1
    while True:
        yield mpq(k)
        yield mpq(-k)
        k += 1


def _fiber_shape(gb):
    return tuple((g.leading_monomial(gb.order), tuple(sorted(g.terms, key=gb.order.key))) for g in gb.gens)


def interpolated_basis(gens, order=DEGREVLEX, checks=3, max_points=1024):
    """Reduced basis over QQ(a) of a one-parameter family, rebuilt from fibers.

    Fibers at small integer parameter values are reduced over QQ, and each
    coefficient is recovered as a rational function of the parameter by
    multimodular rational interpolation.  A coefficient is accepted only
    when it matches, exactly over QQ, ``checks`` fibers not used to build it.
    """
    from .polycore import ParamRational, specialize_params

    ring = gens[0].ring
    if ring.m != 1:
        raise ValueError("interpolated_basis needs exactly one parameter")
    target = ring.fraction_ring()
    pring = ring.param_ring()
    pts = _sample_points()
    xs, fibers, shapes = [], [], {}

    def draw(count):
        while len(xs) < count:
            al = next(pts)
            gb = groebner_basis([specialize_params(g, [al]) for g in gens], order)
            shape = _fiber_shape(gb)
            shapes.setdefault(shape, []).append(len(fibers))
            xs.append(al)
            fibers.append((shape, gb))

    def to_param(dense):
        return Poly._raw(pring, {(i,): c for i, c in enumerate(dense) if c})

    cache = {}
    need = 16
    while need <= max_points:
        draw(need + checks)
        generic = max(shapes, key=lambda s: len(shapes[s]))
        used = [i for i, (s, _) in enumerate(fibers) if s == generic]
        if len(used) < need // 2 + checks:
            need *= 2
            continue
        build, test = used[: len(used) - checks], used[len(used) - checks :]
        bx = [xs[i] for i in build]
        tx = [xs[i] for i in test]
        out = []
        for gi, (lead, support) in enumerate(generic):
            terms = {}
            for mono in support:
                if (gi, mono) not in cache:
                    vals = [fibers[i][1].gens[gi].terms[mono] for i in build]
                    tvals = [fibers[i][1].gens[gi].terms[mono] for i in test]
                    rec = _reconstruct_coefficient(bx, vals, tx, tvals)
                    if rec is None:
                        break
                    cache[(gi, mono)] = ParamRational.from_coprime(to_param(rec[0]), to_param(rec[1]))
                terms[mono] = cache[(gi, mono)]
            else:
                out.append(Poly._raw(target, terms))
                continue
            break
        if len(out) == len(generic):
            return GroebnerBasis(order=order, gens=out, ring=target)
        need *= 2
    raise RuntimeError(f"coefficients did not stabilise within {max_points} fibers")
