from pathlib import Path

import pytest
import sympy as sp
from gmpy2 import mpq

from stablci.polycore import PolyRing

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"


def make_ring(params, unknowns):
    """Ring plus a name -> generator map."""
    R = PolyRing(tuple(params), tuple(unknowns))
    return R, {name: R.gen(name) for name in R.gens}


def to_sympy(p, symbols=None):
    """Independent sympy expression for an exact polynomial."""
    names = p.ring.gens
    syms = symbols or sp.symbols(names) if names else ()
    if names and not isinstance(syms, (list, tuple)):
        syms = (syms,)
    expr = sp.Integer(0)
    for mono, c in p.terms.items():
        t = sp.Rational(int(c.numerator), int(c.denominator))
        for s, e in zip(syms, mono):
            t *= s**e
        expr += t
    return expr


def q(text):
    return mpq(text)


@pytest.fixture
def systems_dir():
    return SYSTEMS
