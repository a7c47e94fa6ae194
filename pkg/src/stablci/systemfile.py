"""Text format for polynomial systems and families.

::

    # comment
    params a;
    vars x, y;
    sys: x*y - 6; x^2 + y^2 - 13;
    eps: a*y^2; a*x;          # optional perturbation template
    base: 0;                   # optional base parameter point
    roots: (2, 3); (3, 2);     # optional known roots

The family is ``sys + eps``; with no ``eps`` section it is ``sys`` itself.
Coefficients are exact: ``0.25`` is 1/4 and ``3/4`` is a fraction.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ArityMismatch, ParseError, UndeclaredIdentifier
from .family import Family
from .polycore import DEGREVLEX, PolyRing, compose_unknowns, evaluate, format_poly, mpq, specialize_params

KEYWORDS = ("params", "vars", "sys", "eps", "base", "roots")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),;:])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    out = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, s, line, col))
            col += len(s)
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0
        self.ring = None

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def take(self, text=None, kind=None):
        t = self.tok
        if text is not None and t.text != text:
            found = t.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        if kind is not None and t.kind != kind:
            found = t.text or "end of input"
            raise self.error(f"expected {kind}, found {found!r}")
        self.i += 1
        return t

    def at(self, text):
        return self.tok.text == text and self.tok.kind == "op"

    def at_keyword(self):
        return self.tok.kind == "id" and self.tok.text in KEYWORDS

    # -- sections ------------------------------------------------------------
    def parse_file(self):
        sections = {}
        while self.tok.kind != "eof":
            if not self.at_keyword():
                raise self.error(f"expected a section keyword, found {self.tok.text!r}")
            kw = self.take().text
            if kw in sections:
                raise self.error(f"duplicate section {kw!r}", self.toks[self.i - 1])
            if kw in ("params", "vars"):
                sections[kw] = self.parse_names()
                self._ensure_ring(sections)
            else:
                self._ensure_ring(sections)
                self.take(":")
                if kw in ("sys", "eps"):
                    sections[kw] = self.parse_poly_list()
                elif kw == "base":
                    sections[kw] = self.parse_values()
                else:
                    sections[kw] = self.parse_points()
        return sections

    def _ensure_ring(self, sections):
        if self.ring is None or (
            self.ring.params != tuple(sections.get("params", ()))
            or self.ring.unknowns != tuple(sections.get("vars", ()))
        ):
            try:
                self.ring = PolyRing(tuple(sections.get("params", ())), tuple(sections.get("vars", ())))
            except ValueError as exc:
                raise self.error(str(exc), self.toks[self.i - 1]) from None

    def parse_names(self):
        names = [self.take(kind="id").text]
        while not self.at(";"):
            if self.at(","):
                self.take(",")
            t = self.take(kind="id")
            if t.text in KEYWORDS:
                raise self.error(f"{t.text!r} is reserved", t)
            names.append(t.text)
        self.take(";")
        for n in names:
            if n in KEYWORDS:
                raise self.error(f"{n!r} is reserved")
        return names

    def parse_poly_list(self):
        out = []
        while self.tok.kind != "eof" and not self.at_keyword():
            out.append(self.parse_expr())
            self.take(";")
        if not out:
            raise self.error("expected at least one polynomial")
        return out

    def parse_values(self):
        vals = [self.parse_constant()]
        while self.at(","):
            self.take(",")
            vals.append(self.parse_constant())
        self.take(";")
        return vals

    def parse_points(self):
        pts = []
        while self.at("("):
            self.take("(")
            pt = [self.parse_constant()]
            while self.at(","):
                self.take(",")
                pt.append(self.parse_constant())
            self.take(")")
            pts.append(pt)
            if self.at(";"):
                self.take(";")
        if not pts:
            raise self.error("expected a point such as (1, 2)")
        return pts

    def parse_constant(self):
        t = self.tok
        p = self.parse_expr()
        if not p.is_constant():
            raise self.error("expected a constant", t)
        return p.constant_value()

    # -- expressions -----------------------------------------------------------
    def parse_expr(self):
        if self.tok.kind == "eof":
            raise self.error("unexpected end of input")
        p = self.parse_term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            q = self.parse_term()
            p = p + q if op == "+" else p - q
        return p

    def parse_term(self):
        p = self.parse_unary()
        while self.at("*") or self.at("/"):
            op = self.take()
            if op.text == "*" and self.at("*"):
                raise self.error("'**' is not an operator; use '^'")
            q = self.parse_unary()
            if op.text == "*":
                p = p * q
            else:
                if not q.is_constant():
                    raise self.error("division by a non-constant", op)
                c = q.constant_value()
                if not c:
                    raise self.error("division by zero", op)
                p = p.scale(1 / c)
        return p

    def parse_unary(self):
        if self.at("-"):
            self.take()
            return -self.parse_unary()
        if self.at("+"):
            self.take()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.at("^"):
            self.take()
            t = self.take(kind="num")
            if not t.text.isdigit():
                raise self.error("exponent must be a non-negative integer", t)
            base = base ** int(t.text)
        return base

    def parse_atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return self.ring.const(mpq(t.text))
        if t.kind == "id":
            if t.text in KEYWORDS:
                raise self.error(f"unexpected keyword {t.text!r}")
            self.take()
            if t.text not in self.ring.gens:
                raise UndeclaredIdentifier(f"undeclared identifier {t.text!r}", t.line, t.col)
            return self.ring.gen(t.text)
        if self.at("("):
            self.take()
            p = self.parse_expr()
            self.take(")")
            return p
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}")


@dataclass
class SystemFile:
    ring: PolyRing
    system: list
    eps: list | None = None
    base_point: list | None = None
    roots: list = field(default_factory=list)

    @property
    def params(self):
        return self.ring.params

    @property
    def unknowns(self):
        return self.ring.unknowns

    def family_gens(self):
        if self.eps is None:
            return list(self.system)
        return [s + e for s, e in zip(self.system, self.eps)]

    def family(self):
        return Family(self.ring, self.family_gens(), tuple(self.base_point) if self.base_point else None)

    def base(self):
        if self.base_point is not None:
            return list(self.base_point)
        return [mpq(0)] * self.ring.m

    def seed(self):
        """The system at the base parameter point, in the unknowns-only ring."""
        return [specialize_params(g, self.base()) for g in self.family_gens()]

    def fiber(self, alpha):
        return [specialize_params(g, alpha) for g in self.family_gens()]

    def perturbation(self, alpha):
        """ε(α) = F(α, x) - F(base, x)."""
        return [a - b for a, b in zip(self.fiber(alpha), self.seed())]

    def to_text(self, order=DEGREVLEX):
        lines = []
        if self.params:
            lines.append("params " + ", ".join(self.params) + ";")
        lines.append("vars " + ", ".join(self.unknowns) + ";")
        lines.append("sys: " + "; ".join(format_poly(g, order) for g in self.system) + ";")
        if self.eps is not None:
            lines.append("eps: " + "; ".join(format_poly(g, order) for g in self.eps) + ";")
        if self.base_point is not None:
            lines.append("base: " + ", ".join(str(v) for v in self.base_point) + ";")
        if self.roots:
            lines.append("roots: " + "; ".join("(" + ", ".join(str(v) for v in r) + ")" for r in self.roots) + ";")
        return "\n".join(lines) + "\n"


def parse_system(text):
    parser = _Parser(tokenize(text))
    sec = parser.parse_file()
    if "vars" not in sec:
        raise ParseError("missing 'vars' section")
    if "sys" not in sec:
        raise ParseError("missing 'sys' section")
    ring = parser.ring
    eps = sec.get("eps")
    if eps is not None and len(eps) != len(sec["sys"]):
        raise ParseError(f"'eps' has {len(eps)} polynomials, 'sys' has {len(sec['sys'])}")
    base = sec.get("base")
    if base is not None and len(base) != ring.m:
        raise ParseError(f"'base' has {len(base)} values, expected {ring.m}")
    roots = sec.get("roots", [])
    for r in roots:
        if len(r) != ring.n:
            raise ParseError(f"root {r} has {len(r)} coordinates, expected {ring.n}")
    return SystemFile(ring=ring, system=sec["sys"], eps=eps, base_point=base, roots=roots)


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def parse_poly(text, ring):
    """Parse one polynomial expression over ``ring``."""
    parser = _Parser(tokenize(text))
    parser.ring = ring
    p = parser.parse_expr()
    if parser.tok.kind != "eof":
        raise parser.error(f"unexpected {parser.tok.text!r}")
    return p


def substitute_named(expr_text, values, target_ring):
    """Evaluate an expression in named polynomials, e.g. ``"d*h"``."""
    names = tuple(values)
    ring = PolyRing((), names)
    p = parse_poly(expr_text, ring)
    lifted = PolyRing(target_ring.gens, names)
    images = [_lift(values[n], lifted) for n in names]
    out = compose_unknowns(_shift(p, lifted), images)
    if out.involves(range(lifted.m, lifted.nvars)):
        raise ArityMismatch("substitution left free names")
    from .polycore import Poly

    return Poly._raw(target_ring, {m[: lifted.m]: c for m, c in out.terms.items()})


def _lift(p, ring):
    from .polycore import Poly

    pad = (0,) * (ring.nvars - p.ring.nvars)
    return Poly._raw(ring, {m + pad: c for m, c in p.terms.items()})


def _shift(p, ring):
    from .polycore import Poly

    pad = (0,) * ring.m
    return Poly._raw(ring, {pad + m: c for m, c in p.terms.items()})
