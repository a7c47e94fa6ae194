"""Seeded perturbation experiments comparing two representations of one root."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conditioning import (
    PerturbationSetup,
    admissibility_norm_check,
    local_condition_number,
    norm_label,
    relative_error_bound,
)
from .errors import StablciError
from .family import optimal_locus
from .numeric import newton_refine, vector_norm
from .polycore import LEX, dense_coeffs, mpq, to_rational
from .realcount import nearest_roots

CSV_COLUMNS = ("alpha", "relerr_f", "relerr_g", "ub_f", "ub_g", "discarded")


def thread_count():
    env = os.environ.get("STABLCI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass
class ExperimentSpec:
    family_f: object  # SystemFile
    family_g: object
    p: list
    interval: tuple
    samples: int = 100
    seed: int = 0
    norm: object = 2

    def __post_init__(self):
        lo, hi = (to_rational(v) for v in self.interval)
        if not lo < hi:
            raise ValueError("interval must satisfy lo < hi")
        self.interval = (lo, hi)
        if self.family_f.ring.m != 1 or self.family_g.ring.m != 1:
            raise ValueError("experiments need one-parameter families")
        if self.samples < 0:
            raise ValueError("samples must be non-negative")


@dataclass
class SampleResult:
    index: int
    alpha: float
    relerr_f: float = math.nan
    relerr_g: float = math.nan
    ub_f: float = math.nan
    ub_g: float = math.nan
    discarded: bool = False
    reason: str = ""


@dataclass
class ExperimentReport:
    rows: list
    kappa_f: float
    kappa_g: float
    interval: tuple
    norm: str
    seed: int
    means: dict = field(default_factory=dict)

    @property
    def discarded(self):
        return sum(1 for r in self.rows if r.discarded)

    def ub_undefined(self, side):
        """Kept samples whose bound for ``side`` ("f" or "g") failed the norm criterion."""
        return sum(1 for r in self.rows if not r.discarded and math.isnan(getattr(r, "ub_" + side)))

    @property
    def discard_fraction(self):
        return self.discarded / len(self.rows) if self.rows else 0.0

    def to_dict(self):
        return {
            "seed": self.seed,
            "norm": self.norm,
            "interval": [str(v) for v in self.interval],
            "samples": len(self.rows),
            "discarded": self.discarded,
            "ub_undefined": {"f": self.ub_undefined("f"), "g": self.ub_undefined("g")},
            "kappa_f": self.kappa_f,
            "kappa_g": self.kappa_g,
            "means": self.means,
        }

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [repr(r.alpha), repr(r.relerr_f), repr(r.relerr_g), repr(r.ub_f), repr(r.ub_g), int(r.discarded)]
            )
        return buf.getvalue()

    def table(self):
        m = self.means
        lines = [
            f"{'kappa(f,p)':>12} | {'UB(f,p)':>10} | {'|q-p|/|p|':>12}",
            f"{self.kappa_f:12.6g} | {m.get('ub_f', math.nan):10.4g} | {m.get('relerr_f', math.nan):12.6g}",
            "-" * 40,
            f"{'kappa(g,p)':>12} | {'UB(g,p)':>10} | {'|r-p|/|p|':>12}",
            f"{self.kappa_g:12.6g} | {m.get('ub_g', math.nan):10.4g} | {m.get('relerr_g', math.nan):12.6g}",
        ]
        return "\n".join(lines)


def sample_alpha(seed, index, lo, hi):
    """Uniform draw on the open interval (lo, hi) from the sub-seed (seed, index)."""
    rng = np.random.default_rng([seed, index])
    lo, hi = float(lo), float(hi)
    while True:
        a = lo + (hi - lo) * rng.random()
        if lo < a < hi:
            return a


def _one_side(sysfile, seed_sys, alpha_q, p, norm):
    """(true relative error, UB1, note); UB1 is NaN when the norm criterion fails."""
    eps = sysfile.perturbation([alpha_q])
    setup = PerturbationSetup(seed_sys, eps, p, norm)
    q = newton_refine(setup.perturbed, p)
    rel = vector_norm(q - setup.p, 2) / vector_norm(setup.p, 2)
    if not math.isfinite(rel):
        raise ArithmeticError("non-finite perturbed root")
    # tau >= 1 only voids the bound; the perturbed root still exists and is measured
    tau, ok = admissibility_norm_check(setup)
    if not ok:
        return rel, math.nan, f"tau = {tau:.4g} >= 1"
    return rel, relative_error_bound(setup), ""


def run_sample(spec, index, seeds=None):
    lo, hi = spec.interval
    alpha = sample_alpha(spec.seed, index, lo, hi)
    out = SampleResult(index=index, alpha=alpha)
    aq = mpq(alpha)
    f_sys, g_sys = seeds if seeds else (spec.family_f.seed(), spec.family_g.seed())
    p = np.array([float(v) for v in spec.p])
    try:
        out.relerr_f, out.ub_f, note_f = _one_side(spec.family_f, f_sys, aq, p, spec.norm)
        out.relerr_g, out.ub_g, note_g = _one_side(spec.family_g, g_sys, aq, p, spec.norm)
    except (StablciError, ArithmeticError, ValueError) as exc:
        out.relerr_f = out.relerr_g = out.ub_f = out.ub_g = math.nan
        out.discarded = True
        out.reason = str(exc)
        return out
    out.reason = "; ".join(f"{side}: {n}" for side, n in (("f", note_f), ("g", note_g)) if n)
    return out


def run_experiment(spec, threads=None):
    f_sys = spec.family_f.seed()
    g_sys = spec.family_g.seed()
    p = [float(v) for v in spec.p]
    kf = local_condition_number(f_sys, p, spec.norm)
    kg = local_condition_number(g_sys, p, spec.norm)
    threads = threads or thread_count()
    idx = range(spec.samples)
    if threads > 1 and spec.samples > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(lambda i: run_sample(spec, i, (f_sys, g_sys)), idx))
    else:
        rows = [run_sample(spec, i, (f_sys, g_sys)) for i in idx]
    rep = ExperimentReport(
        rows=rows, kappa_f=kf, kappa_g=kg, interval=spec.interval, norm=norm_label(spec.norm), seed=spec.seed
    )
    kept = [r for r in rows if not r.discarded]
    for key in ("relerr_f", "relerr_g", "ub_f", "ub_g"):
        vals = [getattr(r, key) for r in kept if not math.isnan(getattr(r, key))]
        if vals:
            rep.means[key] = math.fsum(vals) / len(vals)
    return rep


def certified_interval(sysfile, width=mpq(1, 10**9), order=LEX):
    """Open interval around the base parameter bounded by the nearest roots of d·h.

    Endpoints are midpoints of isolating intervals no wider than ``width``;
    a missing side is unbounded (None).
    """
    fam = sysfile.family()
    rep = optimal_locus(fam, order)
    base = sysfile.base()[0]
    # the factors are isolated separately; their product is far more costly
    below, above = None, None
    for factor in (rep.d, rep.h):
        b, a = nearest_roots(dense_coeffs(factor), base, width)
        if b is not None and (below is None or b.mid > below.mid):
            below = b
        if a is not None and (above is None or a.mid < above.mid):
            above = a
    return (below.mid if below else None, above.mid if above else None), rep


def intersect(a, b):
    lo = max(v for v in (a[0], b[0]) if v is not None) if (a[0] is not None or b[0] is not None) else None
    hi = min(v for v in (a[1], b[1]) if v is not None) if (a[1] is not None or b[1] is not None) else None
    return lo, hi
