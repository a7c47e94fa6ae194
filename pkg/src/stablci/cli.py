"""Command-line entry point ``stablci``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .conditioning import PerturbationSetup, condition_report, local_condition_number, norm_label
from .errors import NoSmoothSubscheme, OriginRoot, ParseError, StablciError
from .experiment import ExperimentSpec, certified_interval, intersect, run_experiment
from .family import optimal_locus
from .groebner import INFINITE, groebner_basis
from .polycore import TermOrder, canonical, dense_coeffs, format_monomial, mpq, to_param_poly, translate
from .realcount import classify_region, isolate_real_roots, real_fiber_count
from .rescale import orthonormal_rescale, unitary_rescale
from .systemfile import load_system, substitute_named

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SMOOTH = 2
EXIT_NUMERIC = 3
DISCARD_LIMIT = 0.10


class UsageError(Exception):
    pass


def _vector(text):
    try:
        return [mpq(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot read {text!r} as comma-separated numbers") from None


def _norm(text):
    if text in ("1", "2"):
        return int(text)
    if text in ("inf", "Inf", "INF"):
        return "inf"
    raise UsageError(f"--norm must be 1, 2 or inf, not {text!r}")


def _order(args, fallback="degrevlex"):
    # not an argparse default: parents share the action, so per-command defaults leak
    return TermOrder.from_name(args.order or fallback)


def _emit(args, payload, text=None):
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=str)
            fh.write("\n")
    if text is not None:
        print(text)
    else:
        print(json.dumps(payload, indent=2, default=str))


def _point(args, sysfile):
    if args.point:
        pt = _vector(args.point)
    elif sysfile.roots:
        pt = list(sysfile.roots[0])
    else:
        raise UsageError("no --point given and the file lists no roots")
    if len(pt) != sysfile.ring.n:
        raise UsageError(f"point needs {sysfile.ring.n} coordinates")
    return pt


def _translated(systems, shift):
    """Compose each system with x -> x + shift."""
    return [[translate(g, shift) for g in sys_] for sys_ in systems]


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args):
    sf = load_system(args.file)
    payload = {
        "params": list(sf.params),
        "vars": list(sf.unknowns),
        "system": [str(g) for g in sf.system],
        "eps": [str(g) for g in sf.eps] if sf.eps is not None else None,
        "base": [str(v) for v in sf.base_point] if sf.base_point is not None else None,
        "roots": [[str(v) for v in r] for r in sf.roots],
    }
    _emit(args, payload, None if args.json_stdout else sf.to_text().rstrip())
    return EXIT_OK


def cmd_gb(args):
    sf = load_system(args.file)
    order = _order(args)
    if args.alpha:
        gens = sf.fiber(_vector(args.alpha))
    elif sf.ring.m:
        gens = [to_param_poly(g) for g in sf.family_gens()]
    else:
        gens = sf.seed()
    gb = groebner_basis(gens, order)
    names = gb.ring.gens
    payload = {
        "order": order.kind,
        "gens": [g.to_str(order) for g in gb.gens],
        "mu": None if gb.multiplicity == INFINITE else gb.multiplicity,
        "zero_dimensional": gb.multiplicity != INFINITE,
        "staircase": [format_monomial(m, names) or "1" for m in gb.staircase] if gb.staircase is not None else None,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_optimal_locus(args):
    sf = load_system(args.file)
    rep = optimal_locus(sf.family(), _order(args))
    _emit(args, rep.to_dict())
    return EXIT_OK


def cmd_real_count(args):
    sf = load_system(args.file)
    fam = sf.family()
    alphas = [_vector(a) for a in args.alpha] or ([sf.base()] if not sf.ring.m else [])
    if not alphas:
        raise UsageError("give at least one parameter point")
    results = []
    for al in alphas:
        entry = {"alpha": [str(v) for v in al]}
        try:
            entry.update(real_fiber_count(sf.fiber(al), seed=args.seed).to_dict())
        except StablciError as exc:
            entry["status"] = exc.code
            entry["message"] = str(exc)
        if sf.ring.m:
            try:
                entry["sturm_habicht"] = classify_region(fam, al).to_dict()
            except StablciError as exc:
                entry["sturm_habicht"] = {"status": exc.code, "message": str(exc)}
        results.append(entry)
    _emit(args, {"results": results})
    return EXIT_OK


def cmd_condition(args):
    sf = load_system(args.file)
    norm = _norm(args.norm)
    f = sf.seed()
    p = _point(args, sf)
    eps = sf.perturbation(_vector(args.alpha)) if args.alpha else [g.ring.zero() for g in f]
    if args.translate:
        shift = _vector(args.translate)
        if len(shift) != len(p):
            raise UsageError("--translate needs one offset per unknown")
        f, eps = _translated([f, eps], shift)
        p = [a - b for a, b in zip(p, shift)]
    pf = np.array([float(v) for v in p])
    payload = {"point": [str(v) for v in p]}
    if args.alpha:
        if not any(p):
            raise OriginRoot("root at the origin; pass --translate to move it")
        rep = condition_report(PerturbationSetup(f, eps, pf, norm), with_true=True)
        payload["report"] = rep.to_dict()
    else:
        payload["report"] = {"norm": norm_label(norm), "kappa": local_condition_number(f, pf, norm)}
    if args.rescale == "unitary":
        rs = unitary_rescale(f, pf, 2 if norm == "inf" else norm)
        payload["rescaled"] = rs.to_dict()
        payload["rescaled"]["kappa_" + norm_label(norm)] = local_condition_number(rs.gens, pf, norm)
    elif args.rescale == "orthonormal":
        payload["rescaled"] = orthonormal_rescale(f, pf).to_dict()
    _emit(args, payload)
    return EXIT_OK


def cmd_isolate(args):
    sf = load_system(args.file)
    if sf.ring.m != 1:
        raise UsageError("isolate needs a one-parameter family")
    rep = optimal_locus(sf.family(), _order(args, "lex"))
    values = {"d": rep.d, "h": rep.h}
    poly = canonical(substitute_named(args.poly, values, rep.d.ring))
    coeffs = dense_coeffs(poly, sf.params[0])
    width = mpq(args.width)
    roots = isolate_real_roots(coeffs, width)
    near = mpq(args.near)
    below = [r for r in roots if r.hi <= near]
    above = [r for r in roots if r.lo >= near]
    payload = {
        "poly": args.poly,
        "degree": len(coeffs) - 1,
        "roots": [{"lo": str(r.lo), "hi": str(r.hi), "approx": float(r.mid)} for r in roots],
        "nearest_below": float(below[-1].mid) if below else None,
        "nearest_above": float(above[0].mid) if above else None,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_experiment(args):
    f_file = load_system(args.file_f)
    g_file = load_system(args.file_g)
    norm = _norm(args.norm)
    p = _point(args, f_file)
    if args.interval:
        iv = _vector(args.interval)
        if len(iv) != 2:
            raise UsageError("--interval needs lo,hi")
        interval = tuple(iv)
    else:
        order = _order(args, "lex")
        a, _ = certified_interval(f_file, order=order)
        b, _ = certified_interval(g_file, order=order)
        interval = intersect(a, b)
        if None in interval:
            raise UsageError("certified interval is unbounded; pass --interval")
    spec = ExperimentSpec(f_file, g_file, p, interval, args.samples, args.seed, norm)
    rep = run_experiment(spec)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(rep.csv_text())
    payload = rep.to_dict()
    _emit(args, payload, None)
    if spec.samples:
        print(rep.table())
    if rep.discard_fraction > DISCARD_LIMIT:
        print(f"{rep.discarded} of {len(rep.rows)} samples discarded", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", choices=("lex", "degrevlex"), help="default lex for isolate and experiment, else degrevlex")
    common.add_argument("--norm", default="2", help="1, 2 or inf")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--json", metavar="PATH", help="also write the JSON report to PATH")
    common.add_argument("--translate", metavar="dx,dy,...", help="shift coordinates so the root is p - shift")

    ap = argparse.ArgumentParser(prog="stablci", description="Smooth loci, real root counts and root conditioning.")
    ap.add_argument("--version", action="version", version=f"stablci {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="parse and print a system file")
    s.add_argument("file")
    s.add_argument("--json-stdout", action="store_true", help="print JSON instead of canonical text")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("gb", parents=[common], help="reduced Groebner basis")
    s.add_argument("file")
    s.add_argument("--alpha", help="specialise parameters first")
    s.set_defaults(func=cmd_gb)

    s = sub.add_parser("optimal-locus", parents=[common], help="free, smooth and optimal loci of a family")
    s.add_argument("file")
    s.set_defaults(func=cmd_optimal_locus)

    s = sub.add_parser("real-count", parents=[common], help="real points of fibers")
    s.add_argument("file")
    s.add_argument("alpha", nargs="*", help="parameter points, e.g. 0,-5")
    s.set_defaults(func=cmd_real_count)

    s = sub.add_parser("condition", parents=[common], help="condition number at a root")
    s.add_argument("file")
    s.add_argument("--point", help="root coordinates (default: first listed root)")
    s.add_argument("--alpha", help="parameter value for the perturbation")
    s.add_argument("--rescale", choices=("unitary", "orthonormal"))
    s.set_defaults(func=cmd_condition)

    s = sub.add_parser("isolate", parents=[common], help="real roots of a locus polynomial")
    s.add_argument("file")
    s.add_argument("--poly", default="d*h", help="expression in d and h")
    s.add_argument("--near", default="0")
    s.add_argument("--width", default="1/1000000000")
    s.set_defaults(func=cmd_isolate)

    s = sub.add_parser("experiment", parents=[common], help="perturbation experiment on two representations")
    s.add_argument("file_f")
    s.add_argument("file_g")
    s.add_argument("--point", help="shared root (default: first root of the first file)")
    s.add_argument("--interval", help="lo,hi for the parameter (default: certified intersection)")
    s.add_argument("--csv", metavar="PATH", help="per-sample CSV log")
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.samples < 0:
            raise UsageError("--samples must be non-negative")
        return args.func(args)
    except NoSmoothSubscheme as exc:
        print(str(exc), file=sys.stderr)
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                json.dump({"status": exc.code, "message": str(exc)}, fh)
        return EXIT_NO_SMOOTH
    except (UsageError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StablciError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
