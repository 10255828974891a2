"""Command line interface: ``growth {bn,pfdim,classify,reproduce,dump}``.

Every command writes its artifacts atomically into ``--out`` and prints a
JSON summary (written file names plus headline numbers) on stdout.  Errors
produce a nonzero exit status and ``{"error": ..., "message": ...}`` on
stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from .asymptotics import fit_asymptotic_model, variance_report
from .core import GrowthProblem, exhaust, expand_to_depth, format_rational, truncation_to_interchange
from .errors import GrowthError
from .families import build_family, load_explicit
from .series import (
    DEFAULT_THRESHOLDS,
    bn_sequence,
    classify_recurrence,
    endpoint_distribution,
)
from .spectral import classify_classes, pfdim_filtration
from .svg import heatmaps, line_plot

FIGURES = ("sl2-logplots", "z-vs-halfline", "sl3-heatmaps", "klein-plots", "psl2f7-plots")


class CLIError(GrowthError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


# ---------------------------------------------------------------------------
# output helpers


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return format_rational(o)
    if isinstance(o, tuple):
        return list(o)
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _ratio_float(x, lam: float, n: int) -> float:
    x = Fraction(x)
    if x == 0:
        return 0.0
    return math.exp(math.log(x.numerator) - math.log(x.denominator) - n * math.log(lam))


def _kv(items, what) -> dict:
    out = {}
    for it in items or ():
        if "=" not in it:
            raise CLIError(f"{what} must be key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text)


# ---------------------------------------------------------------------------
# problem construction


def _problem(args) -> GrowthProblem:
    if args.matrix:
        return load_explicit(args.matrix, args.unit)
    if not args.family:
        raise CLIError("either --family or --matrix is required")
    params = _kv(args.param, "--param")
    if args.lambda_weight is not None:
        params["weight"] = args.lambda_weight
    if args.alpha is not None:
        params["alpha"] = args.alpha
    return build_family(args.family, **params)


def _tag(gp: GrowthProblem) -> str:
    parts = [gp.name] + [f"{k}{format_rational(v) if isinstance(v, Fraction) else v}" for k, v in sorted(gp.params.items())]
    return _slug("_".join(str(p) for p in parts))


def _formats(args, default) -> list[str]:
    return args.format or list(default)


def _emit(out_dir: Path, name: str, text: str, written: list) -> None:
    write_atomic(out_dir / name, text)
    written.append(name)


# ---------------------------------------------------------------------------
# commands


def cmd_bn(args) -> dict:
    gp = _problem(args)
    N = args.N if args.N is not None else 30
    if N < 0:
        raise CLIError("-N must be nonnegative")
    series = bn_sequence(gp, N)
    norms = [float(Fraction(x)) for x in (args.normalize or [])]
    out_dir = Path(args.out)
    tag = _tag(gp)
    written: list[str] = []
    header = ["n", "b_n", "b_n_float"] + [f"b_n_over_{format(l, 'g')}^n" for l in norms]
    rows = []
    for n, b in enumerate(series.terms):
        row = [n, format_rational(b), repr(float(b)) if abs(b) < 1e300 else "inf"]
        row += [repr(_ratio_float(b, l, n)) for l in norms]
        rows.append(row)
    fmts = _formats(args, ["csv"])
    if "csv" in fmts:
        _emit(out_dir, f"bn_{tag}.csv", _csv(rows, header), written)
    if "json" in fmts:
        doc = {"family": gp.name, "params": gp.params, "N": N,
               "b_n": [format_rational(b) for b in series.terms], "normalize": norms}
        _emit(out_dir, f"bn_{tag}.json", _dumps(doc), written)
    if "svg" in fmts:
        ns = list(range(N + 1))
        if norms:
            panels = [(f"b_n / {l:g}^n", ns, [_ratio_float(b, l, n) for n, b in enumerate(series.terms)]) for l in norms]
            svg = line_plot(panels, title=f"{gp.name}: normalized b_n", xlabel="n", ylabel="b_n / lambda^n", logy=True)
        else:
            svg = line_plot([("b_n", ns, [float(b) if b < 1e300 else math.inf for b in series.terms])],
                            title=f"{gp.name}: b_n", xlabel="n", ylabel="b_n", logy=True)
        _emit(out_dir, f"bn_{tag}.svg", svg, written)
    return {"command": "bn", "family": gp.name, "N": N, "b_N": format_rational(series.terms[-1]), "files": written}


def cmd_pfdim(args) -> dict:
    gp = _problem(args)
    th = _kv(args.threshold, "--threshold")
    depth = args.depth if args.depth is not None else 40
    tol = args.tol if args.tol is not None else 1e-3
    est = pfdim_filtration(
        gp,
        depths=range(0, depth + 1),
        tol=tol,
        window=int(th.get("window", 5)),
        threshold=float(th.get("divergence", th.get("threshold", 50.0))),
        stop_early=not args.full,
    )
    doc = {"family": gp.name, "params": gp.params, **est.to_dict()}
    out_dir = Path(args.out)
    tag = _tag(gp)
    written: list[str] = []
    fmts = _formats(args, ["json"])
    if "json" in fmts:
        _emit(out_dir, f"pfdim_{tag}.json", _dumps(doc), written)
    if "csv" in fmts:
        _emit(out_dir, f"pfdim_{tag}.csv", _csv([[k, repr(float(x))] for k, x in est.sequence], ["k", "lambda_k"]), written)
    if "svg" in fmts:
        svg = line_plot([("lambda_k", est.depths, est.values)], title=f"{gp.name}: PF eigenvalues of cutoffs",
                        xlabel="depth k", ylabel="lambda_k", markers=True)
        _emit(out_dir, f"pfdim_{tag}.svg", svg, written)
    return {"command": "pfdim", "family": gp.name, "verdict": est.verdict, "value": est.value,
            "growth": est.tag, "files": written}


def _lambda_for(gp: GrowthProblem, args, th) -> object:
    if args.lam is not None:
        return Fraction(args.lam) if "/" in args.lam or args.lam.isdigit() else float(args.lam)
    if gp.known_pfdim is not None:
        k = gp.known_pfdim
        if math.isinf(k):
            return math.inf
        return int(k) if float(k).is_integer() else k
    if gp.is_finite:
        return classify_classes(exhaust(gp)).lam
    est = pfdim_filtration(gp)
    if est.verdict == "infinite":
        return math.inf
    if est.verdict == "finite":
        return est.value
    raise CLIError("PF dimension undecided; pass --lam")


def cmd_classify(args) -> dict:
    gp = _problem(args)
    th = _kv(args.threshold, "--threshold")
    thresholds = {k: float(v) for k, v in th.items() if k in DEFAULT_THRESHOLDS}
    lam = _lambda_for(gp, args, th)
    N = args.N if args.N is not None else 2000
    rep = classify_recurrence(gp, lam, N=N, thresholds=thresholds)
    doc = {"family": gp.name, "params": gp.params, "report": rep.to_dict()}
    if rep.fbc is not None:
        doc["report"]["final_basic_class_labels"] = [gp.label(v) for v in rep.fbc]
    depth = args.depth if args.depth is not None else 12
    if gp.ensure_depth(depth) <= 5000:
        t = expand_to_depth(gp, depth)
        s = classify_classes(t)
        doc["cutoff"] = {
            "depth": depth,
            "lambda_k": s.lam,
            "second_modulus": s.second_modulus,
            "period": s.period,
            "final_basic_classes": [[t.labels()[i] for i in c] for c in s.fbc_vertices()],
        }
    out_dir = Path(args.out)
    written: list[str] = []
    if "json" in _formats(args, ["json"]):
        _emit(out_dir, f"classify_{_tag(gp)}.json", _dumps(doc), written)
    return {"command": "classify", "family": gp.name, "verdict": rep.verdict, "files": written}


def cmd_dump(args) -> dict:
    gp = _problem(args)
    depth = args.depth
    if depth is None:
        if not gp.is_finite:
            raise CLIError("--depth is required for infinite families")
        t = exhaust(gp)
        depth = t.depth
    else:
        t = expand_to_depth(gp, depth)
    doc = {"name": gp.name, **truncation_to_interchange(t)}
    out_dir = Path(args.out)
    written: list[str] = []
    _emit(out_dir, f"graph_{_tag(gp)}_d{depth}.json", _dumps(doc), written)
    return {"command": "dump", "family": gp.name, "depth": depth, "vertices": t.size, "files": written}


# ---------------------------------------------------------------------------
# figure reproduction


def _fig_sl2_logplots(n, out, written, fmts):
    gp = build_family("sl2", weight=1)
    N = n or 200
    bs = bn_sequence(gp, N).terms
    lams = (2.0, 1.99)
    rows = [[k, format_rational(b)] + [repr(_ratio_float(b, l, k)) for l in lams] for k, b in enumerate(bs)]
    if "csv" in fmts:
        _emit(out, "sl2-logplots.csv", _csv(rows, ["n", "b_n", "b_n/2^n", "b_n/1.99^n"]), written)
    if "svg" in fmts:
        ns = list(range(N + 1))
        for l in lams:
            svg = line_plot([(f"b_n / {l:g}^n", ns, [_ratio_float(b, l, k) for k, b in enumerate(bs)])],
                            title=f"SL2 vector: b_n / {l:g}^n", xlabel="n", ylabel="b_n / lambda^n", logy=True)
            _emit(out, f"sl2-logplots-{l:g}.svg", svg, written)


def _fig_z_vs_halfline(n, out, written, fmts):
    N = n or 200
    dz = endpoint_distribution(build_family("line-Z"), N)
    dh = endpoint_distribution(build_family("sl2", weight=1), N)
    keys = sorted(set(dz) | set(dh))
    rows = [[k, format_rational(dz.get(k, 0)), format_rational(dh.get(k, 0))] for k in keys]
    if "csv" in fmts:
        _emit(out, "z-vs-halfline.csv", _csv(rows, ["vertex", "paths_Z", "paths_halfline"]), written)
    if "svg" in fmts:
        tz = sum(dz.values())
        th = sum(dh.values())
        svg = line_plot(
            [("Z line", sorted(dz), [dz[k] / tz for k in sorted(dz)]),
             ("half line (SL2)", sorted(dh), [dh[k] / th for k in sorted(dh)])],
            title=f"endpoint distribution of length {N} paths", xlabel="end vertex", ylabel="fraction of paths")
        _emit(out, "z-vs-halfline.svg", svg, written)


def _fig_sl3_heatmaps(n, out, written, fmts):
    ns = (50, 100, 200) if not n else (max(1, n // 4), max(1, n // 2), n)
    gp = build_family("sl3-vector")
    grids = []
    rows = []
    for m in ns:
        d = endpoint_distribution(gp, m)
        g = {(a - b, b): v for (a, b), v in d.items()}
        grids.append((f"n = {m}", g))
        rows += [[m, a - b, b, format_rational(v)] for (a, b), v in d.items()]
    if "csv" in fmts:
        _emit(out, "sl3-heatmaps.csv", _csv(rows, ["n", "weight_1", "weight_2", "paths"]), written)
    if "svg" in fmts:
        _emit(out, "sl3-heatmaps.svg", heatmaps(grids, title="SL3: endpoints of length n paths"), written)


def _fig_klein(n, out, written, fmts):
    N = n or 60
    gp = build_family("klein-four")
    bs = bn_sequence(gp, N).terms
    vals = [float(Fraction(4 * b, 3**k)) for k, b in enumerate(bs)]
    rows = [[k, format_rational(b), repr(v), repr(abs(v - 1))] for k, (b, v) in enumerate(zip(bs, vals))]
    if "csv" in fmts:
        _emit(out, "klein-plots.csv", _csv(rows, ["n", "b_n", "4*b_n/3^n", "abs_dev"]), written)
    if "svg" in fmts:
        ns = list(range(N + 1))
        _emit(out, "klein-plots-log.svg",
              line_plot([("4 b_n / 3^n", ns, vals)], title="Klein four: 4 b_n / 3^n", xlabel="n", ylabel="ratio", logy=True),
              written)
        _emit(out, "klein-plots-linear.svg",
              line_plot([("4 b_n / 3^n", ns, vals)], title="Klein four: 4 b_n / 3^n", xlabel="n", ylabel="ratio"),
              written)


def _fig_psl2(n, out, written, fmts):
    gp = build_family("psl2-f7-cutoff")
    m = fit_asymptotic_model(gp)
    rep = variance_report(gp, m, n or 11)
    if "csv" in fmts:
        _emit(out, "psl2f7-plots.csv", rep.to_csv(), written)
    if "svg" in fmts:
        ns = [r[0] for r in rep.rows]
        _emit(out, "psl2f7-plots-ratio.svg",
              line_plot([("b_n / a_n", ns, [r[4] for r in rep.rows])], title="PSL2(F7) cutoff: b_n / a_n",
                        xlabel="n", ylabel="ratio", markers=True), written)
        _emit(out, "psl2f7-plots-diff.svg",
              line_plot([("|b_n/a_n - 1|", ns, [abs(r[4] - 1) for r in rep.rows])],
                        title="PSL2(F7) cutoff: relative error", xlabel="n", ylabel="|b_n/a_n - 1|", logy=True,
                        markers=True), written)
    return {"kappa_0": m.kappa[0].real, "fitted_ratio": rep.fitted_ratio, "reference_ratio": rep.reference_ratio}


def cmd_reproduce(args) -> dict:
    fig = args.figure
    if fig not in FIGURES:
        raise CLIError(f"unknown figure {fig!r}; known: {', '.join(FIGURES)}")
    out = Path(args.out)
    written: list[str] = []
    fmts = _formats(args, ["csv", "svg"])
    fn = {
        "sl2-logplots": _fig_sl2_logplots,
        "z-vs-halfline": _fig_z_vs_halfline,
        "sl3-heatmaps": _fig_sl3_heatmaps,
        "klein-plots": _fig_klein,
        "psl2f7-plots": _fig_psl2,
    }[fig]
    extra = fn(args.n, out, written, fmts) or {}
    return {"command": "reproduce", "figure": fig, "files": written, **extra}


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="family tag, e.g. sl2, klein-four, young-lattice")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="family parameter (repeatable)")
    p.add_argument("--lambda-weight", dest="lambda_weight", help="sl2 highest weight (same as --param weight=...)")
    p.add_argument("--alpha", help="jordan loop weight (same as --param alpha=...)")
    p.add_argument("--matrix", help="matrix file (JSON interchange, JSON rows or text)")
    p.add_argument("--unit", type=int, help="unit index for --matrix")
    p.add_argument("-N", dest="N", type=int, help="number of terms")
    p.add_argument("--depth", type=int, help="cutoff depth")
    p.add_argument("--tol", type=float, help="tolerance")
    p.add_argument("--threshold", action="append", metavar="KEY=VALUE", help="threshold override (repeatable)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"], help="output format (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="growth", description="Growth of tensor powers in based algebras.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("bn", help="exact b_n sequence")
    _common(p)
    p.add_argument("--normalize", action="append", metavar="LAMBDA", help="also emit b_n / LAMBDA^n (repeatable)")
    p.set_defaults(func=cmd_bn)
    p = sub.add_parser("pfdim", help="PF eigenvalues along the naive filtration")
    _common(p)
    p.add_argument("--full", action="store_true", help="compute every depth even after a verdict")
    p.set_defaults(func=cmd_pfdim)
    p = sub.add_parser("classify", help="recurrence classification")
    _common(p)
    p.add_argument("--lam", help="normalizing eigenvalue (default: known or estimated PF dimension)")
    p.set_defaults(func=cmd_classify)
    p = sub.add_parser("reproduce", help="regenerate figure data and plots")
    p.add_argument("figure", help=", ".join(FIGURES))
    p.add_argument("--n", type=int, help="path length / number of terms")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"])
    p.set_defaults(func=cmd_reproduce)
    p = sub.add_parser("dump", help="export a cutoff in the JSON interchange format")
    _common(p)
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise CLIError("missing command; use one of bn, pfdim, classify, reproduce, dump")
        summary = args.func(args)
    except (GrowthError, OSError, ValueError, ZeroDivisionError) as exc:
        code = getattr(exc, "code", None) or type(exc).__name__
        sys.stderr.write(json.dumps({"error": code, "message": str(exc)}, sort_keys=True) + "\n")
        return 2 if isinstance(exc, CLIError) else 1
    sys.stdout.write(_dumps(summary))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
