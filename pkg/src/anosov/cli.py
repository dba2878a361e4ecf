"""Command-line front end.

Exit codes: 0 on success, 2 on parse or precondition errors, 3 when
``--strict`` is given and some verdict is inconclusive.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import diagnostics as diag
from .boundary import holder_exponent_eigen, holder_exponent_singular, limit_point, sample_rays
from .convex import ConvexDomain, control1_check, hilbert_displacement
from .floyd import FloydFunction, FloydGraph, floyd_lipschitz_check, karlsson_bound, ugsp_check
from .linalg import LinearFunctional, Representation, gromov_product_phi
from .words import BoundaryRay, format_word, gromov_product_group, parse_word, reduce
from . import zoo

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3
DIAGNOSE_CHECKS = ("divergence", "qie", "ccartan", "weak_gap", "property_u", "gromov",
                   "ugsp_gromov", "directsum", "tensor", "mu_lambda")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- io helpers

def _dumps(obj):
    return json.dumps(diag._clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit_json(obj, dest):
    text = _dumps(obj)
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(dest, "w") as fh:
            fh.write(text)


def _load_rep(path):
    with open(path) as fh:
        return Representation.from_json(json.load(fh))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _svg_scatter(path, series, xlabel, ylabel, title):
    """Single-file SVG scatter of ``{name: [(x, y), ...]}``."""
    W, H, pad = 480, 320, 48
    pts = [(float(x), float(y)) for s in series.values() for x, y in s if math.isfinite(float(y))]
    if not pts:
        pts = [(0.0, 0.0)]
    xs, ys = zip(*pts)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def sy(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
        f'<text x="{W / 2}" y="16" text-anchor="middle">{title}</text>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{H / 2}" transform="rotate(-90 14 {H / 2})" text-anchor="middle">{ylabel}</text>',
        f'<text x="{pad}" y="{H - pad + 14}" text-anchor="middle">{x0:.3g}</text>',
        f'<text x="{W - pad}" y="{H - pad + 14}" text-anchor="middle">{x1:.3g}</text>',
        f'<text x="{pad - 4}" y="{H - pad}" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end">{y1:.3g}</text>',
    ]
    for k, (name, s) in enumerate(series.items()):
        c = colors[k % len(colors)]
        out.append(f'<text x="{W - pad}" y="{pad + 14 * k}" text-anchor="end" fill="{c}">{name}</text>')
        for x, y in s:
            if math.isfinite(float(y)):
                out.append(f'<circle cx="{sx(float(x)):.2f}" cy="{sy(float(y)):.2f}" r="3" fill="{c}"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _word(s):
    return reduce(parse_word(s))


def _ints(s):
    return [int(x) for x in s.split(",") if x.strip()]


# ---------------------------------------------------------------- subcommands

def _cmd_zoo(args):
    if args.action == "list":
        for name in zoo.ZOO_NAMES:
            print(name)
        return EXIT_OK
    angles = [float(x) for x in args.angles.split(",")] if args.angles else None
    rho = zoo.build(args.name, rank=args.rank, t=args.t, angles=angles, sym=args.sym, ext=args.ext,
                    dual_=args.dual, deform_eps=args.deform, seed=args.seed, double=args.double,
                    ball=args.ball)
    _emit_json(rho.to_json(), args.output)
    return EXIT_OK


def _report_rows(report):
    """Flatten the tables of a report and its parts into CSV rows."""
    rows = []
    for r in [report] + list(report.parts):
        for tname, table in sorted(r.tables.items()):
            if tname == "sphere_minimizers":
                continue
            for row in table:
                if isinstance(row, (list, tuple)) and len(row) == 2:
                    rows.append((r.criterion, tname, row[0], row[1]))
    return rows


def _run_check(name, rho, rho2, args, ctx):
    R, alpha = args.radius, args.root
    if name == "divergence":
        return diag.divergence_profile(rho, alpha, R, ctx=ctx)
    if name == "qie":
        return diag.qie_check(rho, R, ctx=ctx)
    if name == "ccartan":
        return diag.ccartan_check(rho, alpha, R, ctx=ctx, plateau_tol=args.plateau_tol)
    if name == "weak_gap":
        return diag.weak_gap_check(rho, alpha, args.max_length)
    if name == "property_u":
        return diag.property_u_defect(rho.model, R)
    if name == "gromov":
        return diag.gromov_comparability(rho, alpha, R, ctx=ctx)
    if name == "ugsp_gromov":
        return diag.ugsp_gromov_bounds(rho, args.kappa, R, ctx=ctx, plateau_tol=args.plateau_tol)
    if name == "mu_lambda":
        if args.element is None:
            raise diag.PreconditionError("mu_lambda needs --element")
        return diag.mu_lambda_search(rho, args.element, args.search_radius)
    if rho2 is None:
        raise diag.PreconditionError(f"{name} needs a second representation (--rep2)")
    if name == "directsum":
        return diag.directsum_check(rho, rho2, R, args.max_length, ctx=ctx, plateau_tol=args.plateau_tol)
    if name == "tensor":
        return diag.tensor_check(rho, rho2, R, args.max_length, ctx=ctx, plateau_tol=args.plateau_tol)
    raise diag.PreconditionError(f"unknown check {name!r}")


def _verdicts(report):
    yield report.verdict
    for p in report.parts:
        yield from _verdicts(p)


def _finish(reports, args):
    doc = {"schema": 1, "reports": [r.to_dict() for r in reports]}
    if args.json is not None:
        _emit_json(doc, args.json)
    if args.json != "-":
        for r in reports:
            print(f"{r.criterion}: {r.verdict}")
            for p in r.parts:
                print(f"  {p.criterion}: {p.verdict} {_const_text(p.constants)}")
            if not r.parts:
                print(f"  {_const_text(r.constants)}")
    if args.csv:
        rows = [row for r in reports for row in _report_rows(r)]
        _write_csv(args.csv, ("criterion", "table", "x", "y"), rows)
    if getattr(args, "svg", None):
        series = {}
        for crit, tname, x, y in (row for r in reports for row in _report_rows(r)):
            series.setdefault(f"{crit}:{tname}", []).append((x, y))
        _svg_scatter(args.svg, series, "radius", "value", "diagnostic tables")
    if args.strict and any(v == diag.INCONCLUSIVE for r in reports for v in _verdicts(r)):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _const_text(c):
    return " ".join(f"{k}={v + 0.0:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(c.items()))


def _cmd_diagnose(args):
    if args.radius < 0:
        raise diag.PreconditionError(f"radius must be >= 0, got {args.radius}")
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    bad = [c for c in checks if c not in DIAGNOSE_CHECKS]
    if bad or not checks:
        raise UsageError(f"unknown checks {bad}; choose from {', '.join(DIAGNOSE_CHECKS)}")
    rho = _load_rep(args.rep)
    rho2 = _load_rep(args.rep2) if args.rep2 else None
    if rho2 is not None:
        rho2 = rho2.with_model(rho.model) if rho2.model.same_group(rho.model) else rho2
    ctx = diag.ScanContext(threads=args.threads)
    reports = [_run_check(c, rho, rho2, args, ctx) for c in checks]
    return _finish(reports, args)


def _cmd_limits(args):
    rho = _load_rep(args.rep)
    if args.rays:
        rays = [BoundaryRay.parse(s) for s in args.rays.split(",")]
    else:
        rays = sample_rays(rho.model, args.count)
    depths = _ints(args.depths)
    rows = []
    for x in rays:
        for n in depths:
            s = limit_point(rho, x, n)
            rows.append({"ray": str(x), "depth": n, "point": s.point.dir.tolist(),
                         "hyperplane": s.hyperplane.normal.tolist(), "err_bound": s.err_bound,
                         "hyperplane_err_bound": s.hyperplane_err_bound, "gap": s.gap})
    if args.csv:
        d = rho.dim
        header = ["ray", "depth"] + [f"x{i}" for i in range(d)] + [f"n{i}" for i in range(d)] + ["err_bound"]
        _write_csv(args.csv, header, [(r["ray"], r["depth"], *r["point"], *r["hyperplane"], r["err_bound"])
                                      for r in rows])
    if args.json is not None:
        _emit_json({"schema": 1, "limits": rows}, args.json)
    elif not args.csv:
        for r in rows:
            pt = " ".join(f"{v:.10f}" for v in r["point"])
            print(f"{r['ray']} depth={r['depth']} point=[{pt}] err<={r['err_bound']:.3e}")
    return EXIT_OK


def _cmd_holder(args):
    rho = _load_rep(args.rep)
    h = holder_exponent_singular(rho, args.radius)
    out = {"schema": 1, "estimate": h.estimate, "metric": h.metric, "witness": h.witness,
           "radius": h.radius, "table": list(h.table)}
    if args.max_length:
        value, wit = holder_exponent_eigen(rho, args.max_length)
        out["eigen_estimate"] = value
        out["eigen_witness"] = wit
    if args.json is not None:
        _emit_json(out, args.json)
    else:
        print(f"estimate {h.estimate:.10f} ({h.metric} metric, witness {h.witness or '1'})")
        if "eigen_estimate" in out:
            print(f"eigen estimate {out['eigen_estimate']:.10f} (witness {out['eigen_witness']})")
    if args.csv:
        _write_csv(args.csv, ("n", "a_n"), h.table)
    if args.svg:
        _svg_scatter(args.svg, {"a_n": list(h.table)}, "n", "a_n", "singular value Hölder estimates")
    return EXIT_OK


def _cmd_floyd(args):
    f = FloydFunction.parse(args.f)
    if args.action == "dist":
        rho_model = _load_rep(args.rep).model
        g, h = _word(args.g), _word(args.h)
        G = FloydGraph(rho_model, f, args.radius, threads=args.threads)
        d = G.distance(g, h)
        gp = gromov_product_group(rho_model, g, h)
        out = {"schema": 1, "distance": d, "gromov_product": gp, "karlsson_bound": karlsson_bound(f, gp),
               "f": str(f), "radius": args.radius, "g": format_word(g), "h": format_word(h)}
        if args.json is not None:
            _emit_json(out, args.json)
        else:
            print(f"d_f({out['g'] or '1'}, {out['h'] or '1'}) = {d:.12g}  (bound {out['karlsson_bound']:.6g})")
        return EXIT_OK
    rho = _load_rep(args.rep)
    u = ugsp_check(rho, f, args.radius, plateau_tol=args.plateau_tol)
    lip = floyd_lipschitz_check(rho, f, args.radius, threads=args.threads)
    verdict = diag.CONSISTENT if u.passed else diag.INCONCLUSIVE
    report = diag.Report(
        "floyd", verdict,
        parameters={"f": str(f), "radius": args.radius, "plateau_tol": args.plateau_tol},
        constants={"gap_summation_C": u.C, "plateau": u.plateau, "lipschitz_C": lip.C, "pairs": lip.pairs},
        witnesses={"gap_summation": u.witness, "lipschitz": list(lip.witness), "excluded": list(lip.excluded)},
        tables={"gap_summation_C": list(u.table)},
    )
    return _finish([report], args)


def _cmd_hilbert(args):
    rho = _load_rep(args.rep)
    domain = ConvexDomain.parse(args.domain)
    if args.radius is not None:
        c = control1_check(rho, domain, args.radius)
        report = diag.Report(
            "control1", diag.CONSISTENT if c.passed else diag.INCONCLUSIVE,
            parameters={"domain": str(domain), "radius": args.radius},
            constants={"kappa": c.kappa, "min_slack": c.min_slack, "plateau": c.plateau},
            witnesses={"kappa": c.witness}, tables={"kappa": list(c.table)},
        )
        return _finish([report], args)
    if args.word is None:
        raise UsageError("hilbert needs --word or --radius")
    g = _word(args.word)
    d = hilbert_displacement(rho, g, domain, N=args.N)
    out = {"schema": 1, "word": format_word(g), "domain": str(domain), "displacement": d.per_orbit,
           "stable": d.stable, "stable_naive": d.stable_naive, "bracket": d.bracket, "N": d.N}
    if args.json is not None:
        _emit_json(out, args.json)
    else:
        print(f"d(g x0, x0) = {d.per_orbit:.12g}")
        print(f"stable displacement = {d.stable:.12g} (bracket {d.bracket:.3e}, N={d.N})")
    return EXIT_OK


def _cmd_interval(args):
    rho1, rho2 = _load_rep(args.rep1), _load_rep(args.rep2)
    if rho2.model.same_group(rho1.model):
        rho2 = rho2.with_model(rho1.model)
    ctx = diag.ScanContext(threads=args.threads)
    r = diag.interval_search(rho1, rho2, args.p, args.q, args.delta, args.radius, args.max_length, ctx=ctx)
    return _finish([r], args)


def _cmd_gromov(args):
    rho = _load_rep(args.rep)
    if args.g is not None or args.h is not None:
        if args.g is None or args.h is None:
            raise UsageError("give both --g and --h")
        g, h = _word(args.g), _word(args.h)
        phi = LinearFunctional.parse(args.phi)
        val = gromov_product_phi(rho, g, h, phi)
        out = {"schema": 1, "g": format_word(g), "h": format_word(h), "phi": args.phi,
               "product": val, "group_product": gromov_product_group(rho.model, g, h)}
        if args.json is not None:
            _emit_json(out, args.json)
        else:
            print(f"({out['g'] or '1'} . {out['h'] or '1'})_{args.phi} = {val:.12g}")
        return EXIT_OK
    ctx = diag.ScanContext(threads=args.threads)
    r = diag.gromov_comparability(rho, args.alpha, args.radius, ctx=ctx)
    return _finish([r], args)


# ---------------------------------------------------------------- parser

def _output_flags(p, svg=True):
    p.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                   help="write the JSON report to PATH (stdout when PATH is omitted or '-')")
    p.add_argument("--csv", metavar="PATH", help="write tables as CSV")
    if svg:
        p.add_argument("--svg", metavar="PATH", help="write an SVG scatter of the tables")
    p.add_argument("--strict", action="store_true", help="exit 3 when any verdict is inconclusive")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")


def build_parser():
    p = _Parser(prog="anosov", description="Singular value diagnostics for matrix representations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    z = sub.add_parser("zoo", help="build example representations")
    z.add_argument("action", choices=("build", "list"))
    z.add_argument("name", nargs="?", default="fuchsian-free", choices=zoo.ZOO_NAMES)
    z.add_argument("--rank", type=int, default=2)
    z.add_argument("--t", type=float, default=2.0, help="translation parameter")
    z.add_argument("--angles", help="comma-separated axis angles")
    z.add_argument("--sym", type=int, help="symmetric power")
    z.add_argument("--ext", type=int, help="exterior power")
    z.add_argument("--dual", action="store_true")
    z.add_argument("--deform", type=float, default=0.0, help="size of a random deformation")
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--double", action="store_true", help="direct sum with itself")
    z.add_argument("--ball", action="store_true",
                   help="act on the Klein ball through the symmetric square (2x2 input)")
    z.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
    z.set_defaults(func=_cmd_zoo)

    d = sub.add_parser("diagnose", help="run ball-scan diagnostics")
    d.add_argument("--rep", required=True)
    d.add_argument("--rep2", help="second representation for directsum and tensor")
    d.add_argument("--checks", required=True, help=f"comma-separated from: {', '.join(DIAGNOSE_CHECKS)}")
    d.add_argument("--radius", type=int, default=6)
    d.add_argument("--root", type=int, default=1, help="root or weight index")
    d.add_argument("--max-length", type=int, default=8, help="longest conjugacy class scanned")
    d.add_argument("--kappa", type=float, default=1.0)
    d.add_argument("--plateau-tol", type=float, default=diag.PLATEAU_TOL)
    d.add_argument("--element", help="element for mu_lambda")
    d.add_argument("--search-radius", type=int, default=2)
    _output_flags(d)
    d.set_defaults(func=_cmd_diagnose)

    lm = sub.add_parser("limits", help="limit points along boundary rays")
    lm.add_argument("action", choices=("export",))
    lm.add_argument("--rep", required=True)
    lm.add_argument("--rays", help="comma-separated rays 'head:cycle'")
    lm.add_argument("--count", type=int, default=8, help="number of sampled rays when --rays is absent")
    lm.add_argument("--depths", default="10,20,40")
    lm.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH")
    lm.add_argument("--csv", metavar="PATH")
    lm.set_defaults(func=_cmd_limits)

    h = sub.add_parser("holder", help="Hölder exponent estimates")
    h.add_argument("--rep", required=True)
    h.add_argument("--radius", type=int, default=8)
    h.add_argument("--max-length", type=int, default=0, help="also run the eigenvalue estimator")
    h.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH")
    h.add_argument("--csv", metavar="PATH")
    h.add_argument("--svg", metavar="PATH")
    h.set_defaults(func=_cmd_holder)

    f = sub.add_parser("floyd", help="Floyd distances and gap summation")
    f.add_argument("action", choices=("dist", "check"))
    f.add_argument("--rep", required=True)
    f.add_argument("--f", default="exp:2", help="'exp:c' or 'power:kappa'")
    f.add_argument("--radius", type=int, default=5)
    f.add_argument("--g", default="")
    f.add_argument("--h", default="")
    f.add_argument("--plateau-tol", type=float, default=diag.PLATEAU_TOL)
    _output_flags(f)
    f.set_defaults(func=_cmd_floyd)

    hb = sub.add_parser("hilbert", help="Hilbert displacements and the gap control")
    hb.add_argument("--rep", required=True)
    hb.add_argument("--domain", default="ball:2", help="'ball:n' or 'simplex:n'")
    hb.add_argument("--word")
    hb.add_argument("--N", type=int, default=50)
    hb.add_argument("--radius", type=int, help="run the gap control over a ball instead")
    _output_flags(hb)
    hb.set_defaults(func=_cmd_hilbert)

    iv = sub.add_parser("interval", help="search for an element with a given top singular value ratio")
    iv.add_argument("--rep1", required=True)
    iv.add_argument("--rep2", required=True)
    iv.add_argument("--p", type=int, required=True)
    iv.add_argument("--q", type=int, required=True)
    iv.add_argument("--delta", type=float, default=1.0)
    iv.add_argument("--radius", type=int, default=8)
    iv.add_argument("--max-length", type=int, default=6)
    _output_flags(iv)
    iv.set_defaults(func=_cmd_interval)

    g = sub.add_parser("gromov", help="Gromov products relative to a functional")
    g.add_argument("--rep", required=True)
    g.add_argument("--g")
    g.add_argument("--h")
    g.add_argument("--phi", default="weight:1", help="'root:i', 'weight:i' or 'epsilon:i'")
    g.add_argument("--alpha", type=int, default=1)
    g.add_argument("--radius", type=int, default=6)
    _output_flags(g)
    g.set_defaults(func=_cmd_gromov)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except (UsageError, ValueError, LookupError, ArithmeticError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
