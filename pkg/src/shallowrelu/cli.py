"""Command-line entry point.

File formats (all floats written with 17 significant digits):

  network   {"n", "output_bias", "units": [{"w": [...], "b", "lambda"}]}
  spline    {"knots": [...], "pieces": [{"a", "b"}]}   (1D, piece k is a*x + b)
  target    {"arrangement": {...}, "pieces": [{"w": [...], "b"}]}
  data CSV  header x1,...,xn,z then one sample per row
  expr JSON {"expr": "16*(x1**3 + x2**3) + 3"}        (variables x1..xn)

Exit codes: 0 success, 1 validation error, 2 numeric failure.
"""

import argparse
import json
import sys

import numpy as np

from . import io
from .analyzer import LOCAL_NEGATIVE, LOCAL_POSITIVE, UNIVERSAL_GLOBAL, GLOBAL_FOR_ORDER, analyze
from .construct import (GridSpec, NotContinuous, PerturbationBreaksRegion, RankDeficient,
                        approximate_c1, realize_grid)
from .network import PiecewiseLinear, ReluNetwork
from .spline1d import (ADDED, COMPOUND, ONE_SIDED, SUBSTITUTED, BasisPlan, Spline1D, compile_one_sided,
                       compile_two_sided, minimal_added_plan)
from .trainer import (BUILTINS, Dataset, TrainConfig, builtin_function, fit_report, lattice, make_dataset,
                      relative_error, train)

NUMERIC_ERRORS = (ArithmeticError, np.linalg.LinAlgError, RankDeficient, PerturbationBreaksRegion, NotContinuous)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out(path, obj):
    if path:
        io.write_json(path, obj)
    else:
        print(io.dumps(obj))


def _load_net(path):
    return ReluNetwork.from_dict(io.read_json(path))


def _default_plan(kind, zeta):
    if kind == ONE_SIDED:
        return None
    if kind == ADDED:
        return minimal_added_plan(zeta)
    if zeta < 2:
        raise UsageError(f"{kind} plans need at least two pieces")
    if kind == SUBSTITUTED:
        return BasisPlan(SUBSTITUTED, flipped=tuple(range(1, zeta, 2)))
    if zeta < 3:
        raise UsageError("compound plans need at least three pieces")
    return BasisPlan(COMPOUND, flipped=(1,), bidirectional=tuple(range(2, zeta)))


def cmd_compile_spline1d(args):
    s = Spline1D.from_dict(io.read_json(args.spline))
    if args.plan:
        plan = BasisPlan.from_dict(io.read_json(args.plan))
    else:
        plan = _default_plan(args.basis, len(s.a))
    net = compile_one_sided(s) if plan is None or plan.kind == ONE_SIDED else compile_two_sided(s, plan)
    _out(args.out, net.to_dict())


def _parse_grid(text, n):
    Ms = [int(t) for t in text.split(",") if t.strip()]
    if len(Ms) == 1:
        Ms = Ms * n
    if len(Ms) != n or min(Ms) < 1:
        raise UsageError(f"--grid needs 1 or {n} positive integers")
    return GridSpec(n, Ms)


def cmd_construct(args):
    grid = _parse_grid(args.grid, args.n)
    target = PiecewiseLinear.from_dict(io.read_json(args.target))
    if target.n != args.n:
        raise UsageError(f"target has n={target.n}, expected {args.n}")
    net = realize_grid(grid, target)
    _out(args.out, net.to_dict())


def _expr_function(path, n):
    import sympy

    doc = io.read_json(path)
    names = [f"x{k + 1}" for k in range(n)]
    syms = sympy.symbols(names)
    try:
        expr = sympy.parse_expr(doc["expr"], local_dict=dict(zip(names, syms)))
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise UsageError(f"cannot parse expression: {e}")
    extra = {str(s) for s in expr.free_symbols} - set(names)
    if extra:
        raise UsageError(f"unknown variables in expression: {', '.join(sorted(extra))}")
    fn = sympy.lambdify(syms, expr, "numpy")

    def f(X):
        X = np.atleast_2d(np.asarray(X, float))
        return np.broadcast_to(np.asarray(fn(*X.T), float), (X.shape[0],)).copy()
    return f


def _function(name, n):
    if name.startswith("file:"):
        return _expr_function(name[5:], n)
    return builtin_function({"poly": "poly16"}.get(name, name), n)


def cmd_approximate(args):
    f = _function(args.fn, args.n)
    net, report = approximate_c1(f, GridSpec.uniform(args.n, args.M))
    _out(args.out, net.to_dict())
    if args.report:
        io.write_json(args.report, {k: v for k, v in report.to_dict().items() if k != "loss_curve"})
    print(f"epsilon {report.epsilon:.6g}  units {len(net.units)}", file=sys.stderr)


def cmd_make_data(args):
    if args.spline:
        s = Spline1D.from_dict(io.read_json(args.spline))
        X = lattice(1, args.step)
        ds = Dataset(X, s(X[:, 0]))
    else:
        ds = make_dataset(args.fn, args.n, args.step)
    io.write_csv(args.out, ds.inputs, ds.targets)


def cmd_train(args):
    X, z = io.read_csv(args.data)
    cfg = TrainConfig(units=args.units, lr=args.lr, steps=args.steps, seed=args.seed,
                      output_bias=args.output_bias)
    net, report = train(Dataset(X, z), cfg)
    _out(args.out, net.to_dict())
    if args.report:
        io.write_json(args.report, report.to_dict())
    print(f"epsilon {report.epsilon:.6g}", file=sys.stderr)


def cmd_analyze(args):
    net = _load_net(args.net)
    rep = analyze(net)
    _out(args.report, rep.to_dict())
    if args.svg:
        if net.n > 2:
            raise UsageError("SVG diagrams are only drawn for n <= 2")
        with open(args.svg, "w") as fh:
            fh.write(svg_diagram(net, rep))


def _verify_target(args, n):
    """Return (callable target, fixed points or None)."""
    given = [x for x in (args.target, args.spline, args.fn, args.data) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --target, --spline, --fn, --data")
    if args.data:
        X, z = io.read_csv(args.data)
        if X.shape[1] != n:
            raise UsageError(f"data has n={X.shape[1]}, network has n={n}")
        return None, (X, z)
    if args.fn:
        return _function(args.fn, n), None
    if args.spline:
        if n != 1:
            raise UsageError(f"a spline target needs n=1, network has n={n}")
        s = Spline1D.from_dict(io.read_json(args.spline))
        return (lambda X: s(np.asarray(X)[:, 0])), None
    d = io.read_json(args.target)
    if "knots" in d:
        if n != 1:
            raise UsageError(f"a spline target needs n=1, network has n={n}")
        s = Spline1D.from_dict(d)
        return (lambda X: s(np.asarray(X)[:, 0])), None
    if "units" in d:
        other = ReluNetwork.from_dict(d)
        if other.n != n:
            raise UsageError(f"target has n={other.n}, network has n={n}")
        return other.eval, None
    pl = PiecewiseLinear.from_dict(d)
    if pl.n != n:
        raise UsageError(f"target has n={pl.n}, network has n={n}")
    return pl, None


def cmd_verify(args):
    net = _load_net(args.net)
    f, fixed = _verify_target(args, net.n)
    if fixed is not None:
        X, z = fixed
    else:
        if args.lattice:
            X = lattice(net.n, args.lattice)
        else:
            X = np.random.Generator(np.random.Philox(args.seed)).uniform(size=(args.samples, net.n))
        z = np.asarray(f(X), float)
    zh = net.eval(X)
    eps = relative_error(z, zh) if z.max() > z.min() else float(np.sqrt(np.mean((z - zh) ** 2)))
    rep = {"max_abs_err": float(np.max(np.abs(z - zh))), "epsilon": eps, "samples": int(len(z))}
    _out(args.report, rep)
    if args.report:
        print(f"max_abs_err {rep['max_abs_err']:.6g}  epsilon {eps:.6g}")


def cmd_eval(args):
    net = _load_net(args.net)
    if args.points:
        X = np.loadtxt(args.points, delimiter=",", skiprows=1, ndmin=2)[:, :net.n]
    elif args.x:
        X = np.array([[float(t) for t in args.x.split(",")]])
    else:
        raise UsageError("give --points or --x")
    if X.shape[1] != net.n:
        raise UsageError(f"points have n={X.shape[1]}, network has n={net.n}")
    z = net.eval(X)
    if args.out:
        io.write_csv(args.out, X, z)
    else:
        for v in z:
            print(repr(float(v)))


# ------------------------------------------------------------------ svg

_COLOURS = {LOCAL_POSITIVE: "#1f5fbf", LOCAL_NEGATIVE: "#c62828", UNIVERSAL_GLOBAL: "#000000",
            GLOBAL_FOR_ORDER: "#000000"}


def svg_diagram(net, report, size=400):
    pad = 30
    W = size + 2 * pad
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{W}" viewBox="0 0 {W} {W}">',
             f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#888"/>']
    labels = {l.unit: l.cls for l in report.labels}
    if net.n == 1:
        y0 = pad + size / 2
        parts.append(f'<line x1="{pad}" y1="{y0}" x2="{pad + size}" y2="{y0}" stroke="#888"/>')
        for i, u in enumerate(net.units):
            col = _COLOURS.get(labels[i])
            if col is None or abs(u.w[0]) < 1e-12:
                continue
            k = -u.b / u.w[0]
            x = pad + size * min(max(k, -0.05), 1.05)
            d = 1 if u.w[0] > 0 else -1
            parts.append(f'<line x1="{x:.2f}" y1="{y0 - 40}" x2="{x:.2f}" y2="{y0 + 40}" stroke="{col}"/>')
            parts.append(f'<line x1="{x:.2f}" y1="{y0 - 40 + 8 * i % 80}" x2="{x + 20 * d:.2f}" '
                         f'y2="{y0 - 40 + 8 * i % 80}" stroke="{col}"/>')
    else:
        for i, u in enumerate(net.units):
            col = _COLOURS.get(labels[i])
            if col is None:
                continue
            seg = _clip_line(u.w, u.b)
            if seg is None:
                continue
            (x1, y1), (x2, y2) = seg
            P = lambda x, y: (pad + size * x, pad + size * (1 - y))
            a, b = P(x1, y1), P(x2, y2)
            parts.append(f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" y2="{b[1]:.2f}" stroke="{col}"/>')
            m = np.array([(x1 + x2) / 2, (y1 + y2) / 2])
            nrm = u.w / np.linalg.norm(u.w) * 0.03
            for off, txt in ((nrm, "+"), (-nrm, "0")):
                q = P(*(m + off))
                parts.append(f'<text x="{q[0]:.2f}" y="{q[1]:.2f}" font-size="10" fill="{col}">{txt}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clip_line(w, b):
    pts = []
    for x in (0.0, 1.0):
        if abs(w[1]) > 1e-12:
            y = -(w[0] * x + b) / w[1]
            if -1e-12 <= y <= 1 + 1e-12:
                pts.append((x, y))
    for y in (0.0, 1.0):
        if abs(w[0]) > 1e-12:
            x = -(w[1] * y + b) / w[0]
            if -1e-12 <= x <= 1 + 1e-12:
                pts.append((x, y))
    pts = sorted(set((round(x, 12), round(y, 12)) for x, y in pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def build_parser():
    p = _Parser(prog="shallowrelu", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile-spline1d", help="exact 1D spline to network")
    c.add_argument("--spline", required=True)
    c.add_argument("--basis", choices=[ONE_SIDED, ADDED, SUBSTITUTED, COMPOUND], default=ONE_SIDED)
    c.add_argument("--plan", help="BasisPlan JSON overriding the default plan for --basis")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile_spline1d)

    c = sub.add_parser("construct", help="realize a boundary-determined target on an axis grid")
    c.add_argument("--grid", required=True, help="M or M1,M2,...")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--target", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("approximate", help="grid approximation of a function")
    c.add_argument("--fn", required=True, help="poly|poly16|sinsum|quad|file:expr.json")
    c.add_argument("--M", type=int, default=10)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--out")
    c.add_argument("--report")
    c.set_defaults(func=cmd_approximate)

    c = sub.add_parser("make-data", help="lattice dataset as CSV")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--fn", choices=BUILTINS)
    g.add_argument("--spline")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--step", type=float, default=0.1)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_make_data)

    c = sub.add_parser("train", help="full-batch gradient descent")
    c.add_argument("--data", required=True)
    c.add_argument("--units", type=int, default=20)
    c.add_argument("--lr", type=float, default=0.01)
    c.add_argument("--steps", type=int, default=4000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output-bias", action="store_true")
    c.add_argument("--out")
    c.add_argument("--report")
    c.set_defaults(func=cmd_train)

    c = sub.add_parser("analyze", help="unit taxonomy, orders and coverage")
    c.add_argument("--net", required=True)
    c.add_argument("--report")
    c.add_argument("--svg")
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("verify", help="compare a network against a target")
    c.add_argument("--net", required=True)
    c.add_argument("--target", help="spline, piecewise-linear or network JSON")
    c.add_argument("--spline")
    c.add_argument("--fn")
    c.add_argument("--data")
    c.add_argument("--lattice", type=float, help="sample on a lattice with this step instead")
    c.add_argument("--samples", type=int, default=10000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--report")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("eval", help="evaluate a network")
    c.add_argument("--net", required=True)
    c.add_argument("--points", help="CSV with header x1..xn")
    c.add_argument("--x", help="one point, comma separated")
    c.add_argument("--out")
    c.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NUMERIC_ERRORS as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
