"""Command-line interface: ``hadquant <command> [options]``.

Every command writes JSON (``--out``, or standard output when omitted)
carrying a ``manifest`` block with the command, arguments, solver
configuration, seeds and package version.  Wall time is only printed in
the human-readable summary so that repeated runs give identical files.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ContractViolation,
    ConvergenceError,
    DatasetParseError,
    DatasetValidationError,
    DegeneratePairError,
    DegenerateSampleError,
    SolverError,
)
from .experiments import (
    BETA_GRID,
    SimulationSpec,
    approximation_error_table,
    isoquantile_contours,
    simulate_poincare_dataset,
)
from .geometry import SPD, Euclidean, Hyperboloid, numerical_gradient
from .io import dumps, load_dataset
from .quantile import GradientMode, LossKind, QuantileIndex, grad_exact, loss
from .solver import DescentConfig, descent, quantile_field
from .stats import (
    breakdown_probe,
    directions_circle,
    directions_random_antipodal,
    measures,
    perm_test,
)

EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers -------------------------------------------------------
def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _json_array(text):
    try:
        return np.asarray(json.loads(text), dtype=float)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"expected a JSON array, got {text!r}") from None


def _pair(text):
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L:l, got {text!r}") from None


def _grid_spec(text):
    kind, _, num = text.partition(":")
    if kind not in ("circle", "random") or not num.isdigit():
        raise argparse.ArgumentTypeError(f"expected circle:L or random:K, got {text!r}")
    return kind, int(num)


def _add_solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--tol", type=float, default=None, help="learning-rate floor (default 1e-6 * lr0)")
    g.add_argument("--maxcount", type=int, default=200, help="maximum number of rejected moves")
    g.add_argument("--lr0", type=float, default=None, help="initial learning rate (default 0.1 * spread)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=None, help="worker processes (default: all CPUs)")


def _add_index(p, loss_choice=True):
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--xi-anchor", type=_json_array, default=None, help="anchor point as a JSON array")
    p.add_argument("--xi-vec", type=_json_array, default=None, help="tangent at the anchor as a JSON array")
    p.add_argument("--xi-circle", type=_pair, default=None, metavar="L:l", help="direction l of an L-point circle grid")
    p.add_argument("--grad", choices=[m.value for m in GradientMode], default="exact")
    if loss_choice:
        p.add_argument("--loss", choices=[k.value for k in LossKind], default="data")


def _cfg(args):
    return DescentConfig(tol=args.tol, maxcount=args.maxcount, lr0=args.lr0, seed=args.seed)


def _anchor(M, args):
    return M.origin if args.xi_anchor is None else M.check_point(args.xi_anchor)


def _direction(M, args):
    anchor = _anchor(M, args)
    if args.xi_circle is not None:
        L, l = args.xi_circle
        if not 1 <= l <= L:
            raise ContractViolation("--xi-circle needs 1 <= l <= L")
        return directions_circle(M, anchor, L).dirs[l - 1]
    if args.xi_vec is None:
        raise ContractViolation("give --xi-vec or --xi-circle")
    return M.boundary_direction(anchor, M.check_tangent(anchor, args.xi_vec))


def _make_grid(M, spec, seed):
    kind, num = spec

    def build(anchor):
        if kind == "circle":
            return directions_circle(M, anchor, num)
        if num % 2:
            raise ContractViolation("random:K needs an even K")
        return directions_random_antipodal(M, anchor, num // 2, seed)

    return build


def _check_grad(kind, mode):
    if mode is GradientMode.EXACT and kind is LossKind.PARAM:
        raise ContractViolation("--grad exact requires --loss data")


# -- commands ---------------------------------------------------------------
def cmd_quantile(args):
    M, X = load_dataset(args.data)
    kind, mode = LossKind(args.loss), GradientMode(args.grad)
    _check_grad(kind, mode)
    q = QuantileIndex(args.beta, _direction(M, args))
    res = descent(M, X, q, _cfg(args), mode, kind)
    summary = f"quantile beta={args.beta}: objective {res.objective:.6g}, residual {res.first_order_residual:.3g}"
    return {"result": res, "xi": {"anchor": q.xi.anchor, "vec": q.xi.unit_dir}}, summary


def cmd_field(args):
    M, X = load_dataset(args.data)
    kind, mode = LossKind(args.loss), GradientMode(args.grad)
    _check_grad(kind, mode)
    cfg = _cfg(args)
    if args.directions is not None:
        anchor = _anchor(M, args) if args.xi_anchor is not None else M.origin
        dirs = list(_make_grid(M, args.directions, args.seed)(anchor).dirs)
    else:
        dirs = [_direction(M, args)]
    res = quantile_field(M, X, args.betas, dirs, cfg, mode, kind)
    out = [
        {"beta": b, "direction": j, "vec": dirs[j].unit_dir, "result": res[i][j]}
        for i, b in enumerate(args.betas)
        for j in range(len(dirs))
    ]
    return {"results": out}, f"field: {len(out)} quantiles"


def cmd_measures(args):
    M, X = load_dataset(args.data)
    kind, mode = LossKind(args.loss), GradientMode(args.grad)
    _check_grad(kind, mode)
    rep = measures(
        M, X, args.beta, args.beta_prime, _make_grid(M, args.directions, args.seed), _cfg(args), mode, kind,
        beta_kappa=args.beta_kappa,
    )
    s = f"delta1={rep.delta1:.4g} gamma1={rep.gamma1:.4g} kappa1={rep.kappa1:.4g} alpha={rep.alpha:.4g}"
    return {"measures": rep}, s


def _read_indices(M, path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list) or not doc:
        raise DatasetParseError("indices file must hold a non-empty JSON list")
    out = []
    for i, e in enumerate(doc):
        try:
            anchor = M.origin if "anchor" not in e else M.check_point(np.asarray(e["anchor"], float))
            if "circle" in e:
                L, l = _pair(e["circle"])
                xi = directions_circle(M, anchor, L).dirs[l - 1]
            else:
                xi = M.boundary_direction(anchor, np.asarray(e["vec"], float))
            out.append(QuantileIndex(float(e["beta"]), xi))
        except (KeyError, TypeError, argparse.ArgumentTypeError) as exc:
            raise DatasetParseError(f"index {i}: {exc}") from None
    return out


def cmd_permtest(args):
    MA, A = load_dataset(args.data_a)
    MB, B = load_dataset(args.data_b)
    if repr(MA) != repr(MB):
        raise ContractViolation("the two datasets live on different manifolds")
    idx = _read_indices(MA, args.indices)
    n_jobs = args.threads if args.threads is not None else (os.cpu_count() or 1)
    r = perm_test(MA, A, B, idx, args.n_perm, args.seed, _cfg(args), GradientMode(args.grad), n_jobs=n_jobs)
    return {"permtest": r}, f"T0={r.T0:.4g} (p0={r.p0:.4g}), T1={r.T1:.4g} (p1={r.p1:.4g})"


def _simulated_or_loaded(args):
    if args.data is not None:
        return load_dataset(args.data)
    spec = SimulationSpec(n_points=args.n_points, sigma=args.sigma, seed=args.seed, compress_y=args.compress_y)
    return Hyperboloid(2), simulate_poincare_dataset(spec)


def cmd_table12(args):
    M, X = _simulated_or_loaded(args)
    t = approximation_error_table(M, X, args.betas, args.L, _cfg(args))
    lines = ["beta      " + " ".join(f"{b:>8g}" for b in t.betas)]
    for (k, m), row in zip(t.rows, t.cells):
        lines.append(f"{k.value}/{m.value:<10}" + " ".join(f"{c:8.4f}" for c in row))
    return {"table": t}, "\n".join(lines)


def cmd_contours(args):
    M, X = _simulated_or_loaded(args)
    cs = isoquantile_contours(M, X, args.betas, args.L, _cfg(args), GradientMode(args.grad))
    rows = [(b, v, float(u[0]), float(u[1])) for b, poly in cs.items() for v, u in enumerate(poly)]
    return {"contours": {str(b): poly for b, poly in cs.items()}}, f"contours: {len(cs)} levels", rows


def cmd_breakdown(args):
    M, X = load_dataset(args.data)
    kind, mode = LossKind(args.loss), GradientMode(args.grad)
    _check_grad(kind, mode)
    q = QuantileIndex(args.beta, _direction(M, args))
    d = breakdown_probe(M, X, q, args.j, args.magnitudes, _cfg(args), mode, kind)
    s = "displacements: " + ", ".join(f"{v:.4g}" for v in d)
    return {"magnitudes": args.magnitudes, "j": args.j, "displacements": d}, s


def _gradcheck_manifold(args):
    if args.manifold == "euclidean":
        return Euclidean(args.n)
    if args.manifold == "hyperboloid":
        return Hyperboloid(args.n, args.kappa)
    return SPD(args.m)


def cmd_gradcheck(args):
    M = _gradcheck_manifold(args)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.n_configs):
        x, p = M.random_point(rng, 0.7), M.random_point(rng, 0.7)
        a = M.random_point(rng, 0.7)
        b = float(rng.uniform(0, 0.95))
        q = QuantileIndex(b, M.boundary_direction(a, M.random_tangent(rng, a)))
        g = grad_exact(M, x, p, q)
        fd = numerical_gradient(M, lambda z: float(loss(M, x, z, q)), p, h=args.h)
        worst = max(worst, float(M.norm(p, g - fd) / M.norm(p, fd)))
    out = {"manifold": repr(M), "n_configs": args.n_configs, "h": args.h, "max_relative_error": worst}
    return out, f"{M!r}: max relative error {worst:.3g} over {args.n_configs} configurations"


# -- entry point ------------------------------------------------------------
def build_parser():
    p = _Parser(prog="hadquant", description="Geometric quantiles on Hadamard manifolds.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, fn, help_):
        c = sub.add_parser(name, help=help_)
        c.set_defaults(func=fn)
        c.add_argument("--out", default=None, help="output path (default: standard output)")
        _add_solver(c)
        return c

    c = command("quantile", cmd_quantile, "one sample quantile")
    c.add_argument("--data", required=True)
    _add_index(c)

    c = command("field", cmd_field, "quantiles over levels and directions")
    c.add_argument("--data", required=True)
    c.add_argument("--betas", type=_floats, required=True)
    c.add_argument("--directions", type=_grid_spec, default=None, help="circle:L or random:K")
    c.add_argument("--xi-anchor", type=_json_array, default=None)
    c.add_argument("--xi-vec", type=_json_array, default=None)
    c.add_argument("--xi-circle", type=_pair, default=None, metavar="L:l")
    c.add_argument("--grad", choices=[m.value for m in GradientMode], default="exact")
    c.add_argument("--loss", choices=[k.value for k in LossKind], default="data")

    c = command("measures", cmd_measures, "dispersion, skewness, kurtosis and asymmetry")
    c.add_argument("--data", required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--beta-prime", type=float, required=True)
    c.add_argument("--beta-kappa", type=float, default=None)
    c.add_argument("--directions", type=_grid_spec, required=True, help="circle:L or random:K")
    c.add_argument("--grad", choices=[m.value for m in GradientMode], default="exact")
    c.add_argument("--loss", choices=[k.value for k in LossKind], default="data")

    c = command("permtest", cmd_permtest, "two-sample permutation test")
    c.add_argument("--data-a", required=True)
    c.add_argument("--data-b", required=True)
    c.add_argument("--indices", required=True, help="JSON list of {beta, vec | circle, [anchor]}")
    c.add_argument("--n-perm", type=int, default=500)
    c.add_argument("--grad", choices=["exact", "transport", "radial"], default="exact")

    for name, fn, help_ in (
        ("table12", cmd_table12, "gradient approximation error table"),
        ("contours", cmd_contours, "isoquantile contours as Poincare-disk polylines (CSV)"),
    ):
        c = command(name, fn, help_)
        c.add_argument("--data", default=None, help="dataset (default: simulate)")
        c.add_argument("--n-points", type=int, default=100)
        c.add_argument("--sigma", type=float, default=float(np.sqrt(0.3)))
        c.add_argument("--compress-y", type=float, default=None)
        c.add_argument("--betas", type=_floats, default=list(BETA_GRID))
        c.add_argument("--L", type=int, default=64)
        if name == "contours":
            c.add_argument("--grad", choices=["exact", "transport", "radial"], default="exact")

    c = command("breakdown", cmd_breakdown, "displacement under gross contamination")
    c.add_argument("--data", required=True)
    _add_index(c)
    c.add_argument("--j", type=int, required=True)
    c.add_argument("--magnitudes", type=_floats, required=True)

    c = command("gradcheck", cmd_gradcheck, "exact gradient against finite differences")
    c.add_argument("--manifold", choices=["euclidean", "hyperboloid", "spd"], required=True)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--kappa", type=float, default=-1.0)
    c.add_argument("--m", type=int, default=3)
    c.add_argument("--n-configs", type=int, default=100)
    c.add_argument("--h", type=float, default=1e-4)
    return p


def _replay_argv(argv):
    """argv without output and thread flags, which do not affect results."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a in ("--out", "--threads"):
            skip = True
        elif not a.startswith(("--out=", "--threads=")):
            out.append(a)
    return out


def _manifest(args, argv):
    skip = {"func", "out", "threads"}
    config = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "command": args.command,
        "argv": _replay_argv(argv),
        "config": config,
        "solver": _cfg(args).to_dict(),
        "seeds": [args.seed],
        "version": __version__,
    }


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        out = args.func(args)
    except (DatasetValidationError, DatasetParseError, ContractViolation, DegeneratePairError, OSError) as exc:
        print(f"hadquant: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, ConvergenceError, DegenerateSampleError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"hadquant: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    payload, summary = out[0], out[1]
    payload = dict(payload, manifest=_manifest(args, argv))
    if args.command == "contours" and args.out is not None:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["beta", "vertex", "u1", "u2"])
            w.writerows([[repr(b), v, repr(u1), repr(u2)] for b, v, u1, u2 in out[2]])
        _write(args.out + ".manifest.json", dumps(payload["manifest"]))
    else:
        _write(args.out, dumps(payload))
    # keep stdout pure JSON when no output file is given
    stream = sys.stdout if args.out is not None else sys.stderr
    print(summary, file=stream)
    print(f"wall time {time.perf_counter() - t0:.2f} s", file=stream)
    return 0


if __name__ == "__main__":
    sys.exit(main())
