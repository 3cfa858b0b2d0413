"""Command-line interface.

Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 domain
outcome (no boundary crossings, single-class training data).
"""

import argparse
import logging
import sys

import numpy as np

from .dataset import (
    VARIANTS,
    atomic_write_text,
    from_upper_triangle,
    make_paper_dataset,
    random_gaussian_points,
    read_dataset,
    read_points,
    write_dataset,
)
from .errors import NoCrossings, PkSVMError
from .evaluation import (
    CONTOUR_LEVELS,
    DEFAULT_RESOLUTION,
    PROBE_R_MAX,
    PROBE_R_MIN,
    PROBE_RAYS,
    PROBE_TOL,
    probe_boundary,
    score_grid,
    score_range,
    training_accuracy,
)
from .kernel import KernelParams, monte_carlo_kernel, pk_kernel
from .linalg import check_psd
from .modelfile import load_model, save_model
from .solver import SINGLE_CLASS, SolverParams, classify, decision_scores, train

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

DEFAULT_TEST_COV = ("0.01", "0", "0.01")

log = logging.getLogger("pksvm")


class UsageError(Exception):
    pass


def _cov_from_flags(values, dim=2):
    try:
        vals = np.asarray(values, dtype=float)
    except ValueError:
        raise UsageError(f"--cov entries must be numbers, got {values}") from None
    expected = dim * (dim + 1) // 2
    if vals.size != expected:
        raise UsageError(f"--cov needs {expected} upper-triangle entries for dimension {dim}, got {vals.size}")
    cov = from_upper_triangle(vals, dim)
    check_psd(cov)
    return cov


def _range(values, name):
    lo, hi = values
    if not lo < hi:
        raise UsageError(f"{name}: min must be smaller than max, got {lo} {hi}")
    return lo, hi


def cmd_generate(args):
    ds = make_paper_dataset(args.variant, args.seed)
    write_dataset(ds, args.out)
    pos = int(np.sum(ds.labels == 1))
    neg = int(np.sum(ds.labels == -1))
    print(f"wrote {len(ds)} points to {args.out}")
    print(f"  label +1: {pos} points, cov {ds.points[0].cov.tolist()}")
    print(f"  label -1: {neg} points, cov {ds.points[-1].cov.tolist()}")
    return EXIT_OK


def cmd_train(args):
    ds = read_dataset(args.data)
    model = train(ds, KernelParams(args.sigma), SolverParams(lam=args.lam, kkt_tol=args.kkt_tol))
    diag = model.diagnostics
    if SINGLE_CLASS in diag.flags:
        print("SingleClass: every training label is identical; nothing to separate", file=sys.stderr)
        return EXIT_DOMAIN
    save_model(model, args.out)
    acc = training_accuracy(model, ds)
    print(f"trained on {len(ds)} points (sigma={args.sigma}, lambda={args.lam})")
    print(f"  support vectors: {diag.n_support}")
    print(f"  dual objective:  {diag.dual_objective!r}")
    print(f"  iterations:      {diag.iterations}")
    print(f"  bias:            {model.bias!r}")
    print(f"  train accuracy:  {acc:.4f}")
    print(f"  flags:           {', '.join(diag.flags) or 'none'}")
    print(f"wrote model to {args.out}")
    return EXIT_OK


def cmd_predict(args):
    model = load_model(args.model)
    points, _ = read_points(args.queries, require_label=False)
    lines = ["score,sign"]
    for p in points:
        s = float(decision_scores(model, p.mean[None, :], p.cov)[0])
        lines.append(f"{s!r},{int(classify(s))}")
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_grid(args):
    x_range = _range(args.x_range, "--x-range")
    y_range = _range(args.y_range, "--y-range")
    if args.nx < 1 or args.ny < 1:
        raise UsageError("--nx and --ny must be positive")
    model = load_model(args.model)
    cov = _cov_from_flags(args.cov)
    grid = score_grid(model, cov, x_range, y_range, args.nx, args.ny)
    atomic_write_text(args.out, grid.to_csv())
    lo, hi = score_range(grid)
    print(f"wrote {args.nx}x{args.ny} grid to {args.out}")
    print(f"  score range: [{lo:.6g}, {hi:.6g}]")
    for lvl, frac in grid.level_fractions().items():
        print(f"  fraction of cells with score >= {lvl:+g}: {frac:.4f}")
    return EXIT_OK


def cmd_probe(args):
    if not args.r_min < args.r_max:
        raise UsageError("--r-min must be smaller than --r-max")
    if args.rays < 1:
        raise UsageError("--rays must be positive")
    model = load_model(args.model)
    cov = _cov_from_flags(args.cov)
    probe = probe_boundary(model, cov, args.rays, args.r_min, args.r_max, args.tol,
                           tuple(args.center), args.level)
    if args.json:
        text = probe.to_json() + "\n"
        if args.out:
            atomic_write_text(args.out, text)
        else:
            sys.stdout.write(text)
    else:
        print(f"{'angle':>10} {'radius':>12}")
        for a, r in zip(probe.angles, probe.crossings):
            print(f"{a:10.6f} {'-' if r is None else f'{r:12.6f}':>12}")
        if probe.found:
            print(f"mean boundary radius: {probe.mean:.6f} ({probe.found}/{probe.ray_count} rays)")
    if probe.found == 0:
        print("NoCrossings: no ray crossed the requested level", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_verify_kernel(args):
    if args.dim < 1:
        raise UsageError("--dim must be at least 1")
    if args.pairs < 1 or args.samples < 1:
        raise UsageError("--pairs and --samples must be positive")
    kp = KernelParams(args.sigma)
    pts = random_gaussian_points(args.dim, 2 * args.pairs, args.seed)
    failures = 0
    print(f"{'pair':>4} {'closed form':>14} {'monte carlo':>14} {'std err':>10} {'z':>7}")
    for k in range(args.pairs):
        a, b = pts[2 * k], pts[2 * k + 1]
        exact = pk_kernel(a, b, kp)
        est, se = monte_carlo_kernel(a, b, kp, args.samples, args.seed + 1 + k)
        ok = abs(exact - est) <= 3.0 * se
        z = abs(exact - est) / se if se > 0 else (0.0 if exact == est else float("inf"))
        failures += not ok
        print(f"{k:4d} {exact:14.8f} {est:14.8f} {se:10.2e} {z:7.2f}{'' if ok else '  FAIL'}")
    print(f"{args.pairs - failures}/{args.pairs} pairs within 3 standard errors")
    return EXIT_OK if failures == 0 else EXIT_DATA


def _add_cov(p):
    p.add_argument("--cov", nargs="+", default=list(DEFAULT_TEST_COV), metavar="V",
                   help="test covariance as upper-triangle entries, e.g. '0.09 0 0.09' (default: 0.01 0 0.01)")


def build_parser():
    parser = argparse.ArgumentParser(prog="pksvm", description="Probabilistic kernel SVM for Gaussian points.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the synthetic disk/annulus dataset")
    p.add_argument("--variant", choices=VARIANTS, default="isotropic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="dataset.csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a model on a dataset file")
    p.add_argument("--data", default="dataset.csv")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.001)
    p.add_argument("--kkt-tol", type=float, default=1e-6)
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score query Gaussian points")
    p.add_argument("--model", default="model.json")
    p.add_argument("--queries", required=True, help="CSV or JSON of (mean, cov); labels ignored")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="write decision scores over a rectangle for a fixed covariance")
    p.add_argument("--model", default="model.json")
    _add_cov(p)
    p.add_argument("--x-range", nargs=2, type=float, default=[-2.0, 2.0], metavar=("MIN", "MAX"))
    p.add_argument("--y-range", nargs=2, type=float, default=[-2.0, 2.0], metavar=("MIN", "MAX"))
    p.add_argument("--nx", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--ny", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--out", default="grid.csv")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("probe", help="locate the decision boundary along rays from a center")
    p.add_argument("--model", default="model.json")
    _add_cov(p)
    p.add_argument("--rays", type=int, default=PROBE_RAYS)
    p.add_argument("--r-min", type=float, default=PROBE_R_MIN)
    p.add_argument("--r-max", type=float, default=PROBE_R_MAX)
    p.add_argument("--tol", type=float, default=PROBE_TOL)
    p.add_argument("--center", nargs=2, type=float, default=[0.0, 0.0])
    p.add_argument("--level", type=float, default=0.0,
                   help=f"score level to locate (contours of interest: {', '.join(map(str, CONTOUR_LEVELS))})")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("verify-kernel", help="compare the closed-form kernel with Monte-Carlo estimates")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.set_defaults(func=cmd_verify_kernel)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except NoCrossings as exc:
        print(f"NoCrossings: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, PkSVMError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
