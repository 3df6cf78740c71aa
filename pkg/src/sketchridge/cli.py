"""Command line interface.

Subcommands: ``solve`` (exact or sketched ridge), ``bench`` (row-count
sweep with timing ratios), ``stream`` (two-pass turnstile solve from an
update file), ``verify`` (statistical probes, CSV curves), and ``krr``
(polynomial kernel ridge fit/predict).

Every subcommand is deterministic given ``--seed``; rerunning writes
byte-identical outputs except for timing, which is isolated in its own
field or column.  The environment variable ``SKETCHRIDGE_THREADS`` caps
BLAS parallelism for the whole process (default 1).
"""

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .instances import gen_gaussian_instance
from .mmio import read_matrix
from .polykernel import krr_fit, krr_predict_batch, load_krr_model, make_plan, save_krr_model
from .ridge import (
    cost,
    read_problem,
    ridge_exact,
    ridge_sketched_iterative,
    sketch_factory,
    write_report,
)
from .sketches import IdentitySketch, SketchSpec, make_sketch
from .streaming import stream_solve
from .verify import (
    amm_lowerbound_probe,
    frobenius_preservation_check,
    write_curve_csv,
)

_BENCH_SCHEMA = "sketchridge-bench-v1"
_VERIFY_SCHEMA = "sketchridge-verify-v1"


def _parse_sketch(text, d, m_override=None):
    """Parse ``family:m:s`` (or ``identity``) into a sketch factory input."""
    if text == "identity":
        return None  # caller builds IdentitySketch(d)
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(
            "--sketch expects 'identity' or 'family:m[:s]', got %r" % text
        )
    family = parts[0].lower()
    m = m_override if m_override is not None else int(parts[1])
    s = int(parts[2]) if len(parts) == 3 else 1
    return SketchSpec(family=family, m=m, d=d, s=s, seed=0)


def _load_problem(args):
    if args.gen_gaussian is not None and args.instance is not None:
        raise ValueError("give exactly one of --instance and --gen-gaussian")
    if args.gen_gaussian is not None:
        n, d, ratio = args.gen_gaussian
        problem, _ = gen_gaussian_instance(int(n), int(d), seed=args.seed,
                                           target_ratio=float(ratio))
        return problem
    if args.instance is not None:
        sidecar = args.b or str(Path(args.instance).with_suffix(".json"))
        return read_problem(args.instance, sidecar)
    raise ValueError("give exactly one of --instance and --gen-gaussian")


def _grid(text):
    values = [int(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("--grid is empty")
    return values


def cmd_solve(args):
    problem = _load_problem(args)
    extra = {"seed": args.seed, "lambda": problem.lam}
    x_star = None
    if args.exact_reference or args.sketch is None:
        t0 = time.perf_counter()
        x_star = ridge_exact(problem)
        exact_time = time.perf_counter() - t0
        extra["opt"] = cost(problem, x_star)

    if args.sketch is None:
        report = {
            "x_hat": [float(v) for v in x_star],
            "iterations": 0,
            "cost": extra["opt"],
            "rel_residuals": None,
            "wall_time": exact_time,
        }
        report.update(extra)
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return 0

    spec = _parse_sketch(args.sketch, problem.d)
    if spec is None:
        factory = lambda: IdentitySketch(problem.d)
        extra["sketch"] = "identity"
    else:
        factory = sketch_factory(spec.with_seed(args.seed))
        extra["sketch"] = "%s:%d:%d" % (spec.family, spec.m, spec.s)
    report = ridge_sketched_iterative(problem, args.t, factory, x_star=x_star)
    if x_star is not None:
        denom = float(np.linalg.norm(x_star)) or 1.0
        extra["rel_err"] = float(np.linalg.norm(report.x_hat - x_star)) / denom
        extra["cost_ratio"] = report.cost / extra["opt"] if extra["opt"] > 0 else 1.0
    write_report(args.out, report, extra=extra)
    return 0


def _median_time(fn, repeats=3):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, sorted(times)[len(times) // 2]


def cmd_bench(args):
    problem = _load_problem(args)
    grid = _grid(args.grid)
    x_star, t_naive = _median_time(lambda: ridge_exact(problem))
    opt = cost(problem, x_star)
    x_norm = float(np.linalg.norm(x_star)) or 1.0
    rows = []
    for mi, m in enumerate(grid):
        spec = _parse_sketch(args.sketch, problem.d, m_override=m)
        cost_ratios, rel_errs, time_ratios = [], [], []
        for trial in range(args.trials):
            base = args.seed + 10_000 * mi + 100 * trial
            s_used = 0 if spec is None else spec.s

            # rebuild the factory per timed run so every run draws the same seeds
            def timed():
                if spec is None:
                    fac = lambda: IdentitySketch(problem.d)
                else:
                    fac = sketch_factory(spec.with_seed(base))
                return ridge_sketched_iterative(problem, args.t, fac)

            report, t_alg = _median_time(timed)
            cost_ratios.append(report.cost / opt if opt > 0 else 1.0)
            rel_errs.append(float(np.linalg.norm(report.x_hat - x_star)) / x_norm)
            time_ratios.append(t_alg / t_naive)
        rows.append(
            (m, s_used, args.t, float(np.mean(cost_ratios)),
             float(np.mean(rel_errs)), float(np.median(time_ratios)))
        )
    with open(args.out, "w", newline="") as fh:
        fh.write("# %s: cost_ratio/rel_err are means over %d seeds; "
                 "time_ratio is the median of per-seed median-of-3 timings\n"
                 % (_BENCH_SCHEMA, args.trials))
        writer = csv.writer(fh)
        writer.writerow(["m", "s", "t", "cost_ratio", "rel_err", "time_ratio"])
        for row in rows:
            writer.writerow([row[0], row[1], row[2], repr(row[3]), repr(row[4]),
                             repr(row[5])])
    return 0


def cmd_stream(args):
    if args.b is None:
        raise ValueError("--b sidecar (with b and lambda) is required")
    with open(args.b) as fh:
        sidecar = json.load(fh)
    b = np.asarray(sidecar["b"], dtype=np.float64)
    lam = float(sidecar["lambda"])
    spec = _parse_sketch(args.sketch, d=args.d)
    if spec is None:
        raise ValueError("streaming needs a sparse sketch, not identity")
    spec = spec.with_seed(args.seed)
    t0 = time.perf_counter()
    x = stream_solve(args.updates, b, lam, spec)
    elapsed = time.perf_counter() - t0
    out = {
        "x": [float(v) for v in x],
        "sketch": spec.to_json(),
        "updates": str(args.updates),
        "wall_time": elapsed,
    }
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_verify(args):
    if args.probe == "amm":
        grid = _grid(args.grid)
        curve = amm_lowerbound_probe(
            n=args.n, epsilon=args.epsilon, m_grid=grid, trials=args.trials,
            d=args.d, family=args.family, s=args.s, seed=args.seed,
        )
        write_curve_csv(args.out, curve,
                        comment="%s amm probe: normalized product error, "
                                "n=%d eps=%g d=%d"
                                % (_VERIFY_SCHEMA, args.n, args.epsilon, args.d))
        return 0
    if args.probe == "jl":
        grid = _grid(args.grid)
        s_grid = _grid(args.s_grid)
        rng = np.random.default_rng(args.seed)
        x = rng.standard_normal(args.d)
        x /= np.linalg.norm(x)
        with open(args.out, "w", newline="") as fh:
            fh.write("# %s jl probe: quantiles of ||Sx||^2 over fresh seeds\n"
                     % _VERIFY_SCHEMA)
            writer = csv.writer(fh)
            writer.writerow(["m", "s", "seed_base", "trials", "q50", "q90"])
            for m in grid:
                for s in s_grid:
                    spec = SketchSpec(family=args.family, m=m, d=args.d,
                                      s=min(s, m), seed=0)
                    vals = np.empty(args.trials)
                    col = np.ascontiguousarray(x[:, None])
                    for trial in range(args.trials):
                        sk = make_sketch(spec.with_seed(args.seed + trial))
                        sx = sk.apply(col)[:, 0]
                        vals[trial] = sx @ sx
                    vals.sort()
                    q50, q90 = np.quantile(vals, [0.5, 0.9])
                    writer.writerow([m, min(s, m), args.seed, args.trials,
                                     repr(float(q50)), repr(float(q90))])
        return 0
    if args.probe == "frobenius":
        rng = np.random.default_rng(args.seed)
        a = rng.standard_normal((args.d, args.cols))
        a /= np.linalg.norm(a)
        spec = SketchSpec(family="countsketch", m=args.m, d=args.d, s=1, seed=0)
        rate = frobenius_preservation_check(spec, a, args.epsilon, args.trials,
                                            seed_base=args.seed)
        # per-trial |ratio - 1| quantiles fill the standard curve schema
        devs = np.empty(args.trials)
        target = np.linalg.norm(a) ** 2
        for trial in range(args.trials):
            sk = make_sketch(spec.with_seed(args.seed + trial))
            devs[trial] = abs(np.linalg.norm(sk.apply(a)) ** 2 - target) / target
        devs.sort()
        q50, q90 = np.quantile(devs, [0.5, 0.9])
        with open(args.out, "w", newline="") as fh:
            fh.write("# %s frobenius probe: |norm ratio - 1| quantiles, "
                     "success_rate=%s at eps=%g\n"
                     % (_VERIFY_SCHEMA, repr(rate), args.epsilon))
            writer = csv.writer(fh)
            writer.writerow(["m", "s", "seed_base", "trials", "q50", "q90"])
            writer.writerow([args.m, 1, args.seed, args.trials,
                             repr(float(q50)), repr(float(q90))])
        return 0
    raise ValueError("unknown probe %r" % args.probe)


def cmd_krr(args):
    if args.model is not None:
        model = load_krr_model(args.model)
        queries = read_matrix(args.queries)
        if queries.shape[1] != model.plan.d:
            raise ValueError(
                "query dimension %d does not match training dimension %d"
                % (queries.shape[1], model.plan.d)
            )
        preds = krr_predict_batch(model, queries)
        with open(args.out, "w") as fh:
            json.dump({"predictions": [float(v) for v in preds]}, fh,
                      indent=2, sort_keys=True)
            fh.write("\n")
        return 0
    if args.train is None or args.b is None:
        raise ValueError("fit mode needs --train and --b; predict mode needs --model")
    a = read_matrix(args.train)
    with open(args.b) as fh:
        sidecar = json.load(fh)
    b = np.asarray(sidecar["b"], dtype=np.float64)
    lam = float(sidecar["lambda"])
    spec = _parse_sketch(args.sketch, d=a.shape[1])
    if spec is None:
        raise ValueError("krr needs a sparse leaf sketch, not identity")
    plan = make_plan(p=args.degree, d=a.shape[1], m=spec.m, s=spec.s,
                     seed=args.seed)
    model = krr_fit(a, b, lam, plan)
    save_krr_model(args.out, model, training_path=args.train)
    return 0


def _add_instance_flags(p):
    p.add_argument("--instance", help="Matrix Market file holding A")
    p.add_argument("--b", help="JSON sidecar {\"b\": [...], \"lambda\": r} "
                               "(defaults to the instance path with .json)")
    p.add_argument("--gen-gaussian", nargs=3, metavar=("N", "D", "RATIO"),
                   help="generate an i.i.d. Gaussian instance with the given "
                        "hardness ratio sigma^2/lambda")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sketchridge",
        description="Sketched ridge regression, streaming solves, and "
                    "sketch verification probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one ridge instance")
    _add_instance_flags(p)
    p.add_argument("--sketch", help="family:m:s, or 'identity'; omit for exact")
    p.add_argument("--t", type=int, default=1, help="sketched iterations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-reference", action="store_true",
                   help="also solve exactly and report rel_err / cost_ratio")
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("bench", help="sweep sketch rows on one instance")
    _add_instance_flags(p)
    p.add_argument("--sketch", required=True,
                   help="family:m:s; m is overridden by each --grid value")
    p.add_argument("--grid", required=True, help="comma-separated m values")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--trials", type=int, default=5, help="seeds per grid point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("stream", help="two-pass turnstile solve from a file")
    p.add_argument("--updates", required=True, help="text file of 'i j v' lines")
    p.add_argument("--b", required=True, help="JSON sidecar with b and lambda")
    p.add_argument("--sketch", required=True, help="family:m:s")
    p.add_argument("--d", type=int, required=True, help="column count of A")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="JSON output path")
    p.set_defaults(fn=cmd_stream)

    p = sub.add_parser("verify", help="statistical probes of sketch guarantees")
    p.add_argument("--probe", required=True, choices=["amm", "jl", "frobenius"])
    p.add_argument("--family", default="countsketch")
    p.add_argument("--n", type=int, default=4, help="amm probe: basis columns")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--grid", default="64", help="m values")
    p.add_argument("--s-grid", default="1", help="jl probe: s values")
    p.add_argument("--s", type=int, default=1, help="amm probe sparsity")
    p.add_argument("--m", type=int, default=20000, help="frobenius probe rows")
    p.add_argument("--d", type=int, default=512)
    p.add_argument("--cols", type=int, default=8, help="frobenius probe: A columns")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("krr", help="polynomial kernel ridge: fit or predict")
    p.add_argument("--train", help="Matrix Market training rows (fit mode)")
    p.add_argument("--b", help="JSON sidecar with targets b and lambda (fit mode)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--sketch", default="osnap:256:4", help="leaf sketch family:m:s")
    p.add_argument("--model", help="existing model JSON (predict mode)")
    p.add_argument("--queries", help="Matrix Market query rows (predict mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_krr)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = int(os.environ.get("SKETCHRIDGE_THREADS", "1"))
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        threadpool_limits = None
    try:
        if threadpool_limits is not None:
            with threadpool_limits(limits=threads):
                return args.fn(args)
        return args.fn(args)
    except (ValueError, OSError, IndexError) as exc:
        print("sketchridge: error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
