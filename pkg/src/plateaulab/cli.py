"""Command-line driver.

Exit codes: 0 success, 1 I/O failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .harness import ConfigError, SweepConfig, emit_outputs, full_sweep, load_config, load_result, run_single
from .harness.output import canonical_json
from .optimizers import OPTIMIZERS
from .quantum import TWO_PI, AnsatzSpec
from .stats import (
    DeltaCConfig,
    estimate_delta_c,
    estimate_gradient_variance,
    estimate_max_gradient_variance,
    fit_exponential,
    line_integral_check,
    relative_component,
    variance_record,
)

log = logging.getLogger("plateaulab")

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2


def _write_records(records: list, out: Path, stem: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(canonical_json(records))
    if records:
        keys = list(records[0])
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            writer.writeheader()
            writer.writerows(records)


def _sweep_config(args) -> SweepConfig:
    config = load_config(args.config) if args.config else SweepConfig()
    data = config.to_dict()
    for key in ("n_list", "optimizers", "shot_grid", "runs_per_cell", "cost_threshold", "budget"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.seed is not None:
        data["global_seed"] = args.seed
    return SweepConfig.from_dict(data)


def cmd_optimize(args) -> int:
    p = args.p if args.p is not None else args.n
    rec = run_single(args.optimizer, AnsatzSpec(args.n, p), args.shots, args.seed or 0,
                     args.threshold, int(args.budget))
    text = canonical_json(asdict(rec))
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _sweep_config(args)
    if not config.optimizers:
        log.warning("empty optimizer list: nothing to do")
    result = full_sweep(config, jobs=args.jobs)
    if args.out:
        emit_outputs(result, args.out)
    for opt in config.optimizers:
        fit = result.fits.get(opt)
        pts = " ".join(f"n={n}:{med}" for n, med in result.scaling(opt))
        extra = f"  growth x{fit.growth_factor:.3g}/qubit r2={fit.r_squared:.3f}" if fit else ""
        print(f"{opt:17s} {pts}{extra}")
    return EXIT_OK


def cmd_variance(args) -> int:
    records, ns, vs = [], [], []
    for n in args.n_list:
        spec = AnsatzSpec(n, args.p if args.p is not None else n)
        mu = relative_component(spec, args.component_fraction)
        est = estimate_gradient_variance(spec, mu, args.samples, args.seed + n)
        records.append(variance_record(spec, f"d{mu}", est, args.seed + n))
        ns.append(n)
        vs.append(est.variance)
        print(f"n={n} mu={mu} mean={est.mean:+.3e} var={est.variance:.4e} +- {est.stderr_variance:.1e}")
    if len(ns) >= 3 and min(vs) > 0:
        fit = fit_exponential(ns, vs)
        print(f"fitted base b={fit.fitted_base:.4f}  r2={fit.r_squared:.4f}")
    if args.out:
        _write_records(records, Path(args.out), "variance")
    return EXIT_OK


def cmd_delta_c(args) -> int:
    records = []
    for n in args.n_list:
        spec = AnsatzSpec(n, args.p if args.p is not None else n)
        f_hat = estimate_max_gradient_variance(spec, args.gradient_samples, args.seed + 1000 + n)
        for L in (args.L if args.mode == "translated" else [0.0]):
            cfg = DeltaCConfig(args.mode, L, "random", args.samples, args.seed + n)
            est, rep = estimate_delta_c(spec, cfg, f_hat=f_hat)
            records.append(variance_record(
                spec, args.mode, est, cfg.seed, distance=rep.distance, f_hat=rep.f_hat,
                g_bound=rep.g_bound, within_bound=rep.within_bound,
                tails_ok=all(t.ok for t in rep.tails)))
            print(f"n={n} {args.mode} L={rep.distance:.4g} mean={est.mean:+.3e} (se {est.stderr_mean:.1e}) "
                  f"var={est.variance:.4e} bound={rep.g_bound:.4e} ok={rep.within_bound}")
    if args.out:
        _write_records(records, Path(args.out), f"delta_c_{args.mode}")
    return EXIT_OK


def cmd_check_integral(args) -> int:
    spec = AnsatzSpec(args.n, args.p)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for i in range(args.pairs):
        a = rng.uniform(0, TWO_PI, spec.m)
        b = rng.uniform(0, TWO_PI, spec.m)
        r = line_integral_check(spec, a, b, args.K)
        worst = max(worst, r)
        print(f"pair {i:2d}: residual {r:.3e}")
    print(f"max residual {worst:.3e}")
    return EXIT_OK


def cmd_report(args) -> int:
    result = load_result(args.input)
    emit_outputs(result, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plateaulab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=None):
        p.add_argument("--config", help="YAML file with SweepConfig fields")
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", help="output file or directory")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("optimize", help="single optimization run")
    common(p)
    p.add_argument("--optimizer", choices=OPTIMIZERS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--threshold", type=float, default=0.4)
    p.add_argument("--budget", type=float, default=1e8)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="full (n, optimizer, N) sweep")
    common(p)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+")
    p.add_argument("--optimizers", nargs="*", choices=OPTIMIZERS)
    p.add_argument("--shot-grid", dest="shot_grid", type=int, nargs="+")
    p.add_argument("--runs", dest="runs_per_cell", type=int)
    p.add_argument("--threshold", dest="cost_threshold", type=float)
    p.add_argument("--budget", type=lambda s: int(float(s)))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("variance", help="gradient variance versus n")
    common(p, 0)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    p.add_argument("--p", type=int, help="layers (default p = n)")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--component-fraction", type=float, default=0.0)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("delta-c", help="cost-difference moments against the m^2 L^2 F bound")
    common(p, 0)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+", default=[4, 5, 6])
    p.add_argument("--p", type=int)
    p.add_argument("--mode", choices=("translated", "independent"), default="translated")
    p.add_argument("--L", type=float, nargs="+", default=[0.1, 1.0])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--gradient-samples", type=int, default=500)
    p.set_defaults(func=cmd_delta_c)

    p = sub.add_parser("check-integral", help="line-integral identity residuals")
    common(p, 0)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--K", type=int, default=129)
    p.set_defaults(func=cmd_check_integral)

    p = sub.add_parser("report", help="re-emit outputs from a sweep.json")
    common(p)
    p.add_argument("input", help="path to sweep.json")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report" and not args.out:
        parser.error("report needs --out")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
