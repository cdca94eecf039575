"""Command-line interface: simulate samples, fit estimators, compare methods.

Exit codes: 0 success, 2 usage or validation problem, 3 runtime failure.
The default output directory comes from ``SVYMIX_OUT`` (falling back to the
working directory).  Every subcommand accepts ``--json`` for a
machine-readable result on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import adjust, harness
from .config import FitConfig, Schedule
from .survey import (
    COUNT,
    PopulationSpec,
    draw_stratified_sample,
    generate_population,
    load_population_spec,
    load_sample,
    save_sample,
)


def _out_dir(value):
    base = value or os.environ.get("SVYMIX_OUT") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(args):
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("burnin", "iters", "thin", "trunc"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "adjust_mass", None) is not None:
        data["adjust_mass"] = args.adjust_mass
    return FitConfig.from_dict(data) if data else None


def _resolve_population(args):
    if args.case:
        return harness.builtin_scenario(args.case, _load_config(args))
    spec = PopulationSpec.from_dict(json.loads(Path(args.spec).read_text()))
    cfg = _load_config(args) or FitConfig()
    if spec.space == COUNT:
        support = args.support or 100
        truth = harness.population_pmf(spec, support)
        return harness.Scenario("custom", spec, None, support, truth, cfg)
    grid = _parse_grid(args.grid) if args.grid else _default_grid_for(spec)
    truth = harness.population_density(spec, grid)
    return harness.Scenario("custom", spec, grid, None, truth, cfg)


def _default_grid_for(spec):
    means = [s.density.mean() for s in spec.strata]
    sds = [s.density.variance() ** 0.5 for s in spec.strata]
    lo = min(m - 4 * s for m, s in zip(means, sds))
    hi = max(m + 4 * s for m, s in zip(means, sds))
    return np.linspace(lo, hi, 100)


def _parse_grid(text):
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise ValueError(f"bad grid spec {text!r}; expected LO:HI:N") from exc


def cmd_simulate(args):
    scenario = _resolve_population(args)
    population = generate_population(scenario.population, args.seed)
    sample = draw_stratified_sample(population, scenario.population, args.seed)
    out = _out_dir(args.out)
    path = out / "sample.csv"
    save_sample(path, sample, population_spec=scenario.population)
    return {
        "sample": str(path),
        "meta": str(path.with_suffix(".meta.json")),
        "rows": len(sample),
        "seed": args.seed,
    }


def cmd_fit(args):
    sample = load_sample(args.sample)
    spec = load_population_spec(args.sample)
    cfg = _load_config(args) or FitConfig()
    method = "unadjusted" if args.no_adjust and args.method == "proposed" else args.method

    if sample.space == COUNT:
        support = args.support or 100
        truth = harness.population_pmf(spec, support) if spec else None
        scenario = _make_eval_scenario(spec, sample, cfg, support=support, truth=truth)
    else:
        if args.grid:
            grid = _parse_grid(args.grid)
        elif spec is not None:
            grid = _default_grid_for(spec)
        else:
            y = np.asarray(sample.values, dtype=float)
            pad = 3.0 * y.std()
            grid = np.linspace(y.min() - pad, y.max() + pad, 100)
        truth = harness.population_density(spec, grid) if spec else None
        scenario = _make_eval_scenario(spec, sample, cfg, grid=grid, truth=truth)

    summary = harness.fit_method(method, sample, scenario, args.seed)
    out = _out_dir(args.out)
    label = "k" if sample.space == COUNT else "y"
    if truth is not None:
        summary.truth = truth
    csv_path = out / f"{method}.csv"
    adjust.write_grid_summary(csv_path, summary, index_label=label)

    result = {"summary": str(csv_path), "method": method, "seed": args.seed}
    if truth is not None:
        result["coverage"] = adjust.coverage_metric(summary, truth)
        result["ise"] = harness.ise_metric(
            summary.mean, truth,
            grid=None if sample.space == COUNT else scenario.grid,
        )
    if args.trace and method in ("proposed", "unadjusted"):
        trace_path = out / f"{method}.trace.jsonl"
        _write_trace(trace_path, sample, scenario, method, args.seed)
        result["trace"] = str(trace_path)
    return result


def _make_eval_scenario(spec, sample, cfg, grid=None, support=None, truth=None):
    """Scenario-shaped bundle for fitting a stored sample; when the sidecar
    has no generating design, a placeholder spec carries only the grid."""
    if spec is None:
        # Fit without truth: synthesize a single-stratum placeholder design.
        from .survey import NormalMixture, PoissonMixture, StratumSpec

        if sample.space == COUNT:
            density = PoissonMixture(((1.0, max(float(np.mean(sample.values)), 0.5)),))
        else:
            density = NormalMixture(
                ((1.0, float(np.mean(sample.values)),
                  max(float(np.std(sample.values)), 1e-6)),)
            )
        spec = PopulationSpec.from_strata(
            [StratumSpec(0, sample.population_size, len(sample), density)]
        )
    if truth is None:
        truth = (
            harness.population_pmf(spec, support)
            if support is not None
            else harness.population_density(spec, grid)
        )
    return harness.Scenario("fit", spec, grid, support, truth, cfg)


def _write_trace(path, sample, scenario, method, seed):
    adjusted = method == "proposed"
    stream = harness._METHOD_STREAM[method]
    if scenario.space == COUNT:
        fit = harness.run_rounded_kernel_chain(
            sample, scenario.config, scenario.support, adjusted, seed, stream
        )
    else:
        fit = harness.run_dpmm_chain(
            sample, scenario.config, scenario.grid, adjusted, seed, stream
        )
    with open(path, "w") as fh:
        for k in range(fit.draws.shape[0]):
            record = {
                "lambda": fit.weights[k].tolist(),
                "mu": fit.means[k].tolist(),
                "tau2": fit.variances[k].tolist(),
                "alpha": float(fit.alphas[k]),
            }
            if adjusted:
                record["lambda_tilde"] = fit.adjusted_weights[k].tolist()
            fh.write(json.dumps(record) + "\n")


def cmd_compare(args):
    scenario = _resolve_population(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    out = _out_dir(args.out)
    report = harness.run_scenario(
        scenario, methods, args.seed, out_dir=out, workers=args.workers
    )
    return {
        "report": str(out / "report.json"),
        "scenario": scenario.name,
        "seed": args.seed,
        "methods": {
            name: {"coverage": res.coverage, "ise": res.ise}
            for name, res in report.methods.items()
        },
    }


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="svymix",
        description="Survey-weighted Bayesian density estimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_fitting=True):
        p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--json", action="store_true", help="JSON result on stdout")
        if with_fitting:
            p.add_argument("--config", default=None, help="JSON file mirroring FitConfig")
            p.add_argument("--burnin", type=int, default=None)
            p.add_argument("--iters", type=int, default=None)
            p.add_argument("--thin", type=int, default=None)
            p.add_argument("--trunc", type=int, default=None)
            p.add_argument("--adjust-mass", dest="adjust_mass", type=float, default=None)

    sim = sub.add_parser("simulate", help="generate a synthetic survey sample")
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--case", choices=["case1", "case2", "case3", "case4"])
    group.add_argument("--spec", help="population spec JSON file")
    sim.add_argument("--grid", default=None, help="LO:HI:N (continuous specs)")
    sim.add_argument("--support", type=int, default=None)
    common(sim, with_fitting=False)
    sim.set_defaults(func=cmd_simulate, config=None)

    fit = sub.add_parser("fit", help="fit one method on a stored sample")
    fit.add_argument("--sample", required=True)
    fit.add_argument("--method", default="proposed", choices=list(harness.METHODS))
    fit.add_argument("--no-adjust", action="store_true",
                     help="drop the survey adjustment from the mixture fit")
    fit.add_argument("--grid", default=None,
                     help="LO:HI:N evaluation grid (use --grid=-6:6:100 for negative LO)")
    fit.add_argument("--support", type=int, default=None, help="pmf support cap")
    fit.add_argument("--trace", action="store_true", help="write a JSONL chain trace")
    common(fit)
    fit.set_defaults(func=cmd_fit)

    cmp_ = sub.add_parser("compare", help="run a scenario across methods")
    group = cmp_.add_mutually_exclusive_group(required=True)
    group.add_argument("--case", choices=["case1", "case2", "case3", "case4"])
    group.add_argument("--spec", help="population spec JSON file")
    cmp_.add_argument("--methods", default="proposed,unadjusted,ht,re,gp")
    cmp_.add_argument("--grid", default=None, help="LO:HI:N (custom specs)")
    cmp_.add_argument("--support", type=int, default=None)
    cmp_.add_argument("--workers", type=int, default=1)
    common(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"failed: {exc}", file=sys.stderr)
        return 3
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        for key, value in result.items():
            print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
