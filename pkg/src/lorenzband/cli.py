"""Command-line front end.

Subcommands: generate, sample, estimate, band, gini-ci, dominance, simulate.
Exit codes: 0 on success, 2 on validation/usage errors, 3 on numeric
degeneracy, sampling non-termination, or unwritable output paths.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .bootstrap import (
    band_from_replicates,
    band_to_csv,
    bootstrap_replicates,
    ci_to_csv,
    dominance_test,
    dominance_to_csv,
    gini_ci_from_replicates,
    replicates_to_csv,
)
from .designs import (
    DesignKind,
    design_for_population,
    draw,
    sample_from_csv,
    sample_to_csv,
)
from .errors import DegeneracyError, ValidationError
from .estimators import gini, hajek_df, lorenz, write_curve_csv
from .population import FinitePopulation, ModelConfig, generate_population
from .simulate import (
    CoverageTarget,
    ExperimentConfig,
    emit_report,
    run_coverage_experiment,
)

_DESIGN_CHOICES = [k.value for k in DesignKind]
_DESK_SCALE = 500
_FULL_SCALE = 1000


def _comma_ints(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _comma_names(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _cmd_generate(args) -> int:
    if args.config is not None:
        config = ModelConfig.from_json(args.config)
        if args.N is not None:
            config = dataclasses.replace(config, N=args.N)
    elif args.N is not None:
        config = ModelConfig(N=args.N)
    else:
        raise ValidationError("generate needs --N or a --config file that sets N")
    pop = generate_population(config, args.seed)
    pop.to_csv(args.out)
    print(f"wrote {args.out} (N={pop.N})")
    return 0


def _cmd_sample(args) -> int:
    pop = FinitePopulation.from_csv(args.population)
    spec = design_for_population(pop, args.design, args.n)
    sample = draw(spec, args.seed)
    sample_to_csv(sample, args.out)
    print(f"wrote {args.out} ({sample.size} units, design {args.design})")
    return 0


def _cmd_estimate(args) -> int:
    sample = sample_from_csv(args.sample)
    curve = lorenz(hajek_df(sample))
    write_curve_csv(curve, args.out, grid=args.grid)
    print(f"Gini {gini(curve).value:.4f}")
    print(f"mean {curve.mean:.6g}")
    print(f"wrote {args.out}")
    return 0


def _load_sample(path, resample_design):
    kind = None if resample_design is None else DesignKind.from_string(resample_design)
    return sample_from_csv(path, kind=kind), kind


def _cmd_band(args) -> int:
    sample, kind = _load_sample(args.sample, args.resample_design)
    stats = bootstrap_replicates(sample, args.N, args.M, kind, args.seed)
    band = band_from_replicates(lorenz(hajek_df(sample)), stats, args.alpha)
    band_to_csv(band, args.out, grid=args.grid)
    if args.replicates_out:
        replicates_to_csv(stats, args.replicates_out)
    print(f"band halfwidth {band.halfwidth():.6f} (level {band.level:g})")
    print(f"wrote {args.out}")
    return 0


def _cmd_gini_ci(args) -> int:
    sample, kind = _load_sample(args.sample, args.resample_design)
    stats = bootstrap_replicates(sample, args.N, args.M, kind, args.seed)
    point = gini(lorenz(hajek_df(sample))).value
    ci = gini_ci_from_replicates(point, stats, args.alpha, args.method)
    ci_to_csv(ci, args.out)
    if args.replicates_out:
        replicates_to_csv(stats, args.replicates_out)
    print(f"Gini {ci.point:.4f} interval [{ci.lower:.4f}, {ci.upper:.4f}] ({ci.method.value})")
    print(f"wrote {args.out}")
    return 0


def _cmd_dominance(args) -> int:
    sample1, kind = _load_sample(args.sample1, args.resample_design)
    sample2, _ = _load_sample(args.sample2, args.resample_design)
    result = dominance_test(
        sample1, args.N1, sample2, args.N2, args.M, args.alpha,
        design_kinds=kind, seed=args.seed,
    )
    dominance_to_csv(result, args.out)
    verdict = "rejected" if result.reject else "not rejected"
    print(f"dominance of sample1 over sample2: {verdict} at level {args.alpha:g}")
    print(f"wrote {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    if args.config is not None:
        config = ExperimentConfig.from_json(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.reps is not None:
            overrides["reps"] = args.reps
        if args.M is not None:
            overrides["M"] = args.M
        if overrides:
            config = dataclasses.replace(config, **overrides)
    else:
        if args.seed is None:
            raise ValidationError("simulate requires --seed (or a --config carrying one)")
        scale = _FULL_SCALE if args.full else _DESK_SCALE
        config = ExperimentConfig(
            model=ModelConfig(N=max(args.N_list)),
            N_list=tuple(args.N_list),
            sampling_fraction=args.fraction,
            designs=tuple(args.designs),
            reps=args.reps if args.reps is not None else scale,
            M=args.M if args.M is not None else scale,
            alpha=args.alpha,
            seed=args.seed,
            coverage_target=args.target,
        )
    report = run_coverage_experiment(config)
    emit_report(report, args.out)
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorenzband",
        description=(
            "Design-based Lorenz curve and Gini estimation from unequal-"
            "probability samples, with bootstrap confidence bands"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic population CSV")
    p.add_argument("--config", help="model config JSON")
    p.add_argument("--N", type=int, help="population size (overrides config)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("sample", help="draw one sample from a population CSV")
    p.add_argument("--population", required=True)
    p.add_argument("--design", required=True, choices=_DESIGN_CHOICES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("estimate", help="Lorenz curve and Gini from a sample CSV")
    p.add_argument("--sample", required=True)
    p.add_argument("--grid", type=int, help="export on a uniform grid of this many intervals")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("band", help="bootstrap sup-norm confidence band")
    p.add_argument("--sample", required=True)
    p.add_argument("--N", type=int, required=True, help="original population size")
    p.add_argument("--M", type=int, default=1000, help="bootstrap replicates")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--resample-design", required=True, choices=_DESIGN_CHOICES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int)
    p.add_argument("--replicates-out", help="dump per-replicate statistics CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_band)

    p = sub.add_parser("gini-ci", help="bootstrap Gini confidence interval")
    p.add_argument("--sample", required=True)
    p.add_argument("--N", type=int, required=True, help="original population size")
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", default="pivot", choices=["pivot", "normal"])
    p.add_argument("--resample-design", required=True, choices=_DESIGN_CHOICES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates-out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gini_ci)

    p = sub.add_parser("dominance", help="two-sample Lorenz dominance test")
    p.add_argument("--sample1", required=True)
    p.add_argument("--N1", type=int, required=True)
    p.add_argument("--sample2", required=True)
    p.add_argument("--N2", type=int, required=True)
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--resample-design", required=True, choices=_DESIGN_CHOICES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dominance)

    p = sub.add_parser("simulate", help="Monte Carlo coverage experiment")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--N-list", type=_comma_ints, default=[300, 500, 1000])
    p.add_argument("--designs", type=_comma_names, default=["pareto", "sampford"])
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--reps", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument(
        "--target",
        default=CoverageTarget.SUPERPOPULATION.value,
        choices=[t.value for t in CoverageTarget],
    )
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--desk", action="store_true", help="reps=500, M=500 (default)")
    scale.add_argument("--full", action="store_true", help="reps=1000, M=1000")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)
    return parser


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
