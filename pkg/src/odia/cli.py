"""Command-line interface.

Subcommands::

    odia run <config>            seeded Monte Carlo sweep, CSV/JSON out
    odia codebook gen ...        build and save a quantization codebook
    odia validate <what> <cfg>   statistical checks (tail|chi2|decay|eligibility)
    odia gridsearch <config>     sum-rate table over scheduler thresholds
    odia presets list            bundled experiment configs

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import __version__
from .channel import generate_realization
from .codebook import grassmannian_codebook, random_codebook, save_codebook
from .errors import ConfigError, NumericalFailure
from .harness import (
    ExperimentConfig,
    emit_results,
    grid_search_se_odia,
    gridsearch_to_csv,
    load_config,
    load_preset,
    preset_names,
    run_point_samples,
    run_sweep,
    sweep_to_csv,
)
from .numerics import Rng
from .receiver import cell_reports
from .validation import chi_squared_gof, decay_regression, eligibility_probe, fit_tail_exponent


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override master_seed")
    parser.add_argument("--trials", type=int, default=None, help="override trials per point")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _load(config_arg: str) -> ExperimentConfig:
    if config_arg.startswith("presets/"):
        return load_preset(config_arg.split("/", 1)[1])
    return load_config(config_arg)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_run(args) -> int:
    cfg = _apply_overrides(_load(args.config), args)
    result = run_sweep(cfg, workers=args.workers)
    if args.out is None:
        sys.stdout.write(sweep_to_csv(result))
    else:
        emit_results(result, args.format, args.out)
    return 0


def cmd_codebook_gen(args) -> int:
    rng = Rng(args.seed if args.seed is not None else 0)
    if args.kind == "random":
        cb = random_codebook(rng, args.dim, args.size)
        save_codebook(cb, args.out)
        print(f"wrote random codebook {args.dim}x{args.size} to {args.out}")
    else:
        cb, quality = grassmannian_codebook(rng, args.dim, args.size, iterations=args.iters)
        save_codebook(cb, args.out)
        print(f"wrote grassmannian codebook {args.dim}x{args.size} to {args.out}")
        print(f"min pairwise chordal^2 = {quality.min_pairwise_chordal_sq:.6f} "
              f"(rankin bound {quality.bound_rankin:.6f}, "
              f"covering bound {quality.bound_hamming:.6f})")
    return 0


def cmd_validate(args) -> int:
    cfg = _apply_overrides(_load(args.config), args)
    net = cfg.base_network()
    lines = [f"check = {args.what}", f"network = K{net.K} M{net.M} L{net.L} N{net.N} S{net.S}"]

    if args.what == "tail":
        samples = []
        master = Rng(cfg.master_seed)
        need = args.samples
        per_trial = net.N * net.K
        trial = 0
        while len(samples) < need:
            real = generate_realization(net, master.derive(trial))
            for i in range(net.K):
                samples.extend(cell_reports(real, i).metrics.tolist())
            trial += 1
        report = fit_tail_exponent(np.asarray(samples[:need]), net)
        lines += [
            f"samples = {report.sample_count}",
            f"fitted_exponent = {report.fitted_exponent:.4f}",
            f"theoretical_exponent = {report.theoretical_exponent:.4f}",
            f"c0 = {report.c0:.6g}",
            f"r_squared = {report.r_squared:.4f}",
            f"fit_range = [{report.fit_range[0]:.6g}, {report.fit_range[1]:.6g}]",
        ]
    elif args.what == "chi2":
        # Projected-gain fits need an unconditioned pool: thresholds off.
        from .scheduler import SeOdiaParams, schedule_se_odia

        params = SeOdiaParams(eta_I=float("inf"), eta_D=0.0, alpha=1.0)
        master = Rng(cfg.master_seed)
        trials = max(min(args.samples, 20_000), 1000)
        norms = {s: [] for s in range(net.S)}
        for t in range(trials):
            real = generate_realization(net, master.derive(t))
            dec = schedule_se_odia(cell_reports(real, 0), params, master.derive(t, 1),
                                   collect_trace=True)
            for s, v in enumerate(dec.trace.projection_norms_sq):
                norms[s].append(v)
        for s in range(net.S):
            dof = 2 * (net.S - s)
            ks = chi_squared_gof(np.asarray(norms[s]), dof)
            lines.append(f"step {s + 1}: ks_to_chi2({dof} dof) = {ks:.4f} ({trials} samples)")
    elif args.what == "decay":
        if cfg.sweep_variable != "n_users":
            raise ConfigError("decay validation needs sweep.variable = n_users")
        points = []
        for value in cfg.grid:
            samples = run_point_samples(cfg, value, workers=args.workers)
            algo = cfg.algorithms[0]
            points.append((value, float(np.mean(samples[algo]["sum_interference"]))))
            lines.append(f"N = {int(value)}: mean_sum_interference = {points[-1][1]:.6g}")
        slope = decay_regression(points)
        lines.append(f"loglog_slope = {slope:.4f}")
    elif args.what == "eligibility":
        params = cfg.se_odia.resolve(net.snr)
        report = eligibility_probe(net, params, max(cfg.trials, 1000), seed=cfg.master_seed)
        lines.append(f"params = eta_I {params.eta_I:.4g}, eta_D {params.eta_D:.4g}, "
                     f"alpha {params.alpha:.4g}")
        for step in report.steps:
            lines.append(
                f"step {step.step}: pool = {step.mean_pool_size:.2f}, "
                f"pr_c1 = {step.pr_c1:.4f}, pr_c2 = {step.pr_c2:.4f} "
                f"(closed form {step.pr_c2_closed_form:.4f}), "
                f"p_eligible = {step.p_eligible:.4f}, outage = {step.outage_rate:.4f}"
            )
    else:
        raise ConfigError(f"unknown validation {args.what!r}")

    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_gridsearch(args) -> int:
    cfg = _apply_overrides(_load(args.config), args)
    result = grid_search_se_odia(cfg, workers=args.workers)
    text = gridsearch_to_csv(result)
    best = result.best
    footer = (f"# best: eta_I={best.eta_I!r} eta_D={best.eta_D!r} alpha={best.alpha!r} "
              f"mean_sum_rate={result.best_mean_sum_rate!r}\n")
    _emit(text + footer, args.out)
    return 0


def cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
        return 0
    raise ConfigError(f"unknown presets action {args.action!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odia", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"odia {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte Carlo sweep from a config or preset")
    p_run.add_argument("config", help="config path, or presets/<name>")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cb = sub.add_parser("codebook", help="codebook utilities")
    cb_sub = p_cb.add_subparsers(dest="action", required=True)
    p_gen = cb_sub.add_parser("gen", help="generate and save a codebook")
    p_gen.add_argument("--dim", type=int, required=True)
    p_gen.add_argument("--size", type=int, required=True)
    p_gen.add_argument("--kind", choices=("random", "grassmannian"), default="grassmannian")
    p_gen.add_argument("--iters", type=int, default=500)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_codebook_gen)

    p_val = sub.add_parser("validate", help="statistical validation checks")
    p_val.add_argument("what", choices=("tail", "chi2", "decay", "eligibility"))
    p_val.add_argument("config", help="config path, or presets/<name>")
    p_val.add_argument("--samples", type=int, default=100_000)
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_gs = sub.add_parser("gridsearch", help="scheduler-threshold grid search")
    p_gs.add_argument("config", help="config path, or presets/<name>")
    _add_common(p_gs)
    p_gs.set_defaults(func=cmd_gridsearch)

    p_pre = sub.add_parser("presets", help="bundled configs")
    p_pre.add_argument("action", choices=("list",))
    p_pre.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
