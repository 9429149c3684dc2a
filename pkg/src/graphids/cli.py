"""Command-line entry point: ``graphids run --config <path> [overrides]``.

Exit status: 0 clean run, 1 a trial failed, 2 bad arguments or config,
3 the invariant monitor flagged at least one violation, 4 output could not
be written.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig, parse_config
from .errors import ConfigError, NoBoundError, TrialError
from .policies import BAYESIAN_POLICIES, POLICIES
from .simulator import CHECKS, ExperimentResult, expected_regret_bound, prior_entropy, run_experiment

EXIT_OK = 0
EXIT_TRIAL_FAILED = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_IO = 4

log = logging.getLogger("graphids")


def _write(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _curve_rows(result: ExperimentResult):
    for p in result.policies:
        cum = result.cumulative(p)
        inst = result.instant[p]
        horizon = inst.shape[1]
        rounds = range(1, horizon + 1)
        for trial in range(inst.shape[0]):
            yield from zip([p] * horizon, [trial] * horizon, rounds, inst[trial].tolist(), cum[trial].tolist())


def _aggregate_rows(result: ExperimentResult):
    for p in result.policies:
        mean, se = result.mean(p), result.stderr(p)
        yield from zip([p] * len(mean), range(1, len(mean) + 1), mean.tolist(), se.tolist())


def _monitor_rows(result: ExperimentResult):
    for p in result.policies:
        if p not in BAYESIAN_POLICIES:
            continue
        m = result.monitor[p]
        cols = [m["psi_mean"], m["psi_max"], m["ratio_mean"], m["ratio_max"], m["bound"]]
        viol = m["violations"]
        for i in range(len(m["bound"])):
            yield [p, i + 1] + [float(c[i]) for c in cols] + viol[i].tolist()


def bound_rows(config: ExperimentConfig, model) -> list:
    """``[policy, bound]`` rows; the bound is empty for policies without one."""
    entropy = prior_entropy(config.prior_array(), config.K, config.n)
    rows = []
    for p in config.policies:
        try:
            rows.append([p, expected_regret_bound(p, model, config.T, config.K, entropy)])
        except NoBoundError:
            rows.append([p, ""])
    return rows


def write_results(result: ExperimentResult, config: ExperimentConfig, model, out: Path) -> list:
    """Write the CSV outputs into ``out`` (created if needed); returns the paths."""
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "curves.csv", out / "aggregate.csv", out / "bounds.csv"]
    _write(paths[0], ["policy", "trial", "round", "instant_regret", "cum_regret"], _curve_rows(result))
    _write(paths[1], ["policy", "round", "mean_cum_regret", "stderr"], _aggregate_rows(result))
    _write(paths[2], ["policy", "theoretical_bound"], bound_rows(config, model))
    if config.monitor:
        paths.append(out / "monitor.csv")
        header = ["policy", "round", "psi_mean", "psi_max", "ratio_mean", "ratio_max", "bound"]
        _write(paths[3], header + [f"violations_{c}" for c in CHECKS], _monitor_rows(result))
    return paths


def run(config: ExperimentConfig) -> int:
    """Run the experiment described by ``config``, write its CSVs, return the exit status.

    Raises OSError if the output directory cannot be written.
    """
    model = config.build_model()
    result = run_experiment(config.policies, model, config.prior_array(), config.T, config.trials,
                            config.n, config.seed, config.parallelism, config.monitor)
    write_results(result, config, model, Path(config.out))
    for p in config.policies:
        mean, se = result.final(p)
        log.info("%-9s final regret %.3f +/- %.3f", p, mean, se)
    n_bad = result.total_violations() if config.monitor else 0
    if n_bad:
        log.error("monitor recorded %d violations", n_bad)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphids", description="Bandits with graph feedback: IDS and Thompson sampling simulations.")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True, help="config file, or the name of a bundled one (appendix_b.cfg, er_025.cfg, ...)")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--trials", type=int, help="trials per policy")
    r.add_argument("--out", type=Path, help="output directory")
    r.add_argument("--policies", help="comma-separated policy ids: " + ", ".join(POLICIES))
    r.add_argument("--parallelism", type=int, help="worker processes")
    r.add_argument("-q", "--quiet", action="store_true")
    return parser


def _overrides(args) -> dict:
    kw = {"seed": args.seed, "trials": args.trials, "out": args.out, "parallelism": args.parallelism}
    if args.trials is not None and args.trials < 1:
        raise ConfigError("must be positive", "trials")
    if args.parallelism is not None and args.parallelism < 1:
        raise ConfigError("must be positive", "parallelism")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("seeds must be non-negative", "seed")
    if args.policies:
        names = tuple(p.strip() for p in args.policies.split(",") if p.strip())
        bad = [p for p in names if p not in POLICIES]
        if bad or not names:
            raise ConfigError(f"unknown policies {bad}", "policies")
        kw["policies"] = names
    return kw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        config = parse_config(args.config).with_overrides(**_overrides(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(config)
    except TrialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRIAL_FAILED
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
