"""
copsens command line.

Usage:
    copsens analyze --config analysis.json [--seed N] [--threads N] [--keep-replicates]
    copsens simulate --scenario strong-cop --out sim/ [--seed N]
    copsens evalue --rr 0.40 [--rr-ul 0.78]

Exit codes: 0 success, 2 data/configuration errors, 3 convergence and
bootstrap failures, 1 unexpected errors. Errors are printed to stderr as JSON.
"""

import argparse
import json
import math
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import norm

from copsens.pipeline.analysis import run_analysis
from copsens.pipeline.artifacts import sha256_file, versions, write_csv, write_json
from copsens.pipeline.config import AnalysisConfig
from copsens.platform.config import settings
from copsens.platform.errors import ConfigError, CopsensError
from copsens.platform.logging import configure_logging, get_logger, run_context
from copsens.sensitivity.evalues import bias_factor, compute_evalues
from copsens.sim.generate import generate_frame, trial_schema
from copsens.sim.scenario import SimScenario
from copsens.sim.truth import confounding_strength, default_truth_grid, truth_table

logger = get_logger(__name__)


def cmd_analyze(
    config_path: str | Path,
    seed: int | None = None,
    threads: int | None = None,
    keep_replicates: bool = False,
) -> int:
    config = AnalysisConfig.from_json(config_path).with_overrides(seed=seed)
    report = run_analysis(config, threads=threads, keep_replicates=keep_replicates)
    logger.info(
        "analyze_done",
        output_dir=str(config.output_dir),
        rr_m=round(report.estimates.rr_m, 6),
        scent=report.anchor.s,
    )
    return 0


def _confounding_frame(scenario: SimScenario, grid: np.ndarray) -> pd.DataFrame:
    m = scenario.marker
    pairs = {
        "q15_q85": (m.mean + m.sd * norm.ppf(0.15), m.mean + m.sd * norm.ppf(0.85)),
        "grid_ends": (float(grid[0]), float(grid[-1])),
    }
    rows = []
    for label, (s1, s2) in pairs.items():
        rr_ud, rr_eu = confounding_strength(scenario, s1, s2)
        rows.append({"pair": label, "s1": s1, "s2": s2, "rr_ud": rr_ud, "rr_eu": rr_eu,
                     "bias_factor": bias_factor(rr_ud, rr_eu)})
    return pd.DataFrame(rows, columns=["pair", "s1", "s2", "rr_ud", "rr_eu", "bias_factor"])


def cmd_simulate(scenario_ref: str, out: str | Path, seed: int | None = None) -> int:
    scenario = SimScenario.resolve(scenario_ref)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    with run_context(f"{scenario.name}-{scenario.seed}", command="simulate"):
        _write_simulation(scenario, Path(out))
    return 0


def _write_simulation(scenario: SimScenario, out: Path) -> None:
    grid = default_truth_grid(scenario)

    written = {
        "trial.csv": write_csv(generate_frame(scenario), out / "trial.csv"),
        "schema.json": write_json(trial_schema(scenario).model_dump(mode="json"), out / "schema.json"),
        "truth.csv": write_csv(truth_table(scenario, grid).to_frame(), out / "truth.csv"),
        "confounding.csv": write_csv(_confounding_frame(scenario, grid), out / "confounding.csv"),
    }
    write_json(
        {
            "scenario": scenario.model_dump(mode="json"),
            "seed": scenario.seed,
            "versions": versions(),
            "outputs": {name: sha256_file(path) for name, path in sorted(written.items())},
        },
        out / "manifest.json",
    )
    logger.info("simulate_done", scenario=scenario.name, out=str(out), seed=scenario.seed)


def _positive_number(raw: str, flag: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{flag}: not a number: {raw!r}", {"flag": flag, "value": raw})
    if not math.isfinite(value):
        raise ConfigError(f"{flag}: not a finite number: {raw!r}", {"flag": flag, "value": raw})
    return value


def cmd_evalue(rr: str, rr_ul: str | None = None) -> int:
    result = compute_evalues(
        _positive_number(rr, "--rr"),
        None if rr_ul is None else _positive_number(rr_ul, "--rr-ul"),
    )
    payload: dict[str, float | bool] = {"e_point": round(result.e_point, 4)}
    if result.e_ul is not None:
        payload["e_ul"] = round(result.e_ul, 4)
    if result.reciprocal:
        payload["reciprocal"] = True
    print(json.dumps(payload))
    return 0


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands must not reset flags given before the subcommand name
    default = argparse.SUPPRESS if suppress else None
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=default, help="Override the bootstrap/scenario seed")
    flags.add_argument(
        "--threads", type=int, default=default, help=f"Worker threads (default COPSENS_THREADS={settings.THREADS})"
    )
    flags.add_argument(
        "--keep-replicates", action="store_true", default=argparse.SUPPRESS if suppress else False,
        help="Write bootstrap replicate matrices",
    )
    flags.add_argument("--log-level", default=default, help="Log level (default COPSENS_LOG_LEVEL)")
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)

    parser = argparse.ArgumentParser(prog="copsens", description="Immune correlates controlled-risk analysis", parents=[_global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="Run the full analysis from a config file")
    analyze.add_argument("--config", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Generate a synthetic trial and its truth tables")
    simulate.add_argument("--scenario", required=True, help="Preset name or scenario JSON path")
    simulate.add_argument("--out", required=True)

    evalue = sub.add_parser("evalue", parents=[common], help="E-values for a risk ratio")
    evalue.add_argument("--rr", required=True)
    evalue.add_argument("--rr-ul", default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.command == "analyze":
            return cmd_analyze(args.config, seed=args.seed, threads=args.threads, keep_replicates=args.keep_replicates)
        if args.command == "simulate":
            return cmd_simulate(args.scenario, args.out, seed=args.seed)
        return cmd_evalue(args.rr, args.rr_ul)
    except CopsensError as exc:
        print(json.dumps(exc.to_dict(), default=str), file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.exception("unexpected_error")
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "details": {}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
