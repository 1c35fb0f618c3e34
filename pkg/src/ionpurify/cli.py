"""Batch command-line front end.

Usage::

    ionpurify iterate --initial-fidelity 0.7 --rounds 3
    ionpurify hardware --config run.cfg --output table.csv
    ionpurify verify

Exit status: 0 on success, 1 for usage or configuration errors, 2 when the
dense-oracle verification fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from . import hardware as hw
from .config import HARDWARE_KEYS, MODES, ConfigError, ExperimentConfig, parse_config
from .oracle import full_sweep
from .protocol import (
    ALL_PATTERNS,
    SUCCESS,
    BellKind,
    PureInput,
    Variant,
    bell_state,
    concentration_outcomes,
    ghz_reduce,
    ghz_state,
    iterate_fidelity,
    pattern_name,
    werner_outcomes,
)
from .trajectories import TrajectoryConfig, run_trajectories

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

# Published throughput estimates at the standard operating point (pairs/min)
# and the relative tolerance each was quoted to.
QUOTED_PAIRS_PER_MINUTE = {("mixed", 0.7): (70.0, 0.05), ("pure", 0.7): (100.0, 0.10)}


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; blank for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def write_csv(header: Sequence[str], rows: Iterable[Sequence], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def _table_purify(cfg: ExperimentConfig):
    outcomes = werner_outcomes(cfg.initial_fidelity, cfg.tolerance)
    stats = None
    if cfg.trials > 0:
        stats = run_trajectories(TrajectoryConfig(fidelity=cfg.initial_fidelity), cfg.trials, cfg.seed, cfg.workers)
    success = outcomes[SUCCESS]
    rows = []
    for pattern in ALL_PATTERNS:
        emp = stats.pattern_counts[pattern] / stats.trials if stats else None
        rows.append((f"pattern:{pattern_name(pattern)}", outcomes[pattern].probability, emp, None))
    if success.four_ion_state is not None:
        phi = success.four_ion_state.weight_of(ghz_state(1))
        rows.append(("success_probability", success.probability, stats.success_rate if stats else None,
                     stats.success_stderr if stats else None))
        rows.append(("posterior_phi_weight", phi, stats.phi_fraction if stats else None,
                     stats.phi_stderr if stats else None))
        reduced = ghz_reduce(success.four_ion_state, ("+", "+"))
        rows.append(("reduced_fidelity", reduced.two_ion_state.weight_of(bell_state(BellKind.PHI_PLUS, (1, 2))), None, None))
    if stats and stats.successes:
        for o, n in stats.outcome_counts.items():
            rows.append((f"ions34:{''.join(o)}", 0.25, n / stats.successes, None))
    return ("quantity", "exact", "empirical", "standard_error"), rows


def _table_concentrate(cfg: ExperimentConfig):
    variant = Variant(cfg.variant)
    outcomes = concentration_outcomes(PureInput.from_a_squared(cfg.a_squared), variant, cfg.tolerance)
    stats = None
    if cfg.trials > 0:
        stats = run_trajectories(
            TrajectoryConfig(a_squared=cfg.a_squared, variant=variant), cfg.trials, cfg.seed, cfg.workers
        )
    rows = []
    for pattern in ALL_PATTERNS:
        emp = stats.pattern_counts[pattern] / stats.trials if stats else None
        rows.append((f"pattern:{pattern_name(pattern)}", outcomes[pattern].probability, emp, None))
    success = outcomes[SUCCESS]
    rows.append(("success_probability", success.probability, stats.success_rate if stats else None,
                 stats.success_stderr if stats else None))
    rows.append(("formula_probability", hw.pure_protocol_factor(cfg.a_squared), None, None))
    return ("quantity", "exact", "empirical", "standard_error"), rows


def _table_iterate(cfg: ExperimentConfig):
    rows = [
        (r.round, r.fidelity, r.step_success_probability, r.cumulative_probability)
        for r in iterate_fidelity(cfg.initial_fidelity, cfg.rounds)
    ]
    return ("round", "fidelity", "step_success_probability", "cumulative_probability"), rows


def _table_hardware(cfg: ExperimentConfig):
    params = cfg.hardware_params()
    inputs: List[tuple] = []
    for f in ([cfg.initial_fidelity] if cfg.initial_fidelity is not None else []) + list(cfg.fidelity_grid):
        inputs.append(("mixed", f, hw.mixed_protocol_factor(f), hw.total_success_probability(params, fidelity=f)))
    for a2 in ([cfg.a_squared] if cfg.a_squared is not None else []) + list(cfg.a_squared_grid):
        inputs.append(("pure", a2, hw.pure_protocol_factor(a2), hw.total_success_probability(params, a_squared=a2)))
    rows = []
    for mode, value, factor, total in inputs:
        rate = hw.throughput(total, params.photon_rate)
        quoted, rel_tol = QUOTED_PAIRS_PER_MINUTE.get((mode, value), (None, None))
        deviation = None if quoted is None else (rate - quoted) / quoted
        consistent = None if quoted is None else abs(deviation) <= rel_tol
        rows.append((mode, value, factor, total, rate, quoted, deviation, consistent))
    header = ("input", "value", "protocol_probability", "total_probability", "pairs_per_minute",
              "quoted_pairs_per_minute", "relative_deviation", "consistent")
    return header, rows


def _table_verify(cfg: ExperimentConfig):
    report = full_sweep(tol=cfg.verify_tolerance)
    rows = [(name, value, passed) for name, value, passed in report.rows()]
    return ("check", "value", "passed"), rows, report


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Execute one configured experiment and emit its CSV table."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    report = None
    if cfg.mode == "purify":
        header, rows = _table_purify(cfg)
    elif cfg.mode == "concentrate":
        header, rows = _table_concentrate(cfg)
    elif cfg.mode == "iterate":
        header, rows = _table_iterate(cfg)
    elif cfg.mode == "hardware":
        header, rows = _table_hardware(cfg)
    else:
        header, rows, report = _table_verify(cfg)

    buf = io.StringIO()
    write_csv(header, rows, buf)
    if cfg.output:
        Path(cfg.output).write_text(buf.getvalue(), encoding="utf-8", newline="")
    else:
        stdout.write(buf.getvalue())

    if report is not None:
        if not report.passed:
            print(f"verification failed at {report.first_failure}", file=stderr)
            return EXIT_VERIFY
        print(f"verification passed: {report.inputs} basis inputs", file=stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionpurify", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value config file")
    common.add_argument("--initial-fidelity", type=float)
    common.add_argument("--a-squared", type=float)
    common.add_argument("--variant", choices=("psi", "phi"))
    common.add_argument("--rounds", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--output", help="CSV path (default: stdout)")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--verify-tolerance", type=float)
    common.add_argument("--fidelity-grid", help="comma-separated fidelities")
    common.add_argument("--a-squared-grid", help="comma-separated a^2 values")
    hw_group = common.add_argument_group("hardware")
    for key in HARDWARE_KEYS:
        hw_group.add_argument("--" + key.replace("_", "-"), type=float, dest=key)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sub.add_parser(mode, parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
