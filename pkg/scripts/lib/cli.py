"""edgecode command line: gen-profile, run, sweep, report."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import config as config_mod
from . import metrics, normalize, render, schema, store, sweep, ui, workload

logger = logging.getLogger(__name__)

RUNS_DIR = "runs"
SUMMARY_NAME = "summary.txt"


def cmd_gen_profile(exp: schema.ExperimentConfig, seed: Optional[int] = None) -> List[Path]:
    """Write the catalog and one profile per alpha for each requested seed."""
    seeds = [seed] if seed is not None else list(exp.seeds)
    written = []
    for s in seeds:
        paths = sweep.write_profiles(exp, Path(exp.output_dir), s)
        for alpha in exp.alphas:
            logger.info("profile alpha=%g seed=%d -> %s", alpha, s, paths[alpha])
        written.extend(paths[a] for a in exp.alphas)
    return written


def cmd_run(
    exp: schema.ExperimentConfig,
    profile_path: Path,
    policy: str,
    coding: bool,
    cache_fraction: Optional[float] = None,
) -> Path:
    """One policy on one stored profile. The results row carries all three
    gains, so the baseline and the other coding setting run too; only the
    requested run's traces are kept."""
    if policy not in schema.POLICIES:
        raise config_mod.ConfigError(f"unknown policy {policy!r}")
    m = exp.cache_fractions[0] if cache_fraction is None else cache_fraction
    if m < 0:
        raise config_mod.ConfigError(f"cache fraction must be >= 0, got {m}")

    profile_path = Path(profile_path)
    profile, catalog = sweep.load_profile(profile_path)
    name = sweep.run_name(policy, coding)
    out_dir = Path(exp.output_dir) / RUNS_DIR / f"{profile_path.stem}_m{m:g}"

    cells, written = sweep.evaluate(
        exp, catalog, profile, m, profile.seed, [policy], [False, True],
        out_dir=out_dir, keep={name})
    results_path = out_dir / f"{name}.results.csv"
    store.atomic_write_text(results_path, render.results_csv(cells))

    report = cells[0].report
    logger.info("%s on %s: G_c=%s G_i=%s G_ci=%s hits=%d",
                name, profile_path.name, render.fmt_value(report.gain_caching),
                render.fmt_value(report.gain_coding), render.fmt_value(report.gain_combined),
                report.hits)
    for path in written + [results_path]:
        logger.debug("wrote %s", path)
    return results_path


def cmd_sweep(exp: schema.ExperimentConfig, jobs: int = 1) -> Path:
    total = len(exp.alphas) * len(exp.cache_fractions) * len(exp.seeds)
    progress = ui.ProgressDisplay(total)
    progress.start(jobs)
    sweep.run_sweep(exp, jobs=jobs, progress=progress)
    out_dir = Path(exp.output_dir)
    rows = normalize.parse_aggregated_csv(
        normalize.read_text(out_dir / sweep.AGGREGATED_NAME), str(out_dir / sweep.AGGREGATED_NAME))
    progress.show_complete(render.summary_text(rows))
    return out_dir / sweep.AGGREGATED_NAME


def load_rows(path: Path):
    """Aggregated rows from either an aggregated or a per-seed results CSV."""
    text = normalize.read_text(path)
    first = text.split("\n", 1)[0].split(",")
    if "seed" in first:
        return metrics.aggregate_sweep(normalize.parse_results_csv(text, str(path)))
    return normalize.parse_aggregated_csv(text, str(path))


def cmd_report(input_path: Path, out_dir: Path) -> List[Path]:
    rows = load_rows(Path(input_path))
    out_dir = Path(out_dir)
    written = render.render_plots(rows, out_dir)
    summary_path = out_dir / SUMMARY_NAME
    store.atomic_write_text(summary_path, render.summary_text(rows))
    written.append(summary_path)
    logger.info("report: %d file(s) in %s", len(written), out_dir)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgecode",
        description="Index-coded edge caching simulator",
    )
    parser.add_argument("--debug", action="store_true", help="Enable verbose debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-profile", help="Generate catalog and request profiles")
    p.add_argument("--config", type=Path, help="Experiment config (JSON)")
    p.add_argument("--seed", type=int, help="Only this seed (default: every configured seed)")

    p = sub.add_parser("run", help="Simulate one policy on a stored profile")
    p.add_argument("--config", type=Path, help="Experiment config (JSON)")
    p.add_argument("--profile", type=Path, required=True, help="Profile file from gen-profile")
    p.add_argument("--policy", choices=schema.POLICIES, required=True)
    p.add_argument("--coding", action="store_true", help="Enable index coding")
    p.add_argument("--cache-fraction", type=float,
                   help="Cache size as a fraction of catalog bytes (default: first configured)")

    p = sub.add_parser("sweep", help="Run the full alpha x M x policy x coding grid")
    p.add_argument("--config", type=Path, help="Experiment config (JSON)")
    p.add_argument("--jobs", type=int, help="Parallel cells (default: EDGECODE_JOBS or 1)")

    p = sub.add_parser("report", help="Plot an aggregated or per-seed results CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    ui.setup_logging(args.debug or config_mod.env_flag("EDGECODE_DEBUG"))

    try:
        if args.command == "report":
            cmd_report(args.input, args.out)
            return 0

        exp = config_mod.load_config(args.config)
        if args.command == "gen-profile":
            cmd_gen_profile(exp, args.seed)
        elif args.command == "run":
            cmd_run(exp, args.profile, args.policy, args.coding, args.cache_fraction)
        elif args.command == "sweep":
            jobs = args.jobs if args.jobs is not None else config_mod.default_jobs()
            if jobs < 1:
                raise config_mod.ConfigError(f"--jobs must be >= 1, got {jobs}")
            cmd_sweep(exp, jobs)
    except workload.ProfileMismatchError as e:
        print(f"error: stale profile: {e}", file=sys.stderr)
        return 1
    except (schema.EdgecodeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0
