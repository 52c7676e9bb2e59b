"""Sweep execution: one profile per (alpha, seed), one cell per
(alpha, M, seed), every configured policy x coding flag inside a cell plus a
shared no-cache baseline.
"""

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import config as config_mod
from . import metrics, normalize, render, schema, simengine, store, workload

logger = logging.getLogger(__name__)

NOCACHE = "nocache"
PROFILE_DIR = "profiles"
CELL_DIR = "cells"
RESULTS_NAME = "results.csv"
AGGREGATED_NAME = "aggregated.csv"


def run_name(policy: str, coding: bool) -> str:
    return f"{policy}-{'coded' if coding else 'uncoded'}"


def cell_key(alpha: float, cache_fraction: float, seed: int) -> str:
    return f"a{alpha:g}_m{cache_fraction:g}_s{seed}"


def simulate_and_store(
    sim_config: schema.SimConfig,
    profile: schema.RequestProfile,
    catalog: schema.Catalog,
    out_dir: Optional[Path],
    name: str,
) -> Tuple[schema.SimResult, List[Path]]:
    """Run once and return the result as re-read from its text trace, so
    metrics always match what a stored trace reproduces. Files are written
    only when out_dir is given."""
    result = simengine.run(sim_config, profile, catalog)
    trace = render.trace_text(result.deliveries)
    txlog = render.txlog_text(result.transmissions)

    written: List[Path] = []
    if out_dir is not None:
        outputs = {f"{name}.trace.txt": trace, f"{name}.tx.txt": txlog}
        if sim_config.coding_enabled:
            outputs[f"{name}.coding.txt"] = render.coding_trace_text(result.coding_trace)
        if sim_config.cache_trace:
            outputs[f"{name}.cache.txt"] = render.cache_trace_text(result.cache_trace)
        for filename, text in outputs.items():
            path = Path(out_dir) / filename
            store.atomic_write_text(path, text)
            written.append(path)

    audited = schema.SimResult(
        deliveries=normalize.parse_trace(trace, f"{name}.trace.txt"),
        transmissions=normalize.parse_txlog(txlog, f"{name}.tx.txt"),
        requests_issued=result.requests_issued,
        oversize=result.oversize,
        idle_clients=result.idle_clients,
        files_started=result.files_started,
    )
    return audited, written


def common_workload(
    exp: schema.ExperimentConfig,
    catalog: schema.Catalog,
    profile: schema.RequestProfile,
    seed: int,
) -> schema.RequestProfile:
    """The files each client starts within the horizon with no cache. Every
    compared run serves exactly these files to completion."""
    bounded = exp.sim_config(0.0, schema.POLICIES[0], False, seed)
    started = simengine.run(bounded, profile, catalog).files_started
    started += [0] * (profile.n_clients - len(started))
    logger.debug("common workload seed=%d alpha=%g: files per client %s",
                 seed, profile.params.alpha, started)
    return workload.truncate_profile(profile, started)


def evaluate(
    exp: schema.ExperimentConfig,
    catalog: schema.Catalog,
    profile: schema.RequestProfile,
    cache_fraction: float,
    seed: int,
    policies: Sequence[str],
    codings: Sequence[bool],
    out_dir: Optional[Path] = None,
    keep: Optional[Set[str]] = None,
) -> Tuple[List[schema.SweepCell], List[Path]]:
    """Baseline plus policy x coding runs for one profile and cache size, all
    over the common workload and without a time limit.

    keep limits which runs write trace files (None = all)."""
    def target(name):
        return out_dir if out_dir is not None and (keep is None or name in keep) else None

    def unbounded(cfg: schema.SimConfig) -> schema.SimConfig:
        return dataclasses.replace(cfg, horizon=math.inf)

    served = common_workload(exp, catalog, profile, seed)
    written: List[Path] = []
    baseline_cfg = unbounded(exp.sim_config(0.0, policies[0], False, seed))
    nocache, files = simulate_and_store(baseline_cfg, served, catalog, target(NOCACHE), NOCACHE)
    written += files

    cells = []
    for policy in policies:
        runs: Dict[bool, schema.SimResult] = {}
        for coding in codings:
            name = run_name(policy, coding)
            cfg = unbounded(exp.sim_config(cache_fraction, policy, coding, seed))
            runs[coding], files = simulate_and_store(cfg, served, catalog, target(name), name)
            written += files
        report = metrics.build_report(nocache, runs.get(False), runs.get(True))
        cells.append(schema.SweepCell(profile.params.alpha, cache_fraction, policy, seed, report))
    return cells, written


def write_profiles(exp: schema.ExperimentConfig, out_dir: Path, seed: int) -> Dict[float, Path]:
    """Catalog plus one profile per alpha for a seed. Returns alpha -> path."""
    profile_dir = Path(out_dir) / PROFILE_DIR
    catalog = workload.catalog_for_seed(exp, seed)
    catalog_name = workload.catalog_filename(seed)
    store.atomic_write_text(profile_dir / catalog_name, render.catalog_text(catalog))

    paths = {}
    for alpha in exp.alphas:
        profile = workload.generate_profile(
            catalog, exp.n_clients, exp.popularity(alpha), exp.mean_wait, exp.horizon, seed)
        path = profile_dir / workload.profile_filename(alpha, seed)
        store.atomic_write_text(path, render.profile_text(profile, catalog_name))
        paths[alpha] = path
    return paths


def load_profile(path: Path) -> Tuple[schema.RequestProfile, schema.Catalog]:
    """Read a profile and the catalog named in its header; refuse stale pairs."""
    path = Path(path)
    profile, catalog_name = normalize.parse_profile(normalize.read_text(path), str(path))
    if not catalog_name:
        raise workload.ProfileMismatchError(f"{path}: header names no catalog file")
    catalog_path = path.parent / catalog_name
    catalog = normalize.parse_catalog(normalize.read_text(catalog_path), str(catalog_path))
    workload.check_profile_matches(profile, catalog)
    return profile, catalog


@dataclass
class CellTask:
    exp: schema.ExperimentConfig
    out_dir: str
    profile_path: str
    alpha: float
    cache_fraction: float
    seed: int

    @property
    def key(self) -> str:
        return cell_key(self.alpha, self.cache_fraction, self.seed)


@dataclass
class CellOutcome:
    key: str
    files: List[str] = field(default_factory=list)


def run_cell(task: CellTask) -> CellOutcome:
    """Evaluate one (alpha, M, seed) cell and write its outputs."""
    out_dir = Path(task.out_dir)
    cell_dir = out_dir / CELL_DIR / task.key
    profile, catalog = load_profile(Path(task.profile_path))
    cells, written = evaluate(
        task.exp, catalog, profile, task.cache_fraction, task.seed,
        task.exp.policies, task.exp.coding, out_dir=cell_dir)
    results_path = cell_dir / RESULTS_NAME
    store.atomic_write_text(results_path, render.results_csv(cells))
    written.append(results_path)
    rels = sorted(str(p.relative_to(out_dir)) for p in written)
    rels.append(str(Path(task.profile_path).relative_to(out_dir)))
    return CellOutcome(task.key, rels)


def plan(exp: schema.ExperimentConfig, out_dir: Path, profile_paths: Dict[Tuple[float, int], Path]) -> List[CellTask]:
    tasks = []
    for seed in exp.seeds:
        for alpha in exp.alphas:
            for m in exp.cache_fractions:
                tasks.append(CellTask(exp, str(out_dir), str(profile_paths[(alpha, seed)]), alpha, m, seed))
    return tasks


def run_sweep(exp: schema.ExperimentConfig, jobs: int = 1, progress=None) -> schema.RunManifest:
    """Run (or resume) the whole grid and write results, aggregate and manifest."""
    out_dir = Path(exp.output_dir)
    chash = config_mod.config_hash(exp)
    previous = store.load_manifest(out_dir)
    if previous is not None and previous.config_hash != chash:
        logger.info("config changed since the last sweep in %s; starting over", out_dir)
        previous = None
    manifest = schema.RunManifest(config_hash=chash)

    profile_paths: Dict[Tuple[float, int], Path] = {}
    for seed in exp.seeds:
        for alpha, path in write_profiles(exp, out_dir, seed).items():
            profile_paths[(alpha, seed)] = path

    tasks = plan(exp, out_dir, profile_paths)
    pending = []
    for task in tasks:
        if store.cell_verified(out_dir, previous, task.key):
            manifest.cells[task.key] = previous.cells[task.key]
            logger.debug("cell %s verified, skipping", task.key)
            if progress:
                progress.cell_done(task.key, skipped=True)
        else:
            pending.append(task)
    store.save_manifest(out_dir, manifest)

    def record(outcome: CellOutcome):
        manifest.cells[outcome.key] = store.digest_files(out_dir, outcome.files)
        store.save_manifest(out_dir, manifest)
        if progress:
            progress.cell_done(outcome.key)

    if jobs <= 1:
        for task in pending:
            record(run_cell(task))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(run_cell, t): t for t in pending}
            for future in as_completed(futures):
                record(future.result())

    write_tables(out_dir, [t.key for t in tasks])
    return manifest


def write_tables(out_dir: Path, keys: Sequence[str]):
    """Merge per-cell results into results.csv and aggregated.csv."""
    cells: List[schema.SweepCell] = []
    for key in keys:
        path = Path(out_dir) / CELL_DIR / key / RESULTS_NAME
        cells += normalize.parse_results_csv(normalize.read_text(path), str(path))
    store.atomic_write_text(Path(out_dir) / RESULTS_NAME, render.results_csv(cells))
    store.atomic_write_text(Path(out_dir) / AGGREGATED_NAME,
                            render.aggregated_csv(metrics.aggregate_sweep(cells)))
