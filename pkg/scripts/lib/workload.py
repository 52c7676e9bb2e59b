"""Catalog construction and request-profile generation.

Profiles are generated once per (alpha, seed). Every compared configuration
replays the same prefix of it, so no-cache, cache-only and cache+coding runs
see the same file order and the same waits.
"""

import dataclasses
import logging
import math
from typing import List, Sequence

import numpy as np

from . import popularity, render, schema, store
from .config import validate_size_model

logger = logging.getLogger(__name__)

PROFILE_MARGIN = 10

# Stream labels for np.random.default_rng([seed, label, ...]).
CATALOG_STREAM = 0
PROFILE_STREAM = 1


class ProfileMismatchError(schema.EdgecodeError):
    """A profile was generated against a different catalog."""


def segment_count(duration: float, segment_duration: float) -> int:
    return max(1, math.ceil(round(duration / segment_duration, 9)))


def draw_segment_sizes(model: schema.SegmentSizeModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Integer byte sizes within [min_bytes, max_bytes]."""
    lo, hi = model.min_bytes, model.max_bytes
    if model.family == "constant" or lo == hi:
        sizes = np.full(count, float(model.mean_bytes))
    elif model.family == "uniform":
        sizes = rng.uniform(lo, hi, size=count)
    else:
        # Log-normal with the requested mean, truncated by redrawing.
        mu = math.log(model.mean_bytes) - model.sigma ** 2 / 2.0
        sizes = rng.lognormal(mu, model.sigma, size=count)
        bad = (sizes < lo) | (sizes > hi)
        while bad.any():
            sizes[bad] = rng.lognormal(mu, model.sigma, size=int(bad.sum()))
            bad = (sizes < lo) | (sizes > hi)
    return np.clip(np.rint(sizes), lo, hi).astype(np.int64)


def build_catalog(config: schema.ExperimentConfig, rng: np.random.Generator) -> schema.Catalog:
    """N files with uniform durations and per-segment sizes from the size model."""
    validate_size_model(config.size_model)
    lo, hi = config.duration_range
    files = []
    for file_id in range(1, config.n_files + 1):
        duration = round(float(rng.uniform(lo, hi)), 3) if hi > lo else lo
        count = segment_count(duration, config.segment_duration)
        sizes = draw_segment_sizes(config.size_model, count, rng)
        files.append(schema.FileSpec(file_id, duration, tuple(int(s) for s in sizes)))
    return schema.Catalog(files=files, segment_duration=config.segment_duration)


def catalog_for_seed(config: schema.ExperimentConfig, seed: int) -> schema.Catalog:
    return build_catalog(config, np.random.default_rng([seed, CATALOG_STREAM]))


def catalog_hash(catalog: schema.Catalog) -> str:
    return store.content_hash(render.catalog_text(catalog))


def profile_length(horizon: float, mean_wait: float) -> int:
    """Entries per client; waits alone (zero streaming time) cannot outlast it."""
    return math.ceil(horizon / mean_wait) + PROFILE_MARGIN


def generate_profile(
    catalog: schema.Catalog,
    n_clients: int,
    params: schema.PopularityParams,
    mean_wait: float,
    horizon: float,
    seed: int,
) -> schema.RequestProfile:
    """Draw each client's (file, wait) sequence, updating its popularity after
    every selection."""
    popularity.check_params(params)
    if params.n_files != catalog.n_files:
        raise ProfileMismatchError(
            f"popularity covers {params.n_files} files, catalog has {catalog.n_files}")
    if mean_wait <= 0 or horizon <= 0:
        raise ValueError("mean_wait and horizon must be > 0")

    length = profile_length(horizon, mean_wait)
    initial = popularity.mzipf_init(params)
    clients = []
    for client in range(n_clients):
        rng = np.random.default_rng([seed, PROFILE_STREAM, client])
        dist = initial
        entries = []
        for _ in range(length):
            wait_ms = int(round(float(rng.exponential(mean_wait)) * 1000.0))
            file_id = popularity.sample_file(dist, rng)
            dist = popularity.apply_rewatch_update(dist, file_id, params)
            entries.append(schema.ProfileEntry(file_id, wait_ms))
        clients.append(entries)

    logger.debug("generated profile seed=%d alpha=%s: %d clients x %d entries",
                 seed, params.alpha, n_clients, length)
    return schema.RequestProfile(
        clients=clients,
        seed=seed,
        params=params,
        mean_wait=mean_wait,
        horizon=horizon,
        catalog_hash=catalog_hash(catalog),
    )


def replay_distributions(
    entries: List[schema.ProfileEntry],
    params: schema.PopularityParams,
) -> List[popularity.PopularityDistribution]:
    """The distribution each entry's file was drawn from."""
    dist = popularity.mzipf_init(params)
    used = []
    for entry in entries:
        used.append(dist)
        dist = popularity.apply_rewatch_update(dist, entry.file_id, params)
    return used


def check_profile_matches(profile: schema.RequestProfile, catalog: schema.Catalog):
    actual = catalog_hash(catalog)
    if profile.catalog_hash != actual:
        raise ProfileMismatchError(
            f"profile was generated for catalog {profile.catalog_hash}, "
            f"this catalog is {actual}; regenerate the profile")


def truncate_profile(profile: schema.RequestProfile, limits: Sequence[int]) -> schema.RequestProfile:
    """Keep the first limits[c] files of each client."""
    if len(limits) != profile.n_clients:
        raise ProfileMismatchError(
            f"{len(limits)} file limits for a profile of {profile.n_clients} clients")
    return dataclasses.replace(
        profile, clients=[entries[:n] for entries, n in zip(profile.clients, limits)])


def future_segment_sequence(
    profile: schema.RequestProfile,
    catalog: schema.Catalog,
    client: int,
) -> List[schema.SegmentId]:
    """Every segment the client will request, in request order."""
    sequence: List[schema.SegmentId] = []
    for entry in profile.clients[client]:
        sequence.extend(catalog.file(entry.file_id).segment_ids())
    return sequence


def catalog_filename(seed: int) -> str:
    return f"catalog_s{seed}.txt"


def profile_filename(alpha: float, seed: int) -> str:
    return f"profile_a{alpha:g}_s{seed}.txt"
