"""Experiment configuration for edgecode.

A config file is a JSON document that overrides any subset of DEFAULT_CONFIG.
Environment variables override the file for the few settings that depend on
where and how the tool runs.
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from . import schema, store

DEFAULT_CONFIG: Dict[str, Any] = schema.ExperimentConfig().to_dict()

SIZE_FAMILIES = ("lognormal", "uniform", "constant")


class ConfigError(schema.EdgecodeError):
    """Invalid or unreadable configuration."""


def env_flag(name: str) -> bool:
    return os.environ.get(name, "").lower() in ("1", "true", "yes")


def default_jobs() -> int:
    raw = os.environ.get("EDGECODE_JOBS")
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"EDGECODE_JOBS must be an integer, got {raw!r}")
    return max(1, jobs)


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Return base with override applied key by key (nested dicts merge)."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: Optional[Path] = None) -> schema.ExperimentConfig:
    """Load a config file (or the defaults), apply env overrides, validate."""
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON ({e.msg})")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")

    merged = deep_merge(DEFAULT_CONFIG, data)

    out_dir = os.environ.get("EDGECODE_OUT")
    if out_dir:
        merged['output']['dir'] = out_dir

    return from_dict(merged)


def from_dict(data: Dict[str, Any]) -> schema.ExperimentConfig:
    """Build and validate an ExperimentConfig from a fully merged dict."""
    unknown = set(data) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    try:
        cat = data['catalog']
        pop = data['popularity']
        work = data['workload']
        sysd = data['system']
        size = cat['size_model']
        config = schema.ExperimentConfig(
            n_files=int(cat['n_files']),
            duration_range=(float(cat['duration_range'][0]), float(cat['duration_range'][1])),
            segment_duration=float(cat['segment_duration']),
            size_model=schema.SegmentSizeModel(
                family=str(size['family']),
                mean_bytes=int(size['mean_bytes']),
                sigma=float(size['sigma']),
                min_bytes=int(size['min_bytes']),
                max_bytes=int(size['max_bytes']),
            ),
            gamma=float(pop['gamma']),
            q=float(pop['q']),
            mean_wait=float(work['mean_wait']),
            horizon=float(work['horizon']),
            alphas=[float(a) for a in work['alphas']],
            n_clients=int(sysd['n_clients']),
            link_rate=float(sysd['link_rate']),
            cache_fractions=[float(m) for m in sysd['cache_fractions']],
            policies=[str(p) for p in sysd['policies']],
            coding=[bool(c) for c in sysd['coding']],
            backhaul_delay=float(sysd['backhaul_delay']),
            require_positive_dof=bool(sysd['require_positive_dof']),
            check_invariants=bool(sysd['check_invariants']),
            cache_trace=bool(sysd['cache_trace']),
            seeds=[int(s) for s in data['sweep']['seeds']],
            output_dir=str(data['output']['dir']),
        )
    except (KeyError, IndexError) as e:
        raise ConfigError(f"missing config key: {e}")
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config value: {e}")

    validate(config)
    return config


def validate(config: schema.ExperimentConfig):
    """Raise ConfigError on the first violated constraint."""
    for name in ('alphas', 'cache_fractions', 'policies', 'coding', 'seeds'):
        if not getattr(config, name):
            raise ConfigError(f"{name} must not be empty")

    if config.n_files < 1:
        raise ConfigError("catalog.n_files must be >= 1")
    if config.n_clients < 1:
        raise ConfigError("system.n_clients must be >= 1")
    if config.segment_duration <= 0:
        raise ConfigError("catalog.segment_duration must be > 0")
    lo, hi = config.duration_range
    if lo <= 0 or hi < lo:
        raise ConfigError(f"catalog.duration_range must satisfy 0 < min <= max, got {lo}..{hi}")
    validate_size_model(config.size_model)

    if config.gamma <= 0:
        raise ConfigError("popularity.gamma must be > 0")
    if config.q < 0:
        raise ConfigError("popularity.q must be >= 0")
    for a in config.alphas:
        if not 0.0 <= a <= 1.0:
            raise ConfigError(f"workload.alphas entries must lie in [0, 1], got {a}")
    if config.mean_wait <= 0:
        raise ConfigError("workload.mean_wait must be > 0")
    if config.horizon <= 0:
        raise ConfigError("workload.horizon must be > 0")

    if config.link_rate <= 0:
        raise ConfigError("system.link_rate must be > 0")
    if config.backhaul_delay < 0:
        raise ConfigError("system.backhaul_delay must be >= 0")
    for m in config.cache_fractions:
        if m < 0:
            raise ConfigError(f"system.cache_fractions entries must be >= 0, got {m}")
    for p in config.policies:
        if p not in schema.POLICIES:
            raise ConfigError(f"unknown policy {p!r} (expected one of {', '.join(schema.POLICIES)})")

    for name in ('alphas', 'cache_fractions', 'policies', 'coding', 'seeds'):
        values = getattr(config, name)
        if len(set(values)) != len(values):
            raise ConfigError(f"{name} contains duplicates")


def validate_size_model(model: schema.SegmentSizeModel):
    if model.family not in SIZE_FAMILIES:
        raise ConfigError(f"unknown size model family {model.family!r}")
    if model.min_bytes <= 0 or model.mean_bytes <= 0 or model.max_bytes <= 0:
        raise ConfigError("size model byte values must be positive")
    if not model.min_bytes <= model.mean_bytes <= model.max_bytes:
        raise ConfigError("size model must satisfy min_bytes <= mean_bytes <= max_bytes")
    if model.sigma < 0:
        raise ConfigError("size model sigma must be >= 0")


def config_hash(config: schema.ExperimentConfig) -> str:
    """Stable hash of everything that shapes results (output dir excluded)."""
    data = config.to_dict()
    data.pop('output', None)
    return store.content_hash(json.dumps(data, sort_keys=True))
