"""Per-client file popularity: MZipf initialization and rewatch updates.

A distribution is a float64 vector indexed by rank - 1; file ids are
1-based popularity ranks.
"""

import numpy as np

from . import schema
from .config import ConfigError

TOLERANCE = 1e-9

PopularityDistribution = np.ndarray


def check_params(params: schema.PopularityParams):
    if params.n_files < 1:
        raise ConfigError("n_files must be >= 1")
    if not params.gamma > 0:
        raise ConfigError("gamma must be > 0")
    if not params.q >= 0:
        raise ConfigError("q must be >= 0")
    if not 0.0 <= params.alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")


def is_valid(dist: PopularityDistribution, n_files: int) -> bool:
    return (
        dist.shape == (n_files,)
        and bool(np.all(dist >= 0.0))
        and abs(float(dist.sum()) - 1.0) <= TOLERANCE
    )


def mzipf_init(params: schema.PopularityParams) -> PopularityDistribution:
    """P_i = (i + q)^-gamma / sum_j (j + q)^-gamma for ranks i = 1..N."""
    check_params(params)
    ranks = np.arange(1, params.n_files + 1, dtype=np.float64)
    weights = np.power(ranks + params.q, -params.gamma)
    return weights / weights.sum()


def apply_rewatch_update(
    dist: PopularityDistribution,
    requested: int,
    params: schema.PopularityParams,
) -> PopularityDistribution:
    """Scale the requested file by alpha and hand the released mass to the
    other files in proportion to their current probability."""
    alpha = params.alpha
    n = dist.shape[0]
    if not 1 <= requested <= n:
        raise ValueError(f"requested rank {requested} outside 1..{n}")
    if alpha == 1.0:
        return dist.copy()
    if n == 1:
        return np.ones(1)

    j = requested - 1
    p_j = float(dist[j])
    rest = 1.0 - p_j

    if rest <= TOLERANCE:
        # No proportions left to follow: spread the released mass evenly.
        new = np.full(n, (1.0 - alpha) / (n - 1))
        new[j] = alpha
        return new

    new = dist * ((1.0 - alpha * p_j) / rest)
    new[j] = alpha * p_j
    return new / new.sum()


def sample_file(dist: PopularityDistribution, rng: np.random.Generator) -> int:
    """Draw a 1-based rank with probability dist[rank - 1]."""
    cdf = np.cumsum(dist)
    u = rng.random() * cdf[-1]
    idx = int(np.searchsorted(cdf, u, side='right'))
    if idx >= dist.shape[0]:
        idx = int(np.flatnonzero(dist > 0)[-1])
    return idx + 1


def top_mass(dist: PopularityDistribution, k: int) -> float:
    """Probability carried by the k most popular ranks."""
    k = max(0, min(int(k), dist.shape[0]))
    return float(dist[:k].sum())
