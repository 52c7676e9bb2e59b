"""Caching/coding gains, latency per MB and perceived throughput.

Undefined values (zero denominators, empty traces) are None, never 0 or NaN.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import schema

BYTES_PER_MB = 1_000_000

METRIC_FIELDS = (
    "g_c",
    "g_i",
    "g_ci",
    "latency_s_per_mb",
    "throughput_bps",
    "tx_bytes_nocache",
    "tx_bytes_cache",
    "tx_bytes_cache_coded",
    "hits",
    "misses",
    "requests_completed",
    "latency_s_per_mb_uncoded",
    "throughput_bps_uncoded",
)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    if denominator <= 0:
        return None
    return numerator / denominator


def gain_caching(tx_nocache_bits: float, tx_cache_bits: float) -> Optional[float]:
    return _ratio(tx_nocache_bits, tx_cache_bits)


def gain_coding(tx_cache_nocode_bits: float, tx_cache_code_bits: float) -> Optional[float]:
    return _ratio(tx_cache_nocode_bits, tx_cache_code_bits)


def gain_combined(tx_nocache_nocode_bits: float, tx_cache_code_bits: float) -> Optional[float]:
    return _ratio(tx_nocache_nocode_bits, tx_cache_code_bits)


def latency_per_mb(trace: Sequence[schema.DeliveryRecord]) -> Optional[float]:
    """Mean of elapsed/size over every delivery; cache hits contribute 0."""
    if not trace:
        return None
    return sum(d.elapsed / (d.size / BYTES_PER_MB) for d in trace) / len(trace)


def perceived_throughput(trace: Sequence[schema.DeliveryRecord]) -> Optional[float]:
    """Mean of wanted bits/elapsed over network deliveries."""
    network = [d for d in trace if d.source == schema.SOURCE_NETWORK and d.elapsed > 0]
    if not network:
        return None
    return sum(d.size * 8 / d.elapsed for d in network) / len(network)


def build_report(
    nocache: schema.SimResult,
    cache_uncoded: Optional[schema.SimResult],
    cache_coded: Optional[schema.SimResult],
) -> schema.MetricsReport:
    """Combine the runs of one cell, which all served the same segment
    requests. Latency, throughput and counters come from the cache+coding
    run; a run that was not configured leaves the metrics that need it
    undefined."""
    a = nocache.tx_bytes
    report = schema.MetricsReport(tx_bytes_nocache=a)
    if cache_uncoded is not None:
        b = cache_uncoded.tx_bytes
        report.tx_bytes_cache = b
        report.gain_caching = gain_caching(a * 8, b * 8)
        report.latency_per_mb_uncoded = latency_per_mb(cache_uncoded.deliveries)
        report.throughput_uncoded = perceived_throughput(cache_uncoded.deliveries)
    if cache_coded is not None:
        c = cache_coded.tx_bytes
        report.tx_bytes_cache_coded = c
        report.gain_combined = gain_combined(a * 8, c * 8)
        report.latency_per_mb = latency_per_mb(cache_coded.deliveries)
        report.perceived_throughput = perceived_throughput(cache_coded.deliveries)
        report.hits = cache_coded.hits
        report.misses = cache_coded.misses
        report.requests_completed = len(cache_coded.deliveries)
        if cache_uncoded is not None:
            report.gain_coding = gain_coding(cache_uncoded.tx_bytes * 8, c * 8)
    elif cache_uncoded is not None:
        report.hits = cache_uncoded.hits
        report.misses = cache_uncoded.misses
        report.requests_completed = len(cache_uncoded.deliveries)
    return report


def report_values(report: schema.MetricsReport) -> Dict[str, Optional[float]]:
    """The report keyed by results-CSV column name."""
    return {
        "g_c": report.gain_caching,
        "g_i": report.gain_coding,
        "g_ci": report.gain_combined,
        "latency_s_per_mb": report.latency_per_mb,
        "throughput_bps": report.perceived_throughput,
        "tx_bytes_nocache": report.tx_bytes_nocache,
        "tx_bytes_cache": report.tx_bytes_cache,
        "tx_bytes_cache_coded": report.tx_bytes_cache_coded,
        "hits": report.hits,
        "misses": report.misses,
        "requests_completed": report.requests_completed,
        "latency_s_per_mb_uncoded": report.latency_per_mb_uncoded,
        "throughput_bps_uncoded": report.throughput_uncoded,
    }


def report_from_values(values: Dict[str, Optional[float]]) -> schema.MetricsReport:
    def count(name):
        v = values.get(name)
        return int(v) if v is not None else 0

    return schema.MetricsReport(
        gain_caching=values.get("g_c"),
        gain_coding=values.get("g_i"),
        gain_combined=values.get("g_ci"),
        latency_per_mb=values.get("latency_s_per_mb"),
        perceived_throughput=values.get("throughput_bps"),
        tx_bytes_nocache=count("tx_bytes_nocache"),
        tx_bytes_cache=count("tx_bytes_cache"),
        tx_bytes_cache_coded=count("tx_bytes_cache_coded"),
        hits=count("hits"),
        misses=count("misses"),
        requests_completed=count("requests_completed"),
        latency_per_mb_uncoded=values.get("latency_s_per_mb_uncoded"),
        throughput_uncoded=values.get("throughput_bps_uncoded"),
    )


def _mean_sd(values: List[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    present = np.array([v for v in values if v is not None], dtype=np.float64)
    if present.size == 0:
        return None, None
    mean = float(present.mean())
    sd = float(present.std(ddof=1)) if present.size > 1 else 0.0
    return mean, sd


def aggregate_sweep(cells: Iterable[schema.SweepCell]) -> List[Dict[str, object]]:
    """Mean and sample standard deviation over seeds per (alpha, M, policy)."""
    groups: Dict[Tuple[float, float, str], List[schema.SweepCell]] = {}
    seen = set()
    for cell in cells:
        if cell.key in seen:
            raise ValueError(f"duplicate sweep cell {cell.key}")
        seen.add(cell.key)
        groups.setdefault((cell.alpha, cell.cache_fraction, cell.policy), []).append(cell)

    rows = []
    for (alpha, m, policy) in sorted(groups):
        members = sorted(groups[(alpha, m, policy)], key=lambda c: c.seed)
        row: Dict[str, object] = {
            "alpha": alpha,
            "cache_fraction": m,
            "policy": policy,
            "n_seeds": len(members),
        }
        per_metric = [report_values(c.report) for c in members]
        for name in METRIC_FIELDS:
            mean, sd = _mean_sd([v[name] for v in per_metric])
            row[f"{name}_mean"] = mean
            row[f"{name}_sd"] = sd
        rows.append(row)
    return rows
