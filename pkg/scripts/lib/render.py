"""Output rendering for edgecode: text artifacts, CSVs, summary and plots.

Every writer returns a string with '\\n' line endings and a stable row order,
so identical inputs give byte-identical files.
"""

import csv
import io
from pathlib import Path
from typing import Dict, List, Sequence

from . import schema
from .metrics import METRIC_FIELDS, report_values

NULL = "null"

CATALOG_HEADER = "# edgecode catalog v1"
PROFILE_HEADER = "# edgecode profile v1"
TRACE_COLUMNS = ("req_time_ms", "deliv_time_ms", "client", "file", "seg_index",
                 "seg_bytes", "source", "payload_bytes", "group_size")
TXLOG_COLUMNS = ("start_ms", "end_ms", "payload_bytes", "members")
CODING_COLUMNS = ("time_ms", "action", "members", "merged_dof", "merged_doe", "open_pairs")
CACHE_TRACE_COLUMNS = ("time_ms", "client", "op", "segment", "policy_key_values")
KEY_COLUMNS = ("alpha", "cache_fraction", "policy", "seed")
RESULT_COLUMNS = KEY_COLUMNS + (
    "g_c", "g_i", "g_ci", "latency_s_per_mb", "throughput_bps",
    "tx_bytes_nocache", "tx_bytes_cache", "tx_bytes_cache_coded",
    "hits", "misses", "requests_completed",
    "latency_s_per_mb_uncoded", "throughput_bps_uncoded",
)

PLOT_METRICS = {
    "g_ci": "Gain (caching + coding)",
    "latency_s_per_mb": "Perceived latency (s/MB)",
    "throughput_bps": "Perceived throughput (Mbps)",
}
UNCODED_COMPANION = {
    "latency_s_per_mb": "latency_s_per_mb_uncoded",
    "throughput_bps": "throughput_bps_uncoded",
}


def fmt_value(value) -> str:
    """repr for floats (exact round trip), 'null' for undefined."""
    if value is None:
        return NULL
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def fmt_ms(seconds: float) -> str:
    return f"{seconds * 1000.0:.6f}"


def fmt_members(members) -> str:
    return ";".join(f"{c}:{s.file_id}:{s.index}" for c, s in members)


def _csv_text(columns: Sequence[str], rows: Sequence[Dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_value(row.get(c)) for c in columns])
    return buf.getvalue()


def catalog_text(catalog: schema.Catalog) -> str:
    lines = [
        CATALOG_HEADER,
        f"# segment_duration={catalog.segment_duration!r}",
        f"# n_files={catalog.n_files}",
        "# file_id,duration_s,segment_sizes_bytes...",
    ]
    for f in catalog.files:
        lines.append(",".join([str(f.file_id), repr(float(f.duration))] + [str(s) for s in f.segments]))
    return "\n".join(lines) + "\n"


def profile_text(profile: schema.RequestProfile, catalog_file: str = "") -> str:
    p = profile.params
    lines = [
        PROFILE_HEADER,
        f"# seed={profile.seed}",
        f"# alpha={p.alpha!r}",
        f"# n_files={p.n_files}",
        f"# gamma={p.gamma!r}",
        f"# q={p.q!r}",
        f"# mean_wait={profile.mean_wait!r}",
        f"# horizon={profile.horizon!r}",
        f"# n_clients={profile.n_clients}",
        f"# catalog_hash={profile.catalog_hash}",
        f"# catalog_file={catalog_file}",
        "# client_id,seq_no,file_id,wait_ms",
    ]
    for client, entries in enumerate(profile.clients):
        for seq, e in enumerate(entries):
            lines.append(f"{client},{seq},{e.file_id},{e.wait_ms}")
    return "\n".join(lines) + "\n"


def trace_text(deliveries: Sequence[schema.DeliveryRecord]) -> str:
    lines = ["# " + ",".join(TRACE_COLUMNS)]
    for d in deliveries:
        lines.append(",".join((
            fmt_ms(d.request_time), fmt_ms(d.delivery_time), str(d.client),
            str(d.segment.file_id), str(d.segment.index), str(d.size),
            d.source, str(d.payload_bytes), str(d.group_size),
        )))
    return "\n".join(lines) + "\n"


def txlog_text(transmissions: Sequence[schema.Transmission]) -> str:
    lines = ["# " + ",".join(TXLOG_COLUMNS)]
    for t in transmissions:
        lines.append(f"{fmt_ms(t.start)},{fmt_ms(t.end)},{t.payload_bytes},{fmt_members(t.members)}")
    return "\n".join(lines) + "\n"


def coding_trace_line(now: float, placement, open_pairs: int) -> str:
    r = placement.request
    return f"{fmt_ms(now)},{placement.action},{fmt_members(r.members)},{len(r.has)},{len(r.wants)},{open_pairs}"


def coding_trace_text(lines: Sequence[str]) -> str:
    return "\n".join(["# " + ",".join(CODING_COLUMNS)] + list(lines)) + "\n"


def cache_trace_line(now: float, client: int, op: str, segment: schema.SegmentId, keys: tuple) -> str:
    return f"{fmt_ms(now)},{client},{op},{segment},{'|'.join(fmt_value(k) for k in keys)}"


def cache_trace_text(lines: Sequence[str]) -> str:
    return "\n".join(["# " + ",".join(CACHE_TRACE_COLUMNS)] + list(lines)) + "\n"


def result_row(cell: schema.SweepCell) -> Dict[str, object]:
    row: Dict[str, object] = {
        "alpha": cell.alpha,
        "cache_fraction": cell.cache_fraction,
        "policy": cell.policy,
        "seed": cell.seed,
    }
    row.update(report_values(cell.report))
    return row


def results_csv(cells: Sequence[schema.SweepCell]) -> str:
    ordered = sorted(cells, key=lambda c: c.key)
    return _csv_text(RESULT_COLUMNS, [result_row(c) for c in ordered])


def aggregated_columns() -> List[str]:
    cols = ["alpha", "cache_fraction", "policy", "n_seeds"]
    for name in METRIC_FIELDS:
        cols += [f"{name}_mean", f"{name}_sd"]
    return cols


def aggregated_csv(rows: Sequence[Dict[str, object]]) -> str:
    return _csv_text(aggregated_columns(), rows)


def summary_text(rows: Sequence[Dict[str, object]]) -> str:
    """Fixed-width table of the aggregated means."""
    def cell(v, width, prec):
        if v is None:
            return NULL.rjust(width)
        return f"{v:{width}.{prec}f}"

    header = (f"{'alpha':>6} {'M':>6} {'policy':<10} {'seeds':>5} "
              f"{'G_c':>8} {'G_i':>8} {'G_ci':>8} {'L_s s/MB':>9} {'T_s Mbps':>9}")
    lines = [header, "-" * len(header)]
    for r in rows:
        thr = r.get("throughput_bps_mean")
        lines.append(
            f"{r['alpha']:6.2f} {r['cache_fraction']:6.2f} {r['policy']:<10} {r['n_seeds']:>5} "
            f"{cell(r.get('g_c_mean'), 8, 3)} {cell(r.get('g_i_mean'), 8, 3)} "
            f"{cell(r.get('g_ci_mean'), 8, 3)} {cell(r.get('latency_s_per_mb_mean'), 9, 4)} "
            f"{cell(thr / 1e6 if thr is not None else None, 9, 3)}")
    return "\n".join(lines) + "\n"


def plot_filename(metric: str, cache_fraction: float) -> str:
    return f"{metric}_M{cache_fraction:g}.svg"


def render_plots(rows: Sequence[Dict[str, object]], out_dir: Path) -> List[Path]:
    """One SVG per (metric, M): x = alpha, one line per policy with coding on.
    Latency and throughput also show the coding-off run dashed."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "edgecode"
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def y(row, name) -> float:
        v = row.get(f"{name}_mean")
        if v is None:
            return float("nan")  # gap, not zero
        return v / 1e6 if name.startswith("throughput") else v

    written = []
    fractions = sorted({r["cache_fraction"] for r in rows})
    policies = sorted({r["policy"] for r in rows})
    for metric, label in PLOT_METRICS.items():
        for m in fractions:
            fig, ax = plt.subplots(figsize=(5, 3.6))
            for i, policy in enumerate(policies):
                series = sorted((r for r in rows if r["cache_fraction"] == m and r["policy"] == policy),
                                key=lambda r: r["alpha"])
                if not series:
                    continue
                xs = [r["alpha"] for r in series]
                color = f"C{i}"
                ax.plot(xs, [y(r, metric) for r in series], marker="o", color=color, label=policy)
                companion = UNCODED_COMPANION.get(metric)
                if companion:
                    ax.plot(xs, [y(r, companion) for r in series], linestyle="--", color=color,
                            label=f"{policy} (no coding)")
            ax.set_xlabel("Rewatch factor (alpha)")
            ax.set_ylabel(label)
            ax.set_title(f"M = {m:g}")
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize="small")
            fig.tight_layout()
            path = out_dir / plot_filename(metric, m)
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
