"""Parsers for edgecode's text artifacts.

Each parser is the inverse of the matching writer in render.py and reports
problems as ParseError with the 1-based line number.
"""

import csv
import io
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import render, schema
from .metrics import report_from_values
from .schema import SegmentId


class ParseError(schema.EdgecodeError):
    def __init__(self, source: str, line: int, reason: str):
        super().__init__(f"{source}:{line}: {reason}")
        self.source = source
        self.line = line


def read_text(path: Path) -> str:
    with open(path, 'r') as f:
        return f.read()


def _header_values(lines: List[str]) -> Dict[str, str]:
    values = {}
    for line in lines:
        if line.startswith("# ") and "=" in line:
            key, _, value = line[2:].partition("=")
            values[key.strip()] = value.strip()
    return values


def _data_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_catalog(text: str, source: str = "<catalog>") -> schema.Catalog:
    lines = text.splitlines()
    if not lines or lines[0] != render.CATALOG_HEADER:
        raise ParseError(source, 1, "not an edgecode catalog")
    header = _header_values(lines)
    try:
        segment_duration = float(header["segment_duration"])
    except (KeyError, ValueError):
        raise ParseError(source, 2, "missing or bad segment_duration")

    files = []
    for lineno, line in _data_lines(text):
        fields = line.split(",")
        try:
            file_id = int(fields[0])
            duration = float(fields[1])
            sizes = tuple(int(x) for x in fields[2:])
        except (IndexError, ValueError):
            raise ParseError(source, lineno, "expected file_id,duration_s,sizes...")
        if not sizes or min(sizes) <= 0:
            raise ParseError(source, lineno, "a file needs at least one positive segment size")
        if file_id != len(files) + 1:
            raise ParseError(source, lineno, f"file ids must run 1..N in order, got {file_id}")
        files.append(schema.FileSpec(file_id, duration, sizes))
    return schema.Catalog(files=files, segment_duration=segment_duration)


def parse_profile(text: str, source: str = "<profile>") -> Tuple[schema.RequestProfile, str]:
    """Returns the profile and the catalog file name recorded in its header."""
    lines = text.splitlines()
    if not lines or lines[0] != render.PROFILE_HEADER:
        raise ParseError(source, 1, "not an edgecode profile")
    header = _header_values(lines)
    try:
        params = schema.PopularityParams(
            n_files=int(header["n_files"]),
            gamma=float(header["gamma"]),
            q=float(header["q"]),
            alpha=float(header["alpha"]),
        )
        seed = int(header["seed"])
        n_clients = int(header["n_clients"])
        mean_wait = float(header["mean_wait"])
        horizon = float(header["horizon"])
    except (KeyError, ValueError) as e:
        raise ParseError(source, 1, f"bad profile header ({e})")

    clients: List[List[schema.ProfileEntry]] = [[] for _ in range(n_clients)]
    for lineno, line in _data_lines(text):
        try:
            client, seq, file_id, wait_ms = (int(x) for x in line.split(","))
        except ValueError:
            raise ParseError(source, lineno, "expected client_id,seq_no,file_id,wait_ms")
        if not 0 <= client < n_clients:
            raise ParseError(source, lineno, f"client {client} outside 0..{n_clients - 1}")
        if seq != len(clients[client]):
            raise ParseError(source, lineno, f"client {client}: seq_no {seq} out of order")
        if wait_ms < 0:
            raise ParseError(source, lineno, "negative wait")
        if not 1 <= file_id <= params.n_files:
            raise ParseError(source, lineno, f"file {file_id} outside 1..{params.n_files}")
        clients[client].append(schema.ProfileEntry(file_id, wait_ms))

    profile = schema.RequestProfile(
        clients=clients,
        seed=seed,
        params=params,
        mean_wait=mean_wait,
        horizon=horizon,
        catalog_hash=header.get("catalog_hash", ""),
    )
    return profile, header.get("catalog_file", "")


def parse_trace(text: str, source: str = "<trace>") -> List[schema.DeliveryRecord]:
    records = []
    for lineno, line in _data_lines(text):
        fields = line.split(",")
        if len(fields) != len(render.TRACE_COLUMNS):
            raise ParseError(source, lineno, f"expected {len(render.TRACE_COLUMNS)} fields")
        try:
            records.append(schema.DeliveryRecord(
                client=int(fields[2]),
                segment=SegmentId(int(fields[3]), int(fields[4])),
                size=int(fields[5]),
                request_time=float(fields[0]) / 1000.0,
                delivery_time=float(fields[1]) / 1000.0,
                source=fields[6],
                payload_bytes=int(fields[7]),
                group_size=int(fields[8]),
            ))
        except ValueError:
            raise ParseError(source, lineno, "bad numeric field")
        if fields[6] not in (schema.SOURCE_CACHE, schema.SOURCE_NETWORK):
            raise ParseError(source, lineno, f"unknown source {fields[6]!r}")
    return records


def parse_members(text: str) -> Tuple[Tuple[int, SegmentId], ...]:
    members = []
    for item in text.split(";"):
        c, f, i = item.split(":")
        members.append((int(c), SegmentId(int(f), int(i))))
    return tuple(members)


def parse_txlog(text: str, source: str = "<txlog>") -> List[schema.Transmission]:
    out = []
    for lineno, line in _data_lines(text):
        fields = line.split(",")
        if len(fields) != len(render.TXLOG_COLUMNS):
            raise ParseError(source, lineno, f"expected {len(render.TXLOG_COLUMNS)} fields")
        try:
            out.append(schema.Transmission(
                start=float(fields[0]) / 1000.0,
                end=float(fields[1]) / 1000.0,
                payload_bytes=int(fields[2]),
                members=parse_members(fields[3]),
            ))
        except ValueError:
            raise ParseError(source, lineno, "bad transmission record")
    return out


def parse_value(text: str) -> Optional[float]:
    if text == render.NULL:
        return None
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def parse_results_csv(text: str, source: str = "<results>") -> List[schema.SweepCell]:
    """Per-seed results rows back into SweepCells."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(source, 1, "empty results file")
    missing = [c for c in render.RESULT_COLUMNS if c not in header]
    if missing:
        raise ParseError(source, 1, f"missing column(s): {', '.join(missing)}")

    cells = []
    for lineno, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(header):
            raise ParseError(source, lineno, f"expected {len(header)} fields, got {len(fields)}")
        row = dict(zip(header, fields))
        try:
            values = {c: parse_value(row[c]) for c in render.RESULT_COLUMNS[4:]}
            cells.append(schema.SweepCell(
                alpha=float(row["alpha"]),
                cache_fraction=float(row["cache_fraction"]),
                policy=row["policy"],
                seed=int(row["seed"]),
                report=report_from_values(values),
            ))
        except ValueError:
            raise ParseError(source, lineno, "bad numeric field")
    return cells


def parse_aggregated_csv(text: str, source: str = "<aggregated>") -> List[Dict[str, object]]:
    """Aggregated rows as dicts (means/sds as float or None)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(source, 1, "empty aggregated file")
    expected = render.aggregated_columns()
    if header != expected:
        raise ParseError(source, 1, "header does not match the aggregated schema")

    rows = []
    for lineno, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(header):
            raise ParseError(source, lineno, f"expected {len(header)} fields, got {len(fields)}")
        raw = dict(zip(header, fields))
        try:
            row: Dict[str, object] = {
                "alpha": float(raw["alpha"]),
                "cache_fraction": float(raw["cache_fraction"]),
                "policy": raw["policy"],
                "n_seeds": int(raw["n_seeds"]),
            }
            for c in header[4:]:
                v = parse_value(raw[c])
                row[c] = float(v) if v is not None else None
        except ValueError:
            raise ParseError(source, lineno, "bad numeric field")
        rows.append(row)
    return rows
