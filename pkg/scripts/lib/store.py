"""On-disk artifacts: content hashes, atomic writes and the run manifest."""

import hashlib
import json
import os
from pathlib import Path
from typing import Dict, Iterable, Optional

from . import schema

MANIFEST_NAME = "manifest.json"
HASH_LENGTH = 16


class OutputError(schema.EdgecodeError):
    """An output file could not be written."""

    def __init__(self, path: Path, reason: str):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = path


def content_hash(text: str) -> str:
    """Short sha256 of a text artifact."""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:HASH_LENGTH]


def file_digest(path: Path) -> Optional[str]:
    """Full sha256 of a file, or None if it cannot be read."""
    h = hashlib.sha256()
    try:
        with open(path, 'rb') as f:
            for chunk in iter(lambda: f.read(1 << 16), b''):
                h.update(chunk)
    except OSError:
        return None
    return h.hexdigest()


def atomic_write_text(path: Path, text: str):
    """Write text so readers never see a partial file."""
    path = Path(path)
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp_path, 'w', newline='\n') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def load_manifest(out_dir: Path) -> Optional[schema.RunManifest]:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        return None
    try:
        with open(path, 'r') as f:
            return schema.RunManifest.from_dict(json.load(f))
    except (json.JSONDecodeError, OSError, KeyError):
        return None


def save_manifest(out_dir: Path, manifest: schema.RunManifest):
    text = json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"
    atomic_write_text(Path(out_dir) / MANIFEST_NAME, text)


def digest_files(out_dir: Path, relpaths: Iterable[str]) -> Dict[str, str]:
    """Digest each listed file (paths relative to out_dir)."""
    digests = {}
    for rel in relpaths:
        digest = file_digest(Path(out_dir) / rel)
        if digest is None:
            raise OutputError(Path(out_dir) / rel, "missing after write")
        digests[rel] = digest
    return digests


def cell_verified(out_dir: Path, manifest: Optional[schema.RunManifest], cell_key: str) -> bool:
    """True when every file recorded for the cell exists with its digest."""
    if manifest is None or cell_key not in manifest.cells:
        return False
    entries = manifest.cells[cell_key]
    if not entries:
        return False
    for rel, digest in entries.items():
        if file_digest(Path(out_dir) / rel) != digest:
            return False
    return True
