"""Tests for store module."""

import sys
import tempfile
import unittest
from pathlib import Path

# Add lib to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from lib import schema, store


class TestContentHash(unittest.TestCase):
    def test_stable_and_short(self):
        self.assertEqual(store.content_hash("abc"), store.content_hash("abc"))
        self.assertNotEqual(store.content_hash("abc"), store.content_hash("abd"))
        self.assertEqual(len(store.content_hash("abc")), 16)


class TestAtomicWrite(unittest.TestCase):
    def test_creates_parents_and_leaves_no_temp(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "a" / "b" / "out.txt"
            store.atomic_write_text(path, "x\n")
            self.assertEqual(path.read_text(), "x\n")
            self.assertEqual(sorted(p.name for p in path.parent.iterdir()), ["out.txt"])

    def test_replaces_existing(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "out.txt"
            store.atomic_write_text(path, "old")
            store.atomic_write_text(path, "new")
            self.assertEqual(path.read_text(), "new")

    def test_unwritable_path_named(self):
        with tempfile.TemporaryDirectory() as tmp:
            blocker = Path(tmp) / "file"
            blocker.write_text("")
            with self.assertRaises(store.OutputError) as ctx:
                store.atomic_write_text(blocker / "out.txt", "x")
            self.assertIn("out.txt", str(ctx.exception))


class TestManifest(unittest.TestCase):
    def test_save_and_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = schema.RunManifest(config_hash="h", cells={"c1": {"x.txt": "d"}})
            store.save_manifest(Path(tmp), manifest)
            self.assertEqual(store.load_manifest(Path(tmp)), manifest)

    def test_missing_or_corrupt(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.assertIsNone(store.load_manifest(Path(tmp)))
            (Path(tmp) / store.MANIFEST_NAME).write_text("{not json")
            self.assertIsNone(store.load_manifest(Path(tmp)))

    def test_cell_verification(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp)
            store.atomic_write_text(out / "cells" / "k" / "results.csv", "a,b\n")
            manifest = schema.RunManifest(config_hash="h")
            manifest.cells["k"] = store.digest_files(out, ["cells/k/results.csv"])
            self.assertTrue(store.cell_verified(out, manifest, "k"))
            self.assertFalse(store.cell_verified(out, manifest, "other"))
            self.assertFalse(store.cell_verified(out, None, "k"))

            (out / "cells" / "k" / "results.csv").write_text("a,c\n")
            self.assertFalse(store.cell_verified(out, manifest, "k"))

    def test_digest_missing_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(store.OutputError):
                store.digest_files(Path(tmp), ["missing.txt"])


if __name__ == "__main__":
    unittest.main()
