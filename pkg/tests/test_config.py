"""Tests for config module."""

import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

# Add lib to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from lib import config, schema

REPO_CONFIG = Path(__file__).parent.parent / "config" / "edgecode.json"


def write_config(tmp, data):
    path = Path(tmp) / "cfg.json"
    path.write_text(json.dumps(data))
    return path


class TestDefaults(unittest.TestCase):
    @mock.patch.dict(os.environ, {}, clear=True)
    def test_published_settings(self):
        exp = config.load_config()
        self.assertEqual(exp.n_clients, 10)
        self.assertEqual(exp.n_files, 100)
        self.assertEqual(exp.link_rate, 24e6)
        self.assertEqual(exp.segment_duration, 4.0)
        self.assertEqual((exp.gamma, exp.q), (2.5, 10.0))
        self.assertEqual(exp.mean_wait, 5.0)
        self.assertEqual(exp.horizon, 10800.0)
        self.assertEqual(len(exp.alphas) * len(exp.cache_fractions), 15)

    @mock.patch.dict(os.environ, {}, clear=True)
    def test_repo_config_matches_defaults(self):
        self.assertEqual(config.load_config(REPO_CONFIG), config.load_config())


class TestLoadConfig(unittest.TestCase):
    @mock.patch.dict(os.environ, {}, clear=True)
    def test_partial_override(self):
        with tempfile.TemporaryDirectory() as tmp:
            exp = config.load_config(write_config(tmp, {"workload": {"alphas": [0.0, 1.0]}}))
        self.assertEqual(exp.alphas, [0.0, 1.0])
        self.assertEqual(exp.mean_wait, 5.0)

    @mock.patch.dict(os.environ, {"EDGECODE_OUT": "/tmp/elsewhere"}, clear=True)
    def test_env_output_dir(self):
        self.assertEqual(config.load_config().output_dir, "/tmp/elsewhere")

    def test_invalid_json_names_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_text('{\n  "system": {\n    "n_clients": ,\n  }\n}\n')
            with self.assertRaises(config.ConfigError) as ctx:
                config.load_config(path)
        self.assertIn("bad.json:3", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(config.ConfigError):
            config.load_config(Path("/nonexistent/edgecode.json"))

    def test_unknown_section(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(config.ConfigError):
                config.load_config(write_config(tmp, {"sytem": {}}))


class TestValidate(unittest.TestCase):
    def check_rejected(self, override):
        data = config.deep_merge(config.DEFAULT_CONFIG, override)
        with self.assertRaises(config.ConfigError):
            config.from_dict(data)

    def test_empty_policies(self):
        self.check_rejected({"system": {"policies": []}})

    def test_unknown_policy(self):
        self.check_rejected({"system": {"policies": ["fifo"]}})

    def test_alpha_range(self):
        self.check_rejected({"workload": {"alphas": [1.5]}})

    def test_link_rate(self):
        self.check_rejected({"system": {"link_rate": 0}})

    def test_duration_range_order(self):
        self.check_rejected({"catalog": {"duration_range": [300, 120]}})

    def test_size_model_order(self):
        self.check_rejected({"catalog": {"size_model": {"min_bytes": 9_000_000}}})

    def test_duplicate_seeds(self):
        self.check_rejected({"sweep": {"seeds": [1, 1]}})

    def test_bad_type(self):
        self.check_rejected({"system": {"n_clients": "ten"}})


class TestEnv(unittest.TestCase):
    @mock.patch.dict(os.environ, {"EDGECODE_JOBS": "4"}, clear=True)
    def test_jobs(self):
        self.assertEqual(config.default_jobs(), 4)

    @mock.patch.dict(os.environ, {"EDGECODE_JOBS": "many"}, clear=True)
    def test_bad_jobs(self):
        with self.assertRaises(config.ConfigError):
            config.default_jobs()

    @mock.patch.dict(os.environ, {"EDGECODE_DEBUG": "yes"}, clear=True)
    def test_flag(self):
        self.assertTrue(config.env_flag("EDGECODE_DEBUG"))
        self.assertFalse(config.env_flag("EDGECODE_OTHER"))


class TestConfigHash(unittest.TestCase):
    def test_ignores_output_dir(self):
        a = schema.ExperimentConfig(output_dir="a")
        b = schema.ExperimentConfig(output_dir="b")
        self.assertEqual(config.config_hash(a), config.config_hash(b))
        self.assertEqual(len(config.config_hash(a)), 16)

    def test_tracks_settings(self):
        self.assertNotEqual(config.config_hash(schema.ExperimentConfig(seeds=[1])),
                            config.config_hash(schema.ExperimentConfig(seeds=[2])))


if __name__ == "__main__":
    unittest.main()
