"""Tests for workload module."""

import sys
import unittest
from pathlib import Path

import numpy as np

# Add lib to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from lib import popularity, schema, workload
from lib.schema import SegmentId


def small_catalog(segments_per_file):
    files = [schema.FileSpec(i + 1, 4.0 * n, tuple([1000] * n)) for i, n in enumerate(segments_per_file)]
    return schema.Catalog(files=files, segment_duration=4.0)


class TestSegmentCount(unittest.TestCase):
    def test_exact_multiples(self):
        self.assertEqual(workload.segment_count(120.0, 4.0), 30)
        self.assertEqual(workload.segment_count(300.0, 4.0), 75)

    def test_partial_segment_rounds_up(self):
        self.assertEqual(workload.segment_count(121.0, 4.0), 31)

    def test_float_noise_does_not_add_segment(self):
        self.assertEqual(workload.segment_count(0.3 * 400, 4.0), 30)


class TestBuildCatalog(unittest.TestCase):
    def test_forced_duration(self):
        config = schema.ExperimentConfig(n_files=1, duration_range=(120.0, 120.0))
        catalog = workload.build_catalog(config, np.random.default_rng(0))
        self.assertEqual(catalog.n_files, 1)
        self.assertEqual(catalog.files[0].n_segments, 30)

    def test_degenerate_size_model(self):
        model = schema.SegmentSizeModel(mean_bytes=2_500_000, min_bytes=2_500_000, max_bytes=2_500_000)
        config = schema.ExperimentConfig(n_files=5, size_model=model)
        catalog = workload.build_catalog(config, np.random.default_rng(1))
        sizes = {s for f in catalog.files for s in f.segments}
        self.assertEqual(sizes, {2_500_000})

    def test_sizes_within_bounds(self):
        for family in ("lognormal", "uniform", "constant"):
            model = schema.SegmentSizeModel(family=family, sigma=0.8)
            config = schema.ExperimentConfig(n_files=20, size_model=model)
            catalog = workload.build_catalog(config, np.random.default_rng(2))
            for f in catalog.files:
                self.assertTrue(all(model.min_bytes <= s <= model.max_bytes for s in f.segments), family)

    def test_durations_within_range(self):
        catalog = workload.catalog_for_seed(schema.ExperimentConfig(), 3)
        self.assertEqual(catalog.n_files, 100)
        for f in catalog.files:
            self.assertGreaterEqual(f.duration, 120.0)
            self.assertLessEqual(f.duration, 300.0)
            self.assertEqual(f.n_segments, workload.segment_count(f.duration, 4.0))

    def test_catalog_is_seeded(self):
        config = schema.ExperimentConfig(n_files=10)
        a = workload.catalog_for_seed(config, 4)
        b = workload.catalog_for_seed(config, 4)
        c = workload.catalog_for_seed(config, 5)
        self.assertEqual(workload.catalog_hash(a), workload.catalog_hash(b))
        self.assertNotEqual(workload.catalog_hash(a), workload.catalog_hash(c))


class TestGenerateProfile(unittest.TestCase):
    def setUp(self):
        self.catalog = workload.catalog_for_seed(schema.ExperimentConfig(), 1)

    def profile(self, alpha, seed=1, n_clients=3, horizon=100.0):
        p = schema.PopularityParams(n_files=100, alpha=alpha)
        return workload.generate_profile(self.catalog, n_clients, p, 5.0, horizon, seed)

    def test_same_seed_identical(self):
        a, b = self.profile(0.5), self.profile(0.5)
        self.assertEqual(a.clients, b.clients)
        self.assertNotEqual(a.clients, self.profile(0.5, seed=2).clients)

    def test_length_covers_horizon(self):
        prof = self.profile(1.0, horizon=100.0)
        for entries in prof.clients:
            self.assertEqual(len(entries), workload.profile_length(100.0, 5.0))
        self.assertEqual(workload.profile_length(100.0, 5.0), 30)

    def test_alpha_one_draws_from_initial(self):
        prof = self.profile(1.0)
        initial = popularity.mzipf_init(prof.params)
        for dist in workload.replay_distributions(prof.clients[0], prof.params):
            np.testing.assert_array_equal(dist, initial)

    def test_alpha_zero_never_repeats(self):
        prof = self.profile(0.0)
        for entries in prof.clients:
            ids = [e.file_id for e in entries]
            self.assertEqual(len(ids), len(set(ids)))

    def test_alpha_zero_default_length_covers_catalog_first(self):
        prof = self.profile(0.0, n_clients=1, horizon=10800.0)
        ids = [e.file_id for e in prof.clients[0]]
        self.assertEqual(len(ids), 2170)
        self.assertEqual(sorted(ids[:100]), list(range(1, 101)))

    def test_replay_matches_draws(self):
        prof = self.profile(0.25)
        for entries in prof.clients:
            for entry, dist in zip(entries, workload.replay_distributions(entries, prof.params)):
                self.assertGreater(dist[entry.file_id - 1], 0.0)
                self.assertTrue(popularity.is_valid(dist, 100))

    def test_mean_wait(self):
        prof = self.profile(1.0, n_clients=1, horizon=5.0 * 9990)
        waits = [e.wait for e in prof.clients[0]]
        self.assertEqual(len(waits), 10_000)
        self.assertGreaterEqual(np.mean(waits), 4.85)
        self.assertLessEqual(np.mean(waits), 5.15)

    def test_records_catalog_hash(self):
        prof = self.profile(0.5)
        self.assertEqual(prof.catalog_hash, workload.catalog_hash(self.catalog))
        workload.check_profile_matches(prof, self.catalog)
        other = workload.catalog_for_seed(schema.ExperimentConfig(), 2)
        with self.assertRaises(workload.ProfileMismatchError):
            workload.check_profile_matches(prof, other)

    def test_catalog_size_mismatch(self):
        p = schema.PopularityParams(n_files=50, alpha=0.5)
        with self.assertRaises(workload.ProfileMismatchError):
            workload.generate_profile(self.catalog, 1, p, 5.0, 100.0, 1)


class TestFutureSegmentSequence(unittest.TestCase):
    def make_profile(self, entries):
        return schema.RequestProfile(
            clients=[entries], seed=0,
            params=schema.PopularityParams(n_files=7), mean_wait=5.0, horizon=10.0)

    def test_single_file(self):
        catalog = small_catalog([1, 1, 1, 1, 1, 1, 2])
        prof = self.make_profile([schema.ProfileEntry(7, 100)])
        self.assertEqual(workload.future_segment_sequence(prof, catalog, 0),
                         [SegmentId(7, 1), SegmentId(7, 2)])

    def test_rewatch_repeats_segments(self):
        catalog = small_catalog([2, 1, 1, 1, 1, 1, 1])
        prof = self.make_profile([schema.ProfileEntry(1, 0), schema.ProfileEntry(1, 0)])
        self.assertEqual(workload.future_segment_sequence(prof, catalog, 0),
                         [SegmentId(1, 1), SegmentId(1, 2), SegmentId(1, 1), SegmentId(1, 2)])

    def test_empty_profile(self):
        catalog = small_catalog([1] * 7)
        self.assertEqual(workload.future_segment_sequence(self.make_profile([]), catalog, 0), [])


class TestTruncateProfile(unittest.TestCase):
    def setUp(self):
        catalog = workload.catalog_for_seed(schema.ExperimentConfig(), 1)
        p = schema.PopularityParams(n_files=100, alpha=0.5)
        self.prof = workload.generate_profile(catalog, 3, p, 5.0, 100.0, 1)

    def test_keeps_prefix_per_client(self):
        cut = workload.truncate_profile(self.prof, [0, 4, 30])
        self.assertEqual([len(e) for e in cut.clients], [0, 4, 30])
        self.assertEqual(cut.clients[1], self.prof.clients[1][:4])
        self.assertEqual(cut.clients[2], self.prof.clients[2])
        self.assertEqual(cut.catalog_hash, self.prof.catalog_hash)
        self.assertEqual(cut.params, self.prof.params)

    def test_original_untouched(self):
        workload.truncate_profile(self.prof, [1, 1, 1])
        self.assertEqual([len(e) for e in self.prof.clients], [30, 30, 30])

    def test_limit_count_must_match_clients(self):
        with self.assertRaises(workload.ProfileMismatchError):
            workload.truncate_profile(self.prof, [1, 1])


class TestFilenames(unittest.TestCase):
    def test_alpha_in_name(self):
        names = {workload.profile_filename(a, 1) for a in (0.0, 1.0)}
        self.assertEqual(names, {"profile_a0_s1.txt", "profile_a1_s1.txt"})
        self.assertEqual(workload.catalog_filename(3), "catalog_s3.txt")


if __name__ == "__main__":
    unittest.main()
