"""Tests for simengine module."""

import math
import sys
import unittest
from pathlib import Path

# Add lib to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from lib import render, schema, simengine, workload
from lib.schema import SegmentId

MB = 1_000_000


def make_catalog(*segment_sizes):
    files = [schema.FileSpec(i + 1, 4.0 * len(sizes), tuple(sizes)) for i, sizes in enumerate(segment_sizes)]
    return schema.Catalog(files=files, segment_duration=4.0)


def make_profile(catalog, clients):
    """clients: per client, a list of (file_id, wait_ms)."""
    return schema.RequestProfile(
        clients=[[schema.ProfileEntry(f, w) for f, w in entries] for entries in clients],
        seed=0,
        params=schema.PopularityParams(n_files=catalog.n_files),
        mean_wait=5.0,
        horizon=100.0,
        catalog_hash=workload.catalog_hash(catalog),
    )


def sim_config(n_clients, **overrides):
    values = dict(n_clients=n_clients, link_rate=24e6, horizon=100.0, cache_fraction=0.0,
                  policy="lru", coding_enabled=False)
    values.update(overrides)
    return schema.SimConfig(**values)


def desk_workload(alpha=0.5, n_files=12, n_clients=4, seed=3):
    size = schema.SegmentSizeModel(family="constant", mean_bytes=MB, min_bytes=MB, max_bytes=MB)
    exp = schema.ExperimentConfig(n_files=n_files, duration_range=(8.0, 16.0), size_model=size,
                                  mean_wait=2.0, horizon=120.0, n_clients=n_clients)
    catalog = workload.catalog_for_seed(exp, seed)
    profile = workload.generate_profile(catalog, n_clients, exp.popularity(alpha),
                                        exp.mean_wait, exp.horizon, seed)
    return catalog, profile


class TestTransmissionTiming(unittest.TestCase):
    def test_uncontended_segment(self):
        catalog = make_catalog([3 * MB])
        result = simengine.run(sim_config(1), make_profile(catalog, [[(1, 0)]]), catalog)
        self.assertEqual(len(result.deliveries), 1)
        d = result.deliveries[0]
        self.assertEqual(d.source, schema.SOURCE_NETWORK)
        self.assertAlmostEqual(d.elapsed, 1.0, places=12)
        self.assertEqual(result.tx_bytes, 3 * MB)
        self.assertEqual(result.idle_clients, 1)

    def test_nominal_segment(self):
        catalog = make_catalog([2_500_000])
        result = simengine.run(sim_config(1), make_profile(catalog, [[(1, 0)]]), catalog)
        self.assertAlmostEqual(result.deliveries[0].elapsed, 20 / 24, places=12)

    def test_backhaul_delay(self):
        catalog = make_catalog([3 * MB])
        cfg = sim_config(1, backhaul_delay=0.5)
        result = simengine.run(cfg, make_profile(catalog, [[(1, 0)]]), catalog)
        self.assertAlmostEqual(result.deliveries[0].delivery_time, 1.5, places=12)

    def test_queued_request_waits(self):
        catalog = make_catalog([3 * MB], [3 * MB])
        result = simengine.run(sim_config(2), make_profile(catalog, [[(1, 0)], [(2, 0)]]), catalog)
        times = sorted(d.delivery_time for d in result.deliveries)
        self.assertAlmostEqual(times[0], 1.0, places=12)
        self.assertAlmostEqual(times[1], 2.0, places=12)

    def test_wait_precedes_each_file(self):
        catalog = make_catalog([3 * MB], [3 * MB])
        result = simengine.run(sim_config(1), make_profile(catalog, [[(1, 500), (2, 2000)]]), catalog)
        self.assertAlmostEqual(result.deliveries[0].request_time, 0.5, places=12)
        self.assertAlmostEqual(result.deliveries[1].request_time, 3.5, places=12)

    def test_horizon_cuts_run(self):
        catalog = make_catalog([3 * MB] * 5)
        cfg = sim_config(1, horizon=2.5)
        result = simengine.run(cfg, make_profile(catalog, [[(1, 0)]]), catalog)
        self.assertEqual(len(result.deliveries), 2)


    def test_files_started_stops_at_horizon(self):
        catalog = make_catalog([3 * MB], [3 * MB])
        profile = make_profile(catalog, [[(1, 500), (2, 2000)], [(2, 3000)]])
        bounded = simengine.run(sim_config(2, horizon=2.0), profile, catalog)
        self.assertEqual(bounded.files_started, [1, 0])
        unbounded = simengine.run(sim_config(2, horizon=math.inf), profile, catalog)
        self.assertEqual(unbounded.files_started, [2, 1])
        self.assertEqual(len(unbounded.deliveries), 3)
        self.assertEqual(unbounded.idle_clients, 2)

class TestCoding(unittest.TestCase):
    """Two clients each hold what the other wants while a third keeps the
    link busy, so their requests meet in the queue."""

    def setUp(self):
        self.catalog = make_catalog([3 * MB], [3 * MB], [3 * MB])
        self.profile = make_profile(self.catalog, [
            [(1, 0), (2, 9000)],
            [(2, 0), (1, 8000)],
            [(3, 9900)],
        ])

    def run_sim(self, coding):
        cfg = sim_config(3, cache_fraction=0.5, coding_enabled=coding)
        return simengine.run(cfg, self.profile, self.catalog)

    def test_pair_shares_one_transmission(self):
        result = self.run_sim(True)
        coded = [t for t in result.transmissions if len(t.members) == 2]
        self.assertEqual(len(coded), 1)
        self.assertEqual(coded[0].payload_bytes, 3 * MB)
        self.assertEqual(coded[0].members, ((0, SegmentId(2, 1)), (1, SegmentId(1, 1))))
        pair = [d for d in result.deliveries if d.group_size == 2]
        self.assertEqual(len(pair), 2)
        self.assertTrue(all(abs(d.delivery_time - 11.9) < 1e-9 for d in pair))
        self.assertTrue(all(abs(d.request_time - 10.0) < 1e-9 for d in pair))

    def test_coding_saves_one_payload(self):
        coded, plain = self.run_sim(True), self.run_sim(False)
        self.assertEqual(plain.tx_bytes, 15 * MB)
        self.assertEqual(coded.tx_bytes, 12 * MB)
        self.assertEqual(len(coded.deliveries), len(plain.deliveries))

    def test_coding_trace(self):
        result = self.run_sim(True)
        actions = [line.split(",")[1] for line in result.coding_trace]
        self.assertEqual(actions, ["append", "append", "append", "append", "merge"])
        self.assertEqual(self.run_sim(False).coding_trace, [])

    def test_single_client_never_codes(self):
        catalog, profile = desk_workload(n_clients=1)
        cfgs = [sim_config(1, horizon=120.0, cache_fraction=0.1, coding_enabled=c) for c in (False, True)]
        plain, coded = (simengine.run(c, profile, catalog) for c in cfgs)
        self.assertEqual(plain.tx_bytes, coded.tx_bytes)
        self.assertTrue(all(len(t.members) == 1 for t in coded.transmissions))


class TestCaching(unittest.TestCase):
    def test_hit_is_immediate(self):
        catalog = make_catalog([MB], [MB])
        cfg = sim_config(1, cache_fraction=1.0)
        result = simengine.run(cfg, make_profile(catalog, [[(1, 0), (1, 1000)]]), catalog)
        hit = result.deliveries[1]
        self.assertEqual(hit.source, schema.SOURCE_CACHE)
        self.assertEqual(hit.delivery_time, hit.request_time)
        self.assertEqual(result.hits, 1)

    def test_oversize_segment_not_cached(self):
        catalog = make_catalog([3 * MB], [MB])
        cfg = sim_config(1, cache_fraction=0.5)  # 2 MB capacity
        result = simengine.run(cfg, make_profile(catalog, [[(1, 0), (1, 0)]]), catalog)
        self.assertEqual(result.oversize, 2)
        self.assertEqual(result.hits, 0)
        self.assertEqual(len(result.deliveries), 2)

    def test_no_cache_all_network(self):
        catalog, profile = desk_workload(alpha=1.0)
        result = simengine.run(sim_config(4, horizon=120.0), profile, catalog)
        self.assertEqual(result.hits, 0)
        self.assertEqual(result.oversize, 0)
        self.assertEqual(result.tx_bytes, sum(d.size for d in result.deliveries))

    def test_no_rewatch_no_hits(self):
        catalog, profile = desk_workload(alpha=0.0, n_files=100)
        for m in (0.05, 0.10, 0.15):
            result = simengine.run(sim_config(4, horizon=120.0, cache_fraction=m), profile, catalog)
            self.assertEqual(result.hits, 0, m)

    def test_belady_has_most_hits(self):
        catalog, profile = desk_workload(alpha=0.5)
        hits = {}
        for policy in schema.POLICIES:
            cfg = sim_config(4, horizon=1e6, cache_fraction=0.1, policy=policy)
            result = simengine.run(cfg, profile, catalog)
            self.assertEqual(result.idle_clients, 4)
            hits[policy] = result.hits
        for policy in ("lru", "lfu", "lfu-index"):
            self.assertGreaterEqual(hits["belady"], hits[policy], hits)

    def test_cache_trace(self):
        catalog = make_catalog([MB])
        cfg = sim_config(1, cache_fraction=1.0, cache_trace=True)
        result = simengine.run(cfg, make_profile(catalog, [[(1, 0), (1, 0)]]), catalog)
        ops = [line.split(",")[2] for line in result.cache_trace]
        self.assertEqual(ops, ["miss", "insert", "hit"])


class TestInvariants(unittest.TestCase):
    def test_physical_bounds(self):
        catalog, profile = desk_workload(alpha=0.75, n_clients=6)
        cfg = sim_config(6, horizon=120.0, cache_fraction=0.15, policy="lfu-index", coding_enabled=True)
        result = simengine.run(cfg, profile, catalog)
        for d in result.deliveries:
            if d.source == schema.SOURCE_NETWORK:
                self.assertLessEqual(d.size * 8 / d.elapsed, 24e6 * (1 + 1e-9))
                self.assertGreaterEqual(d.elapsed / (d.size / MB), 8e6 / 24e6 * (1 - 1e-9))

    def test_audit_after_every_event(self):
        catalog, profile = desk_workload(alpha=0.5, n_clients=5)
        for policy in schema.POLICIES:
            cfg = sim_config(5, horizon=60.0, cache_fraction=0.1, policy=policy, coding_enabled=True)
            sim = simengine.Simulation(cfg, profile, catalog)
            while sim.step():
                sim.audit()

    def test_deterministic(self):
        catalog, profile = desk_workload(alpha=0.5)
        cfg = sim_config(4, horizon=120.0, cache_fraction=0.1, policy="lfu", coding_enabled=True)
        a = simengine.run(cfg, profile, catalog)
        b = simengine.run(cfg, profile, catalog)
        self.assertEqual(render.trace_text(a.deliveries), render.trace_text(b.deliveries))
        self.assertEqual(render.txlog_text(a.transmissions), render.txlog_text(b.transmissions))

    def test_coding_never_increases_traffic(self):
        catalog, profile = desk_workload(alpha=0.5, n_clients=6)
        for policy in schema.POLICIES:
            for t in simengine.run(sim_config(6, horizon=120.0, cache_fraction=0.1, policy=policy,
                                              coding_enabled=True), profile, catalog).transmissions:
                self.assertLessEqual(t.payload_bytes, sum(catalog.segment_size(s) for _, s in t.members))

    def test_stale_profile_refused(self):
        catalog = make_catalog([MB])
        profile = make_profile(catalog, [[(1, 0)]])
        other = make_catalog([2 * MB])
        with self.assertRaises(workload.ProfileMismatchError):
            simengine.Simulation(sim_config(1), profile, other)

    def test_too_few_profile_clients(self):
        catalog = make_catalog([MB])
        with self.assertRaises(workload.ProfileMismatchError):
            simengine.Simulation(sim_config(2), make_profile(catalog, [[(1, 0)]]), catalog)


if __name__ == "__main__":
    unittest.main()
