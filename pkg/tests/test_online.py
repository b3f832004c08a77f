import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edge_mi.errors import DecodeError, EmptyStateError, InvalidArgumentError
from edge_mi.estimator import base_estimate, chi_square, shannon
from edge_mi.graph import build_graph
from edge_mi.hashing import make_hash_configs
from edge_mi.online import (
    EnsembleStream,
    EpsilonSchedule,
    StreamState,
    stream_init,
    stream_push,
    stream_restore,
    stream_snapshot,
)
from edge_mi.synth import GaussNoise, generate

from oracles import floor_cells, plugin_mi


def batch_value(state, x, y, n):
    """Fresh batch estimate on the first ``n`` pairs with the stream's width and seeds."""
    cx, cy = make_hash_configs(state.epsilon, n, x.shape[1], y.shape[1], seed=state.seed,
                               mode=state.mode, c_h=state.c_h, f_buckets=state.config_x.f_buckets)
    return base_estimate(build_graph(x[:n], y[:n], cx, cy), state.g).value


class TestExamples:
    def test_empty_estimate(self):
        with pytest.raises(EmptyStateError):
            stream_init().estimate()

    def test_first_rebuild_at_one(self):
        s = stream_init(EpsilonSchedule.constant(0.5))
        assert s.next_rebuild_at == 1
        stream_push(s, [0.1], [0.2])
        assert s.n_rebuilds == 1

    def test_single_pair_is_zero(self):
        assert stream_push(stream_init(), [0.3, 0.1], [1.0]) == 0.0

    def test_dependent_pairs_reach_ln2(self):
        s = stream_init(EpsilonSchedule.constant(0.5), mode="exact")
        for v in (0.1, 0.1, 0.9, 0.9):
            value = stream_push(s, [v], [v])
        assert abs(value - math.log(2)) <= 1e-12

    def test_identical_pairs(self):
        s = stream_init(EpsilonSchedule.constant(0.5))
        stream_push(s, [0.2], [0.4])
        value = stream_push(s, [0.2], [0.4])
        assert len(s.x_counts) == len(s.y_counts) == 1 and value == 0.0

    def test_rejects_bad_pairs(self):
        s = stream_init()
        stream_push(s, [0.0, 1.0], [2.0])
        with pytest.raises(InvalidArgumentError):
            stream_push(s, [0.0], [2.0])
        with pytest.raises(InvalidArgumentError):
            stream_push(s, [0.0, float("nan")], [2.0])

    def test_bad_schedule(self):
        with pytest.raises(InvalidArgumentError):
            EpsilonSchedule("adaptive")


class TestBatchEquivalence:
    @pytest.mark.parametrize("schedule", [EpsilonSchedule(), EpsilonSchedule("ensemble", 1.5),
                                          EpsilonSchedule.constant(0.3)])
    def test_every_100_pushes(self, schedule):
        x, y = generate(GaussNoise(2, 0.2), 1000, 5)
        s = StreamState(schedule, seed=17)
        for k in range(1000):
            value = s.push(x[k], y[k])
            if (k + 1) % 100 == 0:
                assert abs(value - batch_value(s, x, y, k + 1)) <= 1e-9

    def test_generic_generator_uses_edge_sum(self):
        x, y = generate(GaussNoise(1, 0.5), 300, 2)
        s = StreamState(EpsilonSchedule.constant(0.2), g=chi_square(), seed=1)
        for k in range(300):
            value = s.push(x[k], y[k])
        assert math.isclose(value, batch_value(s, x, y, 300), rel_tol=1e-12)

    def test_binding_clip_falls_back(self):
        x = np.arange(200, dtype=float)[:, None]
        s = StreamState(EpsilonSchedule.constant(0.5), g=shannon(clip_bound=2.0), mode="exact")
        for k in range(200):
            value = s.push(x[k], x[k])
        # Every edge has omega = 200 and g(200) = 200 ln 200 > 2.
        assert math.isclose(value, 200 * 2.0 / 200**2, rel_tol=1e-12)

    def test_exact_mode_matches_plugin(self):
        x, y = generate(GaussNoise(2, 0.5), 500, 3)
        s = StreamState(EpsilonSchedule.constant(0.4), mode="exact", seed=2)
        for k in range(500):
            value = s.push(x[k], y[k])
        b = s.config_x.shift_b
        assert math.isclose(value, plugin_mi(floor_cells(x, 0.4, b), floor_cells(y, 0.4, b)),
                            rel_tol=1e-12)

    def test_rebuild_count(self):
        for n in (1, 2, 3, 100, 1024, 1500):
            s = stream_init(EpsilonSchedule.constant(0.5))
            for k in range(n):
                s.push([k * 0.1], [k * 0.2])
            assert s.n_rebuilds == math.floor(math.log2(n)) + 1

    def test_published_tracks_last_push(self):
        s = stream_init()
        s.push([0.0], [0.0])
        s.push([1.0], [1.0])
        assert s.published == (2, s.estimate())


class TestSnapshot:
    def test_round_trip(self):
        x, y = generate(GaussNoise(2, 0.2), 300, 1)
        s = stream_init(seed=3)
        for k in range(300):
            s.push(x[k], y[k])
        r = stream_restore(stream_snapshot(s))
        assert r.estimate() == s.estimate()
        assert r.x_counts == s.x_counts and r.joint_counts == s.joint_counts

    def test_empty_round_trip(self):
        r = stream_restore(stream_snapshot(stream_init(seed=4)))
        assert r.n == 0 and r.seed == 4

    def test_truncated(self):
        s = stream_init()
        s.push([0.0], [1.0])
        blob = stream_snapshot(s)
        for cut in (0, 5, len(blob) // 2, len(blob) - 1):
            with pytest.raises(DecodeError):
                stream_restore(blob[:cut])

    def test_corrupted(self):
        s = stream_init()
        s.push([0.0], [1.0])
        blob = bytearray(stream_snapshot(s))
        blob[20] ^= 0xFF
        with pytest.raises(DecodeError):
            stream_restore(bytes(blob))

    def test_resume_equals_uninterrupted(self):
        x, y = generate(GaussNoise(2, 0.2), 2000, 8)
        full = stream_init(EpsilonSchedule("ensemble"), seed=5)
        half = stream_init(EpsilonSchedule("ensemble"), seed=5)
        for k in range(1000):
            full.push(x[k], y[k])
            half.push(x[k], y[k])
        resumed = stream_restore(stream_snapshot(half))
        for k in range(1000, 2000):
            a = full.push(x[k], y[k])
            b = resumed.push(x[k], y[k])
            assert a == b

    def test_custom_generator_refused(self):
        from edge_mi.estimator import GeneratorFunction
        g = GeneratorFunction("mine", lambda w: (w - 1) ** 4, 1e6)
        s = StreamState(g=g)
        s.push([0.0], [0.0])
        with pytest.raises(InvalidArgumentError):
            s.snapshot()

    @settings(max_examples=20, deadline=None)
    @given(n=st.integers(1, 200), seed=st.integers(0, 2**32 - 1))
    def test_round_trip_any_prefix(self, n, seed):
        x, y = generate(GaussNoise(1, 0.3), n, seed)
        s = stream_init(seed=seed)
        for k in range(n):
            s.push(x[k], y[k])
        assert stream_restore(stream_snapshot(s)).estimate() == s.estimate()


class TestEnsembleStream:
    def test_matches_batch(self):
        x, y = generate(GaussNoise(1, 0.5), 600, 4)
        s = EnsembleStream(seed=2)
        for k in range(600):
            value = s.push(x[k], y[k])
        assert abs(value - s.batch_estimate()) <= 1e-9
        assert abs(s.weights.sum() - 1.0) <= 1e-10


class TestCost:
    def test_amortized_constant_time(self):
        def per_push(n):
            x, y = generate(GaussNoise(2, 0.5), n, 0)
            s = stream_init(seed=1)
            start = time.perf_counter()
            for k in range(n):
                s.push(x[k], y[k])
            return (time.perf_counter() - start) / n

        per_push(256)
        small = min(per_push(1024) for _ in range(3))
        large = min(per_push(16384) for _ in range(3))
        assert large <= 3.0 * small
