"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
numbers (visible without ``-s``), then asserts.  Run alone with

    pytest tests/test_acceptance.py -v
"""
import math
import time
import warnings

import numpy as np
import pytest
from scipy import stats

from edge_mi.bench import loglog_slope, mse_sweep, runtime_sweep
from edge_mi.ensemble import constraint_matrix, solve_weights
from edge_mi.errors import EdgeWarning
from edge_mi.estimator import base_estimate, mi_from_samples
from edge_mi.graph import build_graph
from edge_mi.hashing import HashConfig, h1_vector, h2_bucket, h2_buckets, hash_points, make_hash_configs
from edge_mi.online import EpsilonSchedule, StreamState, stream_restore, stream_snapshot
from edge_mi.synth import DiscreteGaussMix, GaussNoise, generate, oracle_mi

from oracles import min_norm_weights

pytestmark = pytest.mark.acceptance

N_LIST = [500, 1000, 2000, 4000, 8000]


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def gauss_sweep():
    fam = GaussNoise(2, 1.0)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EdgeWarning)
        sweep = mse_sweep(fam, N_LIST, trials=100, seed=0)
    return sweep, time.perf_counter() - start


def test_criterion_1_hand_oracles(report):
    start = time.perf_counter()
    exact = HashConfig(epsilon=0.5, mode="exact")

    def est(pairs):
        a = np.array(pairs, dtype=float)
        return base_estimate(build_graph(a[:, :1], a[:, 1:], exact, exact)).value

    indep = est([(0.1, 0.1), (0.1, 0.9), (0.9, 0.1), (0.9, 0.9)])
    dep = est([(0.1, 0.1), (0.1, 0.1), (0.9, 0.9), (0.9, 0.9)])
    errs = {}
    for k in (2, 3, 4, 8):
        atoms = np.repeat(np.arange(k, dtype=float), 7)[:, None]
        errs[k] = abs(mi_from_samples(atoms, atoms, 0.5, mode="exact").value - math.log(k))
    elapsed = time.perf_counter() - start
    ok = indep == 0.0 and abs(dep - math.log(2)) <= 1e-9 and max(errs.values()) <= 1e-9 and elapsed < 1
    report(1, ok, f"independent={indep!r} dependent={dep:.9f} max|err ln k|={max(errs.values()):.1e} "
                  f"time={elapsed:.3f}s")
    assert ok


def test_criterion_2_weight_solver(report):
    start = time.perf_counter()
    w2 = solve_weights([1.0, 2.0], 1)
    w3 = solve_weights([1.0, 2.0, 3.0], 1)
    rng = np.random.default_rng(7)
    worst_diff = worst_res = 0.0
    for _ in range(20):
        T = int(rng.integers(1, 7))
        d = int(rng.integers(0, T))
        t = np.sort(rng.uniform(0.5, 4.0, T))
        while T > 1 and np.min(np.diff(t)) < 0.05:
            t = np.sort(rng.uniform(0.5, 4.0, T))
        w = solve_weights(t, d)
        worst_diff = max(worst_diff, float(np.max(np.abs(w - min_norm_weights(t, d)))))
        rhs = np.zeros(d + 1)
        rhs[0] = 1.0
        worst_res = max(worst_res, float(np.max(np.abs(constraint_matrix(t, d) @ w - rhs))))
    elapsed = time.perf_counter() - start
    ok = (w2.tolist() == [2.0, -1.0]
          and np.max(np.abs(w3 - [4 / 3, 1 / 3, -2 / 3])) <= 1e-10
          and worst_diff <= 1e-8 and worst_res <= 1e-10 and elapsed < 1)
    report(2, ok, f"[1,2]->{w2.tolist()} max|w-qp|={worst_diff:.1e} max residual={worst_res:.1e} "
                  f"time={elapsed:.3f}s")
    assert ok


def test_criterion_3_online_equals_batch(report):
    start = time.perf_counter()
    x, y = generate(GaussNoise(2, 0.2), 2000, 11)

    def batch(state, n):
        cx, cy = make_hash_configs(state.epsilon, n, 2, 2, seed=state.seed, mode=state.mode,
                                   c_h=state.c_h, f_buckets=state.config_x.f_buckets)
        return base_estimate(build_graph(x[:n], y[:n], cx, cy), state.g).value

    s = StreamState(seed=21)
    worst = 0.0
    for k in range(1000):
        v = s.push(x[k], y[k])
        if (k + 1) % 100 == 0:
            worst = max(worst, abs(v - batch(s, k + 1)))
    s = stream_restore(stream_snapshot(s))
    for k in range(1000, 2000):
        v = s.push(x[k], y[k])
        if (k + 1) % 100 == 0:
            worst = max(worst, abs(v - batch(s, k + 1)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 30
    report(3, ok, f"max|online-batch| over 20 checkpoints (restored at 1000)={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_4_consistency(report, gauss_sweep):
    sweep, elapsed = gauss_sweep
    bias = sweep.abs_bias("edge")
    inversions = int(np.sum(np.diff(bias) > 0))
    slope = sweep.slope("edge")
    var = dict(zip(sweep.n_list, sweep.variance("edge")))
    ratio = var[8000] / var[1000]
    ok = inversions <= 1 and slope <= -0.6 and ratio <= 0.3 and elapsed < 900
    report(4, ok, f"oracle={sweep.oracle:.4f} |bias|={np.round(bias, 3).tolist()} (inversions={inversions}) "
                  f"mse slope={slope:.3f} var8000/var1000={ratio:.3f} time={elapsed:.1f}s")
    assert ok


def test_criterion_5_ensemble_beats_base(report, gauss_sweep):
    sweep, _ = gauss_sweep
    singles = {v: sweep.slope(v) for v in sweep.variants()[1:]}
    best = min(singles, key=singles.get)
    edge_slope = sweep.slope("edge")
    edge_mse = sweep.mse("edge")[-1]
    best_mse = sweep.mse(best)[-1]
    ok = edge_slope <= singles[best] - 0.1 and edge_mse <= best_mse
    report(5, ok, f"edge slope={edge_slope:.3f} best single {best} slope={singles[best]:.3f}; "
                  f"mse@8000 edge={edge_mse:.3f} single={best_mse:.3f}")
    assert ok


def test_criterion_6_mixed_data(report):
    fam = DiscreteGaussMix(4, 4)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EdgeWarning)
        sweep = mse_sweep(fam, [1000, 4000, 8000], trials=50, seed=0)
    elapsed = time.perf_counter() - start
    mean8000 = float(np.mean(sweep.ensemble[8000]))
    mse = sweep.mse("edge")
    ok = abs(mean8000 - sweep.oracle) <= 0.1 and bool(np.all(np.diff(mse) < 0)) and elapsed < 600
    report(6, ok, f"oracle={sweep.oracle:.4f} mean@8000={mean8000:.4f} mse={np.round(mse, 4).tolist()} "
                  f"time={elapsed:.1f}s")
    assert ok


def test_criterion_7_linear_runtime(report):
    start = time.perf_counter()
    n_list = [1000, 10000, 100000]
    per = {}
    for d in (2, 4):
        rows = runtime_sweep(GaussNoise(d, 1.0), n_list, repeats=7, seed=0)
        per[d] = np.array([r["per_sample_time"] for r in rows])
    spread = {d: float(per[d].max() / per[d].min()) for d in per}
    d_ratio = float(np.max(per[4] / per[2]))
    elapsed = time.perf_counter() - start
    ok = max(spread.values()) <= 2.5 and d_ratio <= 3 and elapsed < 300
    report(7, ok, f"per-sample max/min d=2: {spread[2]:.2f} d=4: {spread[4]:.2f}; "
                  f"max per-sample ratio d 2->4: {d_ratio:.2f} time={elapsed:.1f}s")
    assert ok


def test_criterion_8_invariants(report):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    failures = []
    for trial in range(30):
        n = int(rng.integers(1, 400))
        x = rng.standard_normal((n, 2))
        y = x[:, :1] + rng.standard_normal((n, 2))
        cx, cy = make_hash_configs(float(rng.uniform(0.1, 2)), n, 2, 2, seed=trial,
                                   mode=["floor", "exact", "pstable"][trial % 3])
        g = build_graph(x, y, cx, cy)
        rows, cols = {}, {}
        for (i, j), c in g.joint_counts.items():
            rows[i] = rows.get(i, 0) + c
            cols[j] = cols.get(j, 0) + c
        if rows != g.x_counts or cols != g.y_counts:
            failures.append("marginal consistency")
        wi, wj, wij = g.edge_weights()
        if not math.isclose(float(np.sum(wi * wj * wij)), 1.0, rel_tol=1e-12):
            failures.append("sum of weights")
        perm = rng.permutation(n)
        if not g.same_counts(build_graph(x[perm], y[perm], cx, cy)):
            failures.append("permutation invariance")
        if not np.array_equal(hash_points(x, cx), hash_points(x, cx)):
            failures.append("hash determinism")
        k, eps = int(rng.integers(-50, 50)), 2.0 ** int(rng.integers(-4, 4))
        pts = np.round(x[0] * 1024) / 1024
        shifted = h1_vector(pts + k * eps, HashConfig(epsilon=eps)) - h1_vector(pts, HashConfig(epsilon=eps))
        if shifted.tolist() != [k, k]:
            failures.append("shift equivariance")
    grid = np.stack(np.meshgrid(np.arange(-40, 40), np.arange(-40, 40)), -1).reshape(-1, 2)
    p_value = stats.chisquare(np.bincount(h2_buckets(grid, 64, 3) - 1, minlength=64)).pvalue
    if p_value <= 1e-3:
        failures.append("H2 uniformity")
    x = rng.standard_normal((500, 2))
    cells = [tuple(c) for c in hash_points(x, HashConfig(epsilon=0.25, mode="exact")).tolist()]
    floor = HashConfig(epsilon=0.25, f_buckets=2**40, seed=9)
    injective = len({h2_bucket(list(c), floor.f_buckets, floor.seed) for c in set(cells)}) == len(set(cells))
    ids = hash_points(x, floor).tolist()
    if not injective or len(set(ids)) != len(set(cells)) or len(set(zip(cells, ids))) != len(set(cells)):
        failures.append("exact/floor partition agreement")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    report(8, ok, f"failures={sorted(set(failures)) or 'none'} chi2 p={p_value:.3f} "
                  f"H2 injective on {len(set(cells))} cells={injective} time={elapsed:.2f}s")
    assert ok
