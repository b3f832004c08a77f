"""MSE and runtime sweeps over the synthetic families."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleSpec, edge_estimate, member_seed
from .errors import InvalidArgumentError
from .estimator import GeneratorFunction, mi_from_samples
from .hashing import DEFAULT_C_H, HashMode
from .synth import generate, oracle_mi

__all__ = [
    "MseSweep",
    "mse_sweep",
    "runtime_sweep",
    "loglog_slope",
    "trial_seed",
]


def trial_seed(seed: int, n: int, trial: int) -> list[int]:
    """Seed of one trial; fixed before any work is scheduled."""
    return [int(seed), int(n), int(trial)]


def loglog_slope(n_values, y_values) -> float:
    """Least-squares slope of ``log y`` against ``log n``."""
    return float(np.polyfit(np.log(np.asarray(n_values, float)), np.log(np.asarray(y_values, float)), 1)[0])


def _one_trial(args):
    family, n, seed, t_values, mode, g, c_h, bias_order = args
    x, y = generate(family, n, seed)
    est = edge_estimate(x, y, t_values=t_values, g=g, seed=member_seed(seed[-1], n), mode=mode,
                        c_h=c_h, bias_order=bias_order)
    return est.value, [m.estimate for m in est.members]


@dataclass
class MseSweep:
    """Per-trial ensemble and member estimates of one sweep.

    ``ensemble[n]`` has shape ``(trials,)``; ``members[n]`` has shape
    ``(trials, T)`` and column ``k`` is the single-epsilon estimator at
    ``t_values[k]``.
    """

    family: object
    n_list: list
    trials: int
    t_values: tuple
    oracle: float
    ensemble: dict = field(default_factory=dict)
    members: dict = field(default_factory=dict)

    def variants(self) -> list[str]:
        return ["edge"] + [f"base@t={t:g}" for t in self.t_values]

    def values(self, variant: str, n: int) -> np.ndarray:
        if variant == "edge":
            return self.ensemble[n]
        for k, t in enumerate(self.t_values):
            if variant == f"base@t={t:g}":
                return self.members[n][:, k]
        raise KeyError(variant)

    def mse(self, variant: str) -> np.ndarray:
        return np.array([np.mean((self.values(variant, n) - self.oracle) ** 2) for n in self.n_list])

    def abs_bias(self, variant: str) -> np.ndarray:
        return np.array([abs(np.mean(self.values(variant, n)) - self.oracle) for n in self.n_list])

    def variance(self, variant: str) -> np.ndarray:
        return np.array([np.var(self.values(variant, n), ddof=1) for n in self.n_list])

    def slope(self, variant: str) -> float:
        return loglog_slope(self.n_list, self.mse(variant))

    def rows(self) -> list[dict]:
        out = []
        for n in self.n_list:
            for variant in self.variants():
                v = self.values(variant, n)
                out.append({
                    "n": n,
                    "variant": variant,
                    "mean": float(np.mean(v)),
                    "mse": float(np.mean((v - self.oracle) ** 2)),
                    "var": float(np.var(v, ddof=1)),
                    "oracle": self.oracle,
                })
        return out


def mse_sweep(
    family,
    n_list,
    trials: int,
    seed: int = 0,
    t_values=None,
    mode: HashMode | str = HashMode.FLOOR,
    g: GeneratorFunction | None = None,
    c_h: int = DEFAULT_C_H,
    bias_order: int | None = None,
    jobs: int = 1,
    oracle: float | None = None,
) -> MseSweep:
    """Run ``trials`` independent ensemble estimates at every ``n``.

    Trial seeds are assigned up front, so ``jobs`` never changes the result.
    """
    if trials < 2:
        raise InvalidArgumentError("trials must be >= 2 (variance is undefined for one trial)")
    n_list = [int(n) for n in n_list]
    d_x, d_y = family.dims
    spec = EnsembleSpec.build(max(n_list), d_x + d_y, t_values, bias_order)
    if oracle is None:
        oracle = oracle_mi(family).value
    sweep = MseSweep(family, n_list, trials, spec.t_values, float(oracle))
    tasks = [
        (family, n, trial_seed(seed, n, k), spec.t_values, mode, g, c_h, bias_order)
        for n in n_list
        for k in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_trial, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_one_trial(t) for t in tasks]
    for i, n in enumerate(n_list):
        chunk = results[i * trials:(i + 1) * trials]
        sweep.ensemble[n] = np.array([r[0] for r in chunk])
        sweep.members[n] = np.array([r[1] for r in chunk])
    return sweep


def _time_call(fn, repeats: int, min_time: float = 0.05) -> float:
    """Best per-call time over ``repeats`` rounds of at least ``min_time`` seconds each."""
    start = time.perf_counter()
    fn()
    loops = max(1, int(min_time / max(time.perf_counter() - start, 1e-9)))
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - start) / loops)
    return best


def runtime_sweep(
    family,
    n_list,
    repeats: int = 3,
    seed: int = 0,
    variant: str = "base",
    mode: HashMode | str = HashMode.FLOOR,
    t_values=None,
) -> list[dict]:
    """Wall time of one estimate per ``n`` (best of ``repeats`` after a warmup).

    ``variant="base"`` times a single base estimate at ``epsilon = n**(-1/(2d))``;
    ``variant="edge"`` times the full ensemble.
    """
    if variant not in ("base", "edge"):
        raise InvalidArgumentError("variant must be 'base' or 'edge'")
    d_x, d_y = family.dims
    d = d_x + d_y
    rows = []
    for n in n_list:
        x, y = generate(family, int(n), [seed, int(n)])
        if variant == "base":
            eps = float(n) ** (-1.0 / (2 * d))
            fn = lambda: mi_from_samples(x, y, eps, seed=seed, mode=mode)  # noqa: E731
        else:
            fn = lambda: edge_estimate(x, y, t_values=t_values, seed=seed, mode=mode)  # noqa: E731
        wall = _time_call(fn, repeats)
        rows.append({"n": int(n), "d": d, "variant": variant, "wall_time": wall,
                     "per_sample_time": wall / int(n)})
    return rows
