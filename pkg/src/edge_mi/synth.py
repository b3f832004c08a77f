"""Synthetic sample families with ground-truth mutual information.

The oracles never touch the hashing code: they combine closed-form
entropies with Monte-Carlo integration over the exact density or with 1-d
adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InfiniteMIError, InvalidArgumentError

__all__ = [
    "GaussNoise",
    "DiscreteGaussMix",
    "OracleValue",
    "make_rng",
    "generate",
    "oracle_mi",
    "family_from_dict",
    "gauss_noise_log_density",
]

HALF_LOG_2PI_E = 0.5 * math.log(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class GaussNoise:
    """``X ~ N(0, I_d)`` and ``Y = X + a * U`` with ``U`` uniform on ``[0, 1]^d``."""

    d: int = 2
    a: float = 0.2

    def __post_init__(self):
        if self.d < 1 or self.a < 0:
            raise InvalidArgumentError("GaussNoise needs d >= 1 and a >= 0")

    @property
    def dims(self) -> tuple[int, int]:
        return self.d, self.d

    def to_dict(self) -> dict:
        return {"kind": "gauss", "d": self.d, "a": self.a}


@dataclass(frozen=True)
class DiscreteGaussMix:
    """``X`` uniform on ``{1..k}``; ``Y | X=x ~ N([x/2, 0, ..., 0], I_{d_y})``."""

    k: int = 4
    d_y: int = 4

    def __post_init__(self):
        if self.k < 1 or self.d_y < 1:
            raise InvalidArgumentError("DiscreteGaussMix needs k >= 1 and d_y >= 1")

    @property
    def dims(self) -> tuple[int, int]:
        return 1, self.d_y

    def to_dict(self) -> dict:
        return {"kind": "mix", "k": self.k, "d_y": self.d_y}


def family_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "gauss":
        return GaussNoise(int(data["d"]), float(data["a"]))
    if kind == "mix":
        return DiscreteGaussMix(int(data["k"]), int(data["d_y"]))
    raise InvalidArgumentError(f"unknown family kind {kind!r}")


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``seed`` (int or sequence of ints)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def generate(family, n: int, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` pairs; returns ``(X, Y)`` as float64 ``(n, d)`` arrays."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    rng = make_rng(seed)
    if isinstance(family, GaussNoise):
        x = rng.standard_normal((n, family.d))
        y = x + family.a * rng.random((n, family.d))
        return x, y
    if isinstance(family, DiscreteGaussMix):
        labels = rng.integers(1, family.k + 1, size=n)
        y = rng.standard_normal((n, family.d_y))
        y[:, 0] += labels / 2.0
        return labels.astype(np.float64)[:, None], y
    raise InvalidArgumentError(f"unsupported family {family!r}")


@dataclass(frozen=True)
class OracleValue:
    """Ground-truth MI in nats.

    ``error_bound`` is three standard errors for Monte-Carlo oracles and the
    quadrature error estimate otherwise.
    """

    value: float
    stderr: float
    error_bound: float
    method: str


def _log_diff_ndtr(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """``log(Phi(hi) - Phi(lo))`` for ``hi > lo`` without cancellation in the tails."""
    upper = lo > 0
    # In the upper tail use Phi(hi) - Phi(lo) = Phi(-lo) - Phi(-hi).
    big = np.where(upper, special.log_ndtr(-lo), special.log_ndtr(hi))
    small = np.where(upper, special.log_ndtr(-hi), special.log_ndtr(lo))
    return big + np.log1p(-np.exp(small - big))


def gauss_noise_log_density(y, a: float) -> np.ndarray:
    """Log density of ``X + a U`` per coordinate, ``(Phi(y) - Phi(y - a)) / a``."""
    y = np.asarray(y, dtype=np.float64)
    return _log_diff_ndtr(y, y - a) - math.log(a)


def _gauss_noise_oracle(family: GaussNoise, n_mc: int, seed) -> OracleValue:
    if family.a == 0:
        raise InfiniteMIError("a = 0 makes Y a deterministic function of continuous X")
    a, d = family.a, family.d
    rng = make_rng(seed)
    # I = h(X + aU) - h(aU) with h(aU) = d ln a.  h(X + aU) is a Monte-Carlo
    # mean of -log p(Y) over the exact density, with the control variate
    # sum_c (Y_c - a/2)**2 whose mean d * (1 + a**2 / 12) is known.
    f = np.empty(n_mc)
    cv = np.empty(n_mc)
    chunk = 250_000
    for start in range(0, n_mc, chunk):
        m = min(chunk, n_mc - start)
        y = rng.standard_normal((m, d)) + a * rng.random((m, d))
        f[start:start + m] = -gauss_noise_log_density(y, a).sum(axis=1)
        cv[start:start + m] = ((y - a / 2.0) ** 2).sum(axis=1)
    cv -= d * (1.0 + a * a / 12.0)
    beta = float(np.dot(f - f.mean(), cv) / np.dot(cv, cv))
    adjusted = f - beta * cv
    h_y = float(adjusted.mean())
    stderr = float(adjusted.std(ddof=1) / math.sqrt(n_mc))
    value = h_y - d * math.log(a)
    return OracleValue(value, stderr, 3.0 * stderr, "monte-carlo")


def _mixture_entropy(k: int) -> tuple[float, float]:
    means = np.arange(1, k + 1) / 2.0

    def neg_p_log_p(v):
        logs = -0.5 * (v - means) ** 2 - 0.5 * math.log(2.0 * math.pi)
        log_p = special.logsumexp(logs) - math.log(k)
        return -math.exp(log_p) * log_p

    lo, hi = means[0] - 12.0, means[-1] + 12.0
    val, err = integrate.quad(neg_p_log_p, lo, hi, points=list(means), limit=400,
                              epsabs=1e-12, epsrel=1e-12)
    return val, err


def _mix_oracle(family: DiscreteGaussMix) -> OracleValue:
    # I = h(Y) - h(Y|X); all coordinates but the first are independent of X.
    h_y1, err = _mixture_entropy(family.k)
    # Mass beyond +-12 sd of the outer means is below 1e-30.
    return OracleValue(h_y1 - HALF_LOG_2PI_E, 0.0, max(err, 1e-12), "quadrature")


def oracle_mi(family, n_mc: int = 1_000_000, seed=20240101) -> OracleValue:
    """Ground-truth Shannon MI (nats) of a synthetic family."""
    if isinstance(family, GaussNoise):
        return _gauss_noise_oracle(family, n_mc, seed)
    if isinstance(family, DiscreteGaussMix):
        return _mix_oracle(family)
    raise InvalidArgumentError(f"unsupported family {family!r}")
