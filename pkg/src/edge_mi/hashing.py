"""Locality-sensitive hashing of sample vectors into dependence-graph nodes.

Three hashing modes are supported:

``floor``
    Shifted floor quantizer ``H1`` followed by a seeded uniform bucket hash
    ``H2`` onto ``{1..F}``.
``pstable``
    Same as ``floor`` but the input is first projected on ``r`` random
    directions with Gaussian (p=2) or Cauchy (p=1) entries.
``exact``
    The raw ``H1`` integer vector is the bucket key, so distinct quantizer
    cells never collide.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "HashMode",
    "HashConfig",
    "h1_scalar",
    "h1_vector",
    "h1_matrix",
    "h2_bucket",
    "h2_buckets",
    "hash_point",
    "hash_points",
    "project_h1",
    "projection_matrix",
    "make_hash_configs",
    "DEFAULT_C_H",
]

DEFAULT_C_H = 4

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_INT64_LIMIT = 2.0**62


class HashMode(str, enum.Enum):
    FLOOR = "floor"
    PSTABLE = "pstable"
    EXACT = "exact"


@dataclass(frozen=True)
class HashConfig:
    """Parameters of one hash function ``H = H2(H1(x))``.

    Attributes
    ----------
    epsilon : float
        Bin width of the floor quantizer, in data units.
    shift_b : float
        Offset added before quantizing, ``0 <= shift_b <= epsilon``.
    f_buckets : int
        Size ``F`` of the bucket range of ``H2``.
    c_h : int
        Bucket multiplier; ``F = c_h * N`` for the batch served.
    seed : int
        64-bit seed of ``H2`` and of the projection matrix.
    mode : HashMode
    projection_dim : int or None
        Number ``r`` of projections (``pstable`` mode only).
    stable_p : int
        2 for Gaussian projections, 1 for Cauchy.
    input_dim : int or None
        When set, inputs of any other dimension are rejected.
    """

    epsilon: float
    shift_b: float = 0.0
    f_buckets: int = 1
    c_h: int = DEFAULT_C_H
    seed: int = 0
    mode: HashMode = HashMode.FLOOR
    projection_dim: int | None = None
    stable_p: int = 2
    input_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", HashMode(self.mode))
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgumentError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not (0.0 <= self.shift_b <= self.epsilon):
            raise InvalidArgumentError(
                f"shift_b must lie in [0, epsilon={self.epsilon}], got {self.shift_b!r}"
            )
        if int(self.f_buckets) < 1:
            raise InvalidArgumentError("f_buckets must be >= 1")
        if int(self.c_h) < 1:
            raise InvalidArgumentError("c_h must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgumentError("seed must fit in 64 unsigned bits")
        if self.stable_p not in (1, 2):
            raise InvalidArgumentError("stable_p must be 1 (Cauchy) or 2 (Gaussian)")
        if self.mode is HashMode.PSTABLE:
            if self.input_dim is None:
                raise InvalidArgumentError("pstable mode needs input_dim to draw the projection")
            if self.projection_dim is None:
                object.__setattr__(self, "projection_dim", min(self.input_dim, 8))
            if self.projection_dim < 1:
                raise InvalidArgumentError("projection_dim must be >= 1")

    def with_epsilon(self, epsilon: float) -> "HashConfig":
        """Copy with a new bin width; the shift keeps its fraction of epsilon."""
        return replace(self, epsilon=epsilon, shift_b=self.shift_b / self.epsilon * epsilon)


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("inputs must be finite")


def h1_scalar(x: float, epsilon: float, b: float = 0.0) -> int:
    """Return ``floor((x + b) / epsilon)`` as a Python integer."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"cannot hash non-finite value {x!r}")
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon!r}")
    return math.floor((x + b) / epsilon)


def h1_matrix(x, epsilon: float, b: float = 0.0) -> np.ndarray:
    """Vectorized ``h1_scalar`` over an array; returns int64 of the same shape."""
    x = np.asarray(x, dtype=np.float64)
    _check_finite(x)
    with np.errstate(over="ignore"):
        q = np.floor((x + b) / epsilon)
    if q.size and not np.max(np.abs(q)) < _INT64_LIMIT:
        raise InvalidArgumentError("input too large for the bin width (int64 overflow)")
    return q.astype(np.int64)


def h1_vector(x, config: HashConfig) -> np.ndarray:
    """Componentwise floor hash of one vector with the config's shared (epsilon, b)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgumentError("h1_vector expects a non-empty 1-d vector")
    return h1_matrix(x, config.epsilon, config.shift_b)


_MASK = 0xFFFFFFFFFFFFFFFF
_M1_INT = 0xBF58476D1CE4E5B9


def _mix64_int(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * _M1_INT) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@functools.lru_cache(maxsize=256)
def _h2_keys(seed: int, d: int) -> tuple[int, tuple]:
    """Offset and one odd 64-bit multiplier per coordinate, derived from ``seed``."""
    offset = _mix64_int(seed & _MASK)
    mults = tuple(_mix64_int((seed + (c + 1) * 0x9E3779B97F4A7C15) & _MASK) | 1 for c in range(d))
    return offset, mults


def h2_buckets(z, f_buckets: int, seed: int) -> np.ndarray:
    """Bucket ids in ``{1..F}`` for every row of an integer matrix.

    Rows are folded to ``offset + sum_c z_c K_c mod 2**64`` with seeded odd
    multipliers ``K_c``, passed through a full avalanche finalizer and reduced
    modulo ``F``.
    """
    if int(f_buckets) < 1:
        raise InvalidArgumentError("f_buckets must be >= 1")
    z = np.asarray(z, dtype=np.int64)
    if z.ndim == 1:
        z = z[:, None]
    offset, mults = _h2_keys(int(seed), z.shape[1])
    with np.errstate(over="ignore"):
        acc = z[:, 0].view(np.uint64) * np.uint64(mults[0]) + np.uint64(offset)
        for col in range(1, z.shape[1]):
            acc += z[:, col].view(np.uint64) * np.uint64(mults[col])
        acc = _mix64(acc)
    return (acc % np.uint64(f_buckets)).view(np.int64) + 1


def h2_bucket(z, f_buckets: int, seed: int) -> int:
    z = np.asarray(z, dtype=np.int64).reshape(1, -1)
    return int(h2_buckets(z, f_buckets, seed)[0])


@functools.lru_cache(maxsize=64)
def _projection(seed: int, d: int, r: int, p: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x70, d, r]))
    w = rng.standard_normal((d, r)) if p == 2 else rng.standard_cauchy((d, r))
    w.setflags(write=False)
    return w


def projection_matrix(config: HashConfig) -> np.ndarray:
    """The ``d x r`` stable-law matrix used by ``pstable`` mode."""
    if config.mode is not HashMode.PSTABLE:
        raise InvalidArgumentError("projection matrix only exists in pstable mode")
    return _projection(int(config.seed), config.input_dim, config.projection_dim, config.stable_p)


def _as_rows(x, config: HashConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] == 0:
        raise InvalidArgumentError("expected an (N, d) array with d >= 1")
    if config.input_dim is not None and x.shape[1] != config.input_dim:
        raise InvalidArgumentError(
            f"dimension mismatch: config fixed d={config.input_dim}, got d={x.shape[1]}"
        )
    return x


def project_h1(x, config: HashConfig) -> np.ndarray:
    """``H1(x W)``: the r-dimensional integer grid point of a pstable hash."""
    rows = _as_rows(np.atleast_2d(np.asarray(x, dtype=np.float64)), config)
    _check_finite(rows)
    proj = rows @ projection_matrix(config)
    out = h1_matrix(proj, config.epsilon, config.shift_b)
    return out[0] if np.ndim(x) == 1 else out


def hash_points(x, config: HashConfig) -> np.ndarray:
    """Hash every row of ``x``.

    Returns an int64 vector of bucket ids for ``floor``/``pstable`` mode and
    the ``(N, d)`` int64 matrix of ``H1`` cells for ``exact`` mode.
    """
    rows = _as_rows(x, config)
    if config.mode is HashMode.EXACT:
        return h1_matrix(rows, config.epsilon, config.shift_b)
    if config.mode is HashMode.PSTABLE:
        _check_finite(rows)
        cells = h1_matrix(rows @ projection_matrix(config), config.epsilon, config.shift_b)
    else:
        cells = h1_matrix(rows, config.epsilon, config.shift_b)
    return h2_buckets(cells, config.f_buckets, config.seed)


def _h2_int(cells, f_buckets: int, seed: int) -> int:
    # Scalar twin of h2_buckets; must stay bit-identical to it.
    acc, mults = _h2_keys(seed, len(cells))
    for c, k in zip(cells, mults):
        acc += (c & _MASK) * k
    return _mix64_int(acc & _MASK) % f_buckets + 1


def hash_point(x, config: HashConfig):
    """Bucket id of one point: an int, or a tuple of ints in ``exact`` mode."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgumentError("hash_point expects a non-empty 1-d vector")
    if config.input_dim is not None and x.size != config.input_dim:
        raise InvalidArgumentError(
            f"dimension mismatch: config fixed d={config.input_dim}, got d={x.size}"
        )
    if config.mode is HashMode.PSTABLE:
        return int(hash_points(x[None, :], config)[0])
    eps, b = config.epsilon, config.shift_b
    cells = tuple(h1_scalar(v, eps, b) for v in x.tolist())
    if any(abs(c) >= _INT64_LIMIT for c in cells):
        raise InvalidArgumentError("input too large for the bin width (int64 overflow)")
    if config.mode is HashMode.EXACT:
        return cells
    return _h2_int(cells, int(config.f_buckets), int(config.seed))


@functools.lru_cache(maxsize=256)
def _seed_state(seed: int) -> tuple[int, int, int]:
    return tuple(int(v) for v in np.random.SeedSequence(seed).generate_state(3, dtype=np.uint64))


def make_hash_configs(
    epsilon: float,
    n: int,
    d_x: int,
    d_y: int,
    seed: int = 0,
    mode: HashMode | str = HashMode.FLOOR,
    c_h: int = DEFAULT_C_H,
    shift_b: float | None = None,
    projection_dim: int | None = None,
    stable_p: int = 2,
    f_buckets: int | None = None,
) -> tuple[HashConfig, HashConfig]:
    """Hash configs for the X and Y sides of one estimator instance.

    Both sides share ``epsilon`` and a single shift ``b`` drawn uniformly from
    ``[0, epsilon)``; their ``H2`` seeds (and projections) are independent.
    ``f_buckets`` defaults to ``c_h * n``.
    """
    mode = HashMode(mode)
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    state = _seed_state(int(seed))
    if shift_b is None:
        shift_b = float(state[0] >> 11) * 2.0**-53 * epsilon
    buckets = int(c_h) * int(n) if f_buckets is None else int(f_buckets)
    common = dict(
        epsilon=float(epsilon),
        shift_b=float(shift_b),
        f_buckets=buckets,
        c_h=int(c_h),
        mode=mode,
        stable_p=stable_p,
    )
    pdim_x = projection_dim if projection_dim is None else min(projection_dim, d_x)
    pdim_y = projection_dim if projection_dim is None else min(projection_dim, d_y)
    cfg_x = HashConfig(seed=state[1], input_dim=d_x, projection_dim=pdim_x, **common)
    cfg_y = HashConfig(seed=state[2], input_dim=d_y, projection_dim=pdim_y, **common)
    return cfg_x, cfg_y
