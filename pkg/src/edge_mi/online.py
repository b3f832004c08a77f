"""Streaming mutual information with amortized constant-time updates.

A :class:`StreamState` keeps the collision counts of the dependence graph of
every pair pushed so far.  A push touches one X node, one Y node and one
edge.  The bin width is refreshed only when the sample count reaches a power
of two, at which point the graph is rebuilt from the retained samples; the
rebuilds cost ``O(1 + 2 + 4 + ... + N) = O(N)`` in total.

For the Shannon generator the estimate is kept in closed form,

    I_hat = ln N + (sum N_ij ln N_ij - sum N_i ln N_i - sum M_j ln M_j) / N,

so each push costs O(1) as long as the clip bound cannot bind
(``N ln N <= U``).  Other generators, or a binding clip, fall back to one
pass over the edges per query.

Snapshot byte layout (all integers little endian)::

    magic      8 bytes   b"EDGESTRM"
    version    u16
    header_len u32
    header     header_len bytes of UTF-8 JSON (generator, seed, mode, c_h,
               schedule, epsilon, f_buckets, next_rebuild_at, n_rebuilds)
    n          u64       pairs retained
    d_x, d_y   u32, u32
    X          n * d_x float64, row major
    Y          n * d_y float64, row major
    sums       3 float64 (joint, X and Y count-entropy sums)
    crc32      u32 of every preceding byte
"""
from __future__ import annotations

import json
import math
import struct
import zlib
from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np

from .ensemble import member_seed, solve_weights, default_t_values
from .errors import DecodeError, EmptyStateError, InvalidArgumentError
from .estimator import GeneratorFunction, base_estimate, shannon
from .graph import build_graph
from .hashing import DEFAULT_C_H, HashConfig, HashMode, hash_point, hash_points, make_hash_configs

__all__ = [
    "EpsilonSchedule",
    "StreamState",
    "EnsembleStream",
    "stream_init",
    "stream_push",
    "stream_snapshot",
    "stream_restore",
    "SNAPSHOT_VERSION",
]

SNAPSHOT_MAGIC = b"EDGESTRM"
SNAPSHOT_VERSION = 1
_PREFIX = struct.Struct("<8sHI")
_DIMS = struct.Struct("<QII")
_SUMS = struct.Struct("<3d")
_CRC = struct.Struct("<I")


@dataclass(frozen=True)
class EpsilonSchedule:
    """Bin width as a function of the sample count ``n``.

    ``rule`` is one of

    * ``"bias-optimal"``: ``scale * n**(-1/(1+d))``
    * ``"ensemble"``: ``scale * n**(-1/(2d))``
    * ``"constant"``: ``scale``

    where ``d = d_x + d_y``.
    """

    rule: str = "bias-optimal"
    scale: float = 1.0

    def __post_init__(self):
        if self.rule not in ("bias-optimal", "ensemble", "constant"):
            raise InvalidArgumentError(f"unknown schedule rule {self.rule!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError("schedule scale must be positive")

    @classmethod
    def constant(cls, epsilon: float) -> "EpsilonSchedule":
        return cls("constant", epsilon)

    def __call__(self, n: int, d: int) -> float:
        if self.rule == "constant":
            return self.scale
        exponent = 1.0 / (1 + d) if self.rule == "bias-optimal" else 1.0 / (2 * d)
        return self.scale * float(n) ** (-exponent)


def _xlogx(c: int) -> float:
    return c * math.log(c) if c > 1 else 0.0


class StreamState:
    """Online dependence-graph estimator; single writer.

    Parameters
    ----------
    schedule : EpsilonSchedule
        Bin width used at each rebuild.  Defaults to ``n**(-1/(1+d))``.
    g : GeneratorFunction
        Defaults to Shannon.
    seed : int
        Seed of the hash functions (shift and bucket hash).
    mode : HashMode or str
    c_h : int
        The bucket range after a rebuild at count ``n`` is ``c_h * 2n``, i.e.
        sized for the last count served before the next rebuild.
    """

    def __init__(self, schedule: EpsilonSchedule | None = None, g: GeneratorFunction | None = None,
                 seed: int = 0, mode: HashMode | str = HashMode.FLOOR, c_h: int = DEFAULT_C_H):
        self.schedule = EpsilonSchedule() if schedule is None else schedule
        self.g = shannon() if g is None else g
        self.seed = int(seed)
        self.mode = HashMode(mode)
        self.c_h = int(c_h)
        self.n = 0
        self.d_x = None
        self.d_y = None
        self.epsilon = None
        self.config_x: HashConfig | None = None
        self.config_y: HashConfig | None = None
        self.next_rebuild_at = 1
        self.n_rebuilds = 0
        self._x = np.empty((0, 0))
        self._y = np.empty((0, 0))
        self._reset_counts()
        self._published = None

    # -- counts ---------------------------------------------------------
    def _reset_counts(self):
        self.x_counts: dict = {}
        self.y_counts: dict = {}
        self.joint_counts: dict = {}
        self._s_joint = 0.0
        self._s_x = 0.0
        self._s_y = 0.0

    def _increment(self, i, j):
        ni = self.x_counts.get(i, 0)
        mj = self.y_counts.get(j, 0)
        nij = self.joint_counts.get((i, j), 0)
        self.x_counts[i] = ni + 1
        self.y_counts[j] = mj + 1
        self.joint_counts[(i, j)] = nij + 1
        self._s_x += _xlogx(ni + 1) - _xlogx(ni)
        self._s_y += _xlogx(mj + 1) - _xlogx(mj)
        self._s_joint += _xlogx(nij + 1) - _xlogx(nij)

    def _keys(self, rows: np.ndarray, config: HashConfig) -> list:
        codes = hash_points(rows, config)
        if config.mode is HashMode.EXACT:
            return [tuple(r) for r in codes.tolist()]
        return codes.tolist()

    def _rebuild(self):
        d = self.d_x + self.d_y
        self.epsilon = float(self.schedule(self.n, d))
        self.config_x, self.config_y = make_hash_configs(
            self.epsilon, 2 * self.n, self.d_x, self.d_y, seed=self.seed, mode=self.mode, c_h=self.c_h,
        )
        self._recount()
        self.n_rebuilds += 1
        self.next_rebuild_at = 2 * self.n

    def _recount(self):
        xs = self._keys(self._x[: self.n], self.config_x)
        ys = self._keys(self._y[: self.n], self.config_y)
        self._reset_counts()
        self.x_counts = dict(Counter(xs))
        self.y_counts = dict(Counter(ys))
        self.joint_counts = dict(Counter(zip(xs, ys)))
        self._s_x = math.fsum(_xlogx(c) for c in self.x_counts.values())
        self._s_y = math.fsum(_xlogx(c) for c in self.y_counts.values())
        self._s_joint = math.fsum(_xlogx(c) for c in self.joint_counts.values())

    def _append(self, x: np.ndarray, y: np.ndarray):
        if self.n == self._x.shape[0]:
            cap = max(4, 2 * self.n)
            grown_x = np.empty((cap, self.d_x))
            grown_y = np.empty((cap, self.d_y))
            grown_x[: self.n] = self._x[: self.n]
            grown_y[: self.n] = self._y[: self.n]
            self._x, self._y = grown_x, grown_y
        self._x[self.n] = x
        self._y[self.n] = y
        self.n += 1

    # -- public API -----------------------------------------------------
    @property
    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        """Copies of the retained pairs."""
        return self._x[: self.n].copy(), self._y[: self.n].copy()

    def push(self, x, y) -> float:
        """Add one pair and return the updated estimate."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if self.d_x is None:
            if x.size == 0 or y.size == 0:
                raise InvalidArgumentError("pairs need at least one coordinate per side")
            self.d_x, self.d_y = x.size, y.size
            self._x = np.empty((0, self.d_x))
            self._y = np.empty((0, self.d_y))
        if x.size != self.d_x or y.size != self.d_y:
            raise InvalidArgumentError(
                f"dimension mismatch: stream holds ({self.d_x}, {self.d_y}), got ({x.size}, {y.size})"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidArgumentError("pairs must be finite")
        self._append(x, y)
        if self.n == self.next_rebuild_at:
            self._rebuild()
        else:
            self._increment(hash_point(x, self.config_x), hash_point(y, self.config_y))
        value = self.estimate()
        self._published = (self.n, value)
        return value

    @property
    def published(self) -> tuple[int, float] | None:
        """``(n, estimate)`` as of the last completed push."""
        return self._published

    def _fast_path(self) -> bool:
        if self.g.name != "shannon" or self.g.func is not shannon().func:
            return False
        return _xlogx(self.n) <= self.g.clip_bound

    def estimate(self) -> float:
        if self.n == 0:
            raise EmptyStateError("no pairs pushed yet")
        n = self.n
        if self._fast_path():
            return math.log(n) + (self._s_joint - self._s_x - self._s_y) / n
        return self._edge_sum()

    def batch_estimate(self) -> float:
        """Batch base estimate of the retained pairs under the current hash configs."""
        if self.n == 0:
            raise EmptyStateError("no pairs pushed yet")
        graph = build_graph(self._x[: self.n], self._y[: self.n], self.config_x, self.config_y)
        return base_estimate(graph, self.g).value

    def _edge_sum(self) -> float:
        pairs = list(self.joint_counts.items())
        nij = np.array([c for _, c in pairs], dtype=np.float64)
        ni = np.array([self.x_counts[i] for (i, _), _ in pairs], dtype=np.float64)
        mj = np.array([self.y_counts[j] for (_, j), _ in pairs], dtype=np.float64)
        n = float(self.n)
        wij = nij * n / (ni * mj)
        return float(np.sum((ni / n) * (mj / n) * self.g.clipped(wij)))

    # -- persistence ----------------------------------------------------
    def snapshot(self) -> bytes:
        header = {
            "g": self.g.to_dict(),
            "seed": self.seed,
            "mode": self.mode.value,
            "c_h": self.c_h,
            "schedule": asdict(self.schedule),
            "epsilon": self.epsilon,
            "f_buckets": None if self.config_x is None else self.config_x.f_buckets,
            "next_rebuild_at": self.next_rebuild_at,
            "n_rebuilds": self.n_rebuilds,
        }
        head = json.dumps(header, sort_keys=True).encode("utf-8")
        parts = [
            _PREFIX.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, len(head)),
            head,
            _DIMS.pack(self.n, self.d_x or 0, self.d_y or 0),
            np.ascontiguousarray(self._x[: self.n], dtype="<f8").tobytes(),
            np.ascontiguousarray(self._y[: self.n], dtype="<f8").tobytes(),
            _SUMS.pack(self._s_joint, self._s_x, self._s_y),
        ]
        body = b"".join(parts)
        return body + _CRC.pack(zlib.crc32(body))

    @classmethod
    def restore(cls, blob: bytes) -> "StreamState":
        blob = bytes(blob)
        if len(blob) < _PREFIX.size + _CRC.size:
            raise DecodeError("snapshot truncated")
        body, (crc,) = blob[:-_CRC.size], _CRC.unpack(blob[-_CRC.size:])
        if zlib.crc32(body) != crc:
            raise DecodeError("snapshot checksum mismatch (corrupt or truncated)")
        magic, version, head_len = _PREFIX.unpack_from(body, 0)
        if magic != SNAPSHOT_MAGIC:
            raise DecodeError("not a stream snapshot")
        if version != SNAPSHOT_VERSION:
            raise DecodeError(f"unsupported snapshot version {version}")
        pos = _PREFIX.size
        try:
            header = json.loads(body[pos:pos + head_len].decode("utf-8"))
            pos += head_len
            n, d_x, d_y = _DIMS.unpack_from(body, pos)
            pos += _DIMS.size
            x = np.frombuffer(body, dtype="<f8", count=n * d_x, offset=pos).reshape(n, d_x)
            pos += 8 * n * d_x
            y = np.frombuffer(body, dtype="<f8", count=n * d_y, offset=pos).reshape(n, d_y)
            pos += 8 * n * d_y
            sums = _SUMS.unpack_from(body, pos)
            pos += _SUMS.size
        except (ValueError, struct.error, UnicodeDecodeError) as exc:
            raise DecodeError(f"malformed snapshot: {exc}") from exc
        if pos != len(body):
            raise DecodeError("trailing bytes in snapshot")

        state = cls(
            schedule=EpsilonSchedule(**header["schedule"]),
            g=GeneratorFunction.from_dict(header["g"]),
            seed=header["seed"],
            mode=header["mode"],
            c_h=header["c_h"],
        )
        state.next_rebuild_at = header["next_rebuild_at"]
        state.n_rebuilds = header["n_rebuilds"]
        if n == 0:
            return state
        state.d_x, state.d_y = d_x, d_y
        state._x = x.astype(np.float64)
        state._y = y.astype(np.float64)
        state.n = n
        state.epsilon = header["epsilon"]
        state.config_x, state.config_y = make_hash_configs(
            state.epsilon, 1, d_x, d_y, seed=state.seed, mode=state.mode, c_h=state.c_h,
            f_buckets=header["f_buckets"],
        )
        state._recount()
        state._s_joint, state._s_x, state._s_y = sums
        state._published = (n, state.estimate())
        return state


def stream_init(schedule=None, g=None, seed=0, mode=HashMode.FLOOR, c_h=DEFAULT_C_H) -> StreamState:
    return StreamState(schedule, g, seed, mode, c_h)


def stream_push(state: StreamState, x, y) -> float:
    return state.push(x, y)


def stream_snapshot(state: StreamState) -> bytes:
    return state.snapshot()


def stream_restore(blob: bytes) -> StreamState:
    return StreamState.restore(blob)


class EnsembleStream:
    """Online ensemble: one :class:`StreamState` per ``t`` on the ensemble
    schedule ``t * n**(-1/(2d))``, combined with the solved weights."""

    def __init__(self, t_values=None, g=None, seed=0, mode=HashMode.FLOOR, c_h=DEFAULT_C_H,
                 bias_order: int | None = None):
        self._t_values = None if t_values is None else np.asarray(t_values, dtype=np.float64)
        self.g = shannon() if g is None else g
        self.seed = int(seed)
        self.mode = HashMode(mode)
        self.c_h = c_h
        self.bias_order = bias_order
        self.members: list[StreamState] = []
        self.weights = None

    def _setup(self, d: int):
        order = d if self.bias_order is None else self.bias_order
        t = default_t_values(order) if self._t_values is None else self._t_values
        self.weights = solve_weights(t, order)
        self.members = [
            StreamState(EpsilonSchedule("ensemble", float(tk)), self.g, member_seed(self.seed, k),
                        self.mode, self.c_h)
            for k, tk in enumerate(t)
        ]

    def push(self, x, y) -> float:
        if not self.members:
            self._setup(np.size(x) + np.size(y))
        values = np.array([m.push(x, y) for m in self.members])
        return float(np.dot(self.weights, values))

    def estimate(self) -> float:
        if not self.members:
            raise EmptyStateError("no pairs pushed yet")
        return float(np.dot(self.weights, [m.estimate() for m in self.members]))

    def batch_estimate(self) -> float:
        if not self.members:
            raise EmptyStateError("no pairs pushed yet")
        return float(np.dot(self.weights, [m.batch_estimate() for m in self.members]))
