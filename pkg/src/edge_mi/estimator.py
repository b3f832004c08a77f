"""Base f-divergence mutual information estimator on a dependence graph."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptyInputError, InvalidArgumentError, NumericError
from .graph import DependenceGraph, build_graph
from .hashing import DEFAULT_C_H, HashMode, make_hash_configs

__all__ = [
    "DEFAULT_CLIP",
    "GeneratorFunction",
    "MIEstimate",
    "shannon",
    "alpha_divergence",
    "total_variation",
    "chi_square",
    "generator_from_name",
    "base_estimate",
    "mi_from_samples",
    "paired_matrices",
]

DEFAULT_CLIP = 1e6
LN2 = math.log(2.0)


def _xlogx(x):
    return x * np.log(x)


@dataclass(frozen=True)
class GeneratorFunction:
    """Convex ``g`` with ``g(1) = 0`` and the clipping bound ``U``.

    ``func`` must accept and return float arrays.  Presets are built with
    :func:`shannon`, :func:`alpha_divergence`, :func:`total_variation` and
    :func:`chi_square`; anything else is a custom generator and cannot be
    serialized.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    clip_bound: float = DEFAULT_CLIP
    params: tuple = ()

    def __post_init__(self):
        if not self.clip_bound > 0:
            raise InvalidArgumentError("clip bound U must be positive")
        at_one = float(np.asarray(self.func(np.array([1.0])))[0])
        if not abs(at_one) <= 1e-12:
            raise InvalidArgumentError(f"generator {self.name!r} has g(1) = {at_one!r}, expected 0")

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=np.float64))

    def clipped(self, x) -> np.ndarray:
        """``min(g(x), U)``."""
        return np.minimum(self(x), self.clip_bound)

    @property
    def is_preset(self) -> bool:
        return self.name in _PRESETS

    def to_dict(self) -> dict:
        if not self.is_preset:
            raise InvalidArgumentError(f"custom generator {self.name!r} is not serializable")
        return {"name": self.name, "params": list(self.params), "clip_bound": self.clip_bound}

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorFunction":
        return generator_from_name(data["name"], *data.get("params", ()), clip_bound=data["clip_bound"])


def shannon(clip_bound: float = DEFAULT_CLIP) -> GeneratorFunction:
    """``g(x) = x ln x``; the estimate is Shannon MI in nats."""
    return GeneratorFunction("shannon", _xlogx, clip_bound)


def alpha_divergence(alpha: float, clip_bound: float = DEFAULT_CLIP) -> GeneratorFunction:
    """``g(x) = (x**alpha - 1) / (alpha - 1)``, the Renyi/Tsallis-type generator."""
    alpha = float(alpha)
    if alpha == 1.0 or not math.isfinite(alpha):
        raise InvalidArgumentError("alpha must be finite and != 1 (use shannon for the limit)")
    return GeneratorFunction(
        "alpha", lambda x: (np.power(x, alpha) - 1.0) / (alpha - 1.0), clip_bound, (alpha,)
    )


def total_variation(clip_bound: float = DEFAULT_CLIP) -> GeneratorFunction:
    return GeneratorFunction("tv", lambda x: 0.5 * np.abs(x - 1.0), clip_bound)


def chi_square(clip_bound: float = DEFAULT_CLIP) -> GeneratorFunction:
    return GeneratorFunction("chi2", lambda x: (x - 1.0) ** 2, clip_bound)


_PRESETS = {
    "shannon": shannon,
    "alpha": alpha_divergence,
    "tv": total_variation,
    "chi2": chi_square,
}


def generator_from_name(name: str, *params, clip_bound: float = DEFAULT_CLIP) -> GeneratorFunction:
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown generator {name!r}; expected one of {sorted(_PRESETS)}"
        ) from None
    return factory(*params, clip_bound=clip_bound)


@dataclass(frozen=True)
class MIEstimate:
    value: float
    n_samples: int
    epsilon_used: float | None
    g_name: str

    @property
    def bits(self) -> float:
        return self.value / LN2


def base_estimate(graph: DependenceGraph, g: GeneratorFunction | None = None,
                  epsilon: float | None = None) -> MIEstimate:
    """Sum of ``omega_i * omega'_j * min(g(omega_ij), U)`` over all edges.

    ``epsilon`` is only recorded on the result.
    """
    g = shannon() if g is None else g
    wi, wj, wij = graph.edge_weights()
    with np.errstate(all="ignore"):
        terms = g(wij)
    bad = ~np.isfinite(terms)
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise NumericError(
            f"g={g.name} is not finite at omega_ij={wij[first]!r} (edge {first})"
        )
    value = float(np.sum(wi * wj * np.minimum(terms, g.clip_bound)))
    return MIEstimate(value=value, n_samples=graph.n_samples, epsilon_used=epsilon, g_name=g.name)


def mi_from_samples(
    x,
    y,
    epsilon: float,
    g: GeneratorFunction | None = None,
    seed: int = 0,
    mode: HashMode | str = HashMode.FLOOR,
    c_h: int = DEFAULT_C_H,
    shift_b: float | None = None,
    projection_dim: int | None = None,
    stable_p: int = 2,
) -> MIEstimate:
    """Hash the pairs at bin width ``epsilon`` and return the base estimate.

    Examples
    --------
    >>> import numpy as np
    >>> x = np.array([[0.1], [0.1], [0.9], [0.9]])
    >>> round(mi_from_samples(x, x, 0.5, mode="exact", shift_b=0.0).value, 6)
    0.693147
    """
    x, y = paired_matrices(x, y)
    cfg_x, cfg_y = make_hash_configs(
        epsilon, x.shape[0], x.shape[1], y.shape[1], seed=seed, mode=mode, c_h=c_h,
        shift_b=shift_b, projection_dim=projection_dim, stable_p=stable_p,
    )
    return base_estimate(build_graph(x, y, cfg_x, cfg_y), g, epsilon=float(epsilon))


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[1] == 0:
        raise InvalidArgumentError("samples must be a 1-d or 2-d array with at least one column")
    return a


def paired_matrices(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate a paired batch and return it as two float64 ``(N, d)`` arrays."""
    x = _as_matrix(x)
    y = _as_matrix(y)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise EmptyInputError("need at least one sample pair")
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"row mismatch: X has {x.shape[0]} rows, Y has {y.shape[0]}")
    return x, y
