"""Ensemble of base estimates at several bin widths (EDGE).

Member ``t`` runs the base estimator at ``epsilon(t) = t * N**(-1 / (2 d))``.
The weights are the minimum-norm solution of

    sum_t w(t) = 1,    sum_t w(t) * t**i = 0  for i = 1..d,

which cancels the leading ``epsilon**i`` bias terms.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConditioningError,
    EdgeWarning,
    InfeasibleConfigurationError,
    InvalidArgumentError,
)
from .estimator import GeneratorFunction, mi_from_samples, paired_matrices, shannon
from .hashing import DEFAULT_C_H, HashMode

__all__ = [
    "SCHEMA_VERSION",
    "MAX_CONDITION",
    "default_t_values",
    "epsilon_schedule",
    "solve_weights",
    "constraint_matrix",
    "member_seed",
    "EnsembleSpec",
    "EnsembleMember",
    "EnsembleEstimate",
    "edge_estimate",
]

SCHEMA_VERSION = 1
# Beyond this the normal equations lose every significant digit.
MAX_CONDITION = 1e14


def default_t_values(d: int, n_members: int | None = None) -> np.ndarray:
    """Arithmetic grid ``1, 1.5, 2, ...`` with ``d + 3`` members by default."""
    T = d + 3 if n_members is None else int(n_members)
    if T < 1:
        raise InvalidArgumentError("need at least one ensemble member")
    return 1.0 + 0.5 * np.arange(T)


def epsilon_schedule(t_values, n: int, d_total: int) -> np.ndarray:
    """``t * n**(-1/(2 d))`` for every ``t``."""
    if d_total < 1:
        raise InvalidArgumentError("the schedule needs d_total >= 1")
    return np.asarray(t_values, dtype=np.float64) * float(n) ** (-1.0 / (2.0 * d_total))


def constraint_matrix(t_values, d: int) -> np.ndarray:
    """Rows ``t**0, t**1, ..., t**d``."""
    t = np.asarray(t_values, dtype=np.float64)
    return np.vstack([t**i for i in range(d + 1)])


def solve_weights(t_values, d: int) -> np.ndarray:
    """Minimum-norm weights for ``T`` members cancelling ``d`` bias orders.

    Solves ``(A A^T) y = e_1`` and returns ``w = A^T y`` where row ``i`` of
    ``A`` is ``t**i``.  Rows are scaled to unit norm first (this leaves the
    minimum-norm solution unchanged) and the result gets one step of
    iterative refinement with the residual accumulated in extended precision.

    Raises
    ------
    InfeasibleConfigurationError
        If ``T <= d``.
    ConditioningError
        If the scaled normal matrix is numerically singular.

    Examples
    --------
    >>> solve_weights([1.0, 2.0], 1).round(12).tolist()
    [2.0, -1.0]
    """
    t = np.asarray(t_values, dtype=np.float64).reshape(-1)
    d = int(d)
    if d < 0:
        raise InvalidArgumentError("d must be >= 0")
    if t.size <= d:
        raise InfeasibleConfigurationError(
            f"need more members than bias orders: T={t.size}, d={d}"
        )
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise InvalidArgumentError("t values must be positive and finite")

    a = constraint_matrix(t, d)
    scale = np.linalg.norm(a, axis=1)
    a_s = a / scale[:, None]
    gram = a_s @ a_s.T
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(
            f"weight system is numerically singular (condition number {cond:.3g}); "
            "t values are duplicated or too close",
            cond,
        )
    rhs = np.zeros(d + 1)
    rhs[0] = 1.0
    factor = scipy.linalg.cho_factor(gram)
    w = a_s.T @ scipy.linalg.cho_solve(factor, rhs / scale)

    a_ext = a.astype(np.longdouble)
    residual = rhs.astype(np.longdouble) - a_ext @ w.astype(np.longdouble)
    w = w + a_s.T @ scipy.linalg.cho_solve(factor, residual.astype(np.float64) / scale)
    return w


def member_seed(seed: int, index: int) -> int:
    """Independent, reproducible sub-seed for ensemble member ``index``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class EnsembleSpec:
    t_values: tuple
    d_total: int
    n_samples: int
    bias_order: int
    epsilons: tuple
    weights: tuple

    @classmethod
    def build(cls, n_samples: int, d_total: int, t_values=None, bias_order: int | None = None):
        """Schedule and solved weights for a batch of ``n_samples`` in ``d_total`` dims.

        ``bias_order`` (the number of cancelled bias terms) defaults to ``d_total``.
        """
        order = d_total if bias_order is None else int(bias_order)
        t = default_t_values(order) if t_values is None else np.asarray(t_values, dtype=np.float64)
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("t values must be strictly increasing")
        w = solve_weights(t, order)
        eps = epsilon_schedule(t, n_samples, d_total)
        return cls(
            t_values=tuple(t.tolist()),
            d_total=int(d_total),
            n_samples=int(n_samples),
            bias_order=order,
            epsilons=tuple(eps.tolist()),
            weights=tuple(w.tolist()),
        )


@dataclass(frozen=True)
class EnsembleMember:
    t: float
    epsilon: float
    estimate: float
    weight: float


@dataclass(frozen=True)
class EnsembleEstimate:
    value: float
    n_samples: int
    d_total: int
    bias_order: int
    g_name: str
    seed: int
    mode: str
    members: tuple

    @property
    def bits(self) -> float:
        return self.value / np.log(2.0)

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.members])

    def to_dict(self) -> dict:
        out = asdict(self)
        out["members"] = [asdict(m) for m in self.members]
        out["schema_version"] = SCHEMA_VERSION
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def edge_estimate(
    x,
    y,
    t_values=None,
    g: GeneratorFunction | None = None,
    seed: int = 0,
    mode: HashMode | str = HashMode.FLOOR,
    c_h: int = DEFAULT_C_H,
    bias_order: int | None = None,
    projection_dim: int | None = None,
    stable_p: int = 2,
) -> EnsembleEstimate:
    """Weighted ensemble estimate ``sum_t w(t) * I_hat(epsilon(t))``.

    Every member is :func:`mi_from_samples` at its own bin width with the
    sub-seed :func:`member_seed`; members are combined in t order.  A
    :class:`EdgeWarning` is issued when a bin width exceeds the spread of
    every coordinate, i.e. the member sees a single bucket.
    """
    g = shannon() if g is None else g
    x, y = paired_matrices(x, y)
    n = x.shape[0]
    spec = EnsembleSpec.build(n, x.shape[1] + y.shape[1], t_values, bias_order)

    spread = max(float(np.ptp(x, axis=0).max()), float(np.ptp(y, axis=0).max()))
    members = []
    for k, (t, eps, w) in enumerate(zip(spec.t_values, spec.epsilons, spec.weights)):
        if eps > spread:
            warnings.warn(
                f"epsilon(t={t:g}) = {eps:.4g} exceeds the data range {spread:.4g}; "
                "all points share one bucket",
                EdgeWarning,
                stacklevel=2,
            )
        est = mi_from_samples(
            x, y, eps, g, seed=member_seed(seed, k), mode=mode, c_h=c_h,
            projection_dim=projection_dim, stable_p=stable_p,
        )
        members.append(EnsembleMember(t=t, epsilon=eps, estimate=est.value, weight=w))

    values = np.array([m.estimate for m in members])
    value = float(np.dot(np.asarray(spec.weights), values))
    return EnsembleEstimate(
        value=value,
        n_samples=n,
        d_total=spec.d_total,
        bias_order=spec.bias_order,
        g_name=g.name,
        seed=int(seed),
        mode=HashMode(mode).value,
        members=tuple(members),
    )
