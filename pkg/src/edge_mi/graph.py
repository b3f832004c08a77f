"""Bipartite dependence graph built from hashed sample pairs.

The X side nodes (``v_i``) hold counts ``N_i``, the Y side nodes (``u_j``)
hold counts ``M_j`` and every edge ``(v_i, u_j)`` holds the joint count
``N_ij``.  Only nodes and edges with a nonzero count are stored.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import EmptyInputError, InvalidArgumentError
from .hashing import HashConfig, hash_points

__all__ = [
    "DependenceGraph",
    "EdgeWeight",
    "GraphStats",
    "build_graph",
    "graph_from_codes",
    "merge_graphs",
    "edge_iter",
    "graph_stats",
]


@dataclass(frozen=True)
class EdgeWeight:
    omega_i: float
    omega_j_prime: float
    omega_ij: float


@dataclass(frozen=True)
class GraphStats:
    n_x_nodes: int
    n_y_nodes: int
    n_edges: int
    max_x_occupancy: int
    max_y_occupancy: int


@dataclass(frozen=True, eq=False)
class DependenceGraph:
    """Collision counts of a dependence graph, stored as parallel arrays.

    ``x_keys[a]`` is the bucket id of X node ``a`` and ``x_node_counts[a]``
    its count; likewise for Y.  Edge ``e`` joins X node ``edge_x[e]`` to Y node
    ``edge_y[e]`` with joint count ``edge_counts[e]``.  Nodes and edges are
    sorted by key, so the layout does not depend on sample order.  Keys are
    int64 arrays: shape ``(K,)`` for scalar bucket ids, ``(K, d)`` for the
    vector keys of exact mode.  The dict views convert them to ints/tuples.
    """

    n_samples: int
    x_keys: np.ndarray
    x_node_counts: np.ndarray
    y_keys: np.ndarray
    y_node_counts: np.ndarray
    edge_x: np.ndarray
    edge_y: np.ndarray
    edge_counts: np.ndarray

    @property
    def n_edges(self) -> int:
        return int(self.edge_counts.size)

    @cached_property
    def x_labels(self) -> list:
        return _labels(self.x_keys)

    @cached_property
    def y_labels(self) -> list:
        return _labels(self.y_keys)

    @cached_property
    def x_counts(self) -> dict:
        return dict(zip(self.x_labels, self.x_node_counts.tolist()))

    @cached_property
    def y_counts(self) -> dict:
        return dict(zip(self.y_labels, self.y_node_counts.tolist()))

    @cached_property
    def joint_counts(self) -> dict:
        xl, yl = self.x_labels, self.y_labels
        return {
            (xl[a], yl[b]): c
            for a, b, c in zip(self.edge_x.tolist(), self.edge_y.tolist(), self.edge_counts.tolist())
        }

    def edge_weights(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays ``(omega_i, omega'_j, omega_ij)`` aligned with the edges."""
        n = float(self.n_samples)
        ni = self.x_node_counts[self.edge_x].astype(np.float64)
        mj = self.y_node_counts[self.edge_y].astype(np.float64)
        nij = self.edge_counts.astype(np.float64)
        return ni / n, mj / n, nij * n / (ni * mj)

    def same_counts(self, other: "DependenceGraph") -> bool:
        return (
            self.n_samples == other.n_samples
            and self.x_counts == other.x_counts
            and self.y_counts == other.y_counts
            and self.joint_counts == other.joint_counts
        )


def _labels(keys: np.ndarray) -> list:
    if keys.ndim == 1:
        return keys.tolist()
    return [tuple(row) for row in keys.tolist()]


def _sorted_runs(keys: np.ndarray):
    """Sort order, sorted keys and run-start flags of a 1-d key array."""
    order = np.argsort(keys)
    ordered = keys[order]
    starts = np.empty(ordered.size, dtype=bool)
    starts[0] = True
    np.not_equal(ordered[1:], ordered[:-1], out=starts[1:])
    return order, ordered, starts


def _run_counts(starts: np.ndarray) -> np.ndarray:
    bounds = np.flatnonzero(starts)
    counts = np.empty(bounds.size, dtype=np.int64)
    np.subtract(bounds[1:], bounds[:-1], out=counts[:-1])
    counts[-1] = starts.size - bounds[-1]
    return counts


def _factorize(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique keys (sorted), per-sample node index and node counts."""
    keys = keys.astype(np.int64, copy=False)
    if keys.ndim != 1:
        uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        return uniq, inverse.reshape(-1).astype(np.int64), counts.astype(np.int64)
    order, ordered, starts = _sorted_runs(keys)
    inverse = np.empty(keys.size, dtype=np.int64)
    inverse[order] = np.cumsum(starts) - 1
    return ordered[starts], inverse, _run_counts(starts)


def graph_from_codes(x_codes, y_codes) -> DependenceGraph:
    """Build a graph from precomputed per-sample bucket keys.

    ``x_codes``/``y_codes`` are int arrays of shape ``(N,)`` (scalar bucket
    ids) or ``(N, d)`` (vector keys).
    """
    x_codes = np.asarray(x_codes)
    y_codes = np.asarray(y_codes)
    n = x_codes.shape[0]
    if n == 0:
        raise EmptyInputError("cannot build a dependence graph from zero samples")
    if y_codes.shape[0] != n:
        raise InvalidArgumentError(f"row mismatch: {n} X keys vs {y_codes.shape[0]} Y keys")
    x_keys, xi, x_counts = _factorize(x_codes)
    y_keys, yj, y_counts = _factorize(y_codes)
    _, joint, starts = _sorted_runs(xi * len(y_keys) + yj)
    edges, edge_counts = joint[starts], _run_counts(starts)
    return DependenceGraph(
        n_samples=int(n),
        x_keys=x_keys,
        x_node_counts=x_counts,
        y_keys=y_keys,
        y_node_counts=y_counts,
        edge_x=edges // len(y_keys),
        edge_y=edges % len(y_keys),
        edge_counts=edge_counts.astype(np.int64),
    )


def build_graph(x, y, config_x: HashConfig, config_y: HashConfig) -> DependenceGraph:
    """Hash every sample pair once and accumulate ``N_i``, ``M_j`` and ``N_ij``.

    Parameters
    ----------
    x : array_like, shape (N, d_X)
    y : array_like, shape (N, d_Y)
        One-dimensional inputs are treated as a single column.
    config_x, config_y : HashConfig
        Hash functions for the X and Y sides.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise EmptyInputError("cannot build a dependence graph from zero samples")
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"row mismatch: X has {x.shape[0]} rows, Y has {y.shape[0]}")
    return graph_from_codes(hash_points(x, config_x), hash_points(y, config_y))


def merge_graphs(graphs) -> DependenceGraph:
    """Key-wise sum of graphs built from disjoint shards of one batch.

    The result equals the graph built from the concatenated shards.
    """
    graphs = list(graphs)
    if not graphs:
        raise EmptyInputError("nothing to merge")
    x_parts, y_parts, weights = [], [], []
    for g in graphs:
        x_parts.append(g.x_keys[g.edge_x])
        y_parts.append(g.y_keys[g.edge_y])
        weights.append(g.edge_counts)
    # Expand edges back into one key pair per sample; exact and cheap since
    # the total multiplicity is the sample count.
    reps = np.concatenate(weights)
    x_codes = np.repeat(np.concatenate(x_parts), reps, axis=0)
    y_codes = np.repeat(np.concatenate(y_parts), reps, axis=0)
    return graph_from_codes(x_codes, y_codes)


def edge_iter(graph: DependenceGraph) -> Iterator[tuple[object, object, EdgeWeight]]:
    """Yield ``(x_key, y_key, EdgeWeight)`` once per stored edge, in key order."""
    wi, wj, wij = graph.edge_weights()
    xl, yl = graph.x_labels, graph.y_labels
    for e, (a, b) in enumerate(zip(graph.edge_x.tolist(), graph.edge_y.tolist())):
        yield xl[a], yl[b], EdgeWeight(float(wi[e]), float(wj[e]), float(wij[e]))


def graph_stats(graph: DependenceGraph) -> GraphStats:
    return GraphStats(
        n_x_nodes=len(graph.x_keys),
        n_y_nodes=len(graph.y_keys),
        n_edges=graph.n_edges,
        max_x_occupancy=int(graph.x_node_counts.max()),
        max_y_occupancy=int(graph.y_node_counts.max()),
    )

