"""k-nearest-neighbor sample graphs and the symmetric normalized Laplacian."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import GraphError

WEIGHTINGS = ("binary", "heat_kernel")


@dataclass(frozen=True)
class GraphParams:
    """How to build the sample graph.

    ``bandwidth=None`` selects the heat-kernel width as the median of all
    selected kNN distances; a positive float fixes it.
    """

    k_neighbors: int = 10
    weighting: str = "heat_kernel"
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise GraphError(f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}")
        if self.k_neighbors < 1:
            raise GraphError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise GraphError(f"fixed bandwidth must be positive, got {self.bandwidth}")

    def as_dict(self):
        return {
            "k_neighbors": self.k_neighbors,
            "weighting": self.weighting,
            "bandwidth_rule": "median_knn_distance" if self.bandwidth is None else "fixed",
            "bandwidth": self.bandwidth,
        }


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph over ``n`` sample nodes.

    ``adjacency`` is a CSR matrix, exactly symmetric with an empty diagonal.
    ``bandwidth`` records the heat-kernel width actually used (None for binary).
    """

    n: int
    adjacency: sp.csr_matrix
    bandwidth: Optional[float] = None

    @property
    def degrees(self):
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def edges(self):
        """Undirected edges as ``(i, j, weight)`` with ``i < j``, sorted by ``(i, j)``."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return [(int(upper.row[t]), int(upper.col[t]), float(upper.data[t])) for t in order]

    def dump_edges(self, path):
        with open(path, "w") as fh:
            for i, j, w in self.edges():
                fh.write(f"{i} {j} {w!r}\n")


def pairwise_sq_distances(x):
    """Squared Euclidean distances between the rows of ``x``.

    The result is exactly symmetric, non-negative, with a zero diagonal.
    """
    x = np.asarray(x, dtype=np.float64)
    sq_norms = np.einsum("ij,ij->i", x, x)
    dist = sq_norms[:, None] + sq_norms[None, :] - 2.0 * (x @ x.T)
    dist = 0.5 * (dist + dist.T)
    np.maximum(dist, 0.0, out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


def knn_from_sq_distances(sq_dist, k):
    """Indices of the ``k`` nearest other rows for every row.

    Ties in distance go to the smaller index (stable sort); a node never
    selects itself.
    """
    n = sq_dist.shape[0]
    if not 1 <= k <= n - 1:
        raise GraphError(f"k_neighbors must be in [1, {n - 1}], got {k}")
    work = np.array(sq_dist, dtype=np.float64, copy=True)
    np.fill_diagonal(work, np.inf)
    return np.argsort(work, axis=1, kind="stable")[:, :k]


def _heat_bandwidth(selected_dist):
    sigma = float(np.median(selected_dist))
    if sigma > 0:
        return sigma
    # degenerate case: most selected neighbors coincide
    positive = selected_dist[selected_dist > 0]
    return float(positive.mean()) if positive.size else 1.0


def graph_from_sq_distances(sq_dist, params):
    """Union-symmetrized kNN graph from a precomputed squared-distance matrix."""
    n = sq_dist.shape[0]
    nbrs = knn_from_sq_distances(sq_dist, params.k_neighbors)
    rows = np.repeat(np.arange(n), params.k_neighbors)
    cols = nbrs.ravel()

    selected = np.zeros((n, n), dtype=bool)
    selected[rows, cols] = True
    selected |= selected.T

    bandwidth = None
    if params.weighting == "binary":
        weights = selected.astype(np.float64)
    else:
        if params.bandwidth is None:
            bandwidth = _heat_bandwidth(np.sqrt(sq_dist[rows, cols]))
        else:
            bandwidth = float(params.bandwidth)
        # floor keeps far outliers connected when exp() underflows
        kernel = np.maximum(np.exp(-sq_dist / bandwidth**2), np.finfo(np.float64).tiny)
        weights = np.where(selected, kernel, 0.0)
    np.fill_diagonal(weights, 0.0)
    return Graph(n=n, adjacency=sp.csr_matrix(weights), bandwidth=bandwidth)


def build_knn_graph(ds, params=None):
    """Build the kNN graph of a dataset's samples under Euclidean distance.

    Each node selects its ``k_neighbors`` nearest samples and an edge is kept
    if either endpoint selected the other. Binary weighting gives every edge
    weight 1; heat-kernel weighting gives ``exp(-d^2 / sigma^2)``.
    """
    params = params or GraphParams()
    if not 1 <= params.k_neighbors <= ds.n - 1:
        raise GraphError(f"k_neighbors must be in [1, {ds.n - 1}], got {params.k_neighbors}")
    return graph_from_sq_distances(pairwise_sq_distances(ds.values), params)


def normalized_laplacian(g):
    """Dense ``I - D^{-1/2} A D^{-1/2}`` for a graph with no isolated nodes."""
    deg = g.degrees
    if np.any(deg <= 0):
        bad = np.flatnonzero(deg <= 0)
        raise GraphError(f"zero-degree node(s) {bad[:10].tolist()}; Laplacian undefined")
    r = 1.0 / np.sqrt(deg)
    # outer(r, r) is exactly symmetric, so L is too
    lap = -g.adjacency.toarray() * np.outer(r, r)
    np.fill_diagonal(lap, 1.0)
    return lap
