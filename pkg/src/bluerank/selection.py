"""Dimension ranking by blue-noise low-band energy, plus variance and random baselines."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import BluerankError, DimensionError
from .graph import GraphParams, graph_from_sq_distances, normalized_laplacian, pairwise_sq_distances
from .spectral import eigendecompose, gft, low_band_energy, synthesize_blue_noise

log = logging.getLogger(__name__)

DEFAULT_K0 = 100
SMALL_N = 400
METHODS = ("blue_noise", "pcoa", "variance", "random")


@dataclass(frozen=True)
class ScoringParams:
    """Parameters of the mask-and-rescore importance measure.

    ``mask_policy`` is ``"zero"`` or a float constant written into the
    masked column. ``recompute_bandwidth=False`` makes every masked graph
    reuse the heat-kernel width of the unmasked graph.
    """

    k0: int = DEFAULT_K0
    graph: GraphParams = field(default_factory=GraphParams)
    mask_policy: Union[str, float] = "zero"
    recompute_bandwidth: bool = True

    def __post_init__(self):
        if self.k0 < 1:
            raise BluerankError(f"k0 must be >= 1, got {self.k0}")
        if isinstance(self.mask_policy, str) and self.mask_policy != "zero":
            raise BluerankError(f"mask_policy must be 'zero' or a number, got {self.mask_policy!r}")


def resolve_k0(k0, n):
    """Effective zero-region width for ``n`` samples.

    For ``n <= 400`` the width is capped at ``n // 4`` (at least 1).
    """
    eff = k0
    if n <= SMALL_N:
        eff = min(k0, max(1, n // 4))
        if eff != k0:
            log.info("k0 clamped from %d to %d for N=%d", k0, eff, n)
    if not 1 <= eff < n:
        raise BluerankError(f"k0={eff} must satisfy 1 <= k0 < N={n}")
    return eff


@dataclass(frozen=True)
class ImportanceRanking:
    """Per-dimension scores and the induced order (most important first)."""

    scores: np.ndarray
    order: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    feature_names: tuple = ()

    def top(self, count):
        return self.order[:count]

    def to_dict(self):
        return {
            "method": self.method,
            "params": self.params,
            "scores": [float(s) for s in self.scores],
            "order": [int(i) for i in self.order],
            "feature_names": list(self.feature_names),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        names = self.feature_names or tuple(f"f{i}" for i in range(len(self.scores)))
        lines = ["rank,dimension,feature_name,score"]
        for rank, dim in enumerate(self.order):
            lines.append(f"{rank},{dim},{names[dim]},{float(self.scores[dim])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, doc):
        return cls(
            scores=np.asarray(doc["scores"], dtype=np.float64),
            order=np.asarray(doc["order"], dtype=np.int64),
            method=doc["method"],
            params=doc.get("params", {}),
            feature_names=tuple(doc.get("feature_names", ())),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def mask_dimension(ds, d, policy="zero"):
    """Copy of ``ds`` with column ``d`` overwritten by zero or a constant."""
    if not 0 <= d < ds.d:
        raise BluerankError(f"dimension {d} out of range for D={ds.d}")
    fill = 0.0 if policy == "zero" else float(policy)
    values = np.array(ds.values, copy=True)
    values[:, d] = fill
    return replace(ds, values=values)


def masked_sq_distances(sq_dist, column):
    """Squared distances after masking one column.

    Any constant written into the column removes that column's term from
    every pairwise distance, so the masked matrix is the full one minus
    ``(x_i - x_j)^2`` for that column.
    """
    contrib = column[:, None] - column[None, :]
    masked = sq_dist - contrib * contrib
    np.maximum(masked, 0.0, out=masked)
    np.fill_diagonal(masked, 0.0)
    return masked


def _masked_graph_params(params, bandwidth):
    if params.recompute_bandwidth or params.graph.weighting != "heat_kernel":
        return params.graph
    return replace(params.graph, bandwidth=bandwidth)


def score_dimension(ds, blue, d, params=None, sq_dist=None, bandwidth=None):
    """Importance score of dimension ``d``: ``0 - ||U_d[:, :k0]^T s||^2``.

    ``blue`` must come from the unmasked graph of ``ds``; its spectrum is
    zero on the low band, so the first term of the score is zero. More
    negative means masking ``d`` injected more low-frequency energy.

    ``sq_dist`` (full pairwise squared distances) and ``bandwidth`` (the
    unmasked heat-kernel width) may be passed in to avoid recomputation.
    """
    params = params or ScoringParams()
    if not 0 <= d < ds.d:
        raise DimensionError(d, f"out of range for D={ds.d}")
    try:
        if sq_dist is None:
            sq_dist = pairwise_sq_distances(ds.values)
        masked = masked_sq_distances(sq_dist, ds.values[:, d])
        graph = graph_from_sq_distances(masked, _masked_graph_params(params, bandwidth))
        basis = eigendecompose(normalized_laplacian(graph))
        energy = low_band_energy(gft(basis, blue.signal), blue.k0)
    except DimensionError:
        raise
    except BluerankError as exc:
        raise DimensionError(d, str(exc)) from exc
    return float(blue.spectrum[: blue.k0] @ blue.spectrum[: blue.k0]) - energy


def unmasked_blue_noise(ds, params):
    """Distances, graph and blue-noise signal of the unmasked dataset."""
    k0 = resolve_k0(params.k0, ds.n)
    sq_dist = pairwise_sq_distances(ds.values)
    graph = graph_from_sq_distances(sq_dist, params.graph)
    basis = eigendecompose(normalized_laplacian(graph))
    return sq_dist, graph, synthesize_blue_noise(basis, k0)


def _ascending_order(scores):
    return np.lexsort((np.arange(len(scores)), scores))


def rank_dimensions(ds, params=None, parallelism=1):
    """Score every dimension and order them most important first.

    The unmasked graph and its blue-noise signal are built once and shared
    read-only by all workers. Scores are gathered by dimension index, so the
    result does not depend on ``parallelism``.
    """
    params = params or ScoringParams()
    if not 1 <= params.graph.k_neighbors <= ds.n - 1:
        raise BluerankError(f"k_neighbors must be in [1, {ds.n - 1}], got {params.graph.k_neighbors}")
    sq_dist, graph, blue = unmasked_blue_noise(ds, params)

    def job(d):
        return score_dimension(ds, blue, d, params, sq_dist=sq_dist, bandwidth=graph.bandwidth)

    workers = max(1, int(parallelism))
    if workers == 1:
        scores = [job(d) for d in range(ds.d)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order and re-raises the first failing dimension
            scores = list(pool.map(job, range(ds.d)))
    scores = np.asarray(scores, dtype=np.float64)

    record = {
        "k0": params.k0,
        "k0_effective": blue.k0,
        "graph": params.graph.as_dict(),
        "unmasked_bandwidth": graph.bandwidth,
        "mask_policy": params.mask_policy,
        "recompute_bandwidth": params.recompute_bandwidth,
        "n": ds.n,
        "d": ds.d,
        "standardized": ds.standardized,
    }
    return ImportanceRanking(scores, _ascending_order(scores), "blue_noise", record, ds.feature_names)


def pcoa_rank(ds):
    """Rank columns by their sum of squared deviations from the column mean, largest first."""
    x = ds.values
    scores = ((x - x.mean(axis=0)) ** 2).sum(axis=0)
    order = np.lexsort((np.arange(ds.d), -scores))
    return ImportanceRanking(scores, order, "pcoa", {"n": ds.n, "d": ds.d}, ds.feature_names)


def variance_rank(ds):
    """Same order as :func:`pcoa_rank`, scores reported as population variances."""
    scores = ds.values.var(axis=0)
    order = np.lexsort((np.arange(ds.d), -scores))
    return ImportanceRanking(scores, order, "variance", {"n": ds.n, "d": ds.d}, ds.feature_names)


def random_rank(ds, seed=0):
    order = np.random.default_rng(seed).permutation(ds.d)
    return ImportanceRanking(np.zeros(ds.d), order, "random", {"seed": seed, "d": ds.d}, ds.feature_names)
