"""Evaluation protocols: neighbor recovery, cross-validated F1 curves, mask images."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BluerankError

DEFAULT_N_NEIGHBORS = 20
ROW_CHUNK = 512


@dataclass(frozen=True)
class RecoveryCurve:
    subset_sizes: tuple
    recovery: tuple
    n_neighbors: int
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class F1Curve:
    feature_counts: tuple
    f1: tuple
    folds: int
    classifier: str
    meta: dict = field(default_factory=dict)


def _check_selection(selected, d):
    selected = np.asarray(selected, dtype=np.int64).ravel()
    if selected.size == 0:
        raise BluerankError("empty feature selection")
    if np.unique(selected).size != selected.size:
        raise BluerankError("duplicate indices in feature selection")
    if selected.min() < 0 or selected.max() >= d:
        raise BluerankError(f"selected indices must lie in [0, {d})")
    # order is irrelevant to distances; sorting keeps the computation canonical
    return np.sort(selected)


def _cross_sq_distances(a, b):
    dist = np.einsum("ij,ij->i", a, a)[:, None] + np.einsum("ij,ij->i", b, b)[None, :] - 2.0 * (a @ b.T)
    np.maximum(dist, 0.0, out=dist)
    return dist


def nearest_neighbors(x, k):
    """``k`` nearest other rows of ``x`` for every row, ties to the smaller index.

    Rows are processed in chunks so large N does not need the full N x N matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k < n:
        raise BluerankError(f"n_neighbors must be in [1, {n - 1}], got {k}")
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, ROW_CHUNK):
        stop = min(n, start + ROW_CHUNK)
        dist = _cross_sq_distances(x[start:stop], x)
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def _overlap_fraction(a, b):
    hits = (a[:, :, None] == b[:, None, :]).any(axis=2).sum(axis=1)
    return float(np.mean(hits / a.shape[1]))


def neighbor_recovery(ds, selected, n_neighbors=DEFAULT_N_NEIGHBORS, full_neighbors=None):
    """Mean fraction of each sample's full-space neighbors kept in the restricted space.

    ``full_neighbors`` may carry precomputed full-space neighbor indices.
    """
    selected = _check_selection(selected, ds.d)
    if full_neighbors is None:
        full_neighbors = nearest_neighbors(ds.values, n_neighbors)
    restricted = nearest_neighbors(ds.values[:, selected], n_neighbors)
    return _overlap_fraction(full_neighbors, restricted)


def _check_sizes(sizes, d):
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise BluerankError("no subset sizes given")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise BluerankError("subset sizes must be strictly ascending")
    if sizes[0] < 1 or sizes[-1] > d:
        raise BluerankError(f"subset sizes must lie in [1, {d}]")
    return sizes


def recovery_curve(ds, ranking, sizes, n_neighbors=DEFAULT_N_NEIGHBORS):
    """Neighbor recovery of the top-``s`` ranked dimensions for each ``s`` in ``sizes``."""
    if len(ranking.order) != ds.d:
        raise BluerankError(f"ranking covers {len(ranking.order)} dimensions, dataset has {ds.d}")
    sizes = _check_sizes(sizes, ds.d)
    full = nearest_neighbors(ds.values, n_neighbors)
    values = tuple(
        neighbor_recovery(ds, ranking.order[:s], n_neighbors, full_neighbors=full) for s in sizes
    )
    return RecoveryCurve(tuple(sizes), values, n_neighbors, {"method": ranking.method})


def stratified_folds(labels, folds, seed=0):
    """Fold id per sample; each class is shuffled and dealt round-robin across folds.

    Classes are visited in order of first appearance, so renaming classes
    does not change the folds.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise BluerankError(f"folds must be >= 2, got {folds}")
    classes, first, counts = np.unique(labels, return_index=True, return_counts=True)
    if counts.min() < folds:
        small = classes[np.argmin(counts)]
        raise BluerankError(f"class {small!r} has {counts.min()} samples, fewer than {folds} folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.shape[0], dtype=np.int64)
    offset = 0
    for cls in classes[np.argsort(first)]:
        members = rng.permutation(np.flatnonzero(labels == cls))
        fold_of[members] = (offset + np.arange(members.size)) % folds
        offset += members.size
    return fold_of


class KNNClassifier:
    """Majority vote among the ``k`` nearest training samples.

    Distance ties go to the lower training index, vote ties to the
    smallest class code.
    """

    name = "knn"

    def __init__(self, k=5):
        if k < 1:
            raise BluerankError(f"k must be >= 1, got {k}")
        self.k = k

    def __call__(self, train_x, train_y, test_x, n_classes):
        k = min(self.k, train_x.shape[0])
        dist = _cross_sq_distances(test_x, train_x)
        nbrs = np.argsort(dist, axis=1, kind="stable")[:, :k]
        votes = np.zeros((test_x.shape[0], n_classes), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(test_x.shape[0]), k), train_y[nbrs].ravel()), 1)
        return np.argmax(votes, axis=1)


def macro_f1(true, pred, n_classes):
    """Unweighted mean of per-class F1; a class with no true or predicted members scores 0."""
    scores = np.zeros(n_classes)
    for c in range(n_classes):
        tp = np.sum((pred == c) & (true == c))
        fp = np.sum((pred == c) & (true != c))
        fn = np.sum((pred != c) & (true == c))
        denom = 2 * tp + fp + fn
        scores[c] = 2 * tp / denom if denom else 0.0
    return float(scores.mean())


def cross_validated_f1(ds, selected, folds=5, seed=0, classifier=None, fold_of=None):
    """Macro F1 averaged over stratified folds, using only the selected columns."""
    if ds.labels is None:
        raise BluerankError("dataset has no labels")
    classifier = classifier or KNNClassifier()
    selected = _check_selection(selected, ds.d)
    classes, y = np.unique(ds.labels, return_inverse=True)
    if fold_of is None:
        fold_of = stratified_folds(ds.labels, folds, seed)
    x = ds.values[:, selected]
    per_fold = []
    for f in range(folds):
        test = fold_of == f
        pred = classifier(x[~test], y[~test], x[test], len(classes))
        per_fold.append(macro_f1(y[test], pred, len(classes)))
    return float(np.mean(per_fold))


def knn_classify_cv(ds, selected, folds=5, k=5, seed=0):
    """Stratified ``folds``-fold macro F1 of a ``k``-NN classifier on the selected columns."""
    return cross_validated_f1(ds, selected, folds, seed, KNNClassifier(k))


def f1_curve(ds, ranking, counts, folds=5, k=5, seed=0, classifier=None):
    """F1 of the top-``c`` ranked features for each ``c``, all on the same folds."""
    if ds.labels is None:
        raise BluerankError("dataset has no labels")
    if len(ranking.order) != ds.d:
        raise BluerankError(f"ranking covers {len(ranking.order)} dimensions, dataset has {ds.d}")
    counts = _check_sizes(counts, ds.d)
    classifier = classifier or KNNClassifier(k)
    fold_of = stratified_folds(ds.labels, folds, seed)
    f1 = tuple(
        cross_validated_f1(ds, ranking.order[:c], folds, seed, classifier, fold_of) for c in counts
    )
    meta = {"method": ranking.method, "k": k, "seed": seed, "averaging": "macro", "stratified": True}
    return F1Curve(tuple(counts), f1, folds, classifier.name, meta)


def write_curve(path, xs, values, metadata):
    """Write ``x,value`` CSV with a JSON metadata comment line, plus a ``.json`` sidecar."""
    lines = ["# " + json.dumps(metadata, sort_keys=True), "x,value"]
    lines += [f"{x},{float(v)!r}" for x, v in zip(xs, values)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = dict(metadata, x=list(xs), value=[float(v) for v in values])
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def mask_array(ranking, rows, cols, top):
    d = len(ranking.order)
    if rows * cols != d:
        raise BluerankError(f"mask shape {rows}x{cols} does not match D={d}")
    if not 0 <= top <= d:
        raise BluerankError(f"top must be in [0, {d}], got {top}")
    mask = np.zeros(d, dtype=np.uint8)
    mask[np.asarray(ranking.order[:top], dtype=np.int64)] = 255
    return mask.reshape(rows, cols)


def export_mask_image(ranking, rows, cols, top, path, comment=None):
    """Write an ASCII PGM (P2) that is white at the top-``top`` ranked pixels."""
    mask = mask_array(ranking, rows, cols, top)
    lines = ["P2"]
    if comment:
        lines += ["# " + line for line in str(comment).splitlines()]
    lines += [f"{cols} {rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in mask]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pgm(path):
    """Parse an ASCII (P2) PGM into a ``rows x cols`` integer array."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            tokens += line.split("#", 1)[0].split()
    if not tokens or tokens[0] != "P2":
        raise BluerankError(f"{path}: not an ASCII PGM")
    cols, rows, maxval = (int(t) for t in tokens[1:4])
    pixels = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if pixels.size != rows * cols or pixels.max(initial=0) > maxval:
        raise BluerankError(f"{path}: pixel data does not match header")
    return pixels.reshape(rows, cols)
