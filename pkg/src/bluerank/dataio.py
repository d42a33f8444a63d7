"""Dataset record, CSV/IDX loaders, standardization and a planted-cluster generator."""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataFormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

# population std below this counts as a constant column
CONSTANT_STD = 1e-12


@dataclass(frozen=True)
class Dataset:
    """An ``N x D`` sample matrix with feature names and optional labels.

    Arrays are copied and frozen on construction, so a Dataset can be
    shared read-only between threads.
    """

    values: np.ndarray
    feature_names: tuple = ()
    labels: Optional[np.ndarray] = None
    standardized: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataFormatError(f"values must be 2-D, got shape {values.shape}")
        n, d = values.shape
        if n < 2 or d < 1:
            raise DataFormatError(f"need N >= 2 and D >= 1, got N={n}, D={d}")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataFormatError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        names = tuple(str(s) for s in self.feature_names) or tuple(f"f{i}" for i in range(d))
        if len(names) != d:
            raise DataFormatError(f"{len(names)} feature names for {d} columns")
        object.__setattr__(self, "feature_names", names)

        if self.labels is not None:
            labels = np.array(self.labels)
            if labels.shape != (n,):
                raise DataFormatError(f"labels must have shape ({n},), got {labels.shape}")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def subset(self, rows):
        """Return the dataset restricted to the given sample indices."""
        rows = np.asarray(rows)
        labels = None if self.labels is None else self.labels[rows]
        return replace(self, values=self.values[rows], labels=labels)


def _coerce_labels(raw):
    try:
        as_float = np.array([float(v) for v in raw])
    except ValueError:
        return np.array(raw)
    if np.all(np.isfinite(as_float)) and np.all(as_float == np.round(as_float)):
        return as_float.astype(np.int64)
    return as_float


def load_csv(path, has_header=True, label_column=None):
    """Read a numeric CSV file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
        UTF-8 CSV file with ``.`` as the decimal separator.
    has_header : bool
        Whether the first record holds column names. Without a header the
        features are named ``f0 .. f{D-1}`` and ``label_column`` may be a
        column index.
    label_column : str or int, optional
        Column to split off as labels instead of a feature.

    Raises
    ------
    DataFormatError
        On an empty file, ragged rows, or a cell that is not a real number.
        Row numbers in messages count data rows from 1.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        records = [r for r in csv.reader(fh) if r]
    if not records or (has_header and len(records) < 2):
        raise DataFormatError(f"{path}: empty file")

    header = records[0] if has_header else None
    rows = records[1:] if has_header else records
    width = len(header) if header is not None else len(rows[0])
    names = list(header) if header is not None else [f"f{i}" for i in range(width)]

    label_idx = None
    if label_column is not None:
        if label_column in names:
            label_idx = names.index(label_column)
        elif isinstance(label_column, int) or str(label_column).isdigit():
            label_idx = int(label_column)
        if label_idx is None or not 0 <= label_idx < width:
            raise DataFormatError(f"{path}: no label column {label_column!r}")

    feat_cols = [j for j in range(width) if j != label_idx]
    values = np.empty((len(rows), len(feat_cols)))
    raw_labels = []
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataFormatError(f"{path}: row {i} has {len(row)} fields, expected {width}")
        for out_j, j in enumerate(feat_cols):
            try:
                values[i - 1, out_j] = float(row[j])
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {i}, column {names[j]!r}: cannot parse {row[j]!r} as a number"
                ) from None
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())

    if has_header:
        names = [names[j] for j in feat_cols]
    else:
        names = [f"f{i}" for i in range(len(feat_cols))]
    labels = _coerce_labels(raw_labels) if label_idx is not None else None
    return Dataset(values, tuple(names), labels, meta={"source": str(path)})


def _open_maybe_gzip(path):
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    return gzip.open(path, "rb") if head == b"\x1f\x8b" else open(path, "rb")


def read_idx(path, expected_magic):
    """Read an IDX file and return its contents as a uint8 array."""
    with _open_maybe_gzip(path) as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise DataFormatError(f"{path}: truncated IDX header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected_magic:
        raise DataFormatError(
            f"{path}: bad magic number 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    expected = int(np.prod(dims))
    body = np.frombuffer(raw, dtype=np.uint8, offset=header_len)
    if body.size != expected:
        raise DataFormatError(f"{path}: expected {expected} data bytes, found {body.size}")
    return body.reshape(dims)


def write_idx(path, array):
    """Write a uint8 array of rank 1 or 3 as an IDX file."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = {1: IDX_LABELS_MAGIC, 3: IDX_IMAGES_MAGIC}.get(array.ndim)
    if magic is None:
        raise DataFormatError(f"IDX writer supports rank 1 or 3, got {array.ndim}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", magic))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def _stratified_pick(labels, limit, rng):
    classes = np.unique(labels)
    base, extra = divmod(limit, len(classes))
    picked = []
    for rank, cls in enumerate(classes):
        want = base + (1 if rank < extra else 0)
        members = np.flatnonzero(labels == cls)
        if want > members.size:
            raise DataFormatError(
                f"class {cls!r} has {members.size} images, cannot draw {want}"
            )
        picked.append(rng.choice(members, size=want, replace=False))
    return np.sort(np.concatenate(picked))


def load_idx_images(images_path, labels_path=None, limit=None, seed=0):
    """Load IDX images (MNIST layout) as a Dataset of pixels scaled to [0, 1].

    Images are flattened row-major, so feature ``r*cols + c`` is pixel
    ``(r, c)``. When ``limit`` is given a seeded random subset is drawn;
    with labels the draw is stratified, splitting ``limit`` evenly across
    classes (the first ``limit % n_classes`` classes get one extra).
    Selected rows keep their file order.
    """
    images = read_idx(images_path, IDX_IMAGES_MAGIC)
    count, rows, cols = images.shape
    labels = None
    if labels_path is not None:
        labels = read_idx(labels_path, IDX_LABELS_MAGIC).astype(np.int64)
        if labels.shape[0] != count:
            raise DataFormatError(
                f"count mismatch: {count} images but {labels.shape[0]} labels"
            )

    idx = np.arange(count)
    if limit is not None:
        if limit < 1:
            raise DataFormatError(f"limit must be positive, got {limit}")
        rng = np.random.default_rng(seed)
        if labels is not None:
            idx = _stratified_pick(labels, limit, rng)
        else:
            if limit > count:
                raise DataFormatError(f"limit {limit} exceeds {count} available images")
            idx = np.sort(rng.choice(count, size=limit, replace=False))

    values = images[idx].reshape(len(idx), rows * cols).astype(np.float64) / 255.0
    names = tuple(f"px_{r}_{c}" for r in range(rows) for c in range(cols))
    return Dataset(
        values,
        names,
        None if labels is None else labels[idx],
        meta={"source": str(images_path), "shape": (rows, cols), "rows": idx.tolist()},
    )


def standardize(ds):
    """Z-score every column with the population (1/N) standard deviation.

    Columns whose deviation is below 1e-12 become all-zero.
    """
    x = ds.values
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    constant = std < CONSTANT_STD
    z = (x - mean) / np.where(constant, 1.0, std)
    z[:, constant] = 0.0
    return replace(ds, values=z, standardized=True)


def make_planted_dataset(n, informative_dims, noise_dims, separation, noise_scale, seed=0):
    """Two equal Gaussian clusters separated along the first ``informative_dims`` columns.

    Cluster 1 (the second half of the rows) is shifted by ``separation``
    along every informative column; every column carries N(0, noise_scale^2)
    noise. Labels are 0/1 cluster membership.
    """
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")
    if informative_dims < 1 or noise_dims < 1:
        raise ValueError("informative_dims and noise_dims must be >= 1")
    if not separation > 0:
        raise ValueError(f"separation must be positive, got {separation}")
    if not noise_scale >= 0:
        raise ValueError(f"noise_scale must be non-negative, got {noise_scale}")

    rng = np.random.default_rng(seed)
    d = informative_dims + noise_dims
    labels = np.repeat([0, 1], n // 2)
    values = rng.normal(0.0, noise_scale, size=(n, d))
    values[labels == 1, :informative_dims] += separation
    names = tuple(f"info{i}" for i in range(informative_dims)) + tuple(
        f"noise{i}" for i in range(noise_dims)
    )
    return Dataset(values, names, labels, meta={"generator": "planted", "seed": seed})


def save_csv(ds, path, label_column="label"):
    """Write a dataset as CSV with a header; labels go in a trailing column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(ds.feature_names)
        if ds.labels is not None:
            header.append(label_column)
        writer.writerow(header)
        for i, row in enumerate(ds.values):
            out = [repr(float(v)) for v in row]
            if ds.labels is not None:
                out.append(str(ds.labels[i]))
            writer.writerow(out)
