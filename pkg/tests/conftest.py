import gzip
import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bluerank.dataio import write_idx  # noqa: E402

MNIST_ENV = "BLUERANK_MNIST_DIR"

_ACCEPTANCE_LINES = []


def _find(directory, stem):
    for name in (stem, stem + ".gz"):
        path = Path(directory) / name
        if path.is_file():
            return path
    return None


@pytest.fixture(scope="session")
def mnist_pool(tmp_path_factory):
    """Paths ``(images, labels)`` of an IDX image pool with MNIST digits.

    Uses ``$BLUERANK_MNIST_DIR/train-{images-idx3,labels-idx1}-ubyte`` when
    present, otherwise writes the 5000-digit MNIST sample bundled with
    mlxtend (500 per class) out as IDX files.
    """
    directory = os.environ.get(MNIST_ENV)
    if directory:
        images = _find(directory, "train-images-idx3-ubyte")
        labels = _find(directory, "train-labels-idx1-ubyte")
        if images and labels:
            return images, labels
    try:
        from mlxtend.data import mnist_data
    except ImportError:
        pytest.skip(f"no MNIST source: set {MNIST_ENV} or install mlxtend")
    x, y = mnist_data()
    out = tmp_path_factory.mktemp("mnist")
    images, labels = out / "pool-images-idx3-ubyte", out / "pool-labels-idx1-ubyte.gz"
    write_idx(images, x.reshape(-1, 28, 28).astype(np.uint8))
    raw = out / "labels.raw"
    write_idx(raw, y.astype(np.uint8))
    with open(raw, "rb") as src, gzip.open(labels, "wb") as dst:
        dst.write(src.read())
    return images, labels


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, shown in the terminal summary."""

    def _report(name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
