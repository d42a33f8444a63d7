"""Graph Fourier basis, transforms, and blue-noise graph signals."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SpectralError

SYMMETRY_TOL = 1e-10
SIGN_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenpairs of a normalized Laplacian, eigenvalues ascending.

    Column ``k`` of ``eigenvectors`` belongs to ``eigenvalues[k]``. Each
    column is signed so that its largest-magnitude entry is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class BlueNoiseSignal:
    """Step spectrum (zero on the lowest ``k0`` frequencies, one above) and its node-domain signal."""

    k0: int
    spectrum: np.ndarray
    signal: np.ndarray


def fix_signs(vectors):
    """Flip columns so the entry of largest absolute value is positive.

    Entries within a relative 1e-9 of the column maximum count as tied, and
    the lowest-index one decides; exact comparison would let rounding pick
    the sign of vectors such as ``(x, -x, 0, ...)``.
    """
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    mags = np.abs(vectors)
    near_max = mags >= mags.max(axis=0) * (1.0 - SIGN_TIE_RTOL)
    pivot = np.argmax(near_max, axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors *= signs
    return vectors


def eigendecompose(lap):
    """Full eigendecomposition of a symmetric Laplacian.

    Parameters
    ----------
    lap : ndarray of shape (N, N)
        Symmetric within 1e-10 (max abs entry of ``lap - lap.T``).

    Returns
    -------
    SpectralBasis
        All N eigenpairs, eigenvalues ascending, deterministic signs.

    Raises
    ------
    SpectralError
        If the input is not square and symmetric, or the solver fails.
    """
    lap = np.asarray(lap, dtype=np.float64)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise SpectralError(f"expected a square matrix, got shape {lap.shape}")
    asym = float(np.max(np.abs(lap - lap.T))) if lap.size else 0.0
    if asym > SYMMETRY_TOL:
        raise SpectralError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    try:
        vals, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    # eigh already returns ascending order; a stable sort keeps degenerate blocks as emitted
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = fix_signs(vecs[:, order])
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralBasis(vals, vecs)


def gft(basis, signal):
    """Graph Fourier transform: expansion coefficients ``U^T s``."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[0] != basis.n:
        raise SpectralError(f"signal length {signal.shape[0]} != basis size {basis.n}")
    return basis.eigenvectors.T @ signal


def igft(basis, spectrum):
    """Inverse transform ``U s_hat``."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape[0] != basis.n:
        raise SpectralError(f"spectrum length {spectrum.shape[0]} != basis size {basis.n}")
    return basis.eigenvectors @ spectrum


def blue_noise_spectrum(n, k0):
    if not 1 <= k0 < n:
        raise SpectralError(f"k0 must satisfy 1 <= k0 < N={n}, got {k0}")
    spectrum = np.ones(n)
    spectrum[:k0] = 0.0
    return spectrum


def synthesize_blue_noise(basis, k0):
    """Blue-noise signal on the graph: unit energy on every frequency above the lowest ``k0``.

    The zero region covers eigenvector indices ``0 .. k0-1`` and so
    includes the constant (trivial) eigenvector.
    """
    spectrum = blue_noise_spectrum(basis.n, k0)
    # sum of the high-band columns; identical to U @ spectrum
    signal = igft(basis, spectrum)
    spectrum.setflags(write=False)
    signal.setflags(write=False)
    return BlueNoiseSignal(k0=k0, spectrum=spectrum, signal=signal)


def low_band_energy(spectrum, k0):
    """Sum of squares of the first ``k0`` spectral coefficients."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if not 1 <= k0 <= spectrum.shape[0]:
        raise SpectralError(f"k0 must satisfy 1 <= k0 <= {spectrum.shape[0]}, got {k0}")
    low = spectrum[:k0]
    return float(low @ low)


def dump_spectrum(path, basis, coefficients):
    """Write ``index,eigenvalue,coefficient`` rows (1-based index) for plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue", "coefficient"])
        for k, (lam, c) in enumerate(zip(basis.eigenvalues, coefficients), start=1):
            writer.writerow([k, repr(float(lam)), repr(float(c))])
