"""Unsupervised dimension selection with blue-noise graph signals.

Each dimension is masked in turn, the kNN sample graph is rebuilt, and the
dimension is scored by how much low-frequency energy a blue-noise signal of
the original graph picks up in the masked graph's Fourier basis.
"""

from .dataio import Dataset, load_csv, load_idx_images, make_planted_dataset, standardize
from .errors import BluerankError
from .evaluation import f1_curve, knn_classify_cv, neighbor_recovery, recovery_curve
from .graph import GraphParams, build_knn_graph, normalized_laplacian
from .selection import (
    ImportanceRanking,
    ScoringParams,
    pcoa_rank,
    random_rank,
    rank_dimensions,
    score_dimension,
    variance_rank,
)
from .spectral import eigendecompose, gft, low_band_energy, synthesize_blue_noise

__version__ = "0.1.0"

__all__ = [
    "BluerankError",
    "Dataset",
    "GraphParams",
    "ImportanceRanking",
    "ScoringParams",
    "build_knn_graph",
    "eigendecompose",
    "f1_curve",
    "gft",
    "knn_classify_cv",
    "load_csv",
    "load_idx_images",
    "low_band_energy",
    "make_planted_dataset",
    "neighbor_recovery",
    "normalized_laplacian",
    "pcoa_rank",
    "random_rank",
    "rank_dimensions",
    "recovery_curve",
    "score_dimension",
    "standardize",
    "synthesize_blue_noise",
    "variance_rank",
]
