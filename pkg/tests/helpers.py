from bluerank.dataio import Dataset
from bluerank.graph import GraphParams, build_knn_graph, normalized_laplacian


def random_knn_laplacian(rng, n, dims=3):
    """Laplacian of a kNN graph on ``n`` Gaussian points with random k and weighting."""
    x = rng.normal(size=(n, dims))
    k = int(rng.integers(1, min(n - 1, 8) + 1))
    weighting = "binary" if rng.random() < 0.5 else "heat_kernel"
    return normalized_laplacian(build_knn_graph(Dataset(x), GraphParams(k, weighting)))
