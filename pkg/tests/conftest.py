import numpy as np
import pytest

from ecpagerank import EdgeSet, build_csr
from ecpagerank.kernels import BACKENDS


def random_graph(rng, n, density):
    """Each ordered pair (i, j), i != j, is an edge with probability ``density``."""
    adj = rng.random((n, n)) < density
    np.fill_diagonal(adj, False)
    src, dst = np.nonzero(adj)
    return build_csr(EdgeSet(n, np.column_stack([src, dst])))


def sparse_graph_with_dangling(rng, n, avg_degree=5, dangling=None):
    """``avg_degree * n`` uniform edge draws; the last ``dangling`` vertices get no out-edges."""
    dangling = max(1, n // 10) if dangling is None else dangling
    e = rng.integers(0, n, (avg_degree * n, 2))
    e = e[e[:, 0] < n - dangling]
    return build_csr(EdgeSet(n, e))


def small_corpus(count=200, seed=2024, n_max=16):
    """Random graphs with n in [1, n_max], densities cycling through 0.1/0.3/0.6."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, n_max + 1))
        density = (0.1, 0.3, 0.6)[i % 3]
        out.append((n, density, random_graph(rng, n, density)))
    return out


def large_corpus(count=20, n=1000, seed=77):
    rng = np.random.default_rng(seed)
    return [sparse_graph_with_dangling(rng, n, avg_degree=5, dangling=0) for _ in range(count)]


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def two_cycle():
    return build_csr(EdgeSet(2, [(0, 1), (1, 0)]))


@pytest.fixture
def three_vertex():
    return build_csr(EdgeSet(3, [(0, 2), (1, 2), (2, 0), (2, 1)]))
