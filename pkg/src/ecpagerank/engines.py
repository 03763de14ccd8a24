"""PageRank executors over the edge-centric layout.

Four disciplines share one rank update, ``pr(u) = (1 - d)/n + d * sum``
over in-slot contributions:

* ``ec_seq`` / ``ec_par``: Jacobi. A scatter phase writes every vertex's
  ``pr / out_degree`` into its out-slots, then a gather phase sums in-slots.
* ``fused_seq`` / ``fused_par``: the two phases fused into one sweep. A
  vertex scatters its new contribution right after computing its rank, so
  later vertices in the sweep read current-iteration values (Gauss-Seidel).

Dangling vertices scatter nothing; their mass is not redistributed, so the
rank sum is below 1 whenever one exists.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .graph import EdgeCentricLayout, Graph, build_layout

ENGINES = ("ec_seq", "fused_seq", "ec_par", "fused_par")
PARALLEL_ENGINES = ("ec_par", "fused_par")

DENSE_ORACLE_MAX_N = 4096


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    threshold: float = 1e-15
    max_iterations: int = 10000
    thread_count: Optional[int] = None  # None: os.cpu_count()

    def __post_init__(self):
        if not (0.0 < self.damping < 1.0):
            raise ValueError(f"damping must be in (0, 1), got {self.damping}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.thread_count is not None and self.thread_count < 1:
            raise ValueError(f"thread_count must be positive, got {self.thread_count}")

    @property
    def threads(self) -> int:
        return self.thread_count or os.cpu_count() or 1


@dataclass
class RankVector:
    values: np.ndarray
    final_error: float = 1.0

    def __len__(self):
        return len(self.values)

    def top(self, k: int = 10) -> list[tuple[int, float]]:
        """Highest ``k`` ranks, descending; ties by ascending vertex id."""
        order = np.lexsort((np.arange(len(self.values)), -self.values))[:k]
        return [(int(i), float(self.values[i])) for i in order]


@dataclass
class ConvergenceTrace:
    errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0
    converged: bool = False
    wall_time: float = 0.0  # seconds spent in the iteration loop only


def init_ranks(n: int) -> RankVector:
    if n < 1:
        raise ValueError("cannot rank an empty graph (n must be >= 1)")
    return RankVector(np.full(n, 1.0 / n), final_error=1.0)


def _ranks_of(ranks) -> np.ndarray:
    return ranks.values if isinstance(ranks, RankVector) else np.asarray(ranks, dtype=np.float64)


def scatter_contributions(g: Graph, layout: EdgeCentricLayout, ranks, *, backend=None):
    """Write ``ranks[u] / out_degree[u]`` into every slot owned by ``u``."""
    be = kernels.get_backend(backend)
    r = np.ascontiguousarray(_ranks_of(ranks), dtype=np.float64)
    be.scatter(np.array([0, g.n]), r, g.out_degree, layout.out_start, layout.offset_list,
               layout.contribution_list)


def gather_ranks_jacobi(g: Graph, layout: EdgeCentricLayout, ranks, damping: float = 0.85,
                        *, backend=None) -> tuple[np.ndarray, float]:
    """One Jacobi gather from the current contribution list.

    Returns the new rank values (the input is not modified) and the max
    absolute per-vertex change.
    """
    be = kernels.get_backend(backend)
    new = np.array(_ranks_of(ranks), dtype=np.float64)
    err = be.gather(np.array([0, g.n]), new, g.in_start, layout.contribution_list,
                    (1.0 - damping) / g.n, damping)
    return new, err


def _run(kind: str, g: Graph, layout, config, parallel: bool, backend):
    config = config or PageRankConfig()
    be = kernels.get_backend(backend)
    if layout is None:
        layout = build_layout(g)
    ranks = init_ranks(g.n).values
    contrib = layout.contribution_list
    contrib[:] = 0.0
    blocks = config.threads if parallel else 1
    bounds = kernels.block_bounds(g.n, blocks)
    errors = np.empty(config.max_iterations)

    if kind == "fused":
        # the fused sweep reads slots it has not yet rewritten, so they must
        # hold the initial contributions before the first sweep
        be.scatter(np.array([0, g.n]), ranks, g.out_degree, layout.out_start,
                   layout.offset_list, contrib)
        loop = be.fused_loop
    else:
        loop = be.ec_loop

    if parallel:
        be.set_threads(blocks)
    t0 = time.perf_counter()
    it = loop(bounds, g.in_start, g.out_degree, layout.out_start, layout.offset_list, contrib,
              ranks, (1.0 - config.damping) / g.n, config.damping, config.threshold,
              config.max_iterations, errors, parallel)
    elapsed = time.perf_counter() - t0
    errors = errors[:it].copy()
    final = float(errors[-1]) if it else 1.0
    trace = ConvergenceTrace(errors=errors, iterations=it, converged=final <= config.threshold,
                             wall_time=elapsed)
    return RankVector(ranks, final_error=final), trace


def pagerank_ec_seq(g: Graph, config: PageRankConfig | None = None, layout=None, *, backend=None):
    """Sequential edge-centric Jacobi PageRank.

    Returns ``(RankVector, ConvergenceTrace)``. Hitting ``max_iterations``
    is reported through ``trace.converged`` rather than raised.
    """
    return _run("ec", g, layout, config, False, backend)


def pagerank_fused_seq(g: Graph, layout=None, config: PageRankConfig | None = None, *, backend=None):
    """Sequential fused (Gauss-Seidel) PageRank, ascending vertex order."""
    return _run("fused", g, layout, config, False, backend)


def pagerank_ec_par(g: Graph, layout=None, config: PageRankConfig | None = None, *, backend=None):
    """Parallel Jacobi over ``config.threads`` contiguous vertex blocks.

    Every vertex is summed by exactly one block in slot order, with a
    barrier between scatter and gather, so values equal the sequential run.
    """
    return _run("ec", g, layout, config, True, backend)


def pagerank_fused_par(g: Graph, layout=None, config: PageRankConfig | None = None, *, backend=None):
    """Parallel fused PageRank over ``config.threads`` contiguous blocks.

    Blocks sweep concurrently, so a gather may see either the previous or the
    current iteration's value for a slot owned by another block. A barrier
    ends each iteration, where block errors are combined by max. The result
    is not deterministic across runs with more than one thread.
    """
    return _run("fused", g, layout, config, True, backend)


_DISPATCH = {
    "ec_seq": lambda g, layout, config, backend: pagerank_ec_seq(g, config, layout, backend=backend),
    "fused_seq": pagerank_fused_seq,
    "ec_par": pagerank_ec_par,
    "fused_par": pagerank_fused_par,
}


def run_engine(tag: str, g: Graph, config: PageRankConfig | None = None, layout=None, *,
               backend=None):
    if tag not in _DISPATCH:
        raise ValueError(f"unknown engine {tag!r}; choose from {', '.join(ENGINES)}")
    return _DISPATCH[tag](g, layout, config, backend=backend)


def warmup(backend=None):
    """Run every engine once on a tiny graph so JIT compilation stays out of timings."""
    from .graph import EdgeSet, build_csr

    g = build_csr(EdgeSet(3, [(0, 1), (1, 2), (2, 0), (0, 2)]))
    cfg = PageRankConfig(threshold=1e-6, max_iterations=5, thread_count=2)
    for tag in ENGINES:
        run_engine(tag, g, cfg, backend=backend)


def pagerank_dense_oracle(g: Graph, config: PageRankConfig | None = None) -> RankVector:
    """Jacobi power iteration on an explicit dense transition matrix.

    Independent of the layout and kernels; meant as ground truth for small
    graphs only.
    """
    config = config or PageRankConfig()
    n = g.n
    if n > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {n}")
    if n < 1:
        raise ValueError("cannot rank an empty graph")
    a = np.zeros((n, n))
    src = g.in_src
    dst = np.repeat(np.arange(n), np.diff(g.in_start))
    a[dst, src] = 1.0 / g.out_degree[src]
    d = config.damping
    x = np.full(n, 1.0 / n)
    err = 1.0
    it = 0
    while err > config.threshold and it < config.max_iterations:
        nxt = (1.0 - d) / n + d * (a @ x)
        err = float(np.max(np.abs(nxt - x)))
        x = nxt
        it += 1
    return RankVector(x, final_error=err)
