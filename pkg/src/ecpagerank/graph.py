"""Immutable directed graph in compressed in-adjacency form, plus the
edge-centric contribution/offset layout built on top of it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INDEX_DTYPE = np.int64


class GraphError(ValueError):
    """Raised for edge sets that cannot be turned into a graph."""


@dataclass(eq=False)
class EdgeSet:
    """Raw directed edges over vertex ids ``0 .. n-1``.

    ``edges`` is an ``(m, 2)`` integer array of ``(src, dst)`` rows. It may
    contain duplicates and self-loops; :func:`build_csr` removes them.
    """

    n: int
    edges: np.ndarray = field(default_factory=lambda: np.empty((0, 2), INDEX_DTYPE))

    def __post_init__(self):
        self.n = int(self.n)
        if self.n < 0:
            raise GraphError(f"vertex count must be non-negative, got {self.n}")
        e = np.asarray(self.edges, dtype=INDEX_DTYPE)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise GraphError(f"edges must have shape (m, 2), got {e.shape}")
        self.edges = e

    @property
    def src(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def dst(self) -> np.ndarray:
        return self.edges[:, 1]

    def __len__(self):
        return len(self.edges)

    def __eq__(self, other):
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=INDEX_DTYPE)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed graph stored by in-edges.

    The in-neighbours of ``u`` are ``in_src[in_start[u]:in_start[u + 1]]``,
    sorted ascending. Arrays are read-only.
    """

    n: int
    m: int
    in_start: np.ndarray
    in_src: np.ndarray
    out_degree: np.ndarray

    def __post_init__(self):
        for name in ("in_start", "in_src", "out_degree"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def in_neighbors(self, u: int) -> np.ndarray:
        return self.in_src[self.in_start[u]:self.in_start[u + 1]]

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_start)

    def slot_owner(self) -> np.ndarray:
        """Destination vertex of every in-edge slot."""
        return np.repeat(np.arange(self.n, dtype=INDEX_DTYPE), self.in_degree())

    def to_edge_set(self) -> EdgeSet:
        """Normalized edges ordered by (dst, src)."""
        return EdgeSet(self.n, np.column_stack([self.in_src, self.slot_owner()]))

    def check(self):
        """Assert the structural invariants; used by tests and cache loading."""
        n, m = self.n, self.m
        if self.in_start.shape != (n + 1,) or self.in_src.shape != (m,):
            raise GraphError("array shapes do not match n and m")
        if self.out_degree.shape != (n,):
            raise GraphError("out_degree must have n entries")
        if self.in_start[0] != 0 or self.in_start[-1] != m:
            raise GraphError("in_start must run from 0 to m")
        if np.any(np.diff(self.in_start) < 0):
            raise GraphError("in_start must be non-decreasing")
        if m and (self.in_src.min() < 0 or self.in_src.max() >= n):
            raise GraphError("in_src holds an out-of-range vertex id")
        if not np.array_equal(np.bincount(self.in_src, minlength=n), self.out_degree):
            raise GraphError("out_degree disagrees with in_src")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.in_start, other.in_start)
            and np.array_equal(self.in_src, other.in_src)
            and np.array_equal(self.out_degree, other.out_degree)
        )

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(eq=False)
class EdgeCentricLayout:
    """Per-edge contribution slots and the out-edge to slot mapping.

    ``contribution_list[s]`` is written only by ``in_src[s]``. The slots a
    vertex ``u`` writes are ``offset_list[out_start[u]:out_start[u + 1]]``,
    in ascending destination order. Only ``contribution_list`` is mutable.
    """

    contribution_list: np.ndarray
    offset_list: np.ndarray
    out_start: np.ndarray

    def __post_init__(self):
        self.offset_list = _frozen(self.offset_list)
        self.out_start = _frozen(self.out_start)
        self.contribution_list = np.ascontiguousarray(self.contribution_list, dtype=np.float64)

    def out_slots(self, u: int) -> np.ndarray:
        return self.offset_list[self.out_start[u]:self.out_start[u + 1]]

    def reset(self):
        self.contribution_list[:] = 0.0


def build_csr(raw: EdgeSet) -> Graph:
    """Normalize an edge set into a :class:`Graph`.

    Self-loops and duplicate edges are dropped. Raises :class:`GraphError`
    naming the first edge with an endpoint outside ``[0, n)``.
    """
    n = raw.n
    src, dst = raw.src, raw.dst
    bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise GraphError(
            f"edge {i} ({int(src[i])}, {int(dst[i])}) has a vertex id outside [0, {n})"
        )

    keep = src != dst
    src, dst = src[keep], dst[keep]
    order = np.lexsort((src, dst))
    src, dst = src[order], dst[order]
    if len(src) > 1:
        fresh = np.ones(len(src), dtype=bool)
        fresh[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[fresh], dst[fresh]

    in_start = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(dst, minlength=n), out=in_start[1:])
    out_degree = np.bincount(src, minlength=n).astype(INDEX_DTYPE)
    return Graph(n=n, m=len(src), in_start=in_start, in_src=src, out_degree=out_degree)


def build_layout(g: Graph) -> EdgeCentricLayout:
    """Build the zeroed contribution list and the source-grouped offset list."""
    # in-slots are ordered by destination, so a stable sort by source keeps
    # each source's slots in ascending destination order
    offset_list = np.argsort(g.in_src, kind="stable").astype(INDEX_DTYPE)
    out_start = np.zeros(g.n + 1, dtype=INDEX_DTYPE)
    np.cumsum(g.out_degree, out=out_start[1:])
    return EdgeCentricLayout(
        contribution_list=np.zeros(g.m, dtype=np.float64),
        offset_list=offset_list,
        out_start=out_start,
    )
