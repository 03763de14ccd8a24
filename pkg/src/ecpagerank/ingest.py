"""Edge-list text I/O, R-MAT generation and the binary graph cache."""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np

from .graph import INDEX_DTYPE, EdgeSet, Graph, GraphError

GRAPH500_PROBS = (0.57, 0.19, 0.19, 0.05)

CACHE_MAGIC = b"FPRG"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIqq")
_U64_MAX = 2**64 - 1

# edges drawn per batch by generate_rmat; part of the determinism contract
RMAT_BATCH = 1 << 20


class IngestError(ValueError):
    """Malformed edge-list text or cache file."""


# ---------------------------------------------------------------------------
# edge lists
# ---------------------------------------------------------------------------

def _lines(stream) -> Iterable[str]:
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def parse_edge_list(stream: Union[IO[str], IO[bytes], Iterable[str]]) -> EdgeSet:
    """Parse SNAP-style ``src dst`` lines.

    Blank lines and lines starting with ``#`` or ``%`` are skipped. Vertex
    ids are compacted to ``0 .. n-1`` in order of first appearance. The
    result is not normalized (duplicates and self-loops are kept).
    """
    raw = []
    for lineno, line in enumerate(_lines(stream), start=1):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        parts = s.split()
        if len(parts) != 2:
            raise IngestError(f"line {lineno}: expected 'src dst', got {s!r}")
        for tok in parts:
            if not tok.isdigit():
                raise IngestError(f"line {lineno}: {tok!r} is not a non-negative integer")
            v = int(tok)
            if v > _U64_MAX:
                raise IngestError(f"line {lineno}: {tok} does not fit in 64 bits")
            raw.append(v)

    if not raw:
        return EdgeSet(0)
    vals = np.array(raw, dtype=np.uint64)
    uniq, first, inverse = np.unique(vals, return_index=True, return_inverse=True)
    new_id = np.empty(len(uniq), dtype=INDEX_DTYPE)
    new_id[np.argsort(first, kind="stable")] = np.arange(len(uniq), dtype=INDEX_DTYPE)
    return EdgeSet(len(uniq), new_id[inverse.ravel()].reshape(-1, 2))


def read_edge_list(path) -> EdgeSet:
    with open(path, "rb") as f:
        return parse_edge_list(f)


def render_edge_list(edges: EdgeSet, stream: IO[str], header: Iterable[str] = ()):
    """Write ``edges`` as text that :func:`parse_edge_list` reads back."""
    for line in header:
        stream.write(f"# {line}\n")
    buf = io.StringIO()
    np.savetxt(buf, edges.edges, fmt="%d", delimiter=" ")
    stream.write(buf.getvalue())


def write_edge_list(edges: EdgeSet, path, header: Iterable[str] = ()):
    with open(path, "w", newline="\n") as f:
        render_edge_list(edges, f, header)


# ---------------------------------------------------------------------------
# R-MAT
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RmatParams:
    scale: int
    edge_factor: int = 16
    probs: tuple = GRAPH500_PROBS
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.scale <= 32):
            raise ValueError(f"scale must be in [1, 32], got {self.scale}")
        if self.edge_factor < 1:
            raise ValueError(f"edge_factor must be positive, got {self.edge_factor}")
        if len(self.probs) != 4 or min(self.probs) < 0:
            raise ValueError(f"probs must be four non-negative reals, got {self.probs}")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probs must sum to 1, got {sum(self.probs)!r}")
        if not (0 <= self.seed <= _U64_MAX):
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def n(self) -> int:
        return 1 << self.scale

    @property
    def num_edges(self) -> int:
        return self.edge_factor * self.n

    def describe(self) -> list[str]:
        a, b, c, d = self.probs
        return [
            "R-MAT graph",
            f"scale={self.scale} edge_factor={self.edge_factor}",
            f"probs={a!r},{b!r},{c!r},{d!r}",
            f"seed={self.seed} rng=PCG64(SeedSequence(seed))",
        ]


def generate_rmat(p: RmatParams) -> EdgeSet:
    """Draw ``edge_factor * 2**scale`` edges by recursive quadrant choice.

    At each of ``scale`` levels one uniform draw picks the quadrant
    (a: top-left, b: top-right, c: bottom-left, d: bottom-right), appending
    one bit to the source (row) and destination (column) ids, most
    significant bit first. No per-level noise is applied. The random stream
    is numpy's PCG64 seeded through ``SeedSequence(seed)``, consumed in
    batches of :data:`RMAT_BATCH` edges.
    """
    a, b, c, _ = p.probs
    cuts = np.array([a, a + b, a + b + c])
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(p.seed)))
    total = p.num_edges
    out = np.empty((total, 2), dtype=INDEX_DTYPE)
    for lo in range(0, total, RMAT_BATCH):
        k = min(RMAT_BATCH, total - lo)
        src = np.zeros(k, dtype=INDEX_DTYPE)
        dst = np.zeros(k, dtype=INDEX_DTYPE)
        for _ in range(p.scale):
            quad = np.searchsorted(cuts, rng.random(k), side="right")
            src = (src << 1) | (quad >> 1)
            dst = (dst << 1) | (quad & 1)
        out[lo:lo + k, 0] = src
        out[lo:lo + k, 1] = dst
    return EdgeSet(p.n, out)


def parse_rmat_spec(text: str, probs=GRAPH500_PROBS) -> RmatParams:
    """Parse ``SCALE:EDGEFACTOR:SEED``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected SCALE:EDGEFACTOR:SEED, got {text!r}")
    scale, ef, seed = (int(x) for x in parts)
    return RmatParams(scale=scale, edge_factor=ef, probs=tuple(probs), seed=seed)


# ---------------------------------------------------------------------------
# binary cache
# ---------------------------------------------------------------------------

def save_cache(g: Graph, path):
    """Write ``g`` as: magic, u32 version, i64 n, i64 m, then in_start,
    in_src and out_degree as little-endian i64."""
    with open(path, "wb") as f:
        f.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, g.n, g.m))
        for arr in (g.in_start, g.in_src, g.out_degree):
            f.write(np.ascontiguousarray(arr, dtype="<i8").tobytes())


def load_cache(path) -> Graph:
    size = os.path.getsize(path)
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise IngestError(f"{path}: truncated cache header")
        magic, version, n, m = _HEADER.unpack(head)
        if magic != CACHE_MAGIC:
            raise IngestError(f"{path}: bad magic {magic!r}")
        if version != CACHE_VERSION:
            raise IngestError(f"{path}: unsupported cache version {version}")
        if n < 0 or m < 0:
            raise IngestError(f"{path}: negative n or m")
        expected = _HEADER.size + 8 * ((n + 1) + m + n)
        if size < expected:
            raise IngestError(f"{path}: truncated cache ({size} of {expected} bytes)")
        if size > expected:
            raise IngestError(f"{path}: {size - expected} trailing bytes after graph")
        in_start = np.fromfile(f, dtype="<i8", count=n + 1)
        in_src = np.fromfile(f, dtype="<i8", count=m)
        out_degree = np.fromfile(f, dtype="<i8", count=n)
    g = Graph(n=int(n), m=int(m), in_start=in_start, in_src=in_src, out_degree=out_degree)
    try:
        g.check()
    except GraphError as e:
        raise IngestError(f"{path}: corrupt cache: {e}") from e
    return g
