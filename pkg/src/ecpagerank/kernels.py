"""Rank-update kernels with two interchangeable backends.

``numba``
    ``@njit`` loops; the parallel drivers use ``prange`` over vertex blocks,
    and each ``prange`` loop ends in an implicit barrier.
``numpy``
    Vectorized scatter/gather via fancy indexing and ``np.bincount``; the
    fused sweep is an interpreted per-vertex loop. Parallel drivers run
    blocks on a thread pool and join between phases.

The backend is chosen once at import time. Set ``ECPAGERANK_NO_NUMBA=1``
(or run without numba installed) to get the numpy path. Both backends
expose the same functions; :func:`get_backend` returns either by name.

Every driver works on a vertex partition ``bounds`` (``bounds[b]`` to
``bounds[b + 1]`` is block ``b``). Sequential runs use the single block
``[0, n]``; the parallel drivers call the same block routines, which is
why parallel Jacobi reproduces the sequential values exactly.
"""

from __future__ import annotations

import os
import types
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_FLAG = "ECPAGERANK_NO_NUMBA"

# numba probes TBB first and warns when only an old version is present
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

try:
    import numba
    from numba import njit, prange
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None


def block_bounds(n: int, blocks: int) -> np.ndarray:
    """Contiguous blocks of ``ceil(n / blocks)`` vertices; trailing blocks may be empty."""
    blocks = max(1, int(blocks))
    chunk = -(-n // blocks) if n else 0
    return np.minimum(np.arange(blocks + 1, dtype=np.int64) * chunk, n)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _np_scatter(lo, hi, ranks, out_degree, out_start, offset_list, contrib):
    deg = out_degree[lo:hi]
    share = np.divide(ranks[lo:hi], deg, out=np.zeros(hi - lo), where=deg > 0)
    contrib[offset_list[out_start[lo]:out_start[hi]]] = np.repeat(share, deg)


def _np_gather(lo, hi, ranks, in_start, slot_owner, contrib, base, damping):
    s0, s1 = in_start[lo], in_start[hi]
    sums = np.bincount(slot_owner[s0:s1] - lo, weights=contrib[s0:s1], minlength=hi - lo)
    new = base + damping * sums
    err = float(np.max(np.abs(new - ranks[lo:hi]))) if hi > lo else 0.0
    ranks[lo:hi] = new
    return err


def _np_fused(lo, hi, ranks, in_start, out_degree, out_start, offset_list, contrib, base, damping):
    err = 0.0
    for u in range(lo, hi):
        a, b = in_start[u], in_start[u + 1]
        # cumsum adds left to right like the compiled loop; ndarray.sum is pairwise
        new = base + damping * (contrib[a:b].cumsum()[-1] if b > a else 0.0)
        delta = abs(new - ranks[u])
        if delta > err:
            err = delta
        ranks[u] = new
        deg = out_degree[u]
        if deg:
            contrib[offset_list[out_start[u]:out_start[u + 1]]] = new / deg
    return err


def _np_slot_owner(in_start):
    n = len(in_start) - 1
    return np.repeat(np.arange(n, dtype=np.int64), np.diff(in_start))


def _np_scatter_all(bounds, ranks, out_degree, out_start, offset_list, contrib):
    _np_scatter(bounds[0], bounds[-1], ranks, out_degree, out_start, offset_list, contrib)


def _np_gather_all(bounds, ranks, in_start, contrib, base, damping):
    return _np_gather(bounds[0], bounds[-1], ranks, in_start, _np_slot_owner(in_start),
                      contrib, base, damping)


def _np_ec_loop(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                base, damping, threshold, max_iter, errors, parallel):
    owner = _np_slot_owner(in_start)
    blocks = [(int(bounds[b]), int(bounds[b + 1])) for b in range(len(bounds) - 1)]
    pool = ThreadPoolExecutor(len(blocks)) if parallel else None

    def run(fn):
        return list(pool.map(fn, blocks)) if pool else [fn(b) for b in blocks]

    it, err = 0, 1.0
    try:
        while err > threshold and it < max_iter:
            run(lambda b: _np_scatter(b[0], b[1], ranks, out_degree, out_start, offset_list, contrib))
            err = max(run(lambda b: _np_gather(b[0], b[1], ranks, in_start, owner, contrib,
                                               base, damping)))
            errors[it] = err
            it += 1
    finally:
        if pool:
            pool.shutdown()
    return it


def _np_fused_loop(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                   base, damping, threshold, max_iter, errors, parallel):
    blocks = [(int(bounds[b]), int(bounds[b + 1])) for b in range(len(bounds) - 1)]
    pool = ThreadPoolExecutor(len(blocks)) if parallel else None

    def sweep(b):
        return _np_fused(b[0], b[1], ranks, in_start, out_degree, out_start, offset_list,
                         contrib, base, damping)

    it, err = 0, 1.0
    try:
        while err > threshold and it < max_iter:
            err = max(pool.map(sweep, blocks)) if pool else max(map(sweep, blocks))
            errors[it] = err
            it += 1
    finally:
        if pool:
            pool.shutdown()
    return it


numpy_backend = types.SimpleNamespace(
    name="numpy",
    scatter=_np_scatter_all,
    gather=_np_gather_all,
    ec_loop=_np_ec_loop,
    fused_loop=_np_fused_loop,
    set_threads=lambda k: None,
)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_scatter(lo, hi, ranks, out_degree, out_start, offset_list, contrib):
        for u in range(lo, hi):
            deg = out_degree[u]
            if deg == 0:
                continue
            c = ranks[u] / deg
            for k in range(out_start[u], out_start[u + 1]):
                contrib[offset_list[k]] = c

    @njit(cache=True, nogil=True)
    def _nb_gather(lo, hi, ranks, in_start, contrib, base, damping):
        err = 0.0
        for u in range(lo, hi):
            s = 0.0
            for k in range(in_start[u], in_start[u + 1]):
                s += contrib[k]
            new = base + damping * s
            delta = abs(new - ranks[u])
            if delta > err:
                err = delta
            ranks[u] = new
        return err

    @njit(cache=True, nogil=True)
    def _nb_fused(lo, hi, ranks, in_start, out_degree, out_start, offset_list, contrib,
                  base, damping):
        # slots of sources already visited this sweep hold fresh values,
        # the rest still hold the previous sweep's values
        err = 0.0
        for u in range(lo, hi):
            s = 0.0
            for k in range(in_start[u], in_start[u + 1]):
                s += contrib[k]
            new = base + damping * s
            delta = abs(new - ranks[u])
            if delta > err:
                err = delta
            ranks[u] = new
            deg = out_degree[u]
            if deg > 0:
                c = new / deg
                for k in range(out_start[u], out_start[u + 1]):
                    contrib[offset_list[k]] = c
        return err

    @njit(cache=True)
    def _nb_ec_seq(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                   base, damping, threshold, max_iter, errors):
        n = bounds[-1]
        it = 0
        err = 1.0
        while err > threshold and it < max_iter:
            _nb_scatter(0, n, ranks, out_degree, out_start, offset_list, contrib)
            err = _nb_gather(0, n, ranks, in_start, contrib, base, damping)
            errors[it] = err
            it += 1
        return it

    @njit(cache=True, parallel=True)
    def _nb_ec_par(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                   base, damping, threshold, max_iter, errors):
        nb = len(bounds) - 1
        block_err = np.zeros(nb)
        it = 0
        err = 1.0
        while err > threshold and it < max_iter:
            for b in prange(nb):
                _nb_scatter(bounds[b], bounds[b + 1], ranks, out_degree, out_start,
                            offset_list, contrib)
            for b in prange(nb):
                block_err[b] = _nb_gather(bounds[b], bounds[b + 1], ranks, in_start,
                                          contrib, base, damping)
            err = block_err.max()
            errors[it] = err
            it += 1
        return it

    @njit(cache=True)
    def _nb_fused_seq(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                      base, damping, threshold, max_iter, errors):
        n = bounds[-1]
        it = 0
        err = 1.0
        while err > threshold and it < max_iter:
            err = _nb_fused(0, n, ranks, in_start, out_degree, out_start, offset_list,
                            contrib, base, damping)
            errors[it] = err
            it += 1
        return it

    @njit(cache=True, parallel=True)
    def _nb_fused_par(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                      base, damping, threshold, max_iter, errors):
        # cross-block reads of contrib race with writes; aligned float64
        # loads/stores are single instructions, so a reader sees either the
        # old or the new value of a slot
        nb = len(bounds) - 1
        block_err = np.zeros(nb)
        it = 0
        err = 1.0
        while err > threshold and it < max_iter:
            for b in prange(nb):
                block_err[b] = _nb_fused(bounds[b], bounds[b + 1], ranks, in_start,
                                         out_degree, out_start, offset_list, contrib,
                                         base, damping)
            err = block_err.max()
            errors[it] = err
            it += 1
        return it

    def _nb_ec_loop(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                    base, damping, threshold, max_iter, errors, parallel):
        fn = _nb_ec_par if parallel else _nb_ec_seq
        return int(fn(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                      base, damping, threshold, max_iter, errors))

    def _nb_fused_loop(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                       base, damping, threshold, max_iter, errors, parallel):
        fn = _nb_fused_par if parallel else _nb_fused_seq
        return int(fn(bounds, in_start, out_degree, out_start, offset_list, contrib, ranks,
                      base, damping, threshold, max_iter, errors))

    def _nb_set_threads(k):
        numba.set_num_threads(max(1, min(int(k), numba.config.NUMBA_NUM_THREADS)))

    numba_backend = types.SimpleNamespace(
        name="numba",
        scatter=lambda bounds, ranks, out_degree, out_start, offset_list, contrib: _nb_scatter(
            bounds[0], bounds[-1], ranks, out_degree, out_start, offset_list, contrib),
        gather=lambda bounds, ranks, in_start, contrib, base, damping: float(_nb_gather(
            bounds[0], bounds[-1], ranks, in_start, contrib, base, damping)),
        ec_loop=_nb_ec_loop,
        fused_loop=_nb_fused_loop,
        set_threads=_nb_set_threads,
    )
else:  # pragma: no cover
    numba_backend = None


BACKENDS = {"numpy": numpy_backend}
if numba_backend is not None:
    BACKENDS["numba"] = numba_backend

DEFAULT_BACKEND = "numpy" if (_flag_set(ENV_FLAG) or not HAVE_NUMBA) else "numba"


def get_backend(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}")
