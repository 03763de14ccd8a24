"""Time the numba kernels against the pure-numpy fallback on R-MAT graphs.

    python benchmarks/bench_backends.py --scales 10 12 14 --threshold 1e-10

Each cell is the best wall time of ``--reps`` runs of the iteration loop,
after a warm-up run so JIT compilation is excluded. The last column is the
L1 distance between the two backends' ranks: zero for every engine except
fused_par with more than one thread, whose result depends on interleaving.
"""

import argparse

from ecpagerank import PageRankConfig, RmatParams, build_csr, build_layout, generate_rmat, l1_norm, run_engine
from ecpagerank.engines import ENGINES, warmup
from ecpagerank.kernels import BACKENDS


def best_time(tag, g, layout, cfg, backend, reps):
    times, ranks = [], None
    for _ in range(reps):
        ranks, trace = run_engine(tag, g, cfg, layout, backend=backend)
        times.append(trace.wall_time)
    return min(times), trace.iterations, ranks


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", type=int, nargs="+", default=[10, 12])
    ap.add_argument("--edge-factor", type=int, default=16)
    ap.add_argument("--threshold", type=float, default=1e-10)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--engines", nargs="+", default=list(ENGINES), choices=ENGINES)
    args = ap.parse_args(argv)

    for name in BACKENDS:
        warmup(name)
    cfg = PageRankConfig(threshold=args.threshold, thread_count=args.threads)
    print(f"{'graph':<12}{'engine':<11}{'iters':>6}{'numba_s':>11}{'numpy_s':>11}{'ratio':>8}{'l1_diff':>11}")
    for scale in args.scales:
        g = build_csr(generate_rmat(RmatParams(scale, args.edge_factor, seed=scale)))
        layout = build_layout(g)
        for tag in args.engines:
            t_nb, it, r_nb = best_time(tag, g, layout, cfg, "numba", args.reps)
            t_np, _, r_np = best_time(tag, g, layout, cfg, "numpy", args.reps)
            print(f"{f'rmat-{scale}':<12}{tag:<11}{it:>6}{t_nb:>11.4f}{t_np:>11.4f}"
                  f"{t_np / t_nb:>8.1f}{l1_norm(r_nb, r_np):>11.2e}")


if __name__ == "__main__":
    main()
