"""Exit criteria. Each test prints one PASS/FAIL line and then asserts.

Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

import io
import time

import numpy as np
import pytest

from ecpagerank import (
    EdgeSet,
    PageRankConfig,
    RmatParams,
    build_csr,
    build_layout,
    generate_rmat,
    l1_norm,
    load_cache,
    pagerank_dense_oracle,
    pagerank_ec_par,
    pagerank_ec_seq,
    pagerank_fused_par,
    pagerank_fused_seq,
    parse_edge_list,
    render_edge_list,
    run_engine,
    save_cache,
)
from ecpagerank.cli import main
from ecpagerank.engines import ENGINES, warmup
from ecpagerank.metrics import CSV_COLUMNS

from conftest import large_corpus, random_graph, small_corpus

DAMPING = 0.85


@pytest.fixture(scope="module", autouse=True)
def _compiled():
    warmup()
    warmup("numpy")


@pytest.fixture(scope="module")
def corpus():
    return small_corpus(200, seed=2024)


@pytest.fixture(scope="module")
def big():
    return large_corpus(20, n=1000, seed=77)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def linf(a, b):
    return float(np.max(np.abs(a.values - b.values)))


def test_c1_oracle_equivalence(corpus, verdict):
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-13)
    t0 = time.perf_counter()
    worst, converged = 0.0, True
    for _, _, g in corpus:
        r, t = pagerank_ec_seq(g, cfg)
        converged &= t.converged
        worst = max(worst, linf(r, pagerank_dense_oracle(g, cfg)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and converged and elapsed < 10
    verdict(1, "ec_seq vs dense oracle", ok,
            f"max Linf={worst:.2e} (<=1e-9) over {len(corpus)} graphs, {elapsed:.2f}s (<10s)")


def test_c2_fixed_point_equivalence(corpus, big, verdict):
    t0 = time.perf_counter()
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-13)
    worst_small = max(linf(pagerank_fused_seq(g, None, cfg)[0], pagerank_ec_seq(g, cfg)[0])
                      for _, _, g in corpus)
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-12, thread_count=8)
    worst_big = 0.0
    for g in big:
        lay = build_layout(g)
        ref, _ = pagerank_ec_seq(g, cfg, lay)
        par, _ = pagerank_fused_par(g, lay, cfg)
        worst_big = max(worst_big, l1_norm(par, ref))
    elapsed = time.perf_counter() - t0
    ok = worst_small <= 1e-9 and worst_big <= 1e-6 and elapsed < 60
    verdict(2, "fused results equal Jacobi results", ok,
            f"corpus Linf(fused_seq, ec_seq)={worst_small:.2e} (<=1e-9); "
            f"n=1000 L1(fused_par@8, ec_seq)={worst_big:.2e} (<=1e-6); {elapsed:.2f}s (<60s)")


def test_c3_gauss_seidel_iteration_dominance(corpus, big, verdict):
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-13)
    worse = []
    for n, density, g in corpus:
        ec = pagerank_ec_seq(g, cfg)[1].iterations
        fu = pagerank_fused_seq(g, None, cfg)[1].iterations
        if fu > ec:
            worse.append((n, density, ec, fu))
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-12)
    strict = sum(pagerank_fused_seq(g, None, cfg)[1].iterations
                 < pagerank_ec_seq(g, cfg)[1].iterations for g in big)
    ok = not worse and strict >= len(big) / 2
    by_density = {d: sum(1 for w in worse if w[1] == d) for d in (0.1, 0.3, 0.6)}
    example = f"; e.g. n={worse[0][0]} density={worse[0][1]}: ec={worse[0][2]} fused={worse[0][3]}" if worse else ""
    verdict(3, "fused_seq iterations <= ec_seq iterations", ok,
            f"corpus graphs with more fused iterations: {len(worse)}/{len(corpus)} "
            f"(by density {by_density}){example}; n=1000 strictly fewer: {strict}/{len(big)} (>=50%)")


def test_c4_threshold_l1_tradeoff(verdict):
    g = build_csr(generate_rmat(RmatParams(scale=12, edge_factor=16, seed=7)))
    lay = build_layout(g)
    l1 = []
    for thr in (1e-6, 1e-8, 1e-10, 1e-12):
        cfg = PageRankConfig(damping=DAMPING, threshold=thr)
        l1.append(l1_norm(pagerank_fused_seq(g, lay, cfg)[0], pagerank_ec_seq(g, cfg, lay)[0]))
    ok = all(b <= a for a, b in zip(l1, l1[1:])) and l1[-1] <= 1e-8
    verdict(4, "L1(fused_seq, ec_seq) shrinks with threshold on RMAT-12", ok,
            "L1 at 1e-6/1e-8/1e-10/1e-12 = " + ", ".join(f"{v:.2e}" for v in l1) + " (last <=1e-8)")


def test_c5_conservation_and_bounds(corpus, verdict):
    cfg = PageRankConfig(damping=DAMPING, threshold=1e-13, thread_count=4)
    worst_sum, worst_low, free = 0.0, np.inf, 0
    for _, _, g in corpus:
        for tag in ENGINES:
            r, t = run_engine(tag, g, cfg)
            assert t.converged
            worst_low = min(worst_low, float(r.values.min() - ((1 - DAMPING) / g.n - 1e-12)))
            if g.out_degree.min() >= 1:
                worst_sum = max(worst_sum, abs(r.values.sum() - 1.0))
                free += tag == "ec_seq"
    ok = worst_sum <= 1e-6 and worst_low >= 0 and free > 0
    verdict(5, "rank-sum conservation and lower bound", ok,
            f"max |sum-1|={worst_sum:.2e} (<=1e-6) on {free} dangling-free graphs x 4 engines; "
            f"min slack over (1-d)/n-1e-12 = {worst_low:.2e} (>=0)")


def test_c6_parallel_determinism(corpus, big, verdict):
    mismatches = []
    for backend, graphs in (("numba", [g for _, _, g in corpus] + big), ("numpy", big[:3])):
        for i, g in enumerate(graphs):
            lay = build_layout(g)
            for threads in (2, 4, 8):
                cfg = PageRankConfig(damping=DAMPING, threshold=1e-12, thread_count=threads)
                a, ta = pagerank_ec_seq(g, cfg, lay, backend=backend)
                b, tb = pagerank_ec_par(g, lay, cfg, backend=backend)
                if not (np.array_equal(a.values, b.values) and ta.iterations == tb.iterations):
                    mismatches.append((backend, "ec_par", i, threads))
            cfg = PageRankConfig(damping=DAMPING, threshold=1e-12, thread_count=1)
            a, ta = pagerank_fused_seq(g, lay, cfg, backend=backend)
            b, tb = pagerank_fused_par(g, lay, cfg, backend=backend)
            if not (np.array_equal(a.values, b.values) and np.array_equal(ta.errors, tb.errors)):
                mismatches.append((backend, "fused_par@1", i, 1))
    verdict(6, "ec_par == ec_seq exactly; fused_par@1 == fused_seq exactly", not mismatches,
            f"{len(mismatches)} mismatching runs over {len(corpus) + len(big)} numba and 3 numpy graphs")


def test_c7_layout_correctness(verdict):
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 10**4 + 1))
        g = build_csr(EdgeSet(n, rng.integers(0, n, (int(rng.integers(0, 8 * n + 1)), 2))))
        lay = build_layout(g)
        perm = np.array_equal(np.sort(lay.offset_list), np.arange(g.m))
        writers = np.repeat(np.arange(n), g.out_degree)
        owned = np.array_equal(g.in_src[lay.offset_list], writers)
        bad += not (perm and owned)
    g = build_csr(EdgeSet(4, [(3, 0), (3, 1), (3, 2), (0, 3), (1, 3), (2, 3)]))
    lay = build_layout(g)
    slots = list(range(g.in_start[3], g.in_start[4]))
    hub = slots == [3, 4, 5] and [int(x) for x in g.in_src[slots]] == [0, 1, 2] \
        and [lay.out_slots(u).tolist() for u in (0, 1, 2)] == [[3], [4], [5]]
    verdict(7, "offset_list permutation, single-writer ownership, in-edge slots of vertex 3",
            bad == 0 and hub,
            f"{bad}/100 random graphs (n<=1e4) broke the layout; vertex-3 slots {slots} "
            f"writers {g.in_src[slots].tolist()}")


def test_c8_ingestion_generation(tmp_path, verdict):
    rng = np.random.default_rng(8)
    round_trip = True
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(2, 60)), 0.2)
        rows = g.to_edge_set().edges.tolist()
        label = {}
        for v in (v for r in rows for v in r):
            label.setdefault(v, len(label))
        es = EdgeSet(len(label), [(label[a], label[b]) for a, b in rows])
        buf = io.StringIO()
        render_edge_list(es, buf)
        round_trip &= parse_edge_list(io.StringIO(buf.getvalue())) == es

    p = RmatParams(scale=8, edge_factor=8, seed=99)
    a, b = generate_rmat(p), generate_rmat(p)
    det = a.edges.tobytes() == b.edges.tobytes() and len(a) == 8 * 256
    counts = all(len(generate_rmat(RmatParams(s, ef, seed=s * ef))) == ef << s
                 for s in (1, 3, 7) for ef in (1, 5, 20))

    g = build_csr(generate_rmat(RmatParams(scale=10, edge_factor=16, seed=3)))
    save_cache(g, tmp_path / "g.fprg")
    h = load_cache(tmp_path / "g.fprg")
    bits = h == g and all(getattr(h, k).tobytes() == getattr(g, k).tobytes()
                          for k in ("in_start", "in_src", "out_degree"))
    verdict(8, "edge-list round trip, R-MAT determinism and count, cache round trip",
            round_trip and det and counts and bits,
            f"round_trip={round_trip} rmat_deterministic={det} rmat_counts={counts} cache_bit_exact={bits}")


def test_c9_cli_contract(tmp_path, capsys, verdict):
    src = tmp_path / "three.txt"
    src.write_text("0 2\n1 2\n2 0\n2 1\n")
    out = tmp_path / "bench.csv"
    code = main(["bench", "--graph", str(src), "--engine", "ec_seq,fused_seq",
                 "--threshold", "1e-8,1e-12", "--reps", "1", "--out", str(out)])
    lines = out.read_text().splitlines()
    schema = lines[0] == ",".join(CSV_COLUMNS)
    rows = len(lines) - 1
    missing = main(["run", "--graph", str(tmp_path / "missing.txt")])
    noconv = main(["run", "--graph", str(src), "--threshold", "1e-15", "--max-iters", "2"])
    capsys.readouterr()
    ok = code == 0 and schema and rows == 4 and missing == 2 and noconv == 3
    verdict(9, "bench rows/schema and exit codes", ok,
            f"bench exit={code} rows={rows} (==4) schema_ok={schema}; "
            f"missing file exit={missing} (==2); non-convergence exit={noconv} (==3)")
