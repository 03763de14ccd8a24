"""Edge-centric Jacobi PageRank and its loop-fused Gauss-Seidel variant."""

from .engines import (
    ENGINES,
    ConvergenceTrace,
    PageRankConfig,
    RankVector,
    gather_ranks_jacobi,
    init_ranks,
    pagerank_dense_oracle,
    pagerank_ec_par,
    pagerank_ec_seq,
    pagerank_fused_par,
    pagerank_fused_seq,
    run_engine,
    scatter_contributions,
)
from .graph import EdgeCentricLayout, EdgeSet, Graph, GraphError, build_csr, build_layout
from .ingest import (
    IngestError,
    RmatParams,
    generate_rmat,
    load_cache,
    parse_edge_list,
    read_edge_list,
    render_edge_list,
    save_cache,
    write_edge_list,
)
from .kernels import DEFAULT_BACKEND
from .metrics import RunReport, l1_norm, speedup

__version__ = "0.1.0"
