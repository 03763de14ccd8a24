"""Run reports and the divergence/performance measures between runs."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .engines import ENGINES, RankVector

CSV_COLUMNS = (
    "graph", "engine", "threshold", "threads", "iterations",
    "wall_time_s", "l1_vs_seq_ec", "converged",
)


@dataclass
class RunReport:
    engine: str
    iterations: int
    wall_time: float
    l1_vs_reference: float
    threshold: float
    thread_count: int
    graph: str
    converged: bool = True

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine tag {self.engine!r}")
        if self.l1_vs_reference < 0:
            raise ValueError("l1_vs_reference must be non-negative")

    def as_row(self) -> dict:
        return {
            "graph": self.graph,
            "engine": self.engine,
            "threshold": repr(float(self.threshold)),
            "threads": str(self.thread_count),
            "iterations": str(self.iterations),
            "wall_time_s": repr(float(self.wall_time)),
            "l1_vs_seq_ec": repr(float(self.l1_vs_reference)),
            "converged": "true" if self.converged else "false",
        }

    @classmethod
    def from_row(cls, row: dict) -> "RunReport":
        return cls(
            engine=row["engine"],
            iterations=int(row["iterations"]),
            wall_time=float(row["wall_time_s"]),
            l1_vs_reference=float(row["l1_vs_seq_ec"]),
            threshold=float(row["threshold"]),
            thread_count=int(row["threads"]),
            graph=row["graph"],
            converged=row["converged"].strip().lower() == "true",
        )


def _values(v) -> np.ndarray:
    return v.values if isinstance(v, RankVector) else np.asarray(v, dtype=np.float64)


def l1_norm(a, b) -> float:
    """Manhattan distance between two rank vectors."""
    x, y = _values(a), _values(b)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(np.abs(x - y).sum())


def speedup(baseline: RunReport, candidate: RunReport) -> float:
    if baseline.graph != candidate.graph:
        raise ValueError(f"graph mismatch: {baseline.graph!r} vs {candidate.graph!r}")
    if baseline.threshold != candidate.threshold:
        raise ValueError(f"threshold mismatch: {baseline.threshold} vs {candidate.threshold}")
    return baseline.wall_time / candidate.wall_time


def write_reports_csv(reports, stream):
    w = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.as_row())


def read_reports_csv(stream) -> list[RunReport]:
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [RunReport.from_row(row) for row in reader]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    write_reports_csv(reports, buf)
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2)


def reports_from_json(text: str) -> list[RunReport]:
    return [RunReport(**d) for d in json.loads(text)]
