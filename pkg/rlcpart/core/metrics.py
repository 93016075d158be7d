"""
Partition quality, comparison and report models for rlcpart
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .errors import PartitionFileError
from .graph_io import PathLike, open_metis_stream, read_partition
from .partitioner import BackendConfig, BackendKind, PartitionParams, PartitionResult

COMPARED_METRICS = (
    "edge_cut",
    "rel_cut",
    "run_count",
    "index_bytes",
    "peak_tracked_bytes",
    "elapsed_seconds",
)


class PartitionReport(BaseModel):
    """Serialized outcome of one partition run"""
    graph: str
    n: int
    m: int
    k: int
    epsilon: float
    gamma: float
    kappa: float
    backend: str
    beta: Optional[int] = None
    delta: int
    edge_cut: int
    rel_cut: float = Field(..., ge=0.0, le=1.0)
    run_count: int
    index_bytes: int
    peak_tracked_bytes: int
    elapsed_seconds: float
    block_weights: List[int]
    rss_bytes: Optional[int] = None
    imbalance: Optional[float] = None

    @classmethod
    def load(cls, path: PathLike) -> "PartitionReport":
        return cls.model_validate_json(Path(path).read_text())

    def save(self, path: PathLike) -> None:
        """Write the reproducible fields; rss_bytes stays on the console"""
        text = self.model_dump_json(indent=2, exclude_none=True, exclude={"rss_bytes"})
        Path(path).write_text(text + "\n")


@dataclass(frozen=True)
class PartitionEvaluation:
    """Offline quality of a partition file against its graph"""
    n: int
    m: int
    k: int
    edge_cut: int
    rel_cut: float
    block_weights: Tuple[int, ...]
    imbalance: float
    l_max: int
    balanced: bool


@dataclass(frozen=True)
class MetricComparison:
    name: str
    a: float
    b: float
    relative: float
    improvement_pct: float


def _cut_from_stream(graph: PathLike, blocks: Sequence[int]) -> Tuple[int, int, int]:
    cut = 0
    with open_metis_stream(graph) as stream:
        n, m = stream.header.n, stream.header.m
        if len(blocks) != n:
            raise PartitionFileError(f"partition has {len(blocks)} entries, graph has {n} nodes")
        for rec in stream:
            v = rec.id
            bv = blocks[v]
            cut += sum(1 for w in rec.neighbors if w < v and blocks[w] != bv)
    return cut, n, m


def compute_cut_offline(graph: PathLike, partition: PathLike) -> Tuple[int, float]:
    """(edge_cut, rel_cut) by rescanning the graph; each undirected edge counted once"""
    blocks = read_partition(partition)
    cut, _, m = _cut_from_stream(graph, blocks)
    return cut, cut / m if m else 0.0


def imbalance(block_weights: Sequence[int], n: int, k: int) -> float:
    """max_i |V_i| / (n / k) - 1"""
    return max(block_weights) / (n / k) - 1


def evaluate_partition(
    graph: PathLike,
    partition: PathLike,
    k: Optional[int] = None,
    epsilon: float = 0.03,
) -> PartitionEvaluation:
    """Cut, block weights and balance of a partition file"""
    blocks = read_partition(partition, k=k)
    if k is None:
        k = max(blocks) + 1 if blocks else 1
    cut, n, m = _cut_from_stream(graph, blocks)
    weights = [0] * k
    for b in blocks:
        weights[b] += 1
    l_max = math.ceil((1 + epsilon) * n / k)
    return PartitionEvaluation(
        n=n,
        m=m,
        k=k,
        edge_cut=cut,
        rel_cut=cut / m if m else 0.0,
        block_weights=tuple(weights),
        imbalance=imbalance(weights, n, k),
        l_max=l_max,
        balanced=max(weights) <= l_max,
    )


def build_report(
    result: PartitionResult,
    params: PartitionParams,
    backend_config: BackendConfig,
    graph: str,
    rss_bytes: Optional[int] = None,
) -> PartitionReport:
    """Combine a result with the parameters that produced it"""
    return PartitionReport(
        graph=graph,
        n=result.n,
        m=result.m,
        k=result.k,
        epsilon=params.epsilon,
        gamma=params.gamma,
        kappa=params.kappa,
        backend=result.backend,
        beta=backend_config.beta if result.backend == BackendKind.cpi_batch.value else None,
        delta=backend_config.delta,
        edge_cut=result.edge_cut,
        rel_cut=result.rel_cut,
        run_count=result.run_count,
        index_bytes=result.index_bytes,
        peak_tracked_bytes=result.peak_tracked_bytes,
        elapsed_seconds=result.elapsed_seconds,
        block_weights=list(result.block_weights),
        rss_bytes=rss_bytes,
        imbalance=imbalance(result.block_weights, result.n, result.k),
    )


def format_key_values(report: PartitionReport) -> str:
    """One key=value line per report field"""
    lines = []
    for key, value in report.model_dump(exclude_none=True).items():
        if isinstance(value, list):
            value = ",".join(str(x) for x in value)
        elif isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"{key}={value}")
    return "\n".join(lines)


RunLike = Union[PartitionResult, PartitionReport]


def _relative(a: float, b: float) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def compare_runs(a: RunLike, b: RunLike) -> List[MetricComparison]:
    """Relative values a/b and improvements (a/b - 1) * 100 per metric"""
    out = []
    for name in COMPARED_METRICS:
        va, vb = float(getattr(a, name)), float(getattr(b, name))
        rel = _relative(va, vb)
        out.append(MetricComparison(name, va, vb, rel, (rel - 1.0) * 100.0))
    return out


def geometric_mean(values: Sequence[float]) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("geometric mean of an empty set")
    with np.errstate(divide="ignore"):
        return float(np.exp(np.mean(np.log(arr))))


def compare_run_sets(pairs: Sequence[Tuple[RunLike, RunLike]]) -> Dict[str, float]:
    """Geometric mean of the per-instance relative values of each metric"""
    relatives: Dict[str, List[float]] = {name: [] for name in COMPARED_METRICS}
    for a, b in pairs:
        for cmp in compare_runs(a, b):
            relatives[cmp.name].append(cmp.relative)
    return {name: geometric_mean(values) for name, values in relatives.items()}


def comparisons_to_json(comparisons: Sequence[MetricComparison]) -> str:
    return json.dumps(
        {c.name: {"a": c.a, "b": c.b, "relative": c.relative, "improvement_pct": c.improvement_pct} for c in comparisons},
        indent=2,
    )
