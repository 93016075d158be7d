"""
One-pass streaming partitioning for rlcpart.

Nodes are assigned in id order to one of k blocks, either by the Fennel
score (gain minus a weight penalty, optionally kappa-modified toward the
previous block) or by hashing. Block ids of already streamed nodes are
read back through an assignment store: a plain or compressed index, the
external priority queue, or nothing at all for hashing.
"""

import heapq
import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from .bitvec import DEFAULT_CORRECTION_BITS, DEFAULT_DELTA, DEFAULT_MAX_SEGMENT_POINTS
from .cpi import AssignmentIndex, BatchedRlcVector, PlainArrayIndex, RlcVector
from .errors import BalanceError, GraphFormatError, StreamOrderError
from .extpq import ExternalPriorityQueue, ExtPqConfig
from .graph_io import GraphHeader, NodeRecord, NodeStream, PartitionWriter

logger = logging.getLogger(__name__)

PROGRESS_INTERVAL = 1 << 16


class BackendKind(str, Enum):
    """Where block assignments of streamed nodes are kept"""
    array = "array"
    cpi = "cpi"
    cpi_batch = "cpi-batch"
    extpq = "extpq"
    hashing = "hashing"


class PartitionParams(BaseModel):
    """Partitioning objective and balance parameters"""
    k: int = Field(..., ge=2, description="Number of blocks")
    epsilon: float = Field(0.03, ge=0.0, description="Allowed imbalance")
    gamma: float = Field(1.5, ge=1.0, description="Fennel exponent")
    kappa: float = Field(1.0, ge=1.0, description="Run elongation scale (1 = off)")
    fast_scoring: bool = Field(True, description="Score only gain blocks, the lightest and the previous block")

    def alpha_for(self, n: int, m: int) -> float:
        return m * self.k ** (self.gamma - 1) / n ** self.gamma

    def l_max_for(self, n: int) -> int:
        return math.ceil((1 + self.epsilon) * n / self.k)


class BackendConfig(BaseModel):
    """Tuning knobs of the assignment stores"""
    beta: Optional[int] = Field(None, ge=1, description="Batch size for cpi-batch")
    delta: int = Field(DEFAULT_DELTA, ge=1)
    correction_bits: int = Field(DEFAULT_CORRECTION_BITS, ge=1, le=32)
    max_segment_points: int = Field(DEFAULT_MAX_SEGMENT_POINTS, ge=1)
    extpq: ExtPqConfig = Field(default_factory=ExtPqConfig)

    def vector_options(self) -> Dict[str, int]:
        return {
            "delta": self.delta,
            "correction_bits": self.correction_bits,
            "max_segment_points": self.max_segment_points,
        }


# ----------------------------------------------------------------------
# Assignment stores
# ----------------------------------------------------------------------
class AssignmentStore(ABC):
    """Delivers the blocks of a node's already streamed neighbors"""

    @abstractmethod
    def neighbor_blocks(self, rec: NodeRecord) -> List[int]:
        """Blocks of all neighbors w < rec.id (as a multiset)"""

    @abstractmethod
    def record(self, rec: NodeRecord, block: int) -> None:
        """Remember the block chosen for rec"""

    @abstractmethod
    def size_in_bytes(self) -> int:
        pass

    def close(self) -> None:
        pass


class IndexStore(AssignmentStore):
    """Random access into an append-only index"""

    def __init__(self, index: AssignmentIndex):
        self.index = index

    def neighbor_blocks(self, rec: NodeRecord) -> List[int]:
        get = self.index.get
        v = rec.id
        return [get(w) for w in rec.neighbors if w < v]

    def record(self, rec: NodeRecord, block: int) -> None:
        self.index.append(block)

    def size_in_bytes(self) -> int:
        return self.index.size_in_bytes()


class ExtPqStore(AssignmentStore):
    """Time-forward processing: each node sends its block to its larger neighbors"""

    def __init__(self, queue: ExternalPriorityQueue):
        self.queue = queue

    def neighbor_blocks(self, rec: NodeRecord) -> List[int]:
        blocks = self.queue.extract_min_for(rec.id)
        expected = sum(1 for w in rec.neighbors if w < rec.id)
        if len(blocks) != expected:
            raise GraphFormatError(
                f"node {rec.id} received {len(blocks)} forwarded blocks but has "
                f"{expected} smaller neighbors (asymmetric adjacency)"
            )
        return blocks

    def record(self, rec: NodeRecord, block: int) -> None:
        v = rec.id
        for w in rec.neighbors:
            if w > v:
                self.queue.insert(w, block)

    def size_in_bytes(self) -> int:
        return self.queue.tracked_bytes()

    def close(self) -> None:
        self.queue.close()


class HashingStore(AssignmentStore):
    """Nothing is stored; neighbor blocks are recomputed from ids"""

    def __init__(self, k: int):
        self.k = k

    def neighbor_blocks(self, rec: NodeRecord) -> List[int]:
        v = rec.id
        return [hashing_assign(w, self.k) for w in rec.neighbors if w < v]

    def record(self, rec: NodeRecord, block: int) -> None:
        pass

    def size_in_bytes(self) -> int:
        return 0


def create_store(backend: BackendKind, k: int, config: Optional[BackendConfig] = None) -> AssignmentStore:
    """Build the assignment store for a backend"""
    config = config or BackendConfig()
    if backend == BackendKind.array:
        return IndexStore(PlainArrayIndex(k))
    elif backend == BackendKind.cpi:
        return IndexStore(RlcVector(k=k, **config.vector_options()))
    elif backend == BackendKind.cpi_batch:
        if config.beta is None:
            raise ValueError("backend cpi-batch requires beta > 0")
        return IndexStore(BatchedRlcVector(config.beta, k=k, **config.vector_options()))
    elif backend == BackendKind.extpq:
        return ExtPqStore(ExternalPriorityQueue(config.extpq))
    elif backend == BackendKind.hashing:
        return HashingStore(k)
    raise ValueError(f"unknown backend: {backend}")


# ----------------------------------------------------------------------
# Scoring
# ----------------------------------------------------------------------
@dataclass
class PartitionState:
    """Mutable state of one partitioning pass"""
    params: PartitionParams
    n: int
    m: int
    alpha: float = 0.0
    l_max: int = 0
    block_weights: List[int] = field(default_factory=list)
    prev_block: Optional[int] = None
    streamed: int = 0
    edge_cut: int = 0
    runs: int = 0

    def __post_init__(self) -> None:
        self.alpha = self.params.alpha_for(self.n, self.m)
        self.l_max = self.params.l_max_for(self.n)
        if not self.block_weights:
            self.block_weights = [0] * self.params.k

    @property
    def penalty_factor(self) -> float:
        return self.alpha * self.params.gamma

    def commit(self, block: int) -> None:
        self.block_weights[block] += 1
        if block != self.prev_block:
            self.runs += 1
        self.prev_block = block
        self.streamed += 1


def fennel_score(state: PartitionState, b: int, gain: int) -> float:
    """gain - alpha * gamma * |V_b|^(gamma - 1)"""
    weight = state.block_weights[b]
    gamma = state.params.gamma
    if gamma == 1.5:
        return gain - state.penalty_factor * math.sqrt(weight)
    return gain - state.penalty_factor * weight ** (gamma - 1)


def kappa_modify(score: float, b: int, prev: Optional[int], kappa: float) -> float:
    if prev is None or b != prev:
        return score
    if score > 0:
        return score * kappa
    if score < 0:
        return score / kappa
    return score


def hashing_assign(v: int, k: int) -> int:
    return v % k


class StreamingPartitioner(ABC):
    """Assigns streamed nodes one at a time"""

    name = "base"

    def __init__(self, state: PartitionState, store: AssignmentStore):
        self.state = state
        self.store = store

    @abstractmethod
    def choose_block(self, rec: NodeRecord, gains: Dict[int, int]) -> int:
        pass

    def assign_node(self, rec: NodeRecord) -> int:
        """Assign rec permanently and return its block"""
        state = self.state
        if rec.id != state.streamed:
            raise StreamOrderError(f"expected node {state.streamed}, got {rec.id}")

        blocks = self.store.neighbor_blocks(rec)
        gains: Dict[int, int] = {}
        for b in blocks:
            gains[b] = gains.get(b, 0) + 1

        block = self.choose_block(rec, gains)
        state.edge_cut += len(blocks) - gains.get(block, 0)
        self.store.record(rec, block)
        state.commit(block)
        return block


class HashingPartitioner(StreamingPartitioner):
    """v mod k, no scoring"""

    name = "hashing"

    def choose_block(self, rec: NodeRecord, gains: Dict[int, int]) -> int:
        return hashing_assign(rec.id, self.state.params.k)


class FennelPartitioner(StreamingPartitioner):
    """Fennel with hard balance and lowest-id tie-breaking"""

    name = "fennel"

    def __init__(self, state: PartitionState, store: AssignmentStore):
        super().__init__(state, store)
        params = state.params
        # zero-gain blocks only compete through their weight when the penalty is strictly increasing
        increasing = state.alpha > 0 and params.gamma > 1
        self.fast = params.fast_scoring and increasing
        # a flat penalty scores all zero-gain blocks alike; the lighter block wins those ties
        self.flat = not increasing
        self._lightest: List[Tuple[int, int]] = [(0, b) for b in range(params.k)]

    def _score(self, b: int, gain: int) -> float:
        state = self.state
        return kappa_modify(fennel_score(state, b, gain), b, state.prev_block, state.params.kappa)

    def _lightest_open(self) -> Optional[int]:
        """Lowest id among the lightest non-full blocks"""
        heap = self._lightest
        weights = self.state.block_weights
        l_max = self.state.l_max
        if len(heap) > 2 * len(weights) + 64:
            heap[:] = [(w, b) for b, w in enumerate(weights) if w < l_max]
            heapq.heapify(heap)
        while heap:
            w, b = heap[0]
            if w == weights[b] and w < l_max:
                return b
            heapq.heappop(heap)
        return None

    def _candidates(self, gains: Dict[int, int]) -> List[int]:
        weights = self.state.block_weights
        l_max = self.state.l_max
        if not self.fast:
            return [b for b in range(self.state.params.k) if weights[b] < l_max]
        picked = {b for b in gains if weights[b] < l_max}
        lightest = self._lightest_open()
        if lightest is not None:
            picked.add(lightest)
        prev = self.state.prev_block
        if prev is not None and weights[prev] < l_max:
            picked.add(prev)
        return sorted(picked)

    def choose_block(self, rec: NodeRecord, gains: Dict[int, int]) -> int:
        best = -1
        best_score = -math.inf
        weights = self.state.block_weights
        for b in self._candidates(gains):
            score = self._score(b, gains.get(b, 0))
            if score > best_score or (self.flat and score == best_score and weights[b] < weights[best]):
                best, best_score = b, score
        if best < 0:
            raise BalanceError(
                f"all {self.state.params.k} blocks reached L_max={self.state.l_max} at node {rec.id}"
            )
        return best

    def assign_node(self, rec: NodeRecord) -> int:
        block = super().assign_node(rec)
        if self.fast:
            heapq.heappush(self._lightest, (self.state.block_weights[block], block))
        return block


def create_partitioner(
    params: PartitionParams,
    header: GraphHeader,
    backend: BackendKind,
    config: Optional[BackendConfig] = None,
) -> StreamingPartitioner:
    """Pick the partitioner and its store for a backend"""
    state = PartitionState(params=params, n=header.n, m=header.m)
    store = create_store(backend, params.k, config)
    if backend == BackendKind.hashing:
        return HashingPartitioner(state, store)
    return FennelPartitioner(state, store)


# ----------------------------------------------------------------------
# Driver
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PartitionResult:
    """Outcome of one partitioning pass"""
    n: int
    m: int
    k: int
    backend: str
    l_max: int
    block_weights: Tuple[int, ...]
    edge_cut: int
    rel_cut: float
    run_count: int
    index_bytes: int
    peak_tracked_bytes: int
    elapsed_seconds: float
    assignments: Optional[Tuple[int, ...]] = None
    pq_inserted: Optional[int] = None
    pq_extracted: Optional[int] = None


def run_partition(
    stream: NodeStream,
    params: PartitionParams,
    backend: BackendKind = BackendKind.cpi,
    config: Optional[BackendConfig] = None,
    output: Optional[Path] = None,
    keep_assignments: bool = False,
    sample_interval: int = 4096,
) -> PartitionResult:
    """Partition a stream in a single pass"""
    header = stream.header
    partitioner = create_partitioner(params, header, backend, config)
    state = partitioner.state
    store = partitioner.store
    # index backends can replay the assignment themselves
    replay = keep_assignments and isinstance(store, IndexStore)
    kept: Optional[List[int]] = [] if keep_assignments and not replay else None
    assignments: Optional[Tuple[int, ...]] = None
    writer = PartitionWriter(output, params.k) if output is not None else None
    weights_bytes = 8 * params.k
    peak = weights_bytes

    logger.info(
        "partitioning %s: n=%d, m=%d, k=%d, backend=%s, L_max=%d, alpha=%.6g",
        stream.source, header.n, header.m, params.k, backend.value, state.l_max, state.alpha,
    )
    start = time.perf_counter()
    try:
        for rec in stream:
            block = partitioner.assign_node(rec)
            if writer is not None:
                writer.write(block)
            if kept is not None:
                kept.append(block)
            if state.streamed % sample_interval == 0:
                peak = max(peak, store.size_in_bytes() + weights_bytes)
            if state.streamed % PROGRESS_INTERVAL == 0:
                logger.debug("assigned %d/%d nodes, cut so far %d", state.streamed, header.n, state.edge_cut)
        elapsed = time.perf_counter() - start

        index_bytes = store.size_in_bytes()
        peak = max(peak, index_bytes + weights_bytes)
        run_count = state.runs
        pq_inserted = pq_extracted = None
        if isinstance(store, IndexStore):
            # batched indexes open a new run at every batch boundary
            run_count = store.index.run_count()
            if replay:
                assignments = tuple(store.index.to_list())
        elif kept is not None:
            assignments = tuple(kept)
        if isinstance(store, ExtPqStore):
            queue = store.queue
            assert queue.pending == 0, f"{queue.pending} forwarded blocks were never delivered"
            index_bytes = queue.peak_tracked_bytes
            peak = max(peak, queue.peak_tracked_bytes + weights_bytes)
            pq_inserted, pq_extracted = queue.inserted, queue.extracted
    finally:
        if writer is not None:
            writer.close()
        store.close()

    result = PartitionResult(
        n=header.n,
        m=header.m,
        k=params.k,
        backend=backend.value,
        l_max=state.l_max,
        block_weights=tuple(state.block_weights),
        edge_cut=state.edge_cut,
        rel_cut=state.edge_cut / header.m if header.m else 0.0,
        run_count=run_count,
        index_bytes=index_bytes,
        peak_tracked_bytes=peak,
        elapsed_seconds=elapsed,
        assignments=assignments,
        pq_inserted=pq_inserted,
        pq_extracted=pq_extracted,
    )
    logger.info(
        "done in %.2fs: cut=%d (%.4f), runs=%d, index=%d bytes",
        elapsed, result.edge_cut, result.rel_cut, result.run_count, result.index_bytes,
    )
    return result
