"""
Streaming graph generators: Barabasi-Albert and random geometric graphs.

Both generators emit NodeRecords in id order with full (symmetric)
neighborhoods, building the graph chunk by chunk.

RGG: the unit square is cut into horizontal strips of height >= r, one
per chunk. Points of a strip get consecutive ids in x order, so only the
current strip and the next one are resident while records are emitted.
The edge count for the header comes from a replay of the same strips.

BA: preferential attachment over a growing endpoint multiset, seeded by
a clique on the first d + 1 nodes. Each chunk's directed edge pairs are
spilled as one sorted run of an ExternalPriorityQueue, and the records
are read back by extracting per node id.
"""

import logging
import math
import random
from array import array
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .errors import GeneratorConfigError
from .extpq import ExternalPriorityQueue, ExtPqConfig
from .graph_io import GraphHeader, NodeRecord, NodeStream

logger = logging.getLogger(__name__)

MAX_NODES = 2**32 - 1


class GraphModel(str, Enum):
    """Supported generator models"""
    ba = "ba"
    rgg = "rgg"


class GenConfig(BaseModel):
    """Generator configuration; identical configs produce identical streams"""
    model: GraphModel
    n: int = Field(..., ge=1, le=MAX_NODES)
    ba_degree: int = Field(1, ge=1, description="Edges attached per new node (BA)")
    rgg_radius: float = Field(0.05, gt=0.0, description="Connection radius in the unit square (RGG)")
    chunks: int = Field(16, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_feasible(self) -> "GenConfig":
        if self.model == GraphModel.ba and self.ba_degree >= self.n:
            raise GeneratorConfigError(f"BA needs ba_degree < n, got degree {self.ba_degree} with n={self.n}")
        return self


def expected_rgg_edges(n: int, r: float) -> float:
    """n(n-1)/2 * pi r^2, ignoring boundary effects"""
    return n * (n - 1) / 2 * math.pi * r * r


def radius_for_average_degree(n: int, degree: float) -> float:
    """RGG radius whose boundary-free expected average degree is `degree`"""
    if n < 2:
        raise GeneratorConfigError("need at least two nodes to tune a radius")
    return math.sqrt(degree / (math.pi * (n - 1)))


def ba_edge_count(n: int, degree: int) -> int:
    return degree * (degree + 1) // 2 + (n - degree - 1) * degree


def generate_stream(cfg: GenConfig, spill_dir: Optional[Path] = None) -> NodeStream:
    """Build a NodeStream for the configured model"""
    if cfg.model == GraphModel.rgg:
        strips = _RggStrips(cfg)
        m = strips.count_edges()
        header = GraphHeader(n=cfg.n, m=m)
        logger.info("rgg stream: n=%d, m=%d, r=%g, strips=%d", cfg.n, m, cfg.rgg_radius, strips.count)
        return NodeStream(header, strips.records(), source=f"rgg(n={cfg.n}, r={cfg.rgg_radius}, seed={cfg.seed})")

    header = GraphHeader(n=cfg.n, m=ba_edge_count(cfg.n, cfg.ba_degree))
    logger.info("ba stream: n=%d, m=%d, d=%d", cfg.n, header.m, cfg.ba_degree)
    return NodeStream(
        header,
        _ba_records(cfg, spill_dir),
        source=f"ba(n={cfg.n}, d={cfg.ba_degree}, seed={cfg.seed})",
    )


# ----------------------------------------------------------------------
# RGG
# ----------------------------------------------------------------------
def _sweep_pairs(xs: np.ndarray, ys: np.ndarray, r: float) -> Tuple[np.ndarray, np.ndarray]:
    """All index pairs (i < j) within distance r; xs must be sorted"""
    r2 = r * r
    firsts, seconds = [], []
    offset = 1
    while offset < len(xs):
        dx = xs[offset:] - xs[:-offset]
        near = dx <= r
        if not near.any():
            break
        dy = ys[offset:] - ys[:-offset]
        hit = np.flatnonzero(near & (dx * dx + dy * dy <= r2))
        firsts.append(hit)
        seconds.append(hit + offset)
        offset += 1
    if not firsts:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(firsts), np.concatenate(seconds)


class _Strip:
    def __init__(self, index: int, offset: int, xs: np.ndarray, ys: np.ndarray):
        self.index = index
        self.offset = offset
        self.xs = xs
        self.ys = ys
        self.adjacency: List[List[int]] = []

    def __len__(self) -> int:
        return len(self.xs)


class _RggStrips:
    def __init__(self, cfg: GenConfig):
        self.n = cfg.n
        self.r = cfg.rgg_radius
        # strips of height >= r only ever touch their direct neighbours
        self.count = max(1, min(cfg.chunks, int(1.0 / self.r)))
        root = np.random.SeedSequence(cfg.seed)
        master, *children = root.spawn(self.count + 1)
        self._sizes = np.random.default_rng(master).multinomial(self.n, [1.0 / self.count] * self.count)
        self._children = children
        self._offsets = np.concatenate(([0], np.cumsum(self._sizes)[:-1]))

    def strip(self, b: int) -> _Strip:
        rng = np.random.default_rng(self._children[b])
        size = int(self._sizes[b])
        xs = rng.random(size)
        ys = (b + rng.random(size)) / self.count
        order = np.argsort(xs, kind="stable")
        return _Strip(b, int(self._offsets[b]), xs[order], ys[order])

    def points(self) -> np.ndarray:
        """(n, 2) coordinates in id order"""
        parts = []
        for b in range(self.count):
            s = self.strip(b)
            parts.append(np.column_stack((s.xs, s.ys)))
        return np.vstack(parts)

    def _cross_pairs(self, low: _Strip, high: _Strip) -> Tuple[np.ndarray, np.ndarray]:
        edge = high.index / self.count
        lo_idx = np.flatnonzero(low.ys >= edge - self.r)
        hi_idx = np.flatnonzero(high.ys <= edge + self.r)
        if not lo_idx.size or not hi_idx.size:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        xs = np.concatenate((low.xs[lo_idx], high.xs[hi_idx]))
        ys = np.concatenate((low.ys[lo_idx], high.ys[hi_idx]))
        side = np.concatenate((np.zeros(lo_idx.size, dtype=bool), np.ones(hi_idx.size, dtype=bool)))
        local = np.concatenate((lo_idx, hi_idx))
        order = np.argsort(xs, kind="stable")
        first, second = _sweep_pairs(xs[order], ys[order], self.r)
        first, second = order[first], order[second]
        crossing = side[first] != side[second]
        first, second = first[crossing], second[crossing]
        # orient as (low, high)
        swap = side[first]
        a = np.where(swap, second, first)
        b = np.where(swap, first, second)
        return local[a], local[b]

    def count_edges(self) -> int:
        total = 0
        previous = None
        for b in range(self.count):
            current = self.strip(b)
            total += _sweep_pairs(current.xs, current.ys, self.r)[0].size
            if previous is not None:
                total += self._cross_pairs(previous, current)[0].size
            previous = current
        return total

    def _with_adjacency(self, b: int) -> _Strip:
        s = self.strip(b)
        s.adjacency = [[] for _ in range(len(s))]
        first, second = _sweep_pairs(s.xs, s.ys, self.r)
        for i, j in zip(first.tolist(), second.tolist()):
            s.adjacency[i].append(s.offset + j)
            s.adjacency[j].append(s.offset + i)
        return s

    def records(self) -> Iterator[NodeRecord]:
        current = self._with_adjacency(0)
        for b in range(self.count):
            upcoming = self._with_adjacency(b + 1) if b + 1 < self.count else None
            if upcoming is not None:
                low, high = self._cross_pairs(current, upcoming)
                for i, j in zip(low.tolist(), high.tolist()):
                    current.adjacency[i].append(upcoming.offset + j)
                    upcoming.adjacency[j].append(current.offset + i)
            for i, nbrs in enumerate(current.adjacency):
                nbrs.sort()
                yield NodeRecord(current.offset + i, tuple(nbrs))
            current = upcoming


# ----------------------------------------------------------------------
# BA
# ----------------------------------------------------------------------
def _ba_records(cfg: GenConfig, spill_dir: Optional[Path]) -> Iterator[NodeRecord]:
    n, d = cfg.n, cfg.ba_degree
    rnd = random.Random(cfg.seed)
    endpoints = array("I")
    chunk_size = -(-n // cfg.chunks)

    with ExternalPriorityQueue(ExtPqConfig(spill_dir=spill_dir)) as queue:
        def link(u: int, w: int) -> None:
            queue.insert(u, w)
            queue.insert(w, u)
            endpoints.append(u)
            endpoints.append(w)

        seed_nodes = min(n, d + 1)
        for u in range(seed_nodes):
            for w in range(u):
                link(u, w)

        for lo in range(0, n, chunk_size):
            for u in range(max(lo, seed_nodes), min(n, lo + chunk_size)):
                targets = set()
                while len(targets) < d:
                    targets.add(endpoints[int(rnd.random() * len(endpoints))])
                for w in sorted(targets):
                    link(u, w)
            queue.spill()

        logger.debug("ba generation wrote %d runs", queue.runs_written)
        for v in range(n):
            yield NodeRecord(v, tuple(sorted(queue.extract_min_for(v))))
