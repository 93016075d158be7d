"""
Graph builders shared by the test modules
"""

import random
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from rlcpart.core.graph_io import GraphHeader, NodeRecord, NodeStream

Edge = Tuple[int, int]


def adjacency(n: int, edges: Iterable[Edge]) -> List[List[int]]:
    adj: List[List[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return [sorted(nbrs) for nbrs in adj]


def write_metis_file(path: Path, n: int, edges: Sequence[Edge]) -> Path:
    with open(path, "w") as f:
        f.write(f"{n} {len(edges)}\n")
        for nbrs in adjacency(n, edges):
            f.write(" ".join(str(w + 1) for w in nbrs) + "\n")
    return path


def stream_from_edges(n: int, edges: Sequence[Edge]) -> NodeStream:
    records = [NodeRecord(v, tuple(nbrs)) for v, nbrs in enumerate(adjacency(n, edges))]
    return NodeStream(GraphHeader(n=n, m=len(edges)), records, source="memory")


def path_edges(n: int) -> List[Edge]:
    return [(i, i + 1) for i in range(n - 1)]


def cycle_edges(n: int) -> List[Edge]:
    return path_edges(n) + [(n - 1, 0)]


def clique_edges(nodes: Sequence[int]) -> List[Edge]:
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


def two_cliques() -> List[Edge]:
    return clique_edges(range(5)) + clique_edges(range(5, 10))


def random_edges(n: int, p: float, seed: int) -> List[Edge]:
    rnd = random.Random(seed)
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rnd.random() < p]


def brute_force_cut(edges: Iterable[Edge], blocks: Sequence[int]) -> int:
    return sum(1 for u, v in edges if blocks[u] != blocks[v])
