"""
Node-stream I/O for rlcpart.

Reads undirected graphs in METIS format one node at a time and writes
partition files. Only unweighted graphs are supported.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import (
    GraphFormatError,
    PartitionFileError,
    StreamOrderError,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class GraphHeader:
    """First non-comment line of a METIS file"""
    n: int
    m: int
    fmt: Optional[str] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphFormatError(f"node count must be >= 1, got {self.n}")
        if self.m < 0:
            raise GraphFormatError(f"edge count must be >= 0, got {self.m}")


@dataclass(frozen=True)
class NodeRecord:
    """One streamed node: its id and its full neighborhood N(v)"""
    id: int
    neighbors: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.neighbors)


class NodeStream:
    """
    One-pass stream of NodeRecords.

    Every record is validated as it passes: ids must arrive as 0, 1, ..., n-1,
    neighbors must lie in [0, n) without self-loops or duplicates. When the
    stream ends, the record count must equal n and the degree sum must equal
    2m. A second iteration raises StreamOrderError.
    """

    def __init__(
        self,
        header: GraphHeader,
        records: Iterable[NodeRecord],
        source: str = "<stream>",
        on_close=None,
    ):
        self.header = header
        self.source = source
        self._records = records
        self._on_close = on_close
        self._consumed = False

    def __iter__(self) -> Iterator[NodeRecord]:
        if self._consumed:
            raise StreamOrderError(f"stream {self.source} has already been consumed")
        self._consumed = True
        return self._validated()

    def _validated(self) -> Iterator[NodeRecord]:
        n = self.header.n
        expected = 0
        degree_sum = 0
        try:
            for rec in self._records:
                if rec.id != expected:
                    raise StreamOrderError(
                        f"{self.source}: expected node {expected}, got {rec.id}"
                    )
                for w in rec.neighbors:
                    if w < 0 or w >= n:
                        raise GraphFormatError(
                            f"{self.source}: node {rec.id} has neighbor {w} outside [0, {n})"
                        )
                    if w == rec.id:
                        raise GraphFormatError(f"{self.source}: self-loop at node {rec.id}")
                if len(set(rec.neighbors)) != len(rec.neighbors):
                    raise GraphFormatError(
                        f"{self.source}: duplicate neighbor (parallel edge) at node {rec.id}"
                    )
                degree_sum += len(rec.neighbors)
                expected += 1
                yield rec

            if expected != n:
                raise GraphFormatError(f"{self.source}: header says {n} nodes, stream had {expected}")
            if degree_sum != 2 * self.header.m:
                raise GraphFormatError(
                    f"{self.source}: degree sum {degree_sum} != 2m = {2 * self.header.m}"
                )
        finally:
            self.close()

    def close(self) -> None:
        if self._on_close is not None:
            self._on_close()
            self._on_close = None

    def __enter__(self) -> "NodeStream":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _parse_header(tokens: List[str], lineno: int, path: str) -> GraphHeader:
    if len(tokens) < 2 or len(tokens) > 3:
        raise GraphFormatError(f"{path}:{lineno}: malformed header {' '.join(tokens)!r}")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: malformed header {' '.join(tokens)!r}") from None
    fmt = tokens[2] if len(tokens) == 3 else None
    if fmt is not None and (not fmt.isdigit() or int(fmt) != 0):
        raise UnsupportedFormatError(f"{path}: weighted METIS format {fmt!r} is not supported")
    return GraphHeader(n=n, m=m, fmt=fmt)


def _read_metis_records(handle: IO[str], header: GraphHeader, path: str, lineno: int) -> Iterator[NodeRecord]:
    n = header.n
    node = 0
    for line in handle:
        lineno += 1
        if line.startswith("%"):
            continue
        if node == n:
            if line.strip():
                raise GraphFormatError(f"{path}:{lineno}: more than {n} node lines")
            continue
        try:
            ids = [int(tok) for tok in line.split()]
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: non-integer neighbor id") from None
        for w in ids:
            if w < 1 or w > n:
                raise GraphFormatError(f"{path}:{lineno}: neighbor id {w} outside [1, {n}]")
        yield NodeRecord(node, tuple(w - 1 for w in ids))
        node += 1
    if node != n:
        raise GraphFormatError(f"{path}: header says {n} nodes, file has {node} node lines")


def open_metis_stream(path: PathLike) -> NodeStream:
    """Open a METIS file as a one-pass NodeStream (ids converted to 0-based)"""
    path = str(path)
    handle = open(path, "r")
    lineno = 0
    try:
        header = None
        for line in handle:
            lineno += 1
            if line.startswith("%") or not line.strip():
                continue
            header = _parse_header(line.split(), lineno, path)
            break
        if header is None:
            raise GraphFormatError(f"{path}: no header line")
    except Exception:
        handle.close()
        raise

    logger.info("opened %s (n=%d, m=%d)", path, header.n, header.m)
    return NodeStream(
        header,
        _read_metis_records(handle, header, path, lineno),
        source=path,
        on_close=handle.close,
    )


def write_metis(target: Union[PathLike, IO[str]], stream: NodeStream) -> GraphHeader:
    """Dump a NodeStream as METIS (1-based neighbor ids) to a path or an open text handle"""
    if hasattr(target, "write"):
        _dump_metis(target, stream)
    else:
        with open(target, "w") as f:
            _dump_metis(f, stream)
    return stream.header


def _dump_metis(f: IO[str], stream: NodeStream) -> None:
    header = stream.header
    f.write(f"{header.n} {header.m}\n")
    for rec in stream:
        f.write(" ".join(str(w + 1) for w in rec.neighbors))
        f.write("\n")


class PartitionWriter:
    """Streams block ids to a partition file, one decimal id per line"""

    def __init__(self, path: PathLike, k: int):
        self.path = Path(path)
        self.k = k
        self.count = 0
        self._file = open(self.path, "w")

    def write(self, block: int) -> None:
        if block < 0 or block >= self.k:
            raise PartitionFileError(f"block id {block} outside [0, {self.k})")
        self._file.write(f"{block}\n")
        self.count += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "PartitionWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_partition(path: PathLike, assignments: Sequence[int], k: int) -> None:
    """Write one block id per line"""
    with PartitionWriter(path, k) as writer:
        for block in assignments:
            writer.write(block)


def read_partition(path: PathLike, n: Optional[int] = None, k: Optional[int] = None) -> List[int]:
    """Read a partition file, optionally checking its length and block range"""
    blocks: List[int] = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text:
                continue
            try:
                block = int(text)
            except ValueError:
                raise PartitionFileError(f"{path}:{lineno}: not a block id: {text!r}") from None
            if block < 0 or (k is not None and block >= k):
                raise PartitionFileError(f"{path}:{lineno}: block id {block} out of range")
            blocks.append(block)
    if n is not None and len(blocks) != n:
        raise PartitionFileError(f"{path}: expected {n} lines, found {len(blocks)}")
    return blocks
