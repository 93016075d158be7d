"""
Compressed partition index.

Drop-in replacements for the length-n block-assignment array. Block ids
are appended in node-id order and read back by node id:

    PlainArrayIndex      one cell per node
    RlcVector            run heads + start-of-run bit vector
    BatchedRlcVector     one RlcVector per beta consecutive nodes
"""

from array import array
from typing import Iterator, List, Optional, Protocol

from .bitvec import (
    DEFAULT_CORRECTION_BITS,
    DEFAULT_DELTA,
    DEFAULT_MAX_SEGMENT_POINTS,
    AppendablePlaBitVector,
    PackedIntArray,
    RankBitVector,
    RankSupport,
)

# count, last value, last run start
RLC_BOOKKEEPING_BYTES = 24


class AssignmentIndex(Protocol):
    """Append-only block assignment store queried by node id"""

    def append(self, value: int) -> None: ...

    def get(self, i: int) -> int: ...

    def run_count(self) -> int: ...

    def size_in_bytes(self) -> int: ...

    def to_list(self) -> List[int]: ...

    def __len__(self) -> int: ...


def head_width(k: Optional[int]) -> int:
    """Bits per stored block id: ceil(log2 k), or 32 when k is unknown"""
    if k is None:
        return 32
    return max(1, (k - 1).bit_length())


class PlainArrayIndex:
    """The uncompressed baseline: one 1-, 2- or 4-byte cell per node"""

    def __init__(self, k: Optional[int] = None):
        if k is not None and k <= 256:
            typecode = "B"
        elif k is not None and k <= 65536:
            typecode = "H"
        else:
            typecode = "I"
        self._cells = array(typecode)
        self._runs = 0

    def append(self, value: int) -> None:
        if not self._cells or self._cells[-1] != value:
            self._runs += 1
        self._cells.append(value)

    def get(self, i: int) -> int:
        if i < 0 or i >= len(self._cells):
            raise IndexError(f"node {i} has not been assigned yet")
        return self._cells[i]

    def run_count(self) -> int:
        return self._runs

    def size_in_bytes(self) -> int:
        return self._cells.itemsize * len(self._cells)

    def to_list(self) -> List[int]:
        return self._cells.tolist()

    def __len__(self) -> int:
        return len(self._cells)


class RlcVector:
    """
    Run-length compressed sequence of block ids.

    heads holds one block id per run; starts has a 1-bit at the first
    position of every run, so the value at i is heads[rank1(i) - 1]. The
    zeros of the open run are written only when the next run starts;
    positions inside the open run are answered from last_value.
    """

    def __init__(
        self,
        k: Optional[int] = None,
        delta: int = DEFAULT_DELTA,
        correction_bits: int = DEFAULT_CORRECTION_BITS,
        max_segment_points: int = DEFAULT_MAX_SEGMENT_POINTS,
        compressed: bool = True,
    ):
        self.k = k
        self.heads = PackedIntArray(head_width(k))
        if compressed:
            self.starts: RankSupport = AppendablePlaBitVector(
                delta=delta,
                correction_bits=correction_bits,
                max_segment_points=max_segment_points,
            )
        else:
            self.starts = RankBitVector()
        self.count = 0
        self.last_value: Optional[int] = None
        self._last_run_start = 0

    def append(self, value: int) -> None:
        if value < 0:
            raise ValueError(f"block id must be >= 0, got {value}")
        if self.count == 0 or value != self.last_value:
            self.starts.extend_zeros(self.count - len(self.starts))
            self.heads.append(value)
            self.starts.append_bit(1)
            self.last_value = value
            self._last_run_start = self.count
        self.count += 1

    def get(self, i: int) -> int:
        if i < 0 or i >= self.count:
            raise IndexError(f"element {i} beyond appended prefix of {self.count}")
        if i >= self._last_run_start:
            return self.last_value
        return self.heads[self.starts.rank1(i) - 1]

    def run_count(self) -> int:
        return len(self.heads)

    def run_lengths(self) -> List[int]:
        starts = [self.starts.select1(x) for x in range(1, self.run_count() + 1)]
        starts.append(self.count)
        return [b - a for a, b in zip(starts, starts[1:])]

    def size_in_bytes(self) -> int:
        return self.heads.size_in_bytes() + self.starts.size_in_bytes() + RLC_BOOKKEEPING_BYTES

    def to_list(self) -> List[int]:
        return list(self)

    def __iter__(self) -> Iterator[int]:
        lengths = self.run_lengths()
        for head, length in zip(self.heads, lengths):
            for _ in range(length):
                yield head

    def __len__(self) -> int:
        return self.count


class BatchedRlcVector:
    """
    beta-split run-length index.

    Element v lives in sub-vector v // beta at offset v % beta. Every batch
    starts its own run, even when the value continues across the boundary.
    """

    def __init__(self, beta: int, k: Optional[int] = None, **vector_options):
        if beta < 1:
            raise ValueError(f"beta must be > 0, got {beta}")
        self.beta = beta
        self.k = k
        self._options = vector_options
        self.vectors: List[RlcVector] = []
        self.count = 0

    def append(self, value: int) -> None:
        if self.count % self.beta == 0:
            self.vectors.append(RlcVector(k=self.k, **self._options))
        self.vectors[-1].append(value)
        self.count += 1

    def get(self, i: int) -> int:
        if i < 0 or i >= self.count:
            raise IndexError(f"element {i} beyond appended prefix of {self.count}")
        return self.vectors[i // self.beta].get(i % self.beta)

    def run_count(self) -> int:
        return sum(v.run_count() for v in self.vectors)

    def size_in_bytes(self) -> int:
        return 16 + 8 * len(self.vectors) + sum(v.size_in_bytes() for v in self.vectors)

    def to_list(self) -> List[int]:
        out: List[int] = []
        for vec in self.vectors:
            out.extend(vec)
        return out

    def __len__(self) -> int:
        return self.count
