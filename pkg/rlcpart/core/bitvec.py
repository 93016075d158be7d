"""
Rank-supporting bit vectors for rlcpart.

RankBitVector is the plain, directory-based structure (and the oracle for
the compressed one). AppendablePlaBitVector stores the positions of its
1-bits as piecewise linear approximations plus bit-packed correction
terms, with a buffer of the most recent delta positions that is folded
into the last segment in batch.
"""

import logging
import math
from array import array
from bisect import bisect_right
from typing import Iterable, List, Protocol

import numpy as np

logger = logging.getLogger(__name__)

WORD_BITS = 64
SUPERBLOCK_BITS = 512
WORDS_PER_SUPERBLOCK = SUPERBLOCK_BITS // WORD_BITS

DEFAULT_DELTA = 1024
DEFAULT_CORRECTION_BITS = 8
DEFAULT_MAX_SEGMENT_POINTS = 2048

# len, ones, delta, correction bits, segment cap
PLA_HEADER_BYTES = 40
# start rank, first position, slope, correction offset, width
PLA_SEGMENT_BYTES = 8 + 8 + 8 + 8 + 1
# len, ones
PLAIN_HEADER_BYTES = 16


class RankSupport(Protocol):
    """What the run-length index needs from its start-of-run bit vector"""

    def append_bit(self, bit: int) -> None: ...

    def extend_zeros(self, count: int) -> None: ...

    def rank1(self, i: int) -> int: ...

    def select1(self, x: int) -> int: ...

    def count_ones(self) -> int: ...

    def size_in_bytes(self) -> int: ...

    def __len__(self) -> int: ...


class PackedIntArray:
    """Appendable array of fixed-width unsigned integers packed into bytes"""

    def __init__(self, width: int):
        if width < 1 or width > 64:
            raise ValueError(f"width must be in [1, 64], got {width}")
        self.width = width
        self._mask = (1 << width) - 1
        self._buf = bytearray()
        self._len = 0

    def append(self, value: int) -> None:
        if value < 0 or value > self._mask:
            raise ValueError(f"{value} does not fit in {self.width} bits")
        off = self._len * self.width
        end_byte = (off + self.width + 7) >> 3
        if end_byte > len(self._buf):
            self._buf.extend(bytes(end_byte - len(self._buf)))
        lo = off >> 3
        shift = off & 7
        chunk = int.from_bytes(self._buf[lo:end_byte], "little") | (value << shift)
        self._buf[lo:end_byte] = chunk.to_bytes(end_byte - lo, "little")
        self._len += 1

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._len
        if i < 0 or i >= self._len:
            raise IndexError(f"index {i} out of range for {self._len} entries")
        off = i * self.width
        lo = off >> 3
        hi = (off + self.width + 7) >> 3
        return (int.from_bytes(self._buf[lo:hi], "little") >> (off & 7)) & self._mask

    def __len__(self) -> int:
        return self._len

    def __iter__(self):
        for i in range(self._len):
            yield self[i]

    def size_in_bytes(self) -> int:
        return len(self._buf) + 8


class RankBitVector:
    """
    Plain bit vector with a rank directory.

    Bits live in 64-bit words; the directory holds the number of 1-bits
    before every 512-bit superblock, so rank1 touches at most eight words.
    """

    def __init__(self):
        self._words = array("Q")
        self._directory = array("Q")
        self._len = 0
        self._ones = 0

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "RankBitVector":
        vec = cls()
        for bit in bits:
            vec.append_bit(bit)
        return vec

    def append_bit(self, bit: int) -> None:
        pos = self._len
        if pos & (SUPERBLOCK_BITS - 1) == 0:
            self._directory.append(self._ones)
        if pos & (WORD_BITS - 1) == 0:
            self._words.append(0)
        if bit:
            self._words[-1] |= 1 << (pos & (WORD_BITS - 1))
            self._ones += 1
        self._len += 1

    def extend_zeros(self, count: int) -> None:
        if count < 0:
            raise ValueError("count must be >= 0")
        for _ in range(count):
            self.append_bit(0)

    def access(self, i: int) -> int:
        self._check(i)
        return (self._words[i >> 6] >> (i & 63)) & 1

    def rank1(self, i: int) -> int:
        self._check(i)
        word = i >> 6
        count = self._directory[i >> 9]
        for j in range((i >> 9) * WORDS_PER_SUPERBLOCK, word):
            count += self._words[j].bit_count()
        return count + (self._words[word] & ((2 << (i & 63)) - 1)).bit_count()

    def select1(self, x: int) -> int:
        if x < 1 or x > self._ones:
            raise IndexError(f"select1({x}) with {self._ones} ones")
        # last superblock with fewer than x ones before it
        lo, hi = 0, len(self._directory) - 1
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if self._directory[mid] < x:
                lo = mid
            else:
                hi = mid - 1
        remaining = x - self._directory[lo]
        word = lo * WORDS_PER_SUPERBLOCK
        while True:
            ones = self._words[word].bit_count()
            if ones >= remaining:
                break
            remaining -= ones
            word += 1
        value = self._words[word]
        for _ in range(remaining - 1):
            value &= value - 1
        return word * WORD_BITS + (value & -value).bit_length() - 1

    def count_ones(self) -> int:
        return self._ones

    def size_in_bytes(self) -> int:
        return PLAIN_HEADER_BYTES + 8 * len(self._words) + 8 * len(self._directory)

    def __len__(self) -> int:
        return self._len

    def _check(self, i: int) -> None:
        if i < 0 or i >= self._len:
            raise IndexError(f"index {i} out of range for {self._len} bits")


def _pack_corrections(values: np.ndarray, width: int) -> bytes:
    if width == 0 or values.size == 0:
        return b""
    shifts = np.arange(width, dtype=np.uint64)
    bits = ((values.astype(np.uint64)[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def _unpack_corrections(buf: bytes, width: int, count: int) -> np.ndarray:
    if width == 0:
        return np.zeros(count, dtype=np.int64)
    raw = np.frombuffer(buf, dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[: count * width].reshape(count, width)
    weights = np.left_shift(np.int64(1), np.arange(width, dtype=np.int64))
    return bits.astype(np.int64) @ weights


class AppendablePlaBitVector:
    """
    Compressed, appendable bit vector with rank1/select1.

    The positions of 1-bits form an increasing sequence; it is covered by
    segments mapping a local rank x to p0 + floor(slope * x + 0.5), each
    point corrected by a signed residual stored in the segment's width w,
    where every residual r satisfies |r| < 2**(w - 1). Appended 1-positions
    wait in a tail buffer of at most delta entries; a full buffer is merged
    with the decompressed last segment and refitted. Earlier segments never
    change.
    """

    def __init__(
        self,
        delta: int = DEFAULT_DELTA,
        correction_bits: int = DEFAULT_CORRECTION_BITS,
        max_segment_points: int = DEFAULT_MAX_SEGMENT_POINTS,
    ):
        if delta < 1:
            raise ValueError(f"delta must be >= 1, got {delta}")
        if correction_bits < 1 or correction_bits > 32:
            raise ValueError(f"correction_bits must be in [1, 32], got {correction_bits}")
        if max_segment_points < 1:
            raise ValueError(f"max_segment_points must be >= 1, got {max_segment_points}")
        self.delta = delta
        self.correction_bits = correction_bits
        self.max_segment_points = max_segment_points
        self._epsilon = (1 << (correction_bits - 1)) - 1

        self._seg_rank = array("Q")
        self._seg_first = array("Q")
        self._seg_slope = array("d")
        self._seg_offset = array("Q")
        self._seg_width = array("B")
        self._corr = bytearray()
        self._compressed = 0

        self._tail: List[int] = []
        self._len = 0

    # ------------------------------------------------------------------
    # append
    # ------------------------------------------------------------------
    def append_bit(self, bit: int) -> None:
        if bit:
            self._tail.append(self._len)
            self._len += 1
            if len(self._tail) >= self.delta:
                self.flush()
        else:
            self._len += 1

    def extend_zeros(self, count: int) -> None:
        if count < 0:
            raise ValueError("count must be >= 0")
        self._len += count

    def flush(self) -> None:
        """Fold the tail buffer into the compressed segments"""
        if not self._tail:
            return
        tail = np.asarray(self._tail, dtype=np.int64)
        nseg = len(self._seg_rank)
        if nseg and self._segment_length(nseg - 1) < self.max_segment_points:
            rank0 = self._seg_rank[-1]
            points = np.concatenate((self._decode_segment(nseg - 1), tail))
            self._drop_last_segment()
        else:
            rank0 = self._compressed
            points = tail
        self._fit(points, rank0)
        logger.debug(
            "flushed %d positions, %d segments, %d correction bytes",
            len(self._tail), len(self._seg_rank), len(self._corr),
        )
        self._tail.clear()

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------
    def rank1(self, i: int) -> int:
        if i < 0 or i >= self._len:
            raise IndexError(f"index {i} out of range for {self._len} bits")
        tail = self._tail
        if tail and i >= tail[0]:
            return self._compressed + bisect_right(tail, i)
        if not self._seg_first or i < self._seg_first[0]:
            return 0
        s = bisect_right(self._seg_first, i) - 1
        return self._seg_rank[s] + self._local_rank(s, i)

    def select1(self, x: int) -> int:
        total = self._compressed + len(self._tail)
        if x < 1 or x > total:
            raise IndexError(f"select1({x}) with {total} ones")
        if x > self._compressed:
            return self._tail[x - self._compressed - 1]
        s = bisect_right(self._seg_rank, x - 1) - 1
        return self._position(s, x - 1 - self._seg_rank[s])

    def access(self, i: int) -> int:
        return self.rank1(i) - (self.rank1(i - 1) if i > 0 else 0)

    def count_ones(self) -> int:
        return self._compressed + len(self._tail)

    def segment_count(self) -> int:
        return len(self._seg_rank)

    def size_in_bytes(self) -> int:
        return (
            PLA_HEADER_BYTES
            + PLA_SEGMENT_BYTES * len(self._seg_rank)
            + len(self._corr)
            + 8 * len(self._tail)
        )

    def __len__(self) -> int:
        return self._len

    # ------------------------------------------------------------------
    # segment internals
    # ------------------------------------------------------------------
    def _segment_length(self, s: int) -> int:
        end = self._seg_rank[s + 1] if s + 1 < len(self._seg_rank) else self._compressed
        return end - self._seg_rank[s]

    def _position(self, s: int, x: int) -> int:
        pos = self._seg_first[s] + math.floor(self._seg_slope[s] * x + 0.5)
        width = self._seg_width[s]
        if width:
            off = x * width
            lo = self._seg_offset[s] + (off >> 3)
            hi = self._seg_offset[s] + ((off + width + 7) >> 3)
            raw = (int.from_bytes(self._corr[lo:hi], "little") >> (off & 7)) & ((1 << width) - 1)
            pos += raw - (1 << (width - 1))
        return pos

    def _local_rank(self, s: int, i: int) -> int:
        """Number of ones of segment s at positions <= i (i >= first position)"""
        length = self._segment_length(s)
        if length == 1:
            return 1
        p0 = self._seg_first[s]
        slope = self._seg_slope[s]
        width = self._seg_width[s]
        lo, hi = 0, length - 1
        if slope > 0:
            slack = (1 << (width - 1) if width else 0) + 1
            lo = max(0, int((i - p0 - slack) / slope) - 1)
            hi = min(length - 1, int((i - p0 + slack) / slope) + 1)
            if lo > hi or self._position(s, lo) > i:
                lo = 0
            if hi < length - 1 and self._position(s, hi + 1) <= i:
                hi = length - 1
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if self._position(s, mid) <= i:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1

    def _decode_segment(self, s: int) -> np.ndarray:
        length = self._segment_length(s)
        width = self._seg_width[s]
        xs = np.arange(length, dtype=np.float64)
        pred = self._seg_first[s] + np.floor(self._seg_slope[s] * xs + 0.5).astype(np.int64)
        if not width:
            return pred
        start = self._seg_offset[s]
        nbytes = (length * width + 7) >> 3
        raw = _unpack_corrections(bytes(self._corr[start:start + nbytes]), width, length)
        return pred + raw - (1 << (width - 1))

    def _drop_last_segment(self) -> None:
        length = self._segment_length(len(self._seg_rank) - 1)
        del self._corr[self._seg_offset[-1]:]
        for arr in (self._seg_rank, self._seg_first, self._seg_slope, self._seg_offset, self._seg_width):
            arr.pop()
        self._compressed -= length

    def _fit(self, points: np.ndarray, rank0: int) -> None:
        """Greedy maximal segments over increasing positions"""
        eps = float(self._epsilon)
        total = len(points)
        i = 0
        while i < total:
            end = min(total, i + self.max_segment_points)
            p0 = int(points[i])
            if end - i == 1:
                slope, j = 0.0, i + 1
            else:
                dx = np.arange(1, end - i, dtype=np.float64)
                dp = (points[i + 1:end] - p0).astype(np.float64)
                lo = np.maximum.accumulate((dp - eps) / dx)
                hi = np.minimum.accumulate((dp + eps) / dx)
                broken = np.flatnonzero(lo > hi)
                fits = int(broken[0]) if broken.size else len(dx)
                slope = float(lo[fits - 1] + hi[fits - 1]) / 2.0
                j = i + 1 + fits
            j = self._close_segment(points, i, j, p0, slope, rank0 + i)
            i = j

    def _close_segment(self, points: np.ndarray, i: int, j: int, p0: int, slope: float, rank: int) -> int:
        while True:
            xs = np.arange(j - i, dtype=np.float64)
            pred = p0 + np.floor(slope * xs + 0.5).astype(np.int64)
            residuals = points[i:j] - pred
            worst = int(np.abs(residuals).max()) if residuals.size else 0
            width = worst.bit_length() + 1 if worst else 0
            if width <= self.correction_bits:
                break
            # float rounding pushed a residual past the bound
            j -= 1
        assert worst < (1 << (width - 1) if width else 1)

        self._seg_rank.append(rank)
        self._seg_first.append(p0)
        self._seg_slope.append(slope)
        self._seg_offset.append(len(self._corr))
        self._seg_width.append(width)
        if width:
            self._corr.extend(_pack_corrections(residuals + (1 << (width - 1)), width))
        self._compressed += j - i
        return j
