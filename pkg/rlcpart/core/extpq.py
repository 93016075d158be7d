"""
External-memory priority queue for time-forward processing.

Entries <target, payload> are buffered in an in-memory heap; when the
buffer would exceed its byte budget it is written to disk as one sorted
run. extract_min_for(v) must be called with strictly increasing v and
returns the payloads of exactly the entries whose target is v, merging
the heap with the heads of all open runs.
"""

import heapq
import logging
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from .errors import SequencingError

logger = logging.getLogger(__name__)

# target: 8 bytes, payload: 4 bytes, little-endian
ENTRY = struct.Struct("<QI")
PAYLOAD_BITS = 32
PAYLOAD_MASK = (1 << PAYLOAD_BITS) - 1

DEFAULT_BUFFER_BYTES = 3 * 2**20
DEFAULT_BLOCK_BYTES = 64 * 1024


class ExtPqConfig(BaseModel):
    """Memory budget of the external queue"""
    internal_buffer_bytes: int = Field(DEFAULT_BUFFER_BYTES, description="M: in-memory entry budget")
    block_bytes: int = Field(DEFAULT_BLOCK_BYTES, description="M_B: disk transfer granularity")
    spill_dir: Optional[Path] = Field(None, description="Directory for run files (system temp if unset)")

    @model_validator(mode="after")
    def _check_budget(self) -> "ExtPqConfig":
        if self.block_bytes < ENTRY.size:
            raise ValueError(f"block_bytes must hold at least one {ENTRY.size}-byte entry")
        if self.internal_buffer_bytes < 2 * self.block_bytes:
            raise ValueError("internal_buffer_bytes must be at least 2 * block_bytes")
        return self


class _SortedRun:
    """Reader over one spilled run, holding one block of entries in memory"""

    def __init__(self, handle: BinaryIO, read_bytes: int):
        self._handle = handle
        self._read_bytes = read_bytes
        self._entries: List[Tuple[int, int]] = []
        self._pos = 0
        self.exhausted = False
        self._refill()

    def _refill(self) -> bool:
        data = self._handle.read(self._read_bytes)
        if not data:
            self.exhausted = True
            self.close()
            return False
        self._entries = list(ENTRY.iter_unpack(data))
        self._pos = 0
        return True

    @property
    def head(self) -> int:
        return self._entries[self._pos][0]

    def take(self, v: int, out: List[int]) -> None:
        """Move payloads with target v into out; stop at the first larger target"""
        while True:
            if self._pos == len(self._entries) and not self._refill():
                return
            target, payload = self._entries[self._pos]
            if target > v:
                return
            if target < v:
                raise SequencingError(f"run holds target {target} below extraction frontier {v}")
            out.append(payload)
            self._pos += 1

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


class ExternalPriorityQueue:
    """Spill-to-disk run-merge queue keyed by target node id"""

    def __init__(self, config: Optional[ExtPqConfig] = None):
        self.config = config or ExtPqConfig()
        self.capacity = max(1, self.config.internal_buffer_bytes // ENTRY.size)
        self.read_bytes = max(1, self.config.block_bytes // ENTRY.size) * ENTRY.size
        self._heap: List[int] = []
        self._runs: List[Tuple[int, int, _SortedRun]] = []
        self._frontier = -1

        self.inserted = 0
        self.extracted = 0
        self.runs_written = 0
        self.peak_buffer_entries = 0
        self.peak_tracked_bytes = 0

    def insert(self, target: int, payload: int) -> None:
        if target <= self._frontier:
            raise SequencingError(f"insert for target {target} at or behind frontier {self._frontier}")
        if payload < 0 or payload > PAYLOAD_MASK:
            raise ValueError(f"payload {payload} does not fit in {PAYLOAD_BITS} bits")
        heapq.heappush(self._heap, (target << PAYLOAD_BITS) | payload)
        self.inserted += 1
        if len(self._heap) > self.peak_buffer_entries:
            self.peak_buffer_entries = len(self._heap)
            self._track()
        if len(self._heap) >= self.capacity:
            self.spill()

    def spill(self) -> None:
        """Write the in-memory buffer to disk as one sorted run"""
        if not self._heap:
            return
        keys = sorted(self._heap)
        self._heap.clear()
        handle = tempfile.TemporaryFile(dir=self.config.spill_dir)
        batch = self.read_bytes // ENTRY.size
        for lo in range(0, len(keys), batch):
            handle.write(b"".join(
                ENTRY.pack(key >> PAYLOAD_BITS, key & PAYLOAD_MASK) for key in keys[lo:lo + batch]
            ))
        handle.seek(0)
        run = _SortedRun(handle, self.read_bytes)
        heapq.heappush(self._runs, (run.head, self.runs_written, run))
        self.runs_written += 1
        self._track()
        logger.debug("spilled run %d with %d entries", self.runs_written, len(keys))

    def extract_min_for(self, v: int) -> List[int]:
        """Remove and return the payloads of all entries with target v"""
        if v <= self._frontier:
            raise SequencingError(f"extract_min_for({v}) after {self._frontier}")
        out: List[int] = []
        heap = self._heap
        while heap and (heap[0] >> PAYLOAD_BITS) <= v:
            key = heapq.heappop(heap)
            if key >> PAYLOAD_BITS < v:
                raise SequencingError(f"buffered target {key >> PAYLOAD_BITS} below frontier {v}")
            out.append(key & PAYLOAD_MASK)
        runs = self._runs
        while runs and runs[0][0] <= v:
            _, order, run = heapq.heappop(runs)
            run.take(v, out)
            if not run.exhausted:
                heapq.heappush(runs, (run.head, order, run))
        self._frontier = v
        self.extracted += len(out)
        return out

    @property
    def pending(self) -> int:
        return self.inserted - self.extracted

    @property
    def open_runs(self) -> int:
        return len(self._runs)

    def tracked_bytes(self) -> int:
        return len(self._heap) * ENTRY.size + len(self._runs) * self.read_bytes

    def _track(self) -> None:
        current = self.tracked_bytes()
        if current > self.peak_tracked_bytes:
            self.peak_tracked_bytes = current

    def close(self) -> None:
        for _, _, run in self._runs:
            run.close()
        self._runs.clear()
        self._heap.clear()

    def __len__(self) -> int:
        return self.pending

    def __enter__(self) -> "ExternalPriorityQueue":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
