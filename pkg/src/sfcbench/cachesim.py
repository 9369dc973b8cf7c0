"""Trace-driven set-associative LRU cache hierarchy simulation.

``matmul_trace`` streams the logical byte addresses a triple-loop matrix
multiplication touches, restricted to a range of output rows; ``simulate``
replays any such stream through a configurable hierarchy and counts hits
and misses per level.  Misses only - there is no timing model, no
prefetcher and no paging: logical addresses are used as-is, which matches
how valgrind-style instrumentation sees a single-threaded run.

A trace is an iterable of chunks, each chunk a ``(kinds, addrs)`` pair of
equal-length numpy arrays (uint8 access kind: 0 read / 1 write, int64 byte
address).  Chunked streaming keeps memory constant for large runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple

import numpy as np

from ._kernels import sim_chunk, trace_block
from .codec import LayoutKind, check_order

TraceChunk = Tuple[np.ndarray, np.ndarray]

_LINE_ALIGN = 64


def _is_pow2(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


@dataclass(frozen=True)
class CacheLevel:
    """One cache level; capacity = line_bytes * sets * associativity."""

    line_bytes: int
    sets: int
    associativity: int
    propagate_misses: bool = True  # forward misses to the next level

    def __post_init__(self):
        if not _is_pow2(self.line_bytes):
            raise ValueError(f"line_bytes must be a power of two, got {self.line_bytes}")
        if not _is_pow2(self.sets):
            raise ValueError(f"sets must be a power of two, got {self.sets}")
        if self.associativity < 1:
            raise ValueError(f"associativity must be >= 1, got {self.associativity}")

    @property
    def capacity_bytes(self) -> int:
        return self.line_bytes * self.sets * self.associativity


@dataclass(frozen=True)
class Hierarchy:
    """Ordered cache levels, L1 first; line sizes must not shrink downstream."""

    levels: tuple

    def __post_init__(self):
        if not self.levels:
            raise ValueError("hierarchy needs at least one level")
        object.__setattr__(self, "levels", tuple(self.levels))
        sizes = [lv.line_bytes for lv in self.levels]
        if any(a > b for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"line sizes must be non-decreasing across levels, got {sizes}")

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    @classmethod
    def from_json(cls, source) -> "Hierarchy":
        """Load from a JSON list of {line_bytes, sets, associativity} objects."""
        if isinstance(source, (str, bytes)):
            spec = json.loads(source)
        elif hasattr(source, "read"):
            spec = json.load(source)
        else:
            spec = source
        levels = [
            CacheLevel(
                line_bytes=int(entry["line_bytes"]),
                sets=int(entry["sets"]),
                associativity=int(entry["associativity"]),
                propagate_misses=bool(entry.get("propagate_misses", True)),
            )
            for entry in spec
        ]
        return cls(tuple(levels))


def default_hierarchy() -> Hierarchy:
    """Dual-socket Sandy Bridge-EP single-socket view: L1 32 KB / 8-way,
    L2 256 KB / 8-way, L3 20 MB / 20-way, 64 B lines throughout."""
    return Hierarchy(
        (
            CacheLevel(64, 64, 8),
            CacheLevel(64, 512, 8),
            CacheLevel(64, 16384, 20),
        )
    )


def desk_hierarchy() -> Hierarchy:
    """default_hierarchy with the last level shrunk to 256 KB (8-way; the
    20-way original has no power-of-two set count at this size) so that
    three n=8 matrices already overflow it."""
    return Hierarchy(
        (
            CacheLevel(64, 64, 8),
            CacheLevel(64, 512, 8),
            CacheLevel(64, 512, 8),
        )
    )


# ---------------------------------------------------------------------------
# trace generation


def region_bases(n: int) -> tuple[int, int, int]:
    """Byte bases of the A, B, C element regions: distinct, 64-aligned,
    consecutive."""
    check_order(n)
    span = -(-8 * (1 << (2 * n)) // _LINE_ALIGN) * _LINE_ALIGN
    return 0, span, 2 * span


def matmul_trace(
    n: int,
    layout: LayoutKind,
    rows: tuple[int, int],
    c_in_register: bool = True,
    max_chunk: int = 1 << 18,
) -> Iterator[TraceChunk]:
    """Stream the access records of a matmul restricted to output rows
    [rows[0], rows[1]).

    Records appear in exact i-j-k execution order: per (y, x) the reads of
    A(y, k) and B(k, x) for ascending k, plus the C(y, x) accesses per the
    c_in_register model (see trace_block).  An empty row range yields an
    empty trace.
    """
    check_order(n)
    side = 1 << n
    row0, row1 = rows
    if not (0 <= row0 <= side and 0 <= row1 <= side):
        raise ValueError(f"row range {rows} outside [0, {side}]")
    a_base, b_base, c_base = region_bases(n)
    per_col = 2 * side + 2 if c_in_register else 3 * side
    cols_per_chunk = max(1, max_chunk // per_col)
    tag = int(LayoutKind(layout))
    for y in range(row0, row1):
        for x0 in range(0, side, cols_per_chunk):
            x1 = min(side, x0 + cols_per_chunk)
            yield trace_block(tag, n, y, x0, x1, a_base, b_base, c_base, c_in_register)


def materialize(trace: Iterable[TraceChunk]) -> TraceChunk:
    """Concatenate a chunked trace into one (kinds, addrs) pair."""
    kinds, addrs = [], []
    for k, a in trace:
        kinds.append(k)
        addrs.append(a)
    if not kinds:
        return np.empty(0, dtype=np.uint8), np.empty(0, dtype=np.int64)
    return np.concatenate(kinds), np.concatenate(addrs)


# ---------------------------------------------------------------------------
# simulation


@dataclass
class LevelStats:
    reads: int
    read_hits: int
    read_misses: int
    writes: int
    write_hits: int
    write_misses: int
    cold_misses: int  # distinct lines referenced; valid while upstream levels propagate

    @property
    def accesses(self) -> int:
        return self.reads + self.writes

    @property
    def hits(self) -> int:
        return self.read_hits + self.write_hits

    @property
    def misses(self) -> int:
        return self.read_misses + self.write_misses


@dataclass
class SimStats:
    levels: list

    def last(self) -> LevelStats:
        return self.levels[-1]


def simulate(trace: Iterable[TraceChunk], hierarchy: Hierarchy) -> SimStats:
    """Replay a trace and return per-level hit/miss statistics.

    LRU replacement, allocate on read and write misses, write-back with
    dirty evictions not charged; every access not satisfied at level k is
    retried at level k+1 with the same kind.
    """
    nlev = len(hierarchy)
    line_bits = np.array([lv.line_bytes.bit_length() - 1 for lv in hierarchy], dtype=np.int64)
    set_bits = np.array([lv.sets.bit_length() - 1 for lv in hierarchy], dtype=np.int64)
    assoc = np.array([lv.associativity for lv in hierarchy], dtype=np.int64)
    propagate = np.array([lv.propagate_misses for lv in hierarchy], dtype=np.bool_)
    sizes = [lv.sets * lv.associativity for lv in hierarchy]
    state_base = np.array([sum(sizes[:i]) for i in range(nlev)], dtype=np.int64)
    tags = np.full(sum(sizes), -1, dtype=np.int64)
    stamps = np.zeros(sum(sizes), dtype=np.int64)
    counts = np.zeros((nlev, 4), dtype=np.int64)

    # cold misses = first touches; a first touch misses everywhere, so each
    # level's count is the distinct-line count of the stream it can see
    deepest_reached = nlev
    for lev, level in enumerate(hierarchy):
        if not level.propagate_misses:
            deepest_reached = lev + 1
            break
    seen = [set() for _ in range(deepest_reached)]

    tick = 0
    for kinds, addrs in trace:
        tick = sim_chunk(
            kinds, addrs, line_bits, set_bits, assoc, state_base, propagate,
            tags, stamps, counts, tick,
        )
        for lev in range(deepest_reached):
            seen[lev].update(np.unique(addrs >> line_bits[lev]).tolist())

    levels = []
    for lev in range(nlev):
        rh, rm, wh, wm = (int(v) for v in counts[lev])
        levels.append(
            LevelStats(
                reads=rh + rm,
                read_hits=rh,
                read_misses=rm,
                writes=wh + wm,
                write_hits=wh,
                write_misses=wm,
                cold_misses=len(seen[lev]) if lev < deepest_reached else 0,
            )
        )
    return SimStats(levels)


def compare_layouts(
    n: int,
    hierarchy: Hierarchy,
    rows: tuple[int, int],
    c_in_register: bool = True,
) -> dict:
    """Run matmul_trace + simulate for all three layouts with one config."""
    return {
        kind: simulate(matmul_trace(n, kind, rows, c_in_register), hierarchy)
        for kind in (LayoutKind.ROW_MAJOR, LayoutKind.MORTON, LayoutKind.HILBERT)
    }


def middle_rows(n: int, count: int = 5) -> tuple[int, int]:
    """A ``count``-row window centred on the matrix midline."""
    side = 1 << n
    row0 = max(0, side // 2 - count // 2)
    return row0, min(side, row0 + count)


# ---------------------------------------------------------------------------
# trace files: 9-byte records, 1 byte kind (0 read / 1 write) + 8-byte
# little-endian address


def dump_trace(trace: Iterable[TraceChunk], fh) -> int:
    """Write a trace to a binary file object; returns the record count."""
    total = 0
    for kinds, addrs in trace:
        rec = np.empty((len(kinds), 9), dtype=np.uint8)
        rec[:, 0] = kinds
        rec[:, 1:] = addrs.astype("<i8").view(np.uint8).reshape(-1, 8)
        fh.write(rec.tobytes())
        total += len(kinds)
    return total


def load_trace(fh, max_chunk: int = 1 << 18) -> Iterator[TraceChunk]:
    """Stream chunks back from a binary trace file object."""
    while True:
        raw = fh.read(9 * max_chunk)
        if not raw:
            return
        if len(raw) % 9:
            raise ValueError("trace file length is not a multiple of the 9-byte record size")
        rec = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 9)
        kinds = rec[:, 0].copy()
        addrs = rec[:, 1:].copy().view("<i8").reshape(-1).astype(np.int64)
        yield kinds, addrs
