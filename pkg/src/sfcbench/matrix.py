"""Square float64 matrices stored under a space-filling-curve layout.

Element (y, x) of a side-2**n matrix lives at ``data[encode(layout, y, x, n)]``
in a flat backing array.  The same naive triple-loop multiplication runs on
all layouts; only the index function changes, so numerically identical
inputs give bit-identical products across layouts and worker counts.
"""

from __future__ import annotations

import functools
import struct
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import codec
from ._kernels import fill_permutation, matmul_rows
from .codec import LayoutKind

_MAGIC = b"SFCM"
_HEADER = struct.Struct("<4sII4x")  # magic, u32 n, u32 layout tag, 4 reserved bytes


@functools.lru_cache(maxsize=None)
def _permutation(tag: int, n: int) -> np.ndarray:
    # perm[row-major index] = layout index
    perm = np.empty(1 << (2 * n), dtype=np.int64)
    fill_permutation(tag, n, perm)
    return perm


class Matrix:
    """Immutable-shape square matrix; ``data`` is the flat backing array."""

    __slots__ = ("n", "layout", "data")

    def __init__(self, n: int, layout: LayoutKind, data: np.ndarray):
        codec.check_order(n)
        layout = LayoutKind(layout)
        if data.dtype != np.float64 or data.ndim != 1 or data.size != 1 << (2 * n):
            raise ValueError(f"backing array must be {1 << (2 * n)} contiguous float64 elements")
        self.n = n
        self.layout = layout
        self.data = data

    @property
    def side(self) -> int:
        return 1 << self.n

    @classmethod
    def zeros(cls, n: int, layout: LayoutKind) -> "Matrix":
        codec.check_order(n)
        return cls(n, layout, np.zeros(1 << (2 * n)))

    @classmethod
    def from_dense(cls, dense: np.ndarray, layout: LayoutKind) -> "Matrix":
        """Build from a logical 2-D array indexed [y, x]."""
        dense = np.ascontiguousarray(dense, dtype=np.float64)
        side = dense.shape[0]
        if dense.shape != (side, side) or side < 2 or side & (side - 1):
            raise ValueError(f"need a square power-of-two-sided matrix, got shape {dense.shape}")
        n = side.bit_length() - 1
        data = np.empty(side * side)
        data[_permutation(int(layout), n)] = dense.ravel()
        return cls(n, layout, data)

    def to_dense(self) -> np.ndarray:
        return self.data[_permutation(int(self.layout), self.n)].reshape(self.side, self.side)

    def get(self, y: int, x: int) -> float:
        codec.check_coord(y, x, self.n)
        return float(self.data[codec.encode(self.layout, y, x, self.n)])

    def set(self, y: int, x: int, value: float) -> None:
        codec.check_coord(y, x, self.n)
        self.data[codec.encode(self.layout, y, x, self.n)] = value

    def convert(self, target: LayoutKind) -> "Matrix":
        """Same elements re-serialized under ``target``; values bit-exact."""
        target = LayoutKind(target)
        if target is self.layout:
            return Matrix(self.n, self.layout, self.data.copy())
        out = np.empty_like(self.data)
        out[_permutation(int(target), self.n)] = self.data[_permutation(int(self.layout), self.n)]
        return Matrix(self.n, target, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.layout == other.layout
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"Matrix(n={self.n}, layout={self.layout.label}, side={self.side})"

    # -- raw fixture file format: 16-byte header + little-endian f64 array

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, self.n, int(self.layout)))
            fh.write(self.data.astype("<f8", copy=False).tobytes())

    @classmethod
    def load(cls, path) -> "Matrix":
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            if len(header) != _HEADER.size:
                raise ValueError(f"{path}: truncated header")
            magic, n, tag = _HEADER.unpack(header)
            if magic != _MAGIC:
                raise ValueError(f"{path}: bad magic {magic!r}")
            codec.check_order(n)
            data = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
        if data.size != 1 << (2 * n):
            raise ValueError(f"{path}: expected {1 << (2 * n)} elements, found {data.size}")
        return cls(n, LayoutKind(tag), data)


def random_matrix(n: int, layout: LayoutKind, rng) -> Matrix:
    """Uniform [0, 1) entries drawn row by row from ``rng`` (a numpy Generator)."""
    codec.check_order(n)
    side = 1 << n
    return Matrix.from_dense(rng.random((side, side)), layout)


def matmul(a: Matrix, b: Matrix, workers: int = 1) -> Matrix:
    """c = a · b under the inputs' common layout.

    Output rows are split into ``workers`` contiguous blocks, each owned by
    one thread; the kernel releases the GIL so blocks run in parallel.
    """
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")
    if a.layout != b.layout:
        raise ValueError(f"layout mismatch: {a.layout.label} vs {b.layout.label}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    c = Matrix.zeros(a.n, a.layout)
    tag = int(a.layout)
    side = a.side
    if workers == 1:
        matmul_rows(tag, a.n, a.data, b.data, c.data, 0, side)
        return c
    bounds = [(w * side // workers, (w + 1) * side // workers) for w in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(matmul_rows, tag, a.n, a.data, b.data, c.data, lo, hi)
            for lo, hi in bounds
            if lo < hi
        ]
        for fut in futures:
            fut.result()
    return c
