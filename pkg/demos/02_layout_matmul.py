"""Layout-uniform matrix multiplication: one algorithm, three layouts.

The triple loop keeps k innermost and ascending, so products are
bit-identical across layouts and worker counts; what changes is the cost
of computing each element's address and the memory access pattern.

Run: python3 demos/02_layout_matmul.py
"""

import time

import numpy as np

from sfcbench import LayoutKind, Matrix, matmul

rng = np.random.default_rng(7)
n = 7  # 128 x 128
da = rng.random((1 << n, 1 << n))
db = rng.random((1 << n, 1 << n))

print(f"multiplying two {1 << n}x{1 << n} matrices under each layout\n")

results = {}
for kind in LayoutKind:
    a = Matrix.from_dense(da, kind)
    b = Matrix.from_dense(db, kind)
    matmul(a, b)  # warm the compiled kernel
    t0 = time.perf_counter()
    c = matmul(a, b)
    wall = time.perf_counter() - t0
    results[kind] = c.to_dense()
    print(f"{kind.label:9s} 1 worker: {wall * 1e3:8.2f} ms")

print()
ref = results[LayoutKind.ROW_MAJOR]
for kind in (LayoutKind.MORTON, LayoutKind.HILBERT):
    same = np.array_equal(results[kind], ref)
    print(f"{kind.label} result bit-identical to row-major: {same}")

print()
a = Matrix.from_dense(da, LayoutKind.HILBERT)
b = Matrix.from_dense(db, LayoutKind.HILBERT)
single = matmul(a, b, workers=1)
for workers in (2, 4, 8):
    t0 = time.perf_counter()
    c = matmul(a, b, workers=workers)
    wall = time.perf_counter() - t0
    print(f"hilbert {workers} workers: {wall * 1e3:8.2f} ms, bit-identical: {c == single}")
