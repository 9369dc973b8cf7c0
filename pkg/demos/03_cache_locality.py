"""Trace-driven locality experiment: last-level misses per layout.

Replays the exact memory accesses of a few output rows of a matmul
through a simulated cache hierarchy whose last level is small enough that
the three n=8 input/output matrices (512 KB each) cannot fit.  The
space-filling layouts keep far more of the streamed B matrix useful per
fetched line than row-major order does, and the Hilbert order edges out
Morton because it never jumps across quadrant boundaries.

Run: python3 demos/03_cache_locality.py
"""

from sfcbench import LayoutKind, compare_layouts, desk_hierarchy, middle_rows

n = 8
hierarchy = desk_hierarchy()
rows = middle_rows(n)

print(f"matrix side {1 << n}, output rows {rows[0]}..{rows[1] - 1}")
print("hierarchy:", ", ".join(
    f"L{i} {lv.capacity_bytes // 1024} KB/{lv.associativity}-way" for i, lv in enumerate(hierarchy, 1)
))
print()

stats = compare_layouts(n, hierarchy, rows)

print(f"{'layout':10s} {'LL reads':>10s} {'LL read misses':>15s} {'LL cold':>9s}")
for kind in LayoutKind:
    last = stats[kind].last()
    print(f"{kind.label:10s} {last.reads:10d} {last.read_misses:15d} {last.cold_misses:9d}")

mo = stats[LayoutKind.MORTON].last().read_misses
ho = stats[LayoutKind.HILBERT].last().read_misses
print(f"\nhilbert/morton last-level read-miss ratio: {ho / mo:.4f}")
print("(on a full-size 20 MB last level this gap shrinks to a couple of")
print(" percent, but the ordering hilbert <= morton < row-major persists")
print(" whenever the matrices outgrow the last level)")
