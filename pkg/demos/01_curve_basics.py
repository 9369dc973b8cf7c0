"""Coordinate codecs: row-major, Morton and Hilbert orders side by side.

Run: python3 demos/01_curve_basics.py
"""

from sfcbench import LayoutKind, decode, dilate, encode, op_cost, undilate

# Dilation spreads the bits of a coordinate so two coordinates interleave
# with a shift-and-or.  5 shift/mask steps handle any 32-bit value.
v = 0b1011
print(f"dilate({v:#06b}) = {dilate(v):#010b}")
print(f"undilate(...)  = {undilate(dilate(v)):#06b}")
print()

# An n=2 matrix has side 4.  Show where each (y, x) lands per layout.
n = 2
side = 1 << n
for kind in (LayoutKind.ROW_MAJOR, LayoutKind.MORTON, LayoutKind.HILBERT):
    print(f"{kind.label}: linear index of every (y, x)")
    for y in range(side):
        print("   " + " ".join(f"{encode(kind, y, x, n):2d}" for x in range(side)))
    print()

# Walking the Hilbert indices in order visits grid neighbours only;
# Morton jumps at quadrant boundaries.
for kind in (LayoutKind.MORTON, LayoutKind.HILBERT):
    steps = []
    prev = decode(kind, 0, n)
    for i in range(1, side * side):
        cur = decode(kind, i, n)
        steps.append(abs(cur[0] - prev[0]) + abs(cur[1] - prev[1]))
        prev = cur
    print(f"{kind.label}: step distances along the curve: {steps}")
print()

# Index computation cost ranks RM < MO < HO, and only HO grows with n.
for n in (4, 8, 16):
    costs = {k.label: op_cost(k, n) for k in LayoutKind}
    print(f"op_cost at n={n}: {costs}")

# Optional: render both curves if matplotlib is around.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not installed; skipping curve plot")
else:
    n = 4
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
    for ax, kind in zip(axes, (LayoutKind.MORTON, LayoutKind.HILBERT)):
        pts = [decode(kind, i, n) for i in range(1 << (2 * n))]
        ax.plot([x for _, x in pts], [y for y, _ in pts], lw=1)
        ax.set_title(f"{kind.label} order, {1 << n}x{1 << n}")
        ax.invert_yaxis()
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig("curves.png", dpi=120)
    print("\nwrote curves.png")
