"""Coordinate <-> linear index codecs for row-major, Morton and Hilbert layouts.

A square matrix of side 2**n is addressed by coordinate pairs (y, x) with y
as the major coordinate.  Each layout defines a bijection between those
pairs and the linear range 0 .. 4**n - 1:

* row-major: ``y * 2**n + x``
* Morton:    bitwise interleaving of y and x, y contributing the more
  significant bit of each pair, so every bit pair of the index selects one
  quadrant of the remaining submatrix
* Hilbert:   Morton interleaving followed by a most-significant-first scan
  of the quadrant bit pairs, rewriting the bits that trail each examined
  pair with swap / swap-and-complement steps so that consecutive indices
  are always grid neighbours

All hot paths are numba-compiled; the public functions validate ranges in
Python and delegate to the compiled cores, which the matrix/trace kernels
also call directly.
"""

from __future__ import annotations

import enum

from numba import njit

MAX_ORDER = 31  # coordinate pairs must interleave into one 64-bit word

# Quadrant labels used by the Hilbert scan, as a function of the (y, x) bit
# pair at the examined level:
#
#   (y,x): (0,0) (0,1) (1,1) (1,0)
#   label:   0     1     2     3
#
# which on the packed pair value (y<<1 | x) is the 2-bit Gray code
# ``pair ^ (pair >> 1)``, an involution, so the same map also converts a
# quadrant label back to its bit pair.


class LayoutKind(enum.IntEnum):
    """Element storage orders.  Integer values double as file/kernel tags."""

    ROW_MAJOR = 0
    MORTON = 1
    HILBERT = 2

    @classmethod
    def parse(cls, name: str) -> "LayoutKind":
        try:
            return _LAYOUT_NAMES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown layout {name!r} (expected rowmajor, morton or hilbert)") from None

    @property
    def label(self) -> str:
        return _LAYOUT_LABELS[int(self)]


_LAYOUT_LABELS = ("rowmajor", "morton", "hilbert")
_LAYOUT_NAMES = {
    "rowmajor": LayoutKind.ROW_MAJOR,
    "row-major": LayoutKind.ROW_MAJOR,
    "rm": LayoutKind.ROW_MAJOR,
    "morton": LayoutKind.MORTON,
    "zorder": LayoutKind.MORTON,
    "z-order": LayoutKind.MORTON,
    "mo": LayoutKind.MORTON,
    "hilbert": LayoutKind.HILBERT,
    "ho": LayoutKind.HILBERT,
}


def check_order(n: int) -> int:
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"curve order n={n} outside [1, {MAX_ORDER}]")
    return n


def check_coord(y: int, x: int, n: int) -> None:
    check_order(n)
    side = 1 << n
    if not (0 <= y < side and 0 <= x < side):
        raise ValueError(f"coordinate (y={y}, x={x}) out of range for side {side}")


def check_index(i: int, n: int) -> None:
    check_order(n)
    if not 0 <= i < (1 << (2 * n)):
        raise ValueError(f"linear index {i} out of range for order n={n}")


# ---------------------------------------------------------------------------
# compiled cores


@njit(cache=True, inline="always")
def _dilate(v):
    # spread the low 32 bits so payload bit i lands at position 2i:
    # 5 shift-or steps, each followed by one of 5 constant masks
    v &= 0xFFFFFFFF
    v = (v | (v << 16)) & 0x0000FFFF0000FFFF
    v = (v | (v << 8)) & 0x00FF00FF00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v << 2)) & 0x3333333333333333
    v = (v | (v << 1)) & 0x5555555555555555
    return v


@njit(cache=True, inline="always")
def _undilate(w):
    # inverse of _dilate; stray odd-position bits are masked away first
    w &= 0x5555555555555555
    w = (w | (w >> 1)) & 0x3333333333333333
    w = (w | (w >> 2)) & 0x0F0F0F0F0F0F0F0F
    w = (w | (w >> 4)) & 0x00FF00FF00FF00FF
    w = (w | (w >> 8)) & 0x0000FFFF0000FFFF
    w = (w | (w >> 16)) & 0x00000000FFFFFFFF
    return w


@njit(cache=True, inline="always")
def _swap_pairs(t):
    # exchange the y (odd-position) and x (even-position) bits of an
    # interleaved word
    return ((t & 0x5555555555555555) << 1) | ((t >> 1) & 0x5555555555555555)


@njit(cache=True, inline="always")
def _rowmajor_encode(y, x, n):
    return (y << n) | x


@njit(cache=True, inline="always")
def _rowmajor_decode(i, n):
    return i >> n, i & ((1 << n) - 1)


@njit(cache=True, inline="always")
def _morton_encode(y, x, n):
    return (_dilate(y) << 1) | _dilate(x)


@njit(cache=True, inline="always")
def _morton_decode(i, n):
    return _undilate(i >> 1), _undilate(i)


@njit(cache=True)
def _hilbert_encode(y, x, n):
    s = (_dilate(y) << 1) | _dilate(x)
    h = 0
    for p in range(n - 1, -1, -1):
        pair = (s >> (2 * p)) & 3
        d = pair ^ (pair >> 1)
        h = (h << 2) | d
        trailing = (1 << (2 * p)) - 1
        t = s & trailing
        if d == 0:
            t = _swap_pairs(t)
        elif d == 3:
            t = _swap_pairs(t) ^ trailing
        s = t
    return h


@njit(cache=True)
def _hilbert_decode(h, n):
    # rebuild the interleaved word least-significant pair first; the swap
    # and swap-complement steps are involutions, so undoing a level applies
    # the same transform the encoder did
    s = 0
    for p in range(n):
        d = (h >> (2 * p)) & 3
        trailing = (1 << (2 * p)) - 1
        if d == 0:
            s = _swap_pairs(s)
        elif d == 3:
            s = _swap_pairs(s) ^ trailing
        pair = d ^ (d >> 1)
        s |= pair << (2 * p)
    return _undilate(s >> 1), _undilate(s)


@njit(cache=True, inline="always")
def _encode_any(tag, y, x, n):
    if tag == 0:
        return _rowmajor_encode(y, x, n)
    if tag == 1:
        return _morton_encode(y, x, n)
    return _hilbert_encode(y, x, n)


@njit(cache=True, inline="always")
def _decode_any(tag, i, n):
    if tag == 0:
        return _rowmajor_decode(i, n)
    if tag == 1:
        return _morton_decode(i, n)
    return _hilbert_decode(i, n)


# ---------------------------------------------------------------------------
# public API


def dilate(v: int) -> int:
    """Spread bits of ``v`` (< 2**32) so bit i moves to position 2i."""
    if not 0 <= v < (1 << 32):
        raise ValueError(f"dilate input {v} does not fit 32 bits")
    return int(_dilate(v))


def undilate(w: int) -> int:
    """Inverse of :func:`dilate`; bits at odd positions are ignored."""
    if not 0 <= w < (1 << 64):
        raise ValueError(f"undilate input {w} does not fit 64 bits")
    return int(_undilate(w & 0x5555555555555555))


def rowmajor_encode(y: int, x: int, n: int) -> int:
    check_coord(y, x, n)
    return int(_rowmajor_encode(y, x, n))


def rowmajor_decode(i: int, n: int) -> tuple[int, int]:
    check_index(i, n)
    y, x = _rowmajor_decode(i, n)
    return int(y), int(x)


def morton_encode(y: int, x: int, n: int) -> int:
    check_coord(y, x, n)
    return int(_morton_encode(y, x, n))


def morton_decode(i: int, n: int) -> tuple[int, int]:
    check_index(i, n)
    y, x = _morton_decode(i, n)
    return int(y), int(x)


def hilbert_encode(y: int, x: int, n: int) -> int:
    check_coord(y, x, n)
    return int(_hilbert_encode(y, x, n))


def hilbert_decode(i: int, n: int) -> tuple[int, int]:
    check_index(i, n)
    y, x = _hilbert_decode(i, n)
    return int(y), int(x)


def encode(kind: LayoutKind, y: int, x: int, n: int) -> int:
    """Linear index of (y, x) under ``kind`` for a 2**n-sided matrix."""
    check_coord(y, x, n)
    return int(_encode_any(int(kind), y, x, n))


def decode(kind: LayoutKind, i: int, n: int) -> tuple[int, int]:
    """Coordinate pair stored at linear index ``i`` under ``kind``."""
    check_index(i, n)
    y, x = _decode_any(int(kind), i, n)
    return int(y), int(x)


# Static primitive-operation counts for one encode.  Row-major is one
# multiply and one add.  Morton runs the dilation sequence twice (5 shifts
# + 5 masks each) and combines with one shift and one or, independent of n.
# Hilbert pays the Morton cost and then, per level: pair extract (2),
# quadrant relabel (1), index emit (2), trailing-mask build (2), pair swap
# (5) and complement (1).
_RM_COST = 2
_MO_COST = 2 * (5 + 5) + 2
_HO_LEVEL_COST = 13


def op_cost(kind: LayoutKind, n: int) -> int:
    """Shift/mask/arithmetic primitives one encode of ``kind`` performs."""
    check_order(n)
    kind = LayoutKind(kind)
    if kind is LayoutKind.ROW_MAJOR:
        return _RM_COST
    if kind is LayoutKind.MORTON:
        return _MO_COST
    return _MO_COST + _HO_LEVEL_COST * n
