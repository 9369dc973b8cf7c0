"""Compiled kernels shared by the matrix, trace and cache-simulation code.

Index computation deliberately happens per element access inside the loops
rather than being hoisted into precomputed tables: the point of the
benchmark is that the coordinate->index translation cost is part of the
measured trade-off, so the kernels must actually pay it.
"""

import numpy as np
from numba import njit

from .codec import _encode_any


@njit(cache=True, nogil=True)
def matmul_rows(tag, n, a, b, c, row0, row1):
    # i-j-k loop nest, k innermost and ascending: every output element is
    # accumulated in the same floating-point order regardless of layout or
    # how the rows are partitioned across workers, so results are bit-exact
    # across both.
    side = 1 << n
    for y in range(row0, row1):
        for x in range(side):
            acc = 0.0
            for k in range(side):
                acc += a[_encode_any(tag, y, k, n)] * b[_encode_any(tag, k, x, n)]
            c[_encode_any(tag, y, x, n)] = acc


@njit(cache=True)
def fill_permutation(tag, n, out):
    # out[y * side + x] = linear index of (y, x) under the layout
    side = 1 << n
    for y in range(side):
        for x in range(side):
            out[y * side + x] = _encode_any(tag, y, x, n)


@njit(cache=True, nogil=True)
def trace_block(tag, n, y, x0, x1, a_base, b_base, c_base, c_in_register):
    """Access records for output row y, columns [x0, x1), in loop order.

    kinds: 0 = read, 1 = write.  With c_in_register the accumulator lives
    in a register during the k loop and C(y, x) is updated once afterwards
    (one read + one write, the load-modify-store of ``C[i] += acc``);
    otherwise every k step ends with one store to C(y, x).
    """
    side = 1 << n
    per_col = 2 * side + 2 if c_in_register else 3 * side
    total = (x1 - x0) * per_col
    kinds = np.empty(total, dtype=np.uint8)
    addrs = np.empty(total, dtype=np.int64)
    pos = 0
    for x in range(x0, x1):
        c_addr = c_base + 8 * _encode_any(tag, y, x, n)
        for k in range(side):
            kinds[pos] = 0
            addrs[pos] = a_base + 8 * _encode_any(tag, y, k, n)
            pos += 1
            kinds[pos] = 0
            addrs[pos] = b_base + 8 * _encode_any(tag, k, x, n)
            pos += 1
            if not c_in_register:
                kinds[pos] = 1
                addrs[pos] = c_addr
                pos += 1
        if c_in_register:
            kinds[pos] = 0
            addrs[pos] = c_addr
            pos += 1
            kinds[pos] = 1
            addrs[pos] = c_addr
            pos += 1
    return kinds, addrs


@njit(cache=True, nogil=True)
def sim_chunk(kinds, addrs, line_bits, set_bits, assoc, state_base, propagate,
              tags, stamps, counts, tick):
    """Replay one trace chunk through the hierarchy state.

    LRU replacement, allocate on both read and write misses, write-back
    with dirty evictions not charged.  A miss at level k is retried at
    level k+1 (same access kind) unless that level's propagate flag is
    off; every missing level on the path installs the line.

    counts rows are per level: [read hits, read misses, write hits,
    write misses].  Returns the advanced recency tick.
    """
    nlev = len(line_bits)
    for r in range(len(addrs)):
        addr = addrs[r]
        kind = kinds[r]
        tick += 1
        for lev in range(nlev):
            ways = assoc[lev]
            line = addr >> line_bits[lev]
            set_index = line & ((1 << set_bits[lev]) - 1)
            tag = line >> set_bits[lev]
            row = state_base[lev] + set_index * ways
            hit = False
            for w in range(ways):
                if tags[row + w] == tag:
                    stamps[row + w] = tick
                    hit = True
                    break
            if hit:
                counts[lev, 2 * kind] += 1
                break
            counts[lev, 2 * kind + 1] += 1
            victim = 0
            oldest = stamps[row]
            for w in range(1, ways):
                if stamps[row + w] < oldest:
                    oldest = stamps[row + w]
                    victim = w
            tags[row + victim] = tag
            stamps[row + victim] = tick
            if not propagate[lev]:
                break
    return tick
