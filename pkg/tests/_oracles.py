"""Independent brute-force oracles used to pin expected test values.

Nothing here shares code with the library paths under test: the partition
function uses Euler's pentagonal recurrence, partition scores are recomputed
from first principles with math.lgamma, and optimal partitions come from
exhaustive enumeration.
"""

import itertools
import math
from math import lgamma


def partition_function_euler(limit):
    """p(0..limit) via the pentagonal number recurrence."""
    p = [1] + [0] * limit
    for n in range(1, limit + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > n and g2 > n:
                break
            sign = -1 if k % 2 == 0 else 1
            if g1 <= n:
                total += sign * p[n - g1]
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return p


def iter_set_partitions(items):
    """All set partitions of a list, as lists of lists."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in iter_set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1 :]
        yield [[first]] + smaller


def clump_score(size, total, n):
    """log(size!) + total*log(total/(n*size)) recomputed independently."""
    v = lgamma(size + 1)
    if total > 0:
        v += total * math.log(total / (n * size))
    return v


def partition_score(blocks, counts, n):
    """Score of a set partition of symbol indices given per-symbol counts."""
    return sum(
        clump_score(len(b), sum(counts[x] for x in b), n) for b in blocks
    )


def best_set_partition_score(counts, n):
    """Exhaustive max over all set partitions of the symbols."""
    idx = range(len(counts))
    return max(
        partition_score(blocks, counts, n)
        for blocks in iter_set_partitions(idx)
    )


def iter_contiguous_partitions(num_bins, attach_first=0):
    """All splits of bins 0..num_bins-1 into contiguous blocks.

    ``attach_first`` extra items (the unseen bin) are prepended to the first
    block's size accounting by the caller; here we only yield index blocks.
    """
    if num_bins == 0:
        yield []
        return
    for cuts in itertools.product([False, True], repeat=num_bins - 1):
        blocks = [[0]]
        for i, cut in enumerate(cuts, start=1):
            if cut:
                blocks.append([i])
            else:
                blocks[-1].append(i)
        yield blocks


def best_contiguous_score(m, f_counts, n, f0=0):
    """Exhaustive max over contiguous clumpings of fingerprint bins.

    The unseen bin (f0 symbols, zero count) always joins the first block.
    """
    best = -math.inf
    for blocks in iter_contiguous_partitions(len(m)):
        score = 0.0
        for bi, block in enumerate(blocks):
            size = sum(f_counts[i] for i in block) + (f0 if bi == 0 else 0)
            total = sum(m[i] * f_counts[i] for i in block)
            score += clump_score(size, total, n)
        best = max(best, score)
    return best


def score_clump_dd(size, totals, ns):
    v = lgamma(size + 1)
    for t, n_d in zip(totals, ns):
        if t > 0:
            v += t * math.log(t / (n_d * size))
    return v


def best_set_partition_score_dd(vec_counts, ns):
    """Exhaustive max over set partitions of symbols with count vectors.

    ``vec_counts`` is a list of per-symbol count vectors (one entry per
    symbol, zero vectors allowed for unseen symbols).
    """
    idx = range(len(vec_counts))
    dims = len(ns)
    best = -math.inf
    for blocks in iter_set_partitions(idx):
        score = 0.0
        for block in blocks:
            totals = tuple(
                sum(vec_counts[x][d] for x in block) for d in range(dims)
            )
            score += score_clump_dd(len(block), totals, ns)
        best = max(best, score)
    return best
