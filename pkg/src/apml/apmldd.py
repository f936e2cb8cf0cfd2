"""Approximate PML over several samples via greedy pairwise clump merging.

The likelihood bound generalizes coordinate-wise: a clump of ``size``
symbols with per-dimension summed counts ``totals`` scores

    log(size!) + sum_d totals[d] * log(totals[d] / (n_d * size)).

Count vectors admit no natural total order, so instead of dynamic
programming we greedily merge the pair of clumps with the largest positive
score gain until no merge helps (a local optimum).  A k-nearest-neighbor
restriction on candidate pairs keeps the scan near-linear; with k at least
the number of clumps it degenerates to the exact pairwise scan.

Unseen symbols start as a single zero-count clump.  A final partition that
leaves that clump unmerged would assign those symbols zero mass in every
dimension, contradicting the assumed support, so such an outcome is marked
invalid (score -inf); the support-size search skips invalid candidates.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .core import FingerprintD, Histogram, fingerprint_dd

__all__ = [
    "ClumpD",
    "PartitionD",
    "bar_v_clump_dd",
    "greedy_merge",
    "greedy_merge_knn",
    "optimize_support_dd",
    "apml_dd",
    "DEFAULT_KNN",
]

DEFAULT_KNN = 5


@dataclass(frozen=True)
class ClumpD:
    size: int
    totals: tuple[int, ...]


@dataclass(frozen=True)
class PartitionD:
    """Clumps of a D-dimensional approximate PML, plus its score.

    ``log_vbar`` is -inf for an invalid partition (unseen clump never
    merged).  Clump order is per-dimension mass tuples, decreasing.
    """

    clumps: tuple[ClumpD, ...]
    ns: tuple[int, ...]
    log_vbar: float

    def masses(self) -> np.ndarray:
        """Array of shape (num_clumps, D): per-symbol mass by dimension."""
        out = np.empty((len(self.clumps), len(self.ns)))
        for row, c in enumerate(self.clumps):
            for d, n_d in enumerate(self.ns):
                out[row, d] = c.totals[d] / (n_d * c.size)
        return out

    def sizes(self) -> np.ndarray:
        return np.asarray([c.size for c in self.clumps], dtype=np.int64)

    def support(self) -> int:
        return int(sum(c.size for c in self.clumps))

    def dense(self) -> list[np.ndarray]:
        """Expand to D dense vectors with one entry per symbol, clump-paired."""
        sizes = self.sizes()
        m = self.masses()
        return [np.repeat(m[:, d], sizes) for d in range(len(self.ns))]


def bar_v_clump_dd(c: ClumpD, ns: Sequence[int]) -> float:
    """Score of one clump, natural log, with 0*log(0) = 0."""
    if c.size < 1:
        raise ValueError("invalid clump")
    v = float(gammaln(c.size + 1))
    for total, n_d in zip(c.totals, ns):
        if total > 0:
            v += total * math.log(total / (n_d * c.size))
    return v


def _merged(a: ClumpD, b: ClumpD) -> ClumpD:
    return ClumpD(
        size=a.size + b.size,
        totals=tuple(x + y for x, y in zip(a.totals, b.totals)),
    )


class _Greedy:
    """Max-gain pairwise merging over an explicit candidate-pair stream.

    Clumps carry stable integer ids (creation order); the pair heap is keyed
    by (-gain, id_low, id_high) so equal gains resolve toward the smallest
    id pair.  Pair gains never change while both clumps live, so stale heap
    entries are exactly those naming a dead clump.
    """

    def __init__(self, f: FingerprintD, f0: int):
        if f0 < 0:
            raise ValueError("f0 must be nonnegative")
        self.ns = f.ns
        self.clumps: dict[int, ClumpD] = {}
        self.scores: dict[int, float] = {}
        self.zero_id: int | None = None
        for vec in sorted(f.entries):
            mult = f.entries[vec]
            self._add(
                ClumpD(size=mult, totals=tuple(i * mult for i in vec))
            )
        if f0 > 0:
            self.zero_id = self._add(
                ClumpD(size=f0, totals=(0,) * f.dims)
            )
        self.heap: list[tuple[float, int, int]] = []
        self.merge_gains: list[float] = []

    def _add(self, c: ClumpD) -> int:
        cid = len(self.scores)
        self.clumps[cid] = c
        self.scores[cid] = bar_v_clump_dd(c, self.ns)
        return cid

    def gain(self, i: int, j: int) -> float:
        union = _merged(self.clumps[i], self.clumps[j])
        return (
            bar_v_clump_dd(union, self.ns) - self.scores[i] - self.scores[j]
        )

    def push(self, i: int, j: int):
        if i == j:
            return
        lo, hi = (i, j) if i < j else (j, i)
        heapq.heappush(self.heap, (-self.gain(lo, hi), lo, hi))

    def run(self, on_merge=None):
        while self.heap:
            neg_gain, i, j = heapq.heappop(self.heap)
            if i not in self.clumps or j not in self.clumps:
                continue
            if -neg_gain <= 0:
                break
            self.merge_gains.append(-neg_gain)
            new = _merged(self.clumps[i], self.clumps[j])
            del self.clumps[i], self.clumps[j]
            if self.zero_id in (i, j):
                self.zero_id = None
            new_id = self._add(new)
            if on_merge is None:
                for other in self.clumps:
                    if other != new_id:
                        self.push(new_id, other)
            else:
                on_merge(i, j, new_id)
        return self

    def result(self) -> PartitionD:
        valid = self.zero_id is None
        order = sorted(
            self.clumps,
            key=lambda cid: tuple(
                -t / (n_d * self.clumps[cid].size)
                for t, n_d in zip(self.clumps[cid].totals, self.ns)
            )
            + (cid,),
        )
        clumps = tuple(self.clumps[cid] for cid in order)
        log_vbar = (
            float(sum(self.scores[cid] for cid in self.clumps))
            if valid
            else -math.inf
        )
        return PartitionD(clumps=clumps, ns=self.ns, log_vbar=log_vbar)


def greedy_merge(f: FingerprintD, f0: int = 0) -> PartitionD:
    """Exhaustive-pair greedy merging (the quadratic reference variant)."""
    g = _Greedy(f, f0)
    for i, j in itertools.combinations(sorted(g.clumps), 2):
        g.push(i, j)
    return g.run().result()


class _NeighborLists:
    """Per-clump lists of the k nearest clump mean-count points."""

    def __init__(self, greedy: _Greedy, k: int):
        self.g = greedy
        self.k = k
        self.points: dict[int, np.ndarray] = {
            cid: self._point(cid) for cid in greedy.clumps
        }
        ids = sorted(greedy.clumps)
        self.nbrs: dict[int, list[int]] = {
            cid: self._nearest(cid, [o for o in ids if o != cid])
            for cid in ids
        }

    def _point(self, cid: int) -> np.ndarray:
        c = self.g.clumps[cid]
        return np.asarray(
            [t / (n_d * c.size) for t, n_d in zip(c.totals, self.g.ns)]
        )

    def _nearest(self, cid: int, candidates: list[int]) -> list[int]:
        p = self.points[cid]
        ranked = sorted(
            candidates,
            key=lambda o: (float(np.sum((self.points[o] - p) ** 2)), o),
        )
        return ranked[: self.k]

    def on_merge(self, i: int, j: int, new_id: int):
        union = {
            o
            for o in self.nbrs.pop(i, []) + self.nbrs.pop(j, [])
            if o in self.g.clumps and o != new_id
        }
        self.points[new_id] = self._point(new_id)
        self.nbrs[new_id] = self._nearest(new_id, sorted(union))
        touched = set(self.nbrs[new_id])
        for cid, lst in self.nbrs.items():
            if cid == new_id:
                continue
            if i in lst or j in lst:
                kept = [o for o in lst if o in self.g.clumps]
                self.nbrs[cid] = self._nearest(cid, sorted(set(kept) | {new_id}))
                if new_id in self.nbrs[cid]:
                    touched.add(cid)
        for other in touched:
            self.g.push(new_id, other)


def greedy_merge_knn(f: FingerprintD, f0: int = 0, k: int = DEFAULT_KNN) -> PartitionD:
    """Greedy merging restricted to promising pairs.

    A pair is promising when either clump's mean-count point is among the k
    Euclidean nearest neighbors of the other's.  After a merge, the new
    clump's neighbor list is rebuilt from the union of its parents' lists.
    With k >= number of initial clumps - 1 this equals :func:`greedy_merge`.
    """
    if k < 1:
        raise ValueError("k must be positive")
    g = _Greedy(f, f0)
    nl = _NeighborLists(g, k)
    seen = set()
    for cid, lst in nl.nbrs.items():
        for other in lst:
            pair = (min(cid, other), max(cid, other))
            if pair not in seen:
                seen.add(pair)
                g.push(*pair)
    return g.run(on_merge=nl.on_merge).result()


def _force_valid(f: FingerprintD, f0: int, k: int) -> PartitionD:
    """Known-support fallback: make the unseen clump merge, then re-settle.

    Runs the standard greedy; if the zero clump survives, applies its
    least-bad merge and resumes until no positive gain remains.
    """
    g = _Greedy(f, f0)
    nl = _NeighborLists(g, k)
    for cid, lst in nl.nbrs.items():
        for other in lst:
            g.push(min(cid, other), max(cid, other))
    g.run(on_merge=nl.on_merge)
    while g.zero_id is not None and len(g.clumps) > 1:
        z = g.zero_id
        partner = max(
            (cid for cid in g.clumps if cid != z),
            key=lambda cid: (g.gain(min(z, cid), max(z, cid)), -cid),
        )
        new = _merged(g.clumps[z], g.clumps[partner])
        del g.clumps[z], g.clumps[partner]
        g.zero_id = None
        new_id = g._add(new)
        nl.on_merge(z, partner, new_id)
        g.run(on_merge=nl.on_merge)
    return g.result()


def optimize_support_dd(
    f: FingerprintD, k: int = DEFAULT_KNN, probes: int = 32
) -> tuple[int, PartitionD]:
    """Heuristic support-size search for the D-dimensional case.

    Probes candidate support sizes K on a geometric grid over
    [K_hat, max_d n_d^2], scoring greedy(K) - log((K - K_hat)!), then
    refines around the best probe by integer ternary search.  The objective
    is not unimodal in K, so this is a bounded-cost heuristic, not an exact
    argmax.
    """
    k_hat = f.k_hat
    k_max = max(n_d * n_d for n_d in f.ns)
    cache: dict[int, float] = {}
    parts: dict[int, PartitionD] = {}

    def objective(kk: int) -> float:
        if kk not in cache:
            part = greedy_merge_knn(f, f0=kk - k_hat, k=k)
            parts[kk] = part
            cache[kk] = part.log_vbar - float(gammaln(kk - k_hat + 1))
        return cache[kk]

    if k_max <= k_hat:
        return k_hat, greedy_merge_knn(f, f0=0, k=k)
    ratio = k_max / k_hat
    grid = sorted(
        {
            int(round(k_hat * ratio ** (t / (probes - 1))))
            for t in range(probes)
        }
    )
    best_k = max(grid, key=lambda kk: (objective(kk), -kk))
    pos = grid.index(best_k)
    lo = grid[pos - 1] if pos > 0 else best_k
    hi = grid[pos + 1] if pos + 1 < len(grid) else best_k
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if objective(m1) < objective(m2):
            lo = m1 + 1
        else:
            hi = m2 - 1
    best_k = max(range(lo, hi + 1), key=lambda kk: (objective(kk), -kk))
    if not math.isfinite(cache[best_k]):
        best_k = k_hat  # no feasible unseen placement; fall back to observed
        objective(best_k)
    return best_k, parts[best_k]


def apml_dd(
    hs: Sequence[Histogram],
    support_spec=None,
    k: int = DEFAULT_KNN,
) -> tuple[list[np.ndarray], PartitionD]:
    """Fit the D-dimensional approximate PML to D histograms.

    ``support_spec`` is a known support size (int) or None for unknown.
    Returns the D dense distributions (consistent clump order across
    dimensions, decreasing in the first dimension's mass) and the partition.
    """
    f = fingerprint_dd(hs)
    if support_spec is None:
        _, part = optimize_support_dd(f, k=k)
    else:
        if support_spec < f.k_hat:
            raise ValueError("support smaller than observed")
        part = greedy_merge_knn(f, f0=support_spec - f.k_hat, k=k)
        if not math.isfinite(part.log_vbar):
            part = _force_valid(f, f0=support_spec - f.k_hat, k=k)
    return part.dense(), part
