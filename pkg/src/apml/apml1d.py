"""One-dimensional approximate PML via dynamic programming.

The approximate PML distribution maximizes a lower bound on the log
fingerprint likelihood obtained by summing only over permutations that mix
symbols within level sets.  The bound, over a candidate partition of the
alphabet into clumps of equal-mass symbols, decomposes as a sum of per-clump
scores

    score(clump) = log(size!) + total * log(total / (n * size)),

where ``total`` is the summed sample count of the clump's symbols and every
symbol in the clump carries mass total / (n * size).  The optimal partition
clumps contiguous runs of count values, so a quadratic dynamic program over
the distinct count values finds the global optimum.  Unseen symbols, when
present, must join the first (lowest-count) clump.

Support handling:

* known support K: unseen bin merged into the first clump, single DP pass;
* unknown support: the optimal number of unseen symbols F0 is found per
  candidate first clump by a unimodal integer search; when the objective is
  maximized only in the limit F0 -> infinity the result has a *continuous
  part* carrying the mass of the singleton symbols;
* minimum-mass support (every mass >= 1/K): the unknown-support search with
  candidates filtered for feasibility, used for support-size estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .core import Fingerprint, SuppF

__all__ = [
    "LevelSet",
    "LevelSetPartition",
    "FiniteSupport",
    "ContinuousSupport",
    "ApmlResult",
    "KnownSupport",
    "UnknownSupport",
    "MinMassSupport",
    "bar_v_level_set",
    "bar_v_partition",
    "bar_v_dense",
    "dp_known_support",
    "optimize_support",
    "apml",
]


@dataclass(frozen=True)
class LevelSet:
    """A clump of ``size`` equal-mass symbols with summed sample count ``total``."""

    size: int
    total: int


@dataclass(frozen=True)
class LevelSetPartition:
    """Clumps ordered by strictly increasing per-symbol mass."""

    clumps: tuple[LevelSet, ...]
    n: int

    def masses(self) -> np.ndarray:
        """Per-symbol mass of each clump (total / (n * size))."""
        return np.asarray(
            [c.total / (self.n * c.size) for c in self.clumps], dtype=float
        )

    def sizes(self) -> np.ndarray:
        return np.asarray([c.size for c in self.clumps], dtype=np.int64)

    def support(self) -> int:
        return int(sum(c.size for c in self.clumps))

    def dense(self) -> np.ndarray:
        """Expand to a dense sorted non-increasing probability vector."""
        sizes = self.sizes()
        return np.repeat(self.masses(), sizes)[::-1].copy()


@dataclass(frozen=True)
class FiniteSupport:
    k: int


@dataclass(frozen=True)
class ContinuousSupport:
    """Limit case: mass spread over infinitely many vanishing atoms."""

    discrete_mass: float
    continuous_mass: float


@dataclass(frozen=True)
class ApmlResult:
    """An approximate PML distribution as level sets plus a support decision.

    For a continuous result the partition holds only the discrete part and
    ``log_vbar`` is the limiting penalized objective value.
    """

    partition: LevelSetPartition
    support: FiniteSupport | ContinuousSupport
    log_vbar: float


@dataclass(frozen=True)
class KnownSupport:
    k: int


@dataclass(frozen=True)
class UnknownSupport:
    pass


@dataclass(frozen=True)
class MinMassSupport:
    """Support capped at k with every per-symbol mass at least 1/k."""

    k: int


def bar_v_level_set(size: int, total: int, n: int) -> float:
    """Score log(size!) + total*log(total/(n*size)) of one clump, in nats.

    total = 0 is allowed (the empty-mass clump scores log(size!)) so the
    support search can price an isolated unseen bin; final partitions never
    contain one.
    """
    if size < 1 or total < 0 or total > n:
        raise ValueError("invalid level set")
    v = float(gammaln(size + 1))
    if total > 0:
        v += total * math.log(total / (n * size))
    return v


def bar_v_partition(p: LevelSetPartition) -> float:
    """Sum of clump scores; the log-permanent lower bound of the partition."""
    return float(sum(bar_v_level_set(c.size, c.total, p.n) for c in p.clumps))


def bar_v_dense(p: Sequence[float], counts: Sequence[int], n: int) -> float:
    """Log-permanent lower bound for an explicit distribution.

    ``p`` is any positive probability vector and ``counts`` the per-symbol
    sample counts (zeros allowed for unseen symbols).  Equal entries of p are
    grouped into level sets:

        sum_levels log(|level|!) + sum_x counts[x] * log(p[x]).

    Used to cross-check the bound against exact permanents.
    """
    p = np.asarray(p, dtype=float)
    c = np.asarray(counts, dtype=float)
    if p.shape != c.shape:
        raise ValueError("dimension mismatch")
    if c.sum() != n:
        raise ValueError("inconsistent counts")
    _, level_sizes = np.unique(p, return_counts=True)
    return float(gammaln(level_sizes + 1).sum() + np.dot(c, np.log(p)))


class _DpTables:
    """One DP pass over the fingerprint bins, reusable for tail partitions.

    Bins are indexed 1..B in increasing count-value order; bin 0 is the
    unseen bin (f0 symbols, count 0).  ``v[i]`` is the best score over
    partitions of bins i..B whose first clump starts at bin i (bin 0, when
    nonempty, merges into the clump starting there), and ``best_j[i]`` the
    end bin of that first clump, largest on ties.
    """

    def __init__(self, supp: SuppF, f0: int):
        if f0 < 0:
            raise ValueError("f0 must be nonnegative")
        self.supp = supp
        self.f0 = f0
        self.n = supp.n
        b = len(supp.m)
        m = np.asarray(supp.m, dtype=np.int64)
        fc = np.asarray(supp.f_counts, dtype=np.int64)
        # prefix sums over bins 1..B; index 0 is the empty prefix
        self.psize = np.concatenate(([0], np.cumsum(fc)))
        self.ptot = np.concatenate(([0], np.cumsum(m * fc)))
        self.v = np.zeros(b + 2)
        self.best_j = np.zeros(b + 1, dtype=np.int64)
        for i in range(b, -1, -1):
            j_lo = max(i, 1)
            sizes = self.psize[j_lo:] - self.psize[j_lo - 1] + (f0 if i == 0 else 0)
            totals = self.ptot[j_lo:] - self.ptot[j_lo - 1]
            vals = (
                gammaln(sizes + 1)
                + totals * np.log(totals / (self.n * sizes))
                + self.v[j_lo + 1 :]
            )
            # argmax with ties resolved toward the largest clump
            rev = int(np.argmax(vals[::-1]))
            j = b - rev
            self.v[i] = vals[j - j_lo]
            self.best_j[i] = j

    def segment(self, i: int, j: int) -> LevelSet:
        j_lo = max(i, 1)
        size = int(self.psize[j] - self.psize[j_lo - 1])
        if i == 0:
            size += self.f0
        total = int(self.ptot[j] - self.ptot[j_lo - 1])
        return LevelSet(size=size, total=total)

    def tail_partition(self, start: int) -> tuple[LevelSet, ...]:
        clumps = []
        i = start
        b = len(self.supp.m)
        while i <= b:
            j = int(self.best_j[i])
            clumps.append(self.segment(i, j))
            i = j + 1
        return tuple(clumps)


def dp_known_support(f: Fingerprint, n: int) -> ApmlResult:
    """Optimal contiguous clumping when the support size is known.

    ``f.f0`` must be set (possibly 0).  Runs in O(B^2) for B distinct count
    values and returns the globally optimal partition, with unseen symbols
    merged into the lowest clump.
    """
    if f.f0 is None:
        raise ValueError("known-support solve requires f0")
    supp = SuppF.from_fingerprint(f, n)
    tables = _DpTables(supp, f.f0)
    partition = LevelSetPartition(clumps=tables.tail_partition(0), n=n)
    return ApmlResult(
        partition=partition,
        support=FiniteSupport(k=f.f0 + f.k_hat),
        log_vbar=float(tables.v[0]),
    )


def _f0_objective(f0: int, k: int, total: int) -> float:
    """log((k+f0)! / f0!) - total*log(k+f0): the unseen-count trade-off."""
    return float(
        gammaln(k + f0 + 1) - gammaln(f0 + 1) - total * math.log(k + f0)
    )


def _best_f0(k: int, total: int) -> int:
    """Maximizer of the unseen-count objective when total > k.

    The objective is unimodal in f0 with increments changing sign once, so
    the argmax is the first f0 whose increment is non-positive.  Galloping
    then bisecting on the increment sign finds it in O(log bracket) steps;
    the search never leaves the theoretical bracket
    (k^2 - total)/(total - k) + 1.
    """
    cap = max(0, (k * k - total) // (total - k) + 1)

    def increment(f0: int) -> float:
        # f(f0 + 1) - f(f0)
        return (
            math.log(k + f0 + 1)
            - math.log(f0 + 1)
            - total * math.log1p(1.0 / (k + f0))
        )

    if cap == 0 or increment(0) <= 0:
        return 0
    lo, hi = 0, 1  # increment(lo) > 0
    while hi < cap and increment(hi) > 0:
        lo, hi = hi, min(2 * hi, cap)
    if increment(hi) > 0:  # positive all the way to the bracket edge
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if increment(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class _Candidate:
    value: float
    i: int
    f0: int
    continuous: bool


def _support_candidates(tables: _DpTables) -> list[_Candidate]:
    """Penalized objective of each candidate first clump (bins 0..i).

    The candidate value is sup_f0(-log(f0!) + score(first clump)) plus the
    optimal score of the remaining bins, which algebraically equals

        v[i+1] + N_i*log(N_i/n) + max_f0 [log((K_i+f0)!/f0!) - N_i*log(K_i+f0)]

    with K_i symbols and N_i total count in bins 1..i.  When bin 1 holds
    singletons (count value 1) and i = 1, the inner sup is 0: attained at any
    f0 if F_1 = 1 (we pick 0), only in the limit f0 -> infinity if F_1 > 1
    (the continuous case).
    """
    supp = tables.supp
    n = tables.n
    out = []
    for i in range(1, len(supp.m) + 1):
        k_i = int(tables.psize[i])
        n_i = int(tables.ptot[i])
        base = float(tables.v[i + 1]) + n_i * math.log(n_i / n)
        if n_i == k_i:  # only when m_1 == 1 and i == 1
            f1 = supp.f_counts[0]
            out.append(_Candidate(base, i, 0, continuous=f1 > 1))
        else:
            f0 = _best_f0(k_i, n_i)
            out.append(
                _Candidate(base + _f0_objective(f0, k_i, n_i), i, f0, False)
            )
    return out


def _pick(cands: list[_Candidate]) -> _Candidate:
    # ties go to the larger first clump, consistent with the DP tie rule
    best = cands[0]
    for c in cands[1:]:
        if c.value >= best.value:
            best = c
    return best


def optimize_support(
    f: Fingerprint, n: int
) -> tuple[FiniteSupport | ContinuousSupport, ApmlResult]:
    """Approximate PML with the support size inferred from the data.

    Maximizes the likelihood bound jointly over the partition and the number
    of unseen symbols f0, penalized by log(f0!).  Returns the support
    decision and the solved result; a finite decision is re-solved at the
    chosen support size, a continuous decision carries mass F_1/n in the
    continuous part with the discrete remainder clumped optimally.
    """
    supp = SuppF.from_fingerprint(f, n)
    tables = _DpTables(supp, f0=0)
    best = _pick(_support_candidates(tables))
    if best.continuous:
        f1 = supp.f_counts[0]
        clumps = tables.tail_partition(2)
        support = ContinuousSupport(
            discrete_mass=1.0 - f1 / n, continuous_mass=f1 / n
        )
        result = ApmlResult(
            partition=LevelSetPartition(clumps=clumps, n=n),
            support=support,
            log_vbar=best.value,
        )
        return support, result
    k_star = best.f0 + f.k_hat
    result = dp_known_support(
        Fingerprint(entries=dict(f.entries), f0=best.f0), n
    )
    return FiniteSupport(k=k_star), result


def _minmass(f: Fingerprint, n: int, k_max: int) -> ApmlResult:
    """Unknown-support search restricted to masses >= 1/k_max, support <= k_max.

    Clump masses increase along the partition, so feasibility of the whole
    partition reduces to feasibility of the first clump; each candidate
    (i, f0) is filtered by the support cap and the first-clump mass bound,
    and the unimodal f0 search is clipped to the feasible range.
    """
    if k_max < f.k_hat:
        raise ValueError("support smaller than observed")
    supp = SuppF.from_fingerprint(f, n)
    tables = _DpTables(supp, f0=0)
    best: tuple[float, int, int] | None = None
    for i in range(1, len(supp.m) + 1):
        k_i = int(tables.psize[i])
        n_i = int(tables.ptot[i])
        # mass of the first clump is n_i / (n * (k_i + f0)) >= 1/k_max
        cap = min(k_max - f.k_hat, k_max * n_i // n - k_i)
        if cap < 0:
            continue
        if n_i == k_i:
            f1 = supp.f_counts[0]
            f0 = cap if f1 > 1 else 0
        else:
            f0 = min(_best_f0(k_i, n_i), cap)
        value = (
            float(tables.v[i + 1])
            + n_i * math.log(n_i / n)
            + _f0_objective(f0, k_i, n_i)
        )
        if best is None or value >= best[0]:
            best = (value, i, f0)
    assert best is not None  # i = B with f0 = 0 is always feasible
    _, i, f0 = best
    first = LevelSet(size=int(tables.psize[i]) + f0, total=int(tables.ptot[i]))
    clumps = (first,) + tables.tail_partition(i + 1)
    partition = LevelSetPartition(clumps=clumps, n=n)
    return ApmlResult(
        partition=partition,
        support=FiniteSupport(k=f.k_hat + f0),
        log_vbar=bar_v_partition(partition),
    )


def apml(
    f: Fingerprint,
    n: int,
    support_spec: KnownSupport | UnknownSupport | MinMassSupport,
) -> ApmlResult:
    """Solve the approximate PML under the requested support constraint."""
    if isinstance(support_spec, KnownSupport):
        if support_spec.k < f.k_hat:
            raise ValueError("support smaller than observed")
        known = Fingerprint(
            entries=dict(f.entries), f0=support_spec.k - f.k_hat
        )
        return dp_known_support(known, n)
    if isinstance(support_spec, UnknownSupport):
        return optimize_support(f, n)[1]
    if isinstance(support_spec, MinMassSupport):
        return _minmass(f, n, support_spec.k)
    raise TypeError(f"unrecognized support spec: {support_spec!r}")
