"""Canonical data types and fingerprint construction.

A *histogram* tallies how often each symbol occurred in a sample.  A
*fingerprint* (also called a profile, or histogram of histograms) forgets the
symbol labels and records, for each count value i >= 1, how many symbols were
seen exactly i times.  The optional entry F0 counts symbols known to exist in
the alphabet but unseen in the sample; it is only available when the support
size is known.

Symbol ids are opaque integers; string interning for text inputs happens at
the CLI layer.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Histogram",
    "Fingerprint",
    "SuppF",
    "SortedDistribution",
    "FingerprintD",
    "build_histogram",
    "histogram_from_counts",
    "fingerprint",
    "fingerprint_dd",
    "enumerate_fingerprints",
    "iter_partitions",
    "supp_bound",
]


@dataclass(frozen=True)
class Histogram:
    """Per-symbol sample counts; ``n`` is the total number of samples."""

    counts: Mapping[int, int]
    n: int

    @property
    def k_hat(self) -> int:
        """Number of distinct observed symbols."""
        return len(self.counts)


@dataclass(frozen=True)
class Fingerprint:
    """Sparse fingerprint: ``entries[i]`` symbols were seen exactly i times.

    ``f0`` is the number of unseen symbols when the alphabet size is known,
    or None when it is not.
    """

    entries: Mapping[int, int]
    f0: int | None = None

    @property
    def n(self) -> int:
        return sum(i * fi for i, fi in self.entries.items())

    @property
    def k_hat(self) -> int:
        return sum(self.entries.values())


@dataclass(frozen=True)
class SuppF:
    """Dense ordered view of a fingerprint, used by the 1-D solver.

    ``m`` lists the observed count values in strictly increasing order and
    ``f_counts[i]`` is the number of symbols seen exactly ``m[i]`` times.
    """

    m: tuple[int, ...]
    f_counts: tuple[int, ...]
    n: int

    @classmethod
    def from_fingerprint(cls, f: Fingerprint, n: int | None = None) -> "SuppF":
        m = tuple(sorted(f.entries))
        if not m or m[0] < 1:
            raise ValueError("inconsistent fingerprint")
        fn = sum(i * fi for i, fi in f.entries.items())
        if n is None:
            n = fn
        elif n != fn:
            raise ValueError("inconsistent fingerprint")
        return cls(m=m, f_counts=tuple(f.entries[i] for i in m), n=n)


@dataclass(frozen=True)
class SortedDistribution:
    """Probability vector sorted non-increasingly."""

    masses: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "masses", arr)
        if arr.size and abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1")
        if np.any(np.diff(arr) > 0):
            raise ValueError("masses must be non-increasing")


@dataclass(frozen=True)
class FingerprintD:
    """D-dimensional fingerprint over count vectors.

    ``entries`` maps a count vector (i_1, ..., i_D) != 0 to the number of
    symbols with exactly those per-sample counts; ``ns`` holds the D sample
    sizes.  ``f0`` counts symbols unseen by every sample, when known.
    """

    dims: int
    entries: Mapping[tuple[int, ...], int]
    ns: tuple[int, ...]
    f0: int | None = None

    @property
    def k_hat(self) -> int:
        return sum(self.entries.values())


def build_histogram(samples: Iterable[int]) -> Histogram:
    """Tally a sequence of symbol ids into a Histogram.

    Raises ValueError("empty sample") on empty input.
    """
    counts = Counter(samples)
    if not counts:
        raise ValueError("empty sample")
    return Histogram(counts=dict(counts), n=sum(counts.values()))


def histogram_from_counts(counts: Sequence[int] | np.ndarray) -> Histogram:
    """Histogram from a dense per-symbol count array (zeros dropped)."""
    arr = np.asarray(counts)
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        raise ValueError("empty sample")
    return Histogram(
        counts={int(x): int(arr[x]) for x in nz}, n=int(arr.sum())
    )


def fingerprint(h: Histogram, assumed_support: int | None = None) -> Fingerprint:
    """Fingerprint of a histogram.

    With ``assumed_support`` K given, F0 = K - K_hat unseen symbols are
    recorded; K < K_hat raises ValueError("support smaller than observed").
    """
    entries = Counter(h.counts.values())
    f0 = None
    if assumed_support is not None:
        if assumed_support < len(h.counts):
            raise ValueError("support smaller than observed")
        f0 = assumed_support - len(h.counts)
    return Fingerprint(entries=dict(entries), f0=f0)


def fingerprint_dd(hs: Sequence[Histogram]) -> FingerprintD:
    """Joint fingerprint of D histograms over the union of their supports.

    A symbol absent from histogram d contributes coordinate i_d = 0; the
    all-zero vector never appears because the union support excludes symbols
    unseen by every sample.
    """
    if not hs:
        raise ValueError("need at least one histogram")
    symbols = set()
    for h in hs:
        if not h.counts:
            raise ValueError("empty sample")
        symbols.update(h.counts)
    entries: Counter[tuple[int, ...]] = Counter()
    for x in symbols:
        entries[tuple(h.counts.get(x, 0) for h in hs)] += 1
    return FingerprintD(
        dims=len(hs),
        entries=dict(entries),
        ns=tuple(h.n for h in hs),
        f0=None,
    )


def iter_partitions(n: int, max_parts: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield the integer partitions of n as non-increasing tuples.

    ``max_parts`` restricts the number of parts; partitions of n with at most
    K parts are exactly the fingerprints realizable by n samples over an
    alphabet of K symbols.
    """
    if n == 0:
        yield ()
        return

    def rec(remaining: int, largest: int, parts: list[int]):
        if remaining == 0:
            yield tuple(parts)
            return
        if max_parts is not None and len(parts) >= max_parts:
            return
        for part in range(min(largest, remaining), 0, -1):
            parts.append(part)
            yield from rec(remaining - part, part, parts)
            parts.pop()

    yield from rec(n, n, [])


def enumerate_fingerprints(n: int) -> int:
    """Count the distinct fingerprints on n samples by direct enumeration.

    Each fingerprint of an n-sample corresponds to one unordered integer
    partition of n, so the result equals the partition number p(n).  Guarded
    to n <= 40 since the count grows subexponentially but enumeration does
    not.
    """
    if not 1 <= n <= 40:
        raise ValueError("n out of enumeration guard range [1, 40]")
    return sum(1 for _ in iter_partitions(n))


def supp_bound(n: int) -> float:
    """Upper bound (sqrt(8n+1)+1)/2 on the number of distinct count values."""
    return (math.sqrt(8 * n + 1) + 1) / 2
