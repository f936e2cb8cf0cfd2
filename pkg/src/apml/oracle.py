"""Exact small-scale reference computations.

Everything here is an oracle for testing the approximate solvers: exact
matrix permanents, exact fingerprint probabilities, brute-force grid search
over the simplex, EM ascent on the fingerprint likelihood, and the
closed-form solution on a binary alphabet.  All guards are hard size limits,
not tunables.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Fingerprint, FingerprintD, Histogram

__all__ = [
    "permanent",
    "permanent_naive",
    "log_permanent",
    "likelihood_matrix",
    "log_prob_fingerprint",
    "log_prob_fingerprint_dd",
    "exact_pml_grid",
    "em_pml_1d",
    "em_pml_2d",
    "binary_exact_pml",
    "dd_binary_nonuniformity_certificate",
]

_RYSER_LIMIT = 14
_NAIVE_LIMIT = 9
_EM_LIMIT = 8


def permanent(matrix: np.ndarray) -> float:
    """Matrix permanent via Ryser's inclusion-exclusion with Gray-code order.

    O(k 2^k); guarded to k <= 14 since this is an oracle, not a solver.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    k = a.shape[0]
    if k > _RYSER_LIMIT:
        raise ValueError("oracle size limit")
    if k == 0:
        return 1.0
    row_sums = np.zeros(k)
    total = 0.0
    prev_gray = 0
    for s in range(1, 1 << k):
        gray = s ^ (s >> 1)
        bit = gray ^ prev_gray
        col = bit.bit_length() - 1
        if gray & bit:
            row_sums += a[:, col]
        else:
            row_sums -= a[:, col]
        prev_gray = gray
        sign = -1.0 if (k - bin(gray).count("1")) % 2 else 1.0
        total += sign * np.prod(row_sums)
    return float(total)


def permanent_naive(matrix: np.ndarray) -> float:
    """O(k!) permanent by summing over all permutations; validation only."""
    a = np.asarray(matrix, dtype=float)
    k = a.shape[0]
    if k > _NAIVE_LIMIT:
        raise ValueError("oracle size limit")
    rows = np.arange(k)
    return float(
        sum(np.prod(a[rows, perm]) for perm in itertools.permutations(range(k)))
    )


_perm_cache: dict[int, np.ndarray] = {}


def _permutations_array(k: int) -> np.ndarray:
    if k not in _perm_cache:
        _perm_cache[k] = np.asarray(list(itertools.permutations(range(k))))
    return _perm_cache[k]


def log_permanent(matrix: np.ndarray) -> float:
    """log(perm(A)) for a nonnegative matrix, robust to underflow.

    Up to k = 8 the permutation sum runs entirely in the log domain
    (logsumexp over k! products), which cannot cancel for nonnegative
    entries and keeps full relative precision even for permanents far below
    the entry scale.  Larger matrices fall back to Ryser with per-row
    rescaling; the permanent is multilinear in rows, so the log-scales add
    back exactly.
    """
    a = np.asarray(matrix, dtype=float)
    if np.any(a < 0):
        raise ValueError("matrix must be nonnegative")
    k = a.shape[0]
    if k <= 8:
        with np.errstate(divide="ignore"):
            log_a = np.log(a)
        perms = _permutations_array(k)
        terms = log_a[np.arange(k)[None, :], perms].sum(axis=1)
        if np.all(np.isneginf(terms)):
            return -math.inf
        return float(logsumexp(terms))
    row_max = a.max(axis=1)
    if np.any(row_max == 0):
        return -math.inf
    p = permanent(a / row_max[:, None])
    if p <= 0:
        return -math.inf
    return math.log(p) + float(np.log(row_max).sum())


def likelihood_matrix(p: np.ndarray, counts: Sequence[int]) -> np.ndarray:
    """The K x K matrix with entry (x, x') = p_x ** counts[x'].

    Its permanent is the label-invariant part of the fingerprint probability.
    Zero mass with zero count contributes 1 (the 0**0 = 1 convention).
    """
    p = np.asarray(p, dtype=float)
    c = np.asarray(counts, dtype=float)
    if p.shape[0] != c.shape[0]:
        raise ValueError("dimension mismatch")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.power(p[:, None], c[None, :])
    q[np.isnan(q)] = 1.0  # 0 ** 0
    return q


def _counts_from_fingerprint(f: Fingerprint, k: int) -> np.ndarray:
    counts: list[int] = []
    for i in sorted(f.entries, reverse=True):
        counts.extend([i] * f.entries[i])
    f0 = f.f0 if f.f0 is not None else 0
    counts.extend([0] * f0)
    if len(counts) != k:
        raise ValueError("dimension mismatch")
    return np.asarray(counts, dtype=np.int64)


def _log_multinomial(n: int, counts: np.ndarray) -> float:
    return float(gammaln(n + 1) - gammaln(counts + 1).sum())


def log_prob_fingerprint(p: Sequence[float], f: Fingerprint, n: int) -> float:
    """Natural-log probability of observing fingerprint ``f`` under ``p``.

    Requires the fingerprint to account for the whole support of p, i.e.
    F0 + sum_i F_i = len(p) and sum_i i F_i = n.  The value does not depend
    on which labeling of the empirical distribution is chosen.
    """
    p = np.asarray(p, dtype=float)
    if f.n != n:
        raise ValueError("inconsistent fingerprint")
    counts = _counts_from_fingerprint(f, p.shape[0])
    f0 = f.f0 if f.f0 is not None else 0
    log_pref = -gammaln(f0 + 1) - sum(
        gammaln(fi + 1) for fi in f.entries.values()
    )
    return float(
        log_pref
        + _log_multinomial(n, counts)
        + log_permanent(likelihood_matrix(p, counts))
    )


def log_prob_fingerprint_dd(
    ps: Sequence[Sequence[float]], f: FingerprintD
) -> float:
    """Natural-log probability of a D-dimensional fingerprint.

    ``ps`` holds the D distributions on a shared alphabet of size K; the
    fingerprint's multiplicities plus F0 must total K, and its per-dimension
    count sums must match ``f.ns``.
    """
    ps = [np.asarray(p, dtype=float) for p in ps]
    if len(ps) != f.dims:
        raise ValueError("dimension mismatch")
    k = ps[0].shape[0]
    if any(p.shape[0] != k for p in ps):
        raise ValueError("dimension mismatch")
    f0 = f.f0 if f.f0 is not None else 0
    if sum(f.entries.values()) + f0 != k:
        raise ValueError("dimension mismatch")
    if k > _RYSER_LIMIT:
        raise ValueError("oracle size limit")

    vecs: list[tuple[int, ...]] = []
    for vec in sorted(f.entries, reverse=True):
        vecs.extend([vec] * f.entries[vec])
    vecs.extend([(0,) * f.dims] * f0)
    count_mat = np.asarray(vecs, dtype=np.int64).T  # (D, K)
    for d, n_d in enumerate(f.ns):
        if count_mat[d].sum() != n_d:
            raise ValueError("inconsistent fingerprint")

    q = np.ones((k, k))
    for d in range(f.dims):
        q *= likelihood_matrix(ps[d], count_mat[d])
    log_pref = -gammaln(f0 + 1) - sum(
        gammaln(mult + 1) for mult in f.entries.values()
    )
    log_multis = sum(
        _log_multinomial(f.ns[d], count_mat[d]) for d in range(f.dims)
    )
    return float(log_pref + log_multis + log_permanent(q))


def _sorted_grid_points(total: int, parts: int):
    """Non-increasing positive integer vectors of given length summing to total."""

    def rec(remaining, largest, length, acc):
        if length == 1:
            if 1 <= remaining <= largest:
                yield tuple(acc) + (remaining,)
            return
        lo = -(-remaining // length)  # ceil: keep room for non-increasing tail
        for part in range(min(largest, remaining - (length - 1)), lo - 1, -1):
            yield from rec(remaining - part, part, length - 1, acc + [part])

    yield from rec(total, total, parts, [])


def _count_grid_points(total: int, parts: int) -> int:
    """Partitions of ``total`` into exactly ``parts`` positive parts."""
    table = np.zeros((total + 1, parts + 1), dtype=np.int64)
    table[0, 0] = 1
    for t in range(1, total + 1):
        for p in range(1, parts + 1):
            table[t, p] = table[t - 1, p - 1] + (
                table[t - p, p] if t >= p else 0
            )
    return int(table[total, parts])


def exact_pml_grid(
    f: Fingerprint, n: int, k: int, grid_steps: int
) -> np.ndarray:
    """Brute-force PML over the sorted grid of the K-simplex.

    Evaluates the fingerprint log-likelihood at every non-increasing positive
    grid point (step 1/grid_steps) and returns the argmax, sorted
    non-increasingly.  Permutation invariance makes the sorted grid lossless.
    """
    if k > 5 or grid_steps > 500:
        raise ValueError("oracle size limit")
    if _count_grid_points(grid_steps, k) > 200_000:
        raise ValueError("oracle size limit")
    points = np.asarray(list(_sorted_grid_points(grid_steps, k)), dtype=float)
    counts = _counts_from_fingerprint(f, k)
    log_p = np.log(points / grid_steps)  # (P, K), all entries positive
    perms = np.asarray(list(itertools.permutations(range(k))))
    exps = counts[perms]  # (k!, K): counts under each relabeling
    log_terms = log_p @ exps.T  # (P, k!)
    objective = logsumexp(log_terms, axis=1)
    best = int(np.argmax(objective))
    return points[best] / grid_steps


def _em_setup(counts: np.ndarray, k: int):
    if k > _EM_LIMIT:
        raise ValueError("oracle size limit")
    if counts.shape[0] > k:
        raise ValueError("support smaller than observed")
    padded = np.zeros(k, dtype=np.int64)
    padded[: counts.shape[0]] = counts
    perms = np.asarray(list(itertools.permutations(range(k))))
    return padded, padded[perms]  # (k!, K) permuted count rows


def _em_weights(perm_counts: np.ndarray, log_p: np.ndarray) -> np.ndarray:
    """Normalized weights w_sigma ~ prod_x p_x ** c_sigma(x), zero-safe."""
    finite = np.isfinite(log_p)
    valid = (perm_counts[:, ~finite] == 0).all(axis=1)
    log_w = perm_counts[:, finite] @ log_p[finite]
    log_w = np.where(valid, log_w, -np.inf)
    log_w -= log_w.max()
    w = np.exp(log_w)
    return w / w.sum()


def em_pml_1d(
    h: Histogram,
    k: int,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    callback: Callable[[np.ndarray], None] | None = None,
) -> np.ndarray:
    """EM ascent on the fingerprint likelihood for alphabets of size <= 8.

    The permutation is treated as hidden data: each step averages the
    relabeled empirical distributions weighted by their likelihood under the
    current iterate, starting from the empirical distribution itself.  The
    fingerprint likelihood never decreases along the way.  Returns the fixed
    point sorted non-increasingly.
    """
    counts = np.asarray(sorted(h.counts.values(), reverse=True), dtype=np.int64)
    padded, perm_counts = _em_setup(counts, k)
    p = padded / padded.sum()
    if callback is not None:
        callback(p.copy())
    for _ in range(max_iter):
        with np.errstate(divide="ignore"):
            log_p = np.log(p)
        w = _em_weights(perm_counts, log_p)
        new = w @ perm_counts / h.n
        new /= new.sum()
        delta = np.abs(new - p).max()
        p = new
        if callback is not None:
            callback(p.copy())
        if delta < tol:
            break
    return np.sort(p)[::-1]


def em_pml_2d(
    hp: Histogram,
    hq: Histogram,
    k: int,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    callback: Callable[[np.ndarray, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Coupled EM for a pair of samples on a shared alphabet.

    The same hidden permutation relabels both empirical distributions, so the
    weights couple the two samples.  Returns (p, q) sorted jointly by
    (p_x, q_x) decreasing; the pairing of components is preserved.
    """
    symbols = sorted(set(hp.counts) | set(hq.counts))
    if len(symbols) > k:
        raise ValueError("support smaller than observed")
    cp = np.asarray([hp.counts.get(x, 0) for x in symbols], dtype=np.int64)
    cq = np.asarray([hq.counts.get(x, 0) for x in symbols], dtype=np.int64)
    cp_pad, perm_cp = _em_setup(cp, k)
    cq_pad = np.zeros(k, dtype=np.int64)
    cq_pad[: cq.shape[0]] = cq
    perms = np.asarray(list(itertools.permutations(range(k))))
    perm_cq = cq_pad[perms]

    p = cp_pad / cp_pad.sum()
    q = cq_pad / cq_pad.sum()
    if callback is not None:
        callback(p.copy(), q.copy())
    for _ in range(max_iter):
        with np.errstate(divide="ignore"):
            log_p, log_q = np.log(p), np.log(q)
        finite_p, finite_q = np.isfinite(log_p), np.isfinite(log_q)
        valid = (perm_cp[:, ~finite_p] == 0).all(axis=1) & (
            perm_cq[:, ~finite_q] == 0
        ).all(axis=1)
        log_w = perm_cp[:, finite_p] @ log_p[finite_p]
        log_w = log_w + perm_cq[:, finite_q] @ log_q[finite_q]
        log_w = np.where(valid, log_w, -np.inf)
        log_w -= log_w.max()
        w = np.exp(log_w)
        w /= w.sum()
        new_p = w @ perm_cp / hp.n
        new_p /= new_p.sum()
        new_q = w @ perm_cq / hq.n
        new_q /= new_q.sum()
        delta = max(np.abs(new_p - p).max(), np.abs(new_q - q).max())
        p, q = new_p, new_q
        if callback is not None:
            callback(p.copy(), q.copy())
        if delta < tol:
            break
    order = np.lexsort((-q, -p))
    return p[order], q[order]


def binary_exact_pml(count: int, n: int) -> np.ndarray:
    """Exact PML on a two-symbol alphabet with ``count`` hits out of ``n``.

    The solution is uniform iff the two empirical masses differ by at most
    1/sqrt(n); otherwise it is (1/(1+r), r/(1+r)) where r is the unique root
    in (0, 1) of

        h1 * r**(a+1) - h2 * r**a + h2 * r - h1,    a = n - 2*count,

    with h1 <= h2 the empirical masses.  A count of 0 (or n) collapses to the
    degenerate distribution.
    """
    if not 0 <= count <= n or n < 1:
        raise ValueError("count out of range")
    c = min(count, n - count)
    if c == 0:
        return np.asarray([1.0, 0.0])
    if abs(n - 2 * c) <= math.sqrt(n):
        return np.asarray([0.5, 0.5])
    h1 = c / n
    h2 = 1.0 - h1
    a = n - 2 * c  # integer exponent, >= 1 in this branch

    def poly(r: float) -> float:
        return h1 * r ** (a + 1) - h2 * r**a + h2 * r - h1

    lo, hi = 1e-14, 1.0 - 1e-14
    flo = poly(lo)
    if flo > 0 or poly(hi) < 0:
        raise ValueError("root bracketing failure")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poly(mid) <= 0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    return np.asarray([1.0 / (1.0 + r), r / (1.0 + r)])


def dd_binary_nonuniformity_certificate(
    hat_p1s: Sequence[float], ns: Sequence[int]
) -> bool:
    """One-sided certificate that a D-tuple binary PML is not all-uniform.

    True when sum_d 4 n_d (p1_d - 1/2)^2 > 1, which places the empirical
    point outside the uniformity ellipsoid.  False certifies nothing (the
    converse is only conjectured).
    """
    if len(hat_p1s) != len(ns) or not hat_p1s:
        raise ValueError("dimension mismatch")
    q = sum(4 * n * (p1 - 0.5) ** 2 for p1, n in zip(hat_p1s, ns))
    return q > 1.0
