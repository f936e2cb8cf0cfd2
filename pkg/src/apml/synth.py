"""Synthetic ground-truth distributions and seeded samplers.

Distribution families match the benchmark setups: uniform, a two-block
mixture of uniforms with half the mass on the first fifth of the symbols,
Zipf with p_i proportional to 1/i^alpha, a geometric with given mean
(truncated far beyond any test tolerance), and the half-Zipf half-geometric
mixture used for support-size experiments.

Sampling is bit-reproducible: draws come from numpy's seeded PCG64 generator
through a Vose alias table, so a (kind, params, n, seed) tuple always yields
the same histogram on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Histogram, histogram_from_counts

__all__ = [
    "GroundTruth",
    "make_distribution",
    "sample",
    "support_experiment_distribution",
]

_GEOM_TAIL = 1e-12


@dataclass(frozen=True)
class GroundTruth:
    """A named distribution with materialized masses."""

    kind: str
    params: dict
    masses: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return int(self.masses.size)

    def label(self) -> str:
        inner = ",".join(f"{key}={val:g}" for key, val in sorted(self.params.items()))
        return f"{self.kind}({inner})" if inner else self.kind


def _uniform(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def _mix2uniform(k: int, head_frac: float, head_mass: float) -> np.ndarray:
    head = int(k * head_frac)
    if head < 1 or head >= k:
        raise ValueError("mixture head must be a nonempty proper subset")
    masses = np.empty(k)
    masses[:head] = head_mass / head
    masses[head:] = (1.0 - head_mass) / (k - head)
    return masses


def _zipf(k: int, alpha: float) -> np.ndarray:
    if alpha <= 0:
        raise ValueError("zipf exponent must be positive")
    w = 1.0 / np.arange(1, k + 1, dtype=float) ** alpha
    return w / w.sum()


def _geometric(mean: float) -> np.ndarray:
    """Geometric on {1, 2, ...} with the given mean, truncated then renormalized."""
    if mean < 1:
        raise ValueError("geometric mean must be at least 1")
    p = 1.0 / mean
    # keep atoms up to the 1 - 1e-12 quantile
    k = max(1, int(np.ceil(np.log(_GEOM_TAIL) / np.log1p(-p)))) if p < 1 else 1
    w = p * (1.0 - p) ** np.arange(k, dtype=float)
    return w / w.sum()


def _mix_geom_zipf(k: int) -> np.ndarray:
    """Half the mass Zipf(1) on the first k/2 symbols, half geometric after."""
    half = k // 2
    if half < 1 or half >= k:
        raise ValueError("k too small for the mixture")
    head = 1.0 / np.arange(1, half + 1, dtype=float)
    tail = (1.0 - 2.0 / k) ** np.arange(0, k - half, dtype=float)
    masses = np.concatenate([0.5 * head / head.sum(), 0.5 * tail / tail.sum()])
    return masses


def make_distribution(kind: str, **params) -> GroundTruth:
    """Build a ground-truth distribution by family name.

    Kinds and parameters: uniform(k), mix2uniform(k, head_frac=0.2,
    head_mass=0.5), zipf(k, alpha), geometric(mean), mixgeomzipf(k).
    """
    if kind == "uniform":
        masses = _uniform(params["k"])
    elif kind == "mix2uniform":
        params.setdefault("head_frac", 0.2)
        params.setdefault("head_mass", 0.5)
        if params["k"] < 5:
            raise ValueError("mix2uniform requires k >= 5")
        masses = _mix2uniform(params["k"], params["head_frac"], params["head_mass"])
    elif kind == "zipf":
        masses = _zipf(params["k"], params["alpha"])
    elif kind == "geometric":
        masses = _geometric(params["mean"])
    elif kind == "mixgeomzipf":
        masses = _mix_geom_zipf(params["k"])
    else:
        raise ValueError(f"unknown distribution kind: {kind}")
    return GroundTruth(kind=kind, params=params, masses=masses)


def _alias_table(masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias method: O(1) draws after O(K) setup."""
    k = masses.size
    prob = np.empty(k)
    alias = np.zeros(k, dtype=np.int64)
    scaled = masses * k
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for rest in (large, small):
        while rest:
            prob[rest.pop()] = 1.0
    return prob, alias


def sample(g: GroundTruth, n: int, seed: int) -> Histogram:
    """Draw n i.i.d. samples and return their histogram, deterministically."""
    if n < 1:
        raise ValueError("empty sample")
    prob, alias = _alias_table(g.masses)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, g.k, size=n)
    accept = rng.random(n) < prob[idx]
    symbols = np.where(accept, idx, alias[idx])
    return histogram_from_counts(np.bincount(symbols, minlength=g.k))


def support_experiment_distribution(
    kind: str, min_mass: float = 1e-6, **params
) -> GroundTruth:
    """Pick the support size so the smallest atom is about ``min_mass``.

    Binary search over k; the smallest mass of every supported family is
    non-increasing in k.  ``geometric`` is excluded (its support is not a
    free parameter).
    """
    if kind == "geometric":
        raise ValueError("geometric support is set by its mean")

    def smallest(k: int) -> float:
        return float(make_distribution(kind, k=k, **params).masses.min())

    lo, hi = 5, 8
    while smallest(hi) > min_mass:
        lo, hi = hi, hi * 4
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if smallest(mid) > min_mass:
            lo = mid
        else:
            hi = mid
    # lo is the last k above the target, hi the first at or below; pick closer
    k = lo if abs(smallest(lo) - min_mass) <= abs(smallest(hi) - min_mass) else hi
    return make_distribution(kind, k=k, **params)
