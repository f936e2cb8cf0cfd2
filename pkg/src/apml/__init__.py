"""Approximate profile maximum likelihood for discrete distributions.

The profile (fingerprint) of a sample forgets symbol labels and keeps only
how many symbols were seen how often.  Profile maximum likelihood picks the
distribution maximizing the probability of that fingerprint; this package
computes a fast deterministic approximation by maximizing a permanent lower
bound over level-set partitions, plus plugin estimators for symmetric
functionals (entropy, Renyi entropy, support size, distances) and a seeded
benchmark harness against the empirical-plugin baseline.
"""

from .apml1d import (
    ApmlResult,
    ContinuousSupport,
    FiniteSupport,
    KnownSupport,
    LevelSet,
    LevelSetPartition,
    MinMassSupport,
    UnknownSupport,
    apml,
    bar_v_level_set,
    bar_v_partition,
    dp_known_support,
    optimize_support,
)
from .apmldd import (
    ClumpD,
    PartitionD,
    apml_dd,
    bar_v_clump_dd,
    greedy_merge,
    greedy_merge_knn,
    optimize_support_dd,
)
from .core import (
    Fingerprint,
    FingerprintD,
    Histogram,
    SortedDistribution,
    SuppF,
    build_histogram,
    enumerate_fingerprints,
    fingerprint,
    fingerprint_dd,
)
from .functionals import (
    FunctionalSpec,
    entropy,
    kl,
    l1_distance,
    l1_to_uniform,
    mle_plugin,
    renyi,
    sorted_l1,
    support_size,
)
from .synth import make_distribution, sample, support_experiment_distribution

__version__ = "0.1.0"
