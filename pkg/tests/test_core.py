import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apml.core import (
    Fingerprint,
    Histogram,
    SortedDistribution,
    SuppF,
    build_histogram,
    enumerate_fingerprints,
    fingerprint,
    fingerprint_dd,
    histogram_from_counts,
    iter_partitions,
    supp_bound,
)

from _oracles import partition_function_euler


def test_build_histogram_sequence():
    # the seven-sample walkthrough: (a,b,b,a,b,b,c)
    h = build_histogram([0, 1, 1, 0, 1, 1, 2])
    assert h.counts == {0: 2, 1: 4, 2: 1}
    assert h.n == 7


def test_build_histogram_singleton():
    h = build_histogram([9])
    assert h.counts == {9: 1} and h.n == 1


def test_build_histogram_single_symbol():
    h = build_histogram([4, 4, 4])
    assert h.counts == {4: 3} and h.n == 3


def test_build_histogram_empty_rejected():
    with pytest.raises(ValueError, match="empty sample"):
        build_histogram([])


def test_fingerprint_basic():
    # counts (2, 4, 1): one symbol each at count values 1, 2, 4
    h = Histogram({0: 2, 1: 4, 2: 1}, 7)
    f = fingerprint(h)
    assert f.entries == {1: 1, 2: 1, 4: 1}
    assert f.f0 is None


def test_fingerprint_with_known_support():
    h = Histogram({1: 4}, 4)
    f = fingerprint(h, assumed_support=3)
    assert f.entries == {4: 1}
    assert f.f0 == 2


def test_fingerprint_all_singletons():
    h = Histogram({0: 1, 1: 1}, 2)
    f = fingerprint(h, assumed_support=2)
    assert f.entries == {1: 2} and f.f0 == 0


def test_fingerprint_support_too_small():
    h = Histogram({0: 1, 1: 1}, 2)
    with pytest.raises(ValueError, match="support smaller than observed"):
        fingerprint(h, assumed_support=1)


def test_fingerprint_dd_union_support():
    hp = Histogram({0: 1, 1: 1}, 2)
    hq = Histogram({0: 2}, 2)
    f = fingerprint_dd([hp, hq])
    assert f.entries == {(1, 2): 1, (1, 0): 1}
    assert f.ns == (2, 2)


def test_fingerprint_dd_one_dimension_reduces():
    h = Histogram({0: 2, 1: 4, 2: 1}, 7)
    f1 = fingerprint(h)
    fd = fingerprint_dd([h])
    assert {vec[0]: mult for vec, mult in fd.entries.items()} == f1.entries


def test_fingerprint_dd_identical_histograms():
    h = Histogram({7: 3}, 3)
    f = fingerprint_dd([h, h])
    assert f.entries == {(3, 3): 1}


@given(
    st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=40).filter(
        lambda xs: sum(xs) > 0
    )
)
@settings(max_examples=200, deadline=None)
def test_fingerprint_mass_identity(sample_ids):
    h = build_histogram(sample_ids)
    f = fingerprint(h)
    assert sum(i * fi for i, fi in f.entries.items()) == h.n


@given(
    st.dictionaries(
        st.integers(min_value=0, max_value=200),
        st.integers(min_value=1, max_value=30),
        min_size=1,
        max_size=40,
    )
)
@settings(max_examples=200, deadline=None)
def test_supp_bound_holds(counts):
    h = Histogram(dict(counts), sum(counts.values()))
    f = fingerprint(h)
    assert len(f.entries) <= supp_bound(h.n)


def test_supp_bound_tight_on_staircase():
    # counts 1, 2, ..., k make every count value distinct and n = k(k+1)/2;
    # the bound counts the unseen bin too, so it is met at exactly k + 1 bins
    for k in (1, 3, 6, 10):
        h = Histogram({i: i + 1 for i in range(k)}, k * (k + 1) // 2)
        f = fingerprint(h)
        assert len(f.entries) == k
        assert supp_bound(h.n) == pytest.approx(k + 1)


def test_enumerate_fingerprints_small():
    assert enumerate_fingerprints(1) == 1
    assert enumerate_fingerprints(5) == 7
    assert enumerate_fingerprints(12) == 77


def test_enumerate_fingerprints_matches_euler_recurrence():
    p = partition_function_euler(40)
    for n in range(1, 41):
        assert enumerate_fingerprints(n) == p[n]


def test_enumerate_fingerprints_guard():
    for bad in (0, 41, -3):
        with pytest.raises(ValueError):
            enumerate_fingerprints(bad)


def test_iter_partitions_max_parts():
    parts = list(iter_partitions(5, max_parts=2))
    assert sorted(parts) == [(3, 2), (4, 1), (5,)]


def test_suppf_roundtrip():
    f = Fingerprint(entries={4: 1, 1: 2, 9: 3})
    supp = SuppF.from_fingerprint(f)
    assert supp.m == (1, 4, 9)
    assert supp.f_counts == (2, 1, 3)
    assert supp.n == 2 + 4 + 27


def test_suppf_inconsistent_n():
    f = Fingerprint(entries={2: 1})
    with pytest.raises(ValueError, match="inconsistent"):
        SuppF.from_fingerprint(f, n=5)


def test_sorted_distribution_validation():
    SortedDistribution(np.array([0.6, 0.4]))
    with pytest.raises(ValueError):
        SortedDistribution(np.array([0.4, 0.6]))
    with pytest.raises(ValueError):
        SortedDistribution(np.array([0.7, 0.4]))


def test_histogram_from_counts_drops_zeros():
    h = histogram_from_counts(np.array([0, 3, 0, 1]))
    assert h.counts == {1: 3, 3: 1} and h.n == 4
