import numpy as np
import pytest

from apml.synth import (
    make_distribution,
    sample,
    support_experiment_distribution,
)


class TestMakeDistribution:
    def test_uniform(self):
        g = make_distribution("uniform", k=4)
        np.testing.assert_allclose(g.masses, [0.25] * 4)

    def test_zipf_harmonic_weights(self):
        g = make_distribution("zipf", k=4, alpha=1.0)
        np.testing.assert_allclose(
            g.masses, [12 / 25, 6 / 25, 4 / 25, 3 / 25], rtol=1e-12
        )

    def test_mix2uniform_head_block(self):
        g = make_distribution("mix2uniform", k=10)
        np.testing.assert_allclose(g.masses[:2], [0.25, 0.25])
        np.testing.assert_allclose(g.masses[2:], [0.0625] * 8)

    def test_mix2uniform_needs_head(self):
        with pytest.raises(ValueError):
            make_distribution("mix2uniform", k=4)

    def test_geometric_mean(self):
        g = make_distribution("geometric", mean=20.0)
        np.testing.assert_allclose(g.masses.sum(), 1.0, atol=1e-12)
        mean = np.dot(np.arange(1, g.k + 1), g.masses)
        assert mean == pytest.approx(20.0, rel=1e-9)

    def test_mixgeomzipf_half_mass_split(self):
        g = make_distribution("mixgeomzipf", k=100)
        assert g.masses[:50].sum() == pytest.approx(0.5, abs=1e-12)
        assert g.masses.sum() == pytest.approx(1.0, abs=1e-12)

    def test_all_kinds_normalized(self):
        cases = [
            ("uniform", dict(k=17)),
            ("mix2uniform", dict(k=25)),
            ("zipf", dict(k=30, alpha=0.5)),
            ("geometric", dict(mean=7.0)),
            ("mixgeomzipf", dict(k=40)),
        ]
        for kind, params in cases:
            g = make_distribution(kind, **params)
            assert np.all(g.masses >= 0)
            assert g.masses.sum() == pytest.approx(1.0, abs=1e-12)


class TestSample:
    def test_single_symbol(self):
        g = make_distribution("uniform", k=1)
        h = sample(g, 5, seed=0)
        assert h.counts == {0: 5} and h.n == 5

    def test_deterministic_given_seed(self):
        g = make_distribution("zipf", k=100, alpha=1.0)
        h1 = sample(g, 1000, seed=42)
        h2 = sample(g, 1000, seed=42)
        assert h1 == h2

    def test_different_seeds_differ(self):
        g = make_distribution("uniform", k=1000)
        h1 = sample(g, 1000, seed=7)
        h2 = sample(g, 1000, seed=8)
        assert h1 != h2

    def test_empty_rejected(self):
        g = make_distribution("uniform", k=3)
        with pytest.raises(ValueError, match="empty sample"):
            sample(g, 0, seed=1)

    def test_frequencies_concentrate(self):
        g = make_distribution("uniform", k=10)
        h = sample(g, 10**6, seed=2024)
        freqs = np.array([h.counts[i] for i in range(10)]) / h.n
        assert np.all(freqs >= 0.09) and np.all(freqs <= 0.11)

    def test_unbiased_smoke(self):
        g = make_distribution("zipf", k=5, alpha=1.0)
        h = sample(g, 200_000, seed=3)
        freqs = np.array([h.counts.get(i, 0) for i in range(5)]) / h.n
        np.testing.assert_allclose(freqs, g.masses, atol=0.01)


class TestSupportExperiment:
    def test_uniform_hits_target_exactly(self):
        g = support_experiment_distribution("uniform", min_mass=1e-6)
        assert g.k == 10**6

    def test_zipf_smallest_atom_near_target(self):
        g = support_experiment_distribution("zipf", min_mass=1e-4, alpha=1.0)
        smallest = g.masses.min()
        # within a factor accounted for by the integer grid on k
        assert 0.5e-4 < smallest < 2e-4
        bigger = make_distribution("zipf", k=g.k + 2, alpha=1.0)
        assert bigger.masses.min() < smallest

    def test_geometric_rejected(self):
        with pytest.raises(ValueError):
            support_experiment_distribution("geometric")
