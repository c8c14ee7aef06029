import math

import numpy as np
import pytest

from valleyfinder import MixtureComponent, compute_deltas, generate_event_log, sample_mixture
from valleyfinder.errors import DataError
from valleyfinder.synth import SynthSpec


class TestSampleMixture:
    def test_mixture_mean(self, aol_components):
        xs = sample_mixture(aol_components, 1_000_000, seed=17)
        # closed-form mixture mean and variance
        mean = 0.7 * 6.7 + 0.3 * 16.8
        second = 0.7 * (2.9**2 + 6.7**2) + 0.3 * (2.2**2 + 16.8**2)
        se = math.sqrt(second - mean**2) / math.sqrt(len(xs))
        assert abs(xs.mean() - mean) < 3 * se

    def test_deterministic(self, aol_components):
        np.testing.assert_array_equal(
            sample_mixture(aol_components, 1000, seed=3), sample_mixture(aol_components, 1000, seed=3)
        )
        assert not np.array_equal(
            sample_mixture(aol_components, 1000, seed=3), sample_mixture(aol_components, 1000, seed=4)
        )

    def test_degenerate_sigma(self):
        comp = MixtureComponent(mean=8.0, stddev=1e-3, weight=1.0)
        xs = sample_mixture([comp], 500, seed=0)
        np.testing.assert_allclose(xs, 8.0, atol=0.01)

    def test_invalid_weights(self, aol_components):
        bad = [MixtureComponent(5.0, 1.0, 0.5), MixtureComponent(10.0, 1.0, 0.4)]
        with pytest.raises(DataError, match="sum"):
            sample_mixture(bad, 10, seed=0)
        with pytest.raises(DataError):
            sample_mixture(aol_components, 0, seed=0)


class TestSynthSpec:
    def test_validates_weights(self):
        with pytest.raises(ValueError):
            SynthSpec(
                components=(MixtureComponent(5, 1, 0.5), MixtureComponent(10, 1, 0.4)),
                n_users=1,
                events_per_user=5,
            )

    def test_validates_counts(self):
        comps = (MixtureComponent(5, 1, 0.5), MixtureComponent(10, 1, 0.5))
        with pytest.raises(ValueError):
            SynthSpec(components=comps, n_users=0, events_per_user=5)
        with pytest.raises(ValueError):
            SynthSpec(components=comps, n_users=1, events_per_user=0)


class TestGenerateEventLog:
    @staticmethod
    def spec(**kwargs):
        defaults = dict(
            components=(MixtureComponent(6.7, 2.9, 0.7), MixtureComponent(16.8, 2.2, 0.3)),
            n_users=5,
            events_per_user=4,
            start_s=1_000_000,
            seed=9,
        )
        defaults.update(kwargs)
        return SynthSpec(**defaults)

    def test_strictly_increasing_per_user(self):
        events = generate_event_log(self.spec(n_users=1, events_per_user=3))
        stamps = [e.timestamp_s for e in events]
        assert len(stamps) == 3
        assert stamps[0] == 1_000_000
        assert stamps[0] < stamps[1] < stamps[2]

    def test_round_trip_recovers_drawn_deltas(self):
        events, truth = generate_event_log(self.spec(n_users=20, events_per_user=30), return_deltas=True)
        assert compute_deltas(events) == truth

    def test_distinct_users(self):
        events = generate_event_log(self.spec(n_users=100, events_per_user=2))
        assert len({e.user_id for e in events}) == 100

    def test_deterministic(self):
        assert generate_event_log(self.spec()) == generate_event_log(self.spec())

    def test_poisson_counts(self):
        events = generate_event_log(self.spec(n_users=50, events_per_user=("poisson", 12.0)))
        per_user = {}
        for e in events:
            per_user[e.user_id] = per_user.get(e.user_id, 0) + 1
        counts = list(per_user.values())
        assert len(counts) == 50 and min(counts) >= 1
        assert 6 <= sum(counts) / len(counts) <= 18  # loose: mean near 12
