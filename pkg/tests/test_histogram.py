import numpy as np
import pytest

from valleyfinder import build_histogram


class TestBuildHistogram:
    def test_mass_normalized(self):
        rng = np.random.default_rng(1)
        hist = build_histogram(rng.normal(8, 3, 5000), 0.25)
        assert hist.n_total == 5000
        assert sum(b.count for b in hist.bins) == 5000
        assert sum(b.density * hist.bin_width_log2 for b in hist.bins) == pytest.approx(1.0, abs=1e-9)

    def test_bins_contiguous_and_aligned(self):
        hist = build_histogram([0.1, 0.9, 2.3], 0.5)
        assert hist.bins[0].lo_log2 == 0.0
        for a, b in zip(hist.bins, hist.bins[1:]):
            assert a.hi_log2 == b.lo_log2
        assert hist.bins[-1].hi_log2 >= 2.3

    def test_counts(self):
        hist = build_histogram([0.1, 0.2, 0.3, 1.1], 1.0)
        assert [b.count for b in hist.bins] == [3, 1]

    def test_single_value(self):
        hist = build_histogram([4.0] * 10, 0.25)
        assert hist.n_total == 10
        assert sum(b.count for b in hist.bins) == 10

    def test_negative_values_allowed(self):
        hist = build_histogram([-1.4, -0.2, 0.6], 0.25)
        assert sum(b.count for b in hist.bins) == 3
        assert hist.bins[0].lo_log2 <= -1.4

    def test_empty(self):
        hist = build_histogram([])
        assert hist.n_total == 0 and hist.bins == ()

    def test_order_invariant(self):
        xs = np.random.default_rng(2).uniform(0, 20, 300)
        assert build_histogram(xs) == build_histogram(xs[::-1].copy())

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            build_histogram([1.0], 0.0)
