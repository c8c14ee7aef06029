import math

import numpy as np
import pytest

from table1_rows import ROWS, components_for
from valleyfinder import (
    FitConfig,
    Label,
    MixtureComponent,
    build_histogram,
    crossover_threshold,
    davies_bouldin,
    em_fit,
    find_valley,
    group_components,
    group_density,
    label_components,
    sample_mixture,
)
from valleyfinder.errors import DataError, NumericalError
from valleyfinder.types import MixtureFit


def labeled_fit(components) -> MixtureFit:
    fit = MixtureFit(
        components=tuple(components),
        log_likelihood=0.0,
        n=1000,
        iterations=1,
        converged=True,
        seed=0,
    )
    return label_components(fit)


def symmetric_fit(mu1=5.0, mu2=15.0, sd=2.0):
    return labeled_fit([MixtureComponent(mu1, sd, 0.5), MixtureComponent(mu2, sd, 0.5)])


class TestGroupComponents:
    def test_bimodal(self):
        within, between = group_components(labeled_fit(components_for("aol_search")))
        assert within == (0,) and between == (1,)

    def test_short_within_grouping(self):
        within, between = group_components(labeled_fit(components_for("movielens_rating")))
        assert within == (0, 1) and between == (2,)

    def test_break_in_between_group(self):
        within, between = group_components(labeled_fit(components_for("osm_changeset")))
        assert within == (0,) and between == (1, 2)

    def test_unlabeled_rejected(self):
        fit = MixtureFit(
            components=(MixtureComponent(5, 1, 0.5), MixtureComponent(15, 1, 0.5)),
            log_likelihood=0.0,
            n=10,
            iterations=1,
            converged=True,
            seed=0,
        )
        with pytest.raises(DataError, match="label"):
            group_components(fit)

    def test_all_within_rejected(self):
        fit = labeled_fit([MixtureComponent(4.0, 1.0, 0.5), MixtureComponent(8.0, 1.0, 0.5)])
        with pytest.raises(NumericalError, match="unimodal"):
            group_components(fit)


class TestGroupDensity:
    def test_normal_peak(self):
        # single component (mu=10, sigma=2, lambda=1) evaluated at its mean
        single = MixtureFit.unvalidated(
            [MixtureComponent(10.0, 2.0, 1.0, Label.WITHIN), MixtureComponent(20.0, 2.0, 1.0, Label.BETWEEN)]
        )
        assert group_density(single, (0,), 10.0) == pytest.approx(1.0 / (2.0 * math.sqrt(2 * math.pi)), abs=1e-12)
        assert group_density(single, (0,), 10.0) == pytest.approx(0.19947114020071635, abs=1e-9)

    def test_tail_decays_to_zero(self):
        fit = symmetric_fit()
        assert group_density(fit, (0,), 500.0) == pytest.approx(0.0, abs=1e-300)

    def test_matches_hand_summation(self):
        fit = labeled_fit(components_for("movielens_rating"))
        t = 7.3
        expected = sum(
            fit.components[i].weight
            * math.exp(-0.5 * ((t - fit.components[i].mean) / fit.components[i].stddev) ** 2)
            / (fit.components[i].stddev * math.sqrt(2 * math.pi))
            for i in (0, 1)
        )
        assert group_density(fit, (0, 1), t) == pytest.approx(expected, abs=1e-12)

    def test_empty_group_rejected(self):
        with pytest.raises(DataError):
            group_density(symmetric_fit(), (), 5.0)


class TestCrossoverThreshold:
    def test_symmetric_exact_midpoint(self):
        result = crossover_threshold(symmetric_fit())
        assert result.t_log2 == pytest.approx(10.0, abs=1e-9)
        assert result.threshold_s == pytest.approx(1024.0, rel=1e-9)
        assert result.threshold_min == pytest.approx(17.0666667, abs=1e-3)

    def test_aol_row(self):
        # independent fine-grid scan oracle: t_log2 = 12.807535, 119.48 min
        result = crossover_threshold(labeled_fit(components_for("aol_search")))
        assert result.t_log2 == pytest.approx(12.807535, abs=1e-4)
        published = ROWS["aol_search"][0]
        assert abs(result.threshold_min - published) / published <= 0.15

    def test_stackoverflow_question_fallback(self):
        # fallback labeling; fine-grid oracle: t_log2 = 14.251976, 325.2 min
        result = crossover_threshold(labeled_fit(components_for("stackoverflow_question")))
        assert result.t_log2 == pytest.approx(14.251976, abs=1e-4)
        published = ROWS["stackoverflow_question"][0]
        assert abs(result.threshold_min - published) / published <= 0.15

    @pytest.mark.parametrize("name", sorted(ROWS))
    def test_density_equality_at_root(self, name):
        fit = labeled_fit(components_for(name))
        result = crossover_threshold(fit)
        within = group_density(fit, result.within_group, result.t_log2)
        between = group_density(fit, result.between_group, result.t_log2)
        assert abs(within - between) < 1e-9
        assert result.bracket[0] < result.t_log2 < result.bracket[1]

    def test_weight_rescaling_invariance(self):
        fit = labeled_fit(components_for("aol_search"))
        scaled = MixtureFit.unvalidated(
            [
                MixtureComponent(c.mean, c.stddev, c.weight * 0.5, c.label)
                for c in fit.components
            ]
        )
        assert crossover_threshold(scaled).t_log2 == pytest.approx(
            crossover_threshold(fit).t_log2, abs=1e-6
        )

    def test_pathological_overlap_reports_densities(self):
        # between component drowns the within component everywhere in the bracket
        fit = MixtureFit.unvalidated(
            [
                MixtureComponent(10.0, 0.2, 0.001, Label.WITHIN),
                MixtureComponent(12.5, 6.0, 0.999, Label.BETWEEN),
            ]
        )
        with pytest.raises(NumericalError, match="cross"):
            crossover_threshold(fit)


class TestFindValley:
    def test_bimodal_found(self):
        comps = [MixtureComponent(6.0, 1.5, 0.6), MixtureComponent(16.0, 1.5, 0.4)]
        hist = build_histogram(sample_mixture(comps, 40_000, seed=5))
        report = find_valley(hist)
        assert report.found
        assert 10.0 <= report.valley_log2 <= 13.0
        assert report.peak_lo_log2 < report.valley_log2 < report.peak_hi_log2
        assert report.valley_minutes == pytest.approx(2.0**report.valley_log2 / 60.0)

    def test_single_normal_not_found(self):
        rng = np.random.default_rng(6)
        hist = build_histogram(rng.normal(10.0, 2.0, 20_000))
        assert find_valley(hist).found is False

    def test_empty_histogram(self):
        assert find_valley(build_histogram([])).found is False

    def test_valley_outside_window_not_found(self):
        comps = [MixtureComponent(-4.0, 0.8, 0.5), MixtureComponent(4.0, 0.8, 0.5)]
        hist = build_histogram(sample_mixture(comps, 20_000, seed=7))
        report = find_valley(hist)  # valley near 0 sits below the 1-minute floor
        assert report.found is False
        assert report.valley_log2 is not None

    def test_smoothing_window_recorded(self):
        hist = build_histogram(np.linspace(0, 20, 500))
        assert find_valley(hist, smooth_bins=7).smoothing_window_bins == 7


class TestDaviesBouldin:
    @staticmethod
    def fit_at(mu1, mu2):
        return MixtureFit(
            components=(MixtureComponent(mu1, 1.0, 0.5), MixtureComponent(mu2, 1.0, 0.5)),
            log_likelihood=0.0,
            n=4,
            iterations=1,
            converged=True,
            seed=0,
        )

    def test_hand_computed_fixture(self):
        report = davies_bouldin([0.0, 2.0, 9.0, 11.0], self.fit_at(1.0, 10.0))
        assert report.index == pytest.approx(2.0 / 9.0, abs=1e-9)
        assert report.per_cluster_dispersion == (1.0, 1.0)
        assert report.centroid_distances[0][1] == pytest.approx(9.0)
        assert report.assignment_counts == (2, 2)

    def test_zero_dispersion(self):
        report = davies_bouldin([0.0, 0.0, 10.0, 10.0], self.fit_at(0.0, 10.0))
        assert report.index == 0.0

    def test_separation_lowers_index(self):
        rng = np.random.default_rng(3)
        tight = np.concatenate([rng.normal(0, 1, 500), rng.normal(20, 1, 500)])
        loose = np.concatenate([rng.normal(0, 1, 500), rng.normal(4, 1, 500)])
        well = davies_bouldin(tight, self.fit_at(0.0, 20.0)).index
        overlapping = davies_bouldin(loose, self.fit_at(0.0, 4.0)).index
        assert well < overlapping

    def test_all_in_one_cluster(self):
        with pytest.raises(NumericalError, match="one cluster"):
            davies_bouldin([10.0, 10.1, 9.9], self.fit_at(10.0, 50.0))

    def test_empty_cluster_warns(self):
        fit = MixtureFit(
            components=(
                MixtureComponent(0.0, 1.0, 0.4),
                MixtureComponent(10.0, 1.0, 0.4),
                MixtureComponent(50.0, 1.0, 0.2),
            ),
            log_likelihood=0.0,
            n=4,
            iterations=1,
            converged=True,
            seed=0,
        )
        with pytest.warns(UserWarning, match="empty"):
            report = davies_bouldin([0.0, 1.0, 9.0, 10.0], fit)
        assert report.assignment_counts[2] == 0

    def test_counts_cover_samples(self):
        xs = np.linspace(-2, 12, 37)
        report = davies_bouldin(xs, self.fit_at(0.0, 10.0))
        assert sum(report.assignment_counts) == len(xs)
