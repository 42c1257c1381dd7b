"""Unit tests for delta-method variance and Wald intervals."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mh_metrics.analysis.inference import (
    asymptotic_variance,
    confidence_interval,
    select_probabilities,
    variance_oracle_fd,
    wald_interval,
    z_quantile,
)
from mh_metrics.analysis.measures import measure_gamma
from mh_metrics.analysis.table import (
    SquareTable,
    bayes_smooth,
    marginal_summary,
    to_probabilities,
)
from mh_metrics.const import ESTIMATOR_BAYES, ESTIMATOR_SAMPLE
from mh_metrics.exceptions import (
    BoundaryGcError,
    DegenerateAtMHError,
    InvalidParameterError,
    MeasureUndefinedError,
)

from tests.conftest import random_probs


def _is_regular(p, margin: float = 1e-3) -> bool:
    """Away from both the boundary and the kink at Gc = ½."""
    s = marginal_summary(p)
    c = (np.sqrt(s.gc1) - math.sqrt(0.5)) ** 2 + (np.sqrt(s.gc2) - math.sqrt(0.5)) ** 2
    return bool(np.all(c > margin) and np.all((s.gc1 > 0.01) & (s.gc1 < 0.99)))


class TestZQuantile:
    """Normal quantile for a two-sided level."""

    def test_95(self):
        """The 95% quantile is 1.96."""
        assert z_quantile(0.95) == pytest.approx(1.959963984540054, abs=1e-12)

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.5, 1.5])
    def test_invalid(self, level):
        """Levels outside (0, 1) are rejected."""
        with pytest.raises(InvalidParameterError):
            z_quantile(level)


class TestAsymptoticVariance:
    """Closed-form delta-method variance."""

    def test_treatment_arm_standard_error(self, treatment_arm):
        """Standard error for the treatment arm."""
        breakdown = asymptotic_variance(to_probabilities(treatment_arm))
        assert breakdown.sigma2 == pytest.approx(0.998298, abs=1e-6)
        assert math.sqrt(breakdown.sigma2 / treatment_arm.n) == pytest.approx(0.078, abs=2e-3)

    def test_placebo_arm_bayes_standard_error(self, placebo_arm):
        """Needs smoothing: Ĝc1 is 0 at level 4."""
        breakdown = asymptotic_variance(bayes_smooth(placebo_arm, 0.0001))
        assert placebo_arm.n == 165
        assert math.sqrt(breakdown.sigma2 / placebo_arm.n) == pytest.approx(0.0593, abs=1e-4)

    def test_lower_heavy(self, lower_heavy):
        """σ² for the lower-heavy table."""
        breakdown = asymptotic_variance(to_probabilities(lower_heavy))
        assert breakdown.sigma2 == pytest.approx(0.503407, abs=1e-6)

    def test_reassembly(self, lower_heavy):
        """σ² equals the explicit upper + lower cell sum."""
        breakdown = asymptotic_variance(to_probabilities(lower_heavy))
        assert breakdown.reassemble() == pytest.approx(breakdown.sigma2, abs=1e-12)
        assert np.all(breakdown.c >= 0)
        assert np.all(np.diag(breakdown.per_cell) == 0)

    def test_derivatives_are_centered(self, rng):
        """Γ is scale free, so Σ p D = 0."""
        p = random_probs(rng, 5)
        breakdown = asymptotic_variance(p)
        assert float(np.sum(p.probs * breakdown.per_cell)) == pytest.approx(0.0, abs=1e-12)

    def test_boundary_gc(self, placebo_arm):
        """A level with Gc at 0 or 1 is named in the error."""
        with pytest.raises(BoundaryGcError) as err:
            asymptotic_variance(to_probabilities(placebo_arm))
        assert err.value.levels == [4]

    def test_degenerate_at_homogeneity(self, homogeneous):
        """The derivative vanishes at exact homogeneity."""
        with pytest.raises(DegenerateAtMHError):
            asymptotic_variance(to_probabilities(homogeneous))

    def test_maximal_is_boundary(self, maximal_upper):
        """Maximal departure sits on the boundary for both methods."""
        p = to_probabilities(maximal_upper)
        with pytest.raises(BoundaryGcError):
            asymptotic_variance(p)
        with pytest.raises(BoundaryGcError):
            variance_oracle_fd(p)

    def test_undefined(self):
        """A diagonal table has no variance."""
        with pytest.raises(MeasureUndefinedError):
            asymptotic_variance(to_probabilities(SquareTable(np.diag([4, 5]))))


class TestVarianceOracle:
    """Finite-difference cross-check of the variance."""

    def test_lower_heavy(self, lower_heavy):
        """Closed form and finite differences agree."""
        p = to_probabilities(lower_heavy)
        closed = asymptotic_variance(p).sigma2
        assert variance_oracle_fd(p) == pytest.approx(closed, rel=1e-6)

    def test_random_tables(self, rng):
        """Closed form and finite differences agree on random 4×4 and 6×6 tables."""
        checked = 0
        while checked < 120:
            r = 4 if checked % 2 == 0 else 6
            p = random_probs(rng, r)
            if not _is_regular(p):
                continue
            closed = asymptotic_variance(p).sigma2
            assert variance_oracle_fd(p) == pytest.approx(closed, rel=1e-6)
            assert closed >= 0.0
            checked += 1

    @pytest.mark.parametrize("h", [0.0, 1e-13, -1e-6])
    def test_step_too_small(self, lower_heavy, h):
        """Non-positive or tiny steps are rejected."""
        with pytest.raises(InvalidParameterError):
            variance_oracle_fd(to_probabilities(lower_heavy), h=h)

    def test_degenerate(self, homogeneous):
        """The oracle refuses exact homogeneity too."""
        with pytest.raises(DegenerateAtMHError):
            variance_oracle_fd(to_probabilities(homogeneous))


class TestConfidenceInterval:
    """Wald intervals from count tables."""

    def test_treatment_arm(self, treatment_arm):
        """Estimate, standard error and bounds for the treatment arm."""
        result = confidence_interval(treatment_arm, 0.95)
        assert result.estimator_used == "Sample"
        assert result.estimate == pytest.approx(0.308, abs=1e-3)
        assert result.se == pytest.approx(0.078, abs=2e-3)
        assert result.ci_low == pytest.approx(0.156, abs=2e-3)
        assert result.ci_high == pytest.approx(0.460, abs=2e-3)
        assert result.n == 166

    def test_treatment_arm_paths_agree(self, treatment_arm):
        """Sample and Bayes paths give the same standard error to 4 decimals."""
        sample = confidence_interval(treatment_arm, estimator=ESTIMATOR_SAMPLE)
        bayes = confidence_interval(treatment_arm, estimator=ESTIMATOR_BAYES)
        assert sample.se == pytest.approx(bayes.se, abs=1e-4)

    def test_placebo_arm_falls_back_to_bayes(self, placebo_arm):
        """A boundary Gc falls back to Bayes smoothing with a warning."""
        result = confidence_interval(placebo_arm, 0.95)
        assert result.estimator_used == "Bayes(0.0001)"
        assert result.estimate == pytest.approx(0.511, abs=1e-3)
        assert result.se == pytest.approx(0.059, abs=2e-3)
        assert result.ci_low == pytest.approx(0.395, abs=2e-3)
        assert result.ci_high == pytest.approx(0.627, abs=2e-3)
        assert result.warnings

    def test_estimate_matches_variance_table(self, placebo_arm):
        """The estimate comes from the same smoothed table as the variance."""
        result = confidence_interval(placebo_arm)
        smoothed = bayes_smooth(placebo_arm, 0.0001)
        assert result.estimate == measure_gamma(marginal_summary(smoothed)).gamma_total

    def test_sample_on_boundary_omits_interval(self, placebo_arm):
        """Forced sample proportions on a boundary give no interval."""
        result = confidence_interval(placebo_arm, estimator=ESTIMATOR_SAMPLE)
        assert result.ci_low is None and result.se is None
        assert not result.degenerate_warning
        assert any("Bayes" in w for w in result.warnings)

    def test_degenerate_warning(self, homogeneous):
        """Exact homogeneity flags the interval as degenerate."""
        result = confidence_interval(homogeneous)
        assert result.estimate == 0.0
        assert result.degenerate_warning
        assert result.ci_low is None and result.ci_high is None

    def test_scaling_shrinks_se(self, treatment_arm):
        """100 times the counts gives a tenth of the standard error."""
        base = confidence_interval(treatment_arm)
        scaled = confidence_interval(SquareTable(np.array(treatment_arm.counts) * 100))
        assert scaled.estimate == pytest.approx(base.estimate, abs=1e-12)
        assert scaled.se == pytest.approx(base.se / 10, rel=1e-9)

    def test_symmetric_about_estimate(self, lower_heavy):
        """Bounds are estimate ± z·se."""
        result = confidence_interval(lower_heavy, 0.9)
        assert result.estimate - result.ci_low == pytest.approx(result.ci_high - result.estimate)
        assert result.ci_low <= result.estimate <= result.ci_high
        z = z_quantile(0.9)
        assert result.ci_high == pytest.approx(result.estimate + z * result.se, abs=1e-15)

    def test_clip(self):
        """Clipping keeps bounds inside [0, 1]."""
        t = SquareTable(np.array([[0, 9, 0], [1, 0, 9], [0, 0, 0]]))
        raw = confidence_interval(t, estimator=ESTIMATOR_BAYES)
        clipped = confidence_interval(t, estimator=ESTIMATOR_BAYES, clip=True)
        assert clipped.clipped
        assert 0.0 <= clipped.ci_low <= clipped.ci_high <= 1.0
        assert clipped.ci_high == min(raw.ci_high, 1.0)

    def test_undefined_propagates(self):
        """Undefined measures are not swallowed."""
        with pytest.raises(MeasureUndefinedError):
            confidence_interval(SquareTable(np.diag([3, 3])))

    def test_bad_estimator(self, lower_heavy):
        """Unknown estimator names are rejected."""
        with pytest.raises(InvalidParameterError):
            confidence_interval(lower_heavy, estimator="median")

    def test_bayes_limit(self, rng):
        """With every cell positive, Bayes(1e-8) matches the sample estimate."""
        counts = rng.integers(1, 30, size=(4, 4))
        t = SquareTable(counts)
        sample = confidence_interval(t, estimator=ESTIMATOR_SAMPLE)
        bayes = confidence_interval(t, estimator=ESTIMATOR_BAYES, alpha=1e-8)
        assert abs(sample.estimate - bayes.estimate) < 1e-6


class TestWaldInterval:
    """Intervals from a given probability table."""

    def test_given_probabilities(self, lower_heavy):
        """Given probabilities with n match the count-table result."""
        p = to_probabilities(lower_heavy)
        result = wald_interval(p, 240)
        assert result.se == pytest.approx(0.04580, abs=1e-5)

    def test_select_probabilities_notes(self, placebo_arm, treatment_arm):
        """Only the Bayes fallback leaves a note."""
        _, notes = select_probabilities(placebo_arm)
        assert notes and "Bayes" in notes[0]
        _, notes = select_probabilities(treatment_arm)
        assert notes == []
