"""Tests for the bivariate-normal table generator and coverage runs."""

from __future__ import annotations

import os

import numpy as np
import pytest
from scipy.special import ndtr

from mh_metrics.analysis.simulation import (
    SimulationResult,
    SimulationScenario,
    cell_probs_bivariate_normal,
    run_coverage,
    sample_table,
    trial_rng,
    true_measure,
)
from mh_metrics.analysis.measures import measure_gamma
from mh_metrics.analysis.table import ProbTable, marginal_summary
from mh_metrics.const import DEFAULT_CUTOFFS, DEFAULT_RHO
from mh_metrics.exceptions import InvalidParameterError

BANDS = np.diff(ndtr(np.concatenate(([-np.inf], DEFAULT_CUTOFFS, [np.inf]))))
COVERAGE_WORKERS = min(4, os.cpu_count() or 1)


def _monte_carlo_table(
    d: float, rho: float, draws: int, seed: int, chunk: int = 1_000_000
) -> np.ndarray:
    """Empirical cell proportions from direct normal draws, counted in chunks."""
    rng = np.random.default_rng(seed)
    r = len(DEFAULT_CUTOFFS) + 1
    counts = np.zeros(r * r)
    for start in range(0, draws, chunk):
        z = rng.multivariate_normal(
            [0.0, d], [[1.0, rho], [rho, 1.0]], size=min(chunk, draws - start)
        )
        x = np.digitize(z[:, 0], DEFAULT_CUTOFFS)
        y = np.digitize(z[:, 1], DEFAULT_CUTOFFS)
        counts += np.bincount(x * r + y, minlength=r * r)
    return (counts / draws).reshape(r, r)


class TestCellProbabilities:
    """Discretized bivariate normal cell probabilities."""

    def test_sums_to_one(self):
        """A proper 6×6 distribution."""
        p = cell_probs_bivariate_normal(1.0)
        assert p.probs.shape == (6, 6)
        assert p.probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(p.probs >= 0)

    def test_symmetric_without_shift(self):
        """d = 0 gives a symmetric table and Γ = 0."""
        p = cell_probs_bivariate_normal(0.0)
        np.testing.assert_array_equal(p.probs, p.probs.T)
        assert true_measure(0.0) == 0.0

    def test_row_margins(self):
        """Rows are the Z₁ bands exactly."""
        p = cell_probs_bivariate_normal(0.75)
        np.testing.assert_allclose(p.probs.sum(axis=1), BANDS, atol=1e-9)

    def test_column_margins(self):
        """Columns are the Z₂ bands, shifted by d."""
        d = 0.75
        p = cell_probs_bivariate_normal(d)
        cuts = np.asarray(DEFAULT_CUTOFFS) - d
        shifted = np.diff(ndtr(np.concatenate(([-np.inf], cuts, [np.inf]))))
        np.testing.assert_allclose(p.probs.sum(axis=0), shifted, atol=1e-9)

    def test_against_monte_carlo(self):
        """Quadrature agrees with a direct draw of 2·10⁶ normal pairs."""
        d, rho = 0.5, DEFAULT_RHO
        empirical = _monte_carlo_table(d, rho, 2_000_000, seed=7)
        np.testing.assert_allclose(cell_probs_bivariate_normal(d, rho).probs, empirical, atol=2e-3)

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.5, float("nan")])
    def test_invalid_rho(self, rho):
        """|ρ| ≥ 1 and NaN are rejected."""
        with pytest.raises(InvalidParameterError):
            cell_probs_bivariate_normal(0.5, rho=rho)

    @pytest.mark.parametrize("cutoffs", [[], [0.0, 0.0], [1.0, -1.0], [0.0, float("inf")]])
    def test_invalid_cutoffs(self, cutoffs):
        """Cutoffs must be finite and strictly increasing."""
        with pytest.raises(InvalidParameterError):
            cell_probs_bivariate_normal(0.5, cutoffs=cutoffs)

    def test_single_cutoff(self):
        """One cutoff gives a 2×2 table."""
        p = cell_probs_bivariate_normal(1.0, cutoffs=[0.0])
        assert p.probs.shape == (2, 2)


class TestTrueMeasure:
    """True Γ as a function of the shift."""

    def test_increasing_in_shift(self):
        """Strictly increasing on [0, 1]."""
        values = [true_measure(d) for d in np.linspace(0.0, 1.0, 11)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_large_shift_near_one(self):
        """Approaches one for large shifts."""
        assert 0.95 < true_measure(4.0) < 1.0

    def test_negative_shift_mirrors(self):
        """Shifting down swaps the blocks; Γ is direction free."""
        assert true_measure(-0.5) == pytest.approx(true_measure(0.5), abs=1e-9)


class TestSampling:
    """Per-trial random streams and multinomial draws."""

    def test_trial_rng_reproducible(self):
        """A trial's stream depends only on seed and index."""
        a = trial_rng(11, 3).integers(0, 2**32, size=5)
        b = trial_rng(11, 3).integers(0, 2**32, size=5)
        c = trial_rng(11, 4).integers(0, 2**32, size=5)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_sample_size(self):
        """A drawn table has n observations."""
        probs = cell_probs_bivariate_normal(0.5).probs
        counts = sample_table(probs, 360, trial_rng(1, 0))
        assert counts.shape == (6, 6)
        assert counts.sum() == 360

    def test_large_sample_matches_probabilities(self):
        """Each cell proportion lies within 4σ of its probability."""
        n = 1_000_000
        probs = cell_probs_bivariate_normal(1.0).probs
        counts = sample_table(probs, n, trial_rng(5, 0))
        sigma = np.sqrt(probs * (1 - probs) / n)
        assert np.all(np.abs(counts / n - probs) <= 4 * sigma + 1e-12)


class TestScenario:
    """Simulation scenario construction."""

    def test_defaults(self):
        """Default cutoffs give a 6×6 table."""
        s = SimulationScenario(d=1.0, n=36)
        assert s.r == 6
        assert s.sparseness == 1.0

    def test_from_dict(self):
        """Cutoffs from a dict become a tuple."""
        s = SimulationScenario.from_dict({"d": 0.5, "n": 180, "cutoffs": [-1, 0, 1]})
        assert s.cutoffs == (-1.0, 0.0, 1.0)
        assert s.r == 4

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0},
            {"trials": 0},
            {"rho": 1.0},
            {"seed": -1},
            {"ci_level": 1.0},
            {"cutoffs": (1.0, 0.0)},
        ],
    )
    def test_invalid(self, kwargs):
        """Out-of-range fields are rejected."""
        base = {"d": 0.5, "n": 36}
        with pytest.raises(InvalidParameterError):
            SimulationScenario(**{**base, **kwargs})


class TestRunCoverage:
    """Coverage runs over many trials."""

    def test_worker_count_does_not_change_results(self):
        """Serial and parallel runs agree exactly."""
        scenario = SimulationScenario(d=0.5, n=180, trials=40, seed=3)
        serial = run_coverage(scenario, workers=1, block_size=10)
        parallel = run_coverage(scenario, workers=2, block_size=10)
        assert serial.to_dict() == parallel.to_dict()

    def test_block_size_does_not_change_counts(self):
        """Block size does not change the tallies."""
        scenario = SimulationScenario(d=0.5, n=180, trials=30, seed=3)
        a = run_coverage(scenario, block_size=7)
        b = run_coverage(scenario, block_size=30)
        assert a.covered_trials == b.covered_trials
        assert a.valid_trials == b.valid_trials
        assert a.bayes_trials == b.bayes_trials

    def test_single_trial_reproducible(self):
        """The same seed gives the same result."""
        scenario = SimulationScenario(d=1.0, n=360, trials=1, seed=99)
        assert run_coverage(scenario).to_dict() == run_coverage(scenario).to_dict()

    def test_trial_accounting(self):
        """Valid and failed trials add up to the total."""
        result = run_coverage(SimulationScenario(d=1.0, n=36, trials=50, seed=1))
        assert result.valid_trials + result.failed_trials == 50
        assert 0 <= result.covered_trials <= result.valid_trials
        if result.valid_trials:
            assert result.coverage == result.covered_trials / result.valid_trials

    @pytest.mark.parametrize("kwargs", [{"workers": 0}, {"block_size": 0}])
    def test_invalid_arguments(self, kwargs):
        """Workers and block size must be positive."""
        with pytest.raises(InvalidParameterError):
            run_coverage(SimulationScenario(d=1.0, n=36, trials=1), **kwargs)

    def test_result_round_trip(self):
        """Results survive to_dict and from_dict."""
        result = run_coverage(SimulationScenario(d=0.25, n=180, trials=20, seed=4))
        restored = SimulationResult.from_dict(result.to_dict())
        assert restored.to_dict() == result.to_dict()

    @pytest.mark.slow
    def test_large_sample_coverage_is_nominal(self):
        """At n = 3600 the 95% interval covers the true Γ close to nominally."""
        scenario = SimulationScenario(d=1.0, n=3600, trials=10_000)
        result = run_coverage(scenario, workers=COVERAGE_WORKERS)
        assert result.coverage is not None
        assert 0.94 <= result.coverage <= 0.96
        assert result.mean_estimate == pytest.approx(result.true_gamma, abs=0.01)

    @pytest.mark.slow
    def test_small_sample_undercovers(self):
        """At n = 36 sparse tables push coverage below nominal."""
        scenario = SimulationScenario(d=1.0, n=36, trials=10_000)
        result = run_coverage(scenario, workers=COVERAGE_WORKERS)
        assert result.coverage is not None
        assert result.coverage < 0.94
        assert result.bayes_trials > 0


@pytest.mark.slow
class TestMonteCarloReference:
    """Quadrature and true Γ against 10⁷ direct normal draws at d = 1."""

    @pytest.fixture(scope="class")
    def empirical(self):
        return _monte_carlo_table(1.0, DEFAULT_RHO, 10_000_000, seed=20240917)

    def test_cell_probabilities(self, empirical):
        """Every cell agrees to within 5·10⁻⁴."""
        expected = cell_probs_bivariate_normal(1.0).probs
        assert np.max(np.abs(expected - empirical)) < 5e-4

    def test_true_measure(self, empirical):
        """Γ of the quadrature table matches Γ of the empirical table to 10⁻³."""
        observed = measure_gamma(marginal_summary(ProbTable(empirical))).gamma_total
        assert true_measure(1.0) == pytest.approx(observed, abs=1e-3)
