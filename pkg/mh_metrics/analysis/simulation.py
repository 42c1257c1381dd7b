"""Monte Carlo coverage of the Wald interval for Γ.

Ordinal tables are produced by discretizing a bivariate normal (Z₁, Z₂) with
means (0, d), unit variances and correlation rho at shared cutoffs. The true
Γ comes from the exact cell probabilities; each trial draws a multinomial
table of size n and records whether its interval covers the true value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from multiprocessing import Pool

import numpy as np
from scipy.special import ndtr, roots_legendre

from ..const import (
    CONF_CI_LEVEL,
    CONF_CUTOFFS,
    CONF_D,
    CONF_N,
    CONF_RHO,
    CONF_SEED,
    CONF_TRIALS,
    DEFAULT_CI_LEVEL,
    DEFAULT_CUTOFFS,
    DEFAULT_RHO,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    ESTIMATOR_AUTO,
    QUADRATURE_NODES,
    QUADRATURE_TAIL,
    SIM_BLOCK_SIZE,
    SOURCE_GIVEN,
)
from ..exceptions import InvalidParameterError, MeasureUndefinedError
from .inference import confidence_interval
from .measures import measure_gamma
from .table import ProbTable, SquareTable, marginal_summary

_LOGGER = logging.getLogger(__name__)


def _check_rho(rho: float) -> None:
    if not math.isfinite(rho) or abs(rho) >= 1.0:
        raise InvalidParameterError(f"|rho| must be < 1, got {rho}")


def _check_cutoffs(cutoffs: list[float]) -> None:
    if not cutoffs:
        raise InvalidParameterError("at least one cutoff is required")
    if not all(math.isfinite(c) for c in cutoffs):
        raise InvalidParameterError(f"cutoffs must be finite: {cutoffs}")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise InvalidParameterError(f"cutoffs must be strictly increasing: {cutoffs}")


@dataclass(frozen=True)
class SimulationScenario:
    """One cell of the simulation design."""

    d: float
    n: int
    rho: float = DEFAULT_RHO
    cutoffs: tuple[float, ...] = tuple(DEFAULT_CUTOFFS)
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    ci_level: float = DEFAULT_CI_LEVEL

    def __post_init__(self) -> None:
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))
        _check_rho(self.rho)
        _check_cutoffs(list(self.cutoffs))
        if not math.isfinite(self.d):
            raise InvalidParameterError(f"d must be finite, got {self.d}")
        if self.n < 1:
            raise InvalidParameterError(f"n must be ≥ 1, got {self.n}")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be ≥ 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0.0 < self.ci_level < 1.0:
            raise InvalidParameterError(f"ci_level must be in (0, 1), got {self.ci_level}")

    @property
    def r(self) -> int:
        return len(self.cutoffs) + 1

    @property
    def sparseness(self) -> float:
        """Average count per cell, n / r²."""
        return self.n / self.r**2

    @classmethod
    def from_dict(cls, data: dict) -> SimulationScenario:
        return cls(
            d=float(data[CONF_D]),
            n=int(data[CONF_N]),
            rho=float(data.get(CONF_RHO, DEFAULT_RHO)),
            cutoffs=tuple(data.get(CONF_CUTOFFS, DEFAULT_CUTOFFS)),
            trials=int(data.get(CONF_TRIALS, DEFAULT_TRIALS)),
            seed=int(data.get(CONF_SEED, DEFAULT_SEED)),
            ci_level=float(data.get(CONF_CI_LEVEL, DEFAULT_CI_LEVEL)),
        )


@dataclass
class SimulationResult:
    """Coverage summary for one scenario."""

    scenario: SimulationScenario
    true_gamma: float
    coverage: float | None
    mean_estimate: float | None
    mean_se: float | None
    failed_trials: int
    bayes_trials: int
    valid_trials: int
    covered_trials: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        s = self.scenario
        return {
            "d": s.d,
            "n": s.n,
            "rho": s.rho,
            "cutoffs": list(s.cutoffs),
            "trials": s.trials,
            "seed": s.seed,
            "ciLevel": s.ci_level,
            "sparseness": s.sparseness,
            "trueGamma": self.true_gamma,
            "coverage": self.coverage,
            "meanEstimate": self.mean_estimate,
            "meanSe": self.mean_se,
            "validTrials": self.valid_trials,
            "coveredTrials": self.covered_trials,
            "failedTrials": self.failed_trials,
            "bayesTrials": self.bayes_trials,
        }

    @classmethod
    def from_dict(cls, data: dict) -> SimulationResult:
        scenario = SimulationScenario(
            d=data["d"],
            n=data["n"],
            rho=data["rho"],
            cutoffs=tuple(data["cutoffs"]),
            trials=data["trials"],
            seed=data["seed"],
            ci_level=data["ciLevel"],
        )
        return cls(
            scenario=scenario,
            true_gamma=data["trueGamma"],
            coverage=data.get("coverage"),
            mean_estimate=data.get("meanEstimate"),
            mean_se=data.get("meanSe"),
            failed_trials=data.get("failedTrials", 0),
            bayes_trials=data.get("bayesTrials", 0),
            valid_trials=data.get("validTrials", 0),
            covered_trials=data.get("coveredTrials", 0),
        )


def _band_edges(cutoffs: list[float], shift: float = 0.0) -> np.ndarray:
    return np.concatenate(([-np.inf], np.asarray(cutoffs, dtype=float) - shift, [np.inf]))


def cell_probs_bivariate_normal(
    d: float,
    rho: float = DEFAULT_RHO,
    cutoffs: list[float] | tuple[float, ...] = tuple(DEFAULT_CUTOFFS),
    nodes: int = QUADRATURE_NODES,
) -> ProbTable:
    """Rectangle probabilities of the discretized bivariate normal.

    For each Z₁ band the conditional law Z₂ | Z₁ = x ~ N(d + ρx, 1 − ρ²)
    turns the cell probability into a one-dimensional integral

        p_ij = ∫_band_i φ(x) [Φ((e_j − d − ρx)/s) − Φ((e_{j−1} − d − ρx)/s)] dx

    evaluated by Gauss–Legendre quadrature. Infinite band ends are truncated
    at ±QUADRATURE_TAIL; each row is then rescaled to the exact band
    probability Φ(c_i) − Φ(c_{i−1}).
    """
    cutoffs = [float(c) for c in cutoffs]
    _check_rho(rho)
    _check_cutoffs(cutoffs)
    if not math.isfinite(d):
        raise InvalidParameterError(f"d must be finite, got {d}")

    r = len(cutoffs) + 1
    x_edges = _band_edges(cutoffs)
    y_edges = _band_edges(cutoffs, shift=d)
    s = math.sqrt(1.0 - rho * rho)
    ref_nodes, ref_weights = roots_legendre(nodes)

    probs = np.zeros((r, r))
    for i in range(r):
        lo = max(x_edges[i], -QUADRATURE_TAIL)
        hi = min(x_edges[i + 1], QUADRATURE_TAIL)
        band = float(ndtr(x_edges[i + 1]) - ndtr(x_edges[i]))
        if hi <= lo or band <= 0.0:
            continue
        half = 0.5 * (hi - lo)
        x = lo + half * (ref_nodes + 1.0)
        w = half * ref_weights * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        cdf = ndtr((y_edges[:, np.newaxis] - rho * x[np.newaxis, :]) / s)
        row = np.diff(cdf, axis=0) @ w
        row = np.clip(row, 0.0, None)
        probs[i] = row * (band / row.sum())

    if d == 0.0:
        # Same cutoffs and exchangeable margins: the table is exactly symmetric.
        probs = 0.5 * (probs + probs.T)
    probs /= probs.sum()
    return ProbTable(probs, source=SOURCE_GIVEN)


def true_measure(
    d: float,
    rho: float = DEFAULT_RHO,
    cutoffs: list[float] | tuple[float, ...] = tuple(DEFAULT_CUTOFFS),
) -> float:
    """Γ of the exact cell probabilities."""
    probs = cell_probs_bivariate_normal(d, rho, cutoffs)
    return measure_gamma(marginal_summary(probs)).gamma_total


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, determined by (seed, trial) only."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def sample_table(probs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial draw of n observations over the cells of ``probs``."""
    flat = np.asarray(probs, dtype=float).ravel()
    return rng.multinomial(n, flat / flat.sum()).reshape(np.shape(probs))


@dataclass
class _BlockTally:
    covered: int = 0
    valid: int = 0
    failed: int = 0
    bayes: int = 0
    sum_estimate: float = 0.0
    sum_se: float = 0.0


def _run_block(
    trials: range,
    probs: np.ndarray,
    true_gamma: float,
    n: int,
    seed: int,
    ci_level: float,
) -> _BlockTally:
    tally = _BlockTally()
    for trial in trials:
        counts = sample_table(probs, n, trial_rng(seed, trial))
        try:
            result = confidence_interval(
                SquareTable(counts), level=ci_level, estimator=ESTIMATOR_AUTO
            )
        except MeasureUndefinedError:
            tally.failed += 1
            continue
        if result.estimator_used.startswith("Bayes"):
            tally.bayes += 1
        if result.se is None:
            tally.failed += 1
            continue
        tally.valid += 1
        tally.sum_estimate += result.estimate
        tally.sum_se += result.se
        if result.contains(true_gamma):
            tally.covered += 1
    return tally


def _blocks(trials: int, size: int = SIM_BLOCK_SIZE) -> list[range]:
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_coverage(
    scenario: SimulationScenario,
    workers: int = DEFAULT_WORKERS,
    block_size: int = SIM_BLOCK_SIZE,
) -> SimulationResult:
    """Estimate the coverage of the Auto-estimator Wald interval.

    Trials are split into fixed-size blocks and the block tallies are summed
    in block order, so results are identical for any number of workers.
    Trials whose interval is undefined are excluded from the coverage
    denominator and counted in ``failed_trials``.
    """
    if workers < 1:
        raise InvalidParameterError(f"workers must be ≥ 1, got {workers}")
    if block_size < 1:
        raise InvalidParameterError(f"block_size must be ≥ 1, got {block_size}")

    probs = cell_probs_bivariate_normal(scenario.d, scenario.rho, scenario.cutoffs)
    true_gamma = measure_gamma(marginal_summary(probs)).gamma_total
    _LOGGER.info(
        "Simulating d=%g n=%d (%d trials, %d worker(s)); true Γ = %.6f",
        scenario.d,
        scenario.n,
        scenario.trials,
        workers,
        true_gamma,
    )

    run = partial(
        _run_block,
        probs=np.array(probs.probs),
        true_gamma=true_gamma,
        n=scenario.n,
        seed=scenario.seed,
        ci_level=scenario.ci_level,
    )
    blocks = _blocks(scenario.trials, block_size)
    if workers == 1 or len(blocks) == 1:
        tallies = [run(block) for block in blocks]
    else:
        with Pool(processes=min(workers, len(blocks))) as pool:
            tallies = pool.map(run, blocks)

    total = _BlockTally()
    for tally in tallies:
        total.covered += tally.covered
        total.valid += tally.valid
        total.failed += tally.failed
        total.bayes += tally.bayes
        total.sum_estimate += tally.sum_estimate
        total.sum_se += tally.sum_se

    notes: list[str] = []
    if total.failed:
        _LOGGER.warning(
            "d=%g n=%d: %d of %d trials had no interval",
            scenario.d,
            scenario.n,
            total.failed,
            scenario.trials,
        )
        notes.append(f"{total.failed} trial(s) excluded: interval undefined")

    result = SimulationResult(
        scenario=scenario,
        true_gamma=true_gamma,
        coverage=total.covered / total.valid if total.valid else None,
        mean_estimate=total.sum_estimate / total.valid if total.valid else None,
        mean_se=total.sum_se / total.valid if total.valid else None,
        failed_trials=total.failed,
        bayes_trials=total.bayes,
        valid_trials=total.valid,
        covered_trials=total.covered,
        notes=notes,
    )
    _LOGGER.debug("Scenario finished: %s", asdict(total))
    return result
