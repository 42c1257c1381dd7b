"""Delta-method inference for Γ.

Under full multinomial sampling √n(Γ̂ − Γ) is asymptotically normal with
variance

    σ²[Γ] = Σ_{k<l} (p_kl D_kl² + p_lk D_lk²)

where D_kl = ∂Γ/∂p_kl. Γ is homogeneous of degree zero in the cells, so
Σ p_ij D_ij = 0 and the multinomial quadratic form reduces to the sum above.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ..const import (
    DEFAULT_ALPHA,
    DEFAULT_CI_LEVEL,
    DEFAULT_FD_STEP,
    DEGENERACY_TOLERANCE,
    ESTIMATOR_AUTO,
    ESTIMATOR_BAYES,
    ESTIMATOR_SAMPLE,
    ESTIMATORS,
    MIN_FD_STEP,
)
from ..exceptions import (
    BoundaryGcError,
    DegenerateAtMHError,
    InvalidParameterError,
)
from .measures import GAMMA_NORMALIZER, SQRT_HALF, measure_gamma
from .table import (
    MarginalSummary,
    ProbTable,
    SquareTable,
    bayes_smooth,
    marginal_summary,
    to_probabilities,
)
from .utils import block_masses, distance_weights, level_span_sums

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class VarianceBreakdown:
    """σ²[Γ] with the per-cell derivatives and per-level terms it is built from."""

    sigma2: float
    per_cell: np.ndarray  # D_kl; zero on the diagonal
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    probs: np.ndarray
    gamma_total: float

    def reassemble(self) -> float:
        """Σ_{k<l} (p_kl D_kl² + p_lk D_lk²) from the stored parts."""
        upper = np.triu(np.ones_like(self.probs, dtype=bool), k=1)
        lower = upper.T
        terms = self.probs * self.per_cell**2
        return float(terms[upper].sum() + terms[lower].sum())


@dataclass
class InferenceResult:
    """Point estimate, standard error and Wald interval for Γ."""

    estimate: float
    se: float | None
    ci_low: float | None
    ci_high: float | None
    level: float
    n: int
    estimator_used: str
    degenerate_warning: bool = False
    clipped: bool = False
    warnings: list[str] = field(default_factory=list)

    def contains(self, value: float) -> bool:
        if self.ci_low is None or self.ci_high is None:
            return False
        return self.ci_low <= value <= self.ci_high


def z_quantile(level: float) -> float:
    """Upper (1 − p/2) standard-normal quantile for a 100(1 − p)% interval."""
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"confidence level must be in (0, 1), got {level}")
    return float(ndtri(1.0 - (1.0 - level) / 2.0))


def _boundary_levels(s: MarginalSummary) -> list[int]:
    gc1 = s.gc1[s.defined]
    levels = np.array(s.levels)[s.defined]
    return [int(i) for i in levels[(gc1 == 0.0) | (gc1 == 1.0)]]


def _check_regular(s: MarginalSummary) -> np.ndarray:
    """Validate the variance formula's domain and return C_i."""
    s.require_defined()
    boundary = _boundary_levels(s)
    if boundary:
        raise BoundaryGcError(
            "Gc is 0 or 1 at level(s) "
            + ", ".join(str(i) for i in boundary)
            + "; use Bayes smoothing",
            boundary,
        )
    c = (np.sqrt(s.gc1) - SQRT_HALF) ** 2 + (np.sqrt(s.gc2) - SQRT_HALF) ** 2
    degenerate = [i for i, ci in zip(s.levels, c) if ci < DEGENERACY_TOLERANCE]
    if degenerate:
        raise DegenerateAtMHError(
            "variance undefined at exact marginal homogeneity (level(s) "
            + ", ".join(str(i) for i in degenerate)
            + ")",
            degenerate,
        )
    return c


def asymptotic_variance(p: ProbTable) -> VarianceBreakdown:
    """Closed-form delta-method variance σ²[Γ]."""
    s = marginal_summary(p)
    c = _check_regular(s)
    gamma_total = measure_gamma(s).gamma_total

    gc1, gc2 = s.gc1, s.gc2
    u1 = np.sqrt(gc1) - SQRT_HALF
    u2 = np.sqrt(gc2) - SQRT_HALF
    root_c = np.sqrt(c)
    a = (2.0 * c + u1 * gc2 / np.sqrt(gc1) - u2 * np.sqrt(gc2)) / (2.0 * root_c)
    b = (2.0 * c - u1 * np.sqrt(gc1) + u2 * gc1 / np.sqrt(gc2)) / (2.0 * root_c)

    r = p.r
    span = distance_weights(r)
    upper = np.triu(np.ones((r, r), dtype=bool), k=1)
    d_upper = (GAMMA_NORMALIZER * level_span_sums(a) - span * gamma_total) / s.delta
    d_lower = (GAMMA_NORMALIZER * level_span_sums(b) - span * gamma_total) / s.delta
    per_cell = np.where(upper, d_upper, 0.0) + np.where(upper, d_lower, 0.0).T

    sigma2 = float(np.sum(p.probs * per_cell**2))
    _LOGGER.debug("σ²[Γ] = %.6g (Γ = %.6f)", sigma2, gamma_total)
    return VarianceBreakdown(
        sigma2=sigma2,
        per_cell=per_cell,
        a=a,
        b=b,
        c=c,
        probs=p.probs,
        gamma_total=gamma_total,
    )


def _gamma_of_cells(cells: np.ndarray) -> float:
    """Γ of an arbitrary non-negative cell array (no normalization needed)."""
    g1, g2 = block_masses(cells)
    total = g1 + g2
    gc1 = g1 / total
    gc2 = g2 / total
    gammas = GAMMA_NORMALIZER * np.sqrt(
        (np.sqrt(gc1) - SQRT_HALF) ** 2 + (np.sqrt(gc2) - SQRT_HALF) ** 2
    )
    return float(np.dot(total, gammas) / total.sum())


def variance_oracle_fd(p: ProbTable, h: float = DEFAULT_FD_STEP) -> float:
    """Finite-difference check of σ²[Γ].

    Central differences of Γ along each cell coordinate (cells perturbed
    independently, without renormalizing), then the multinomial quadratic
    form Σ p d² − (Σ p d)².
    """
    if not math.isfinite(h) or h <= MIN_FD_STEP:
        raise InvalidParameterError(f"finite-difference step too small: {h}")
    _check_regular(marginal_summary(p))

    base = np.array(p.probs, dtype=float)
    grad = np.zeros_like(base)
    r = p.r
    for k in range(r):
        for l in range(r):
            if k == l:
                continue
            plus = base.copy()
            minus = base.copy()
            plus[k, l] += h
            minus[k, l] -= h
            grad[k, l] = (_gamma_of_cells(plus) - _gamma_of_cells(minus)) / (2.0 * h)

    mean = float(np.sum(base * grad))
    return float(np.sum(base * grad**2) - mean**2)


def select_probabilities(
    t: SquareTable, estimator: str = ESTIMATOR_AUTO, alpha: float = DEFAULT_ALPHA
) -> tuple[ProbTable, list[str]]:
    """Resolve the estimator to a ProbTable, with any fallback notes.

    ``auto`` uses sample proportions unless some Ĝc is 0 or 1, in which case
    the Dirichlet(alpha) posterior mean is used.
    """
    if estimator not in ESTIMATORS:
        raise InvalidParameterError(f"unknown estimator: {estimator}")
    notes: list[str] = []
    if estimator == ESTIMATOR_BAYES:
        return bayes_smooth(t, alpha), notes
    sample = to_probabilities(t)
    if estimator == ESTIMATOR_SAMPLE:
        return sample, notes
    if _boundary_levels(marginal_summary(sample)):
        notes.append(f"Gc is 0 or 1 at some level; using Bayes smoothing (alpha={alpha:g})")
        _LOGGER.info("Auto estimator: falling back to Bayes smoothing (alpha=%g)", alpha)
        return bayes_smooth(t, alpha), notes
    return sample, notes


def wald_interval(
    p: ProbTable,
    n: int,
    level: float = DEFAULT_CI_LEVEL,
    clip: bool = False,
    notes: list[str] | None = None,
) -> InferenceResult:
    """Γ̂ ± z·σ̂[Γ]/√n with Γ̂ and σ̂ both taken from ``p``.

    Where the variance formula does not apply (exact MH at some level, or
    Gc on the boundary) the interval is omitted and the reason recorded.
    """
    z = z_quantile(level)
    if n < 1:
        raise InvalidParameterError(f"sample size must be ≥ 1, got {n}")
    notes = list(notes or [])
    estimate = measure_gamma(marginal_summary(p)).gamma_total

    try:
        breakdown = asymptotic_variance(p)
    except (DegenerateAtMHError, BoundaryGcError) as err:
        _LOGGER.warning("Confidence interval omitted: %s", err)
        return InferenceResult(
            estimate=estimate,
            se=None,
            ci_low=None,
            ci_high=None,
            level=level,
            n=n,
            estimator_used=p.estimator_label,
            degenerate_warning=isinstance(err, DegenerateAtMHError),
            warnings=[*notes, str(err)],
        )

    se = math.sqrt(breakdown.sigma2 / n)
    low, high = estimate - z * se, estimate + z * se
    if clip:
        low, high = max(low, 0.0), min(high, 1.0)
    return InferenceResult(
        estimate=estimate,
        se=se,
        ci_low=low,
        ci_high=high,
        level=level,
        n=n,
        estimator_used=p.estimator_label,
        clipped=clip,
        warnings=notes,
    )


def confidence_interval(
    t: SquareTable,
    level: float = DEFAULT_CI_LEVEL,
    estimator: str = ESTIMATOR_AUTO,
    alpha: float = DEFAULT_ALPHA,
    clip: bool = False,
) -> InferenceResult:
    """Wald interval for Γ from observed counts.

    The estimate and the variance always come from the same probability
    table. At exact marginal homogeneity the interval is omitted and
    ``degenerate_warning`` is set.
    """
    z_quantile(level)  # reject a bad level before any work
    probs, notes = select_probabilities(t, estimator, alpha)
    return wald_interval(probs, t.n, level=level, clip=clip, notes=notes)
