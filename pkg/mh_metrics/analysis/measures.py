"""Measures of departure from marginal homogeneity.

The sub-measure γ_i is the normalized Matusita distance between the
conditional pair (Gc1(i), Gc2(i)) and (½, ½); Γ is their weighted sum. The
power-divergence measure Φ^(λ), the directional measure Ψ and the pair
τ = (Φ^(0), Ψ) are computed alongside as baselines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import rel_entr

from ..const import (
    CLAMP_TOLERANCE,
    DEFAULT_LAMBDAS,
    DIRECTION_DETERIORATING,
    DIRECTION_IMPROVING,
    LAMBDA_LIMIT_TOLERANCE,
    SOURCE_SAMPLE,
    TWO_POINT_TOLERANCE,
)
from ..exceptions import InvalidParameterError
from .table import MarginalSummary
from .utils import is_two_point

_LOGGER = logging.getLogger(__name__)

HALF = (0.5, 0.5)
SQRT_HALF = math.sqrt(0.5)
# γ_i² = (2+√2)/2 · d_M² maps the largest possible distance, from (1, 0), to 1.
GAMMA_NORMALIZER = math.sqrt((2.0 + math.sqrt(2.0)) / 2.0)


@dataclass(frozen=True)
class SubMeasure:
    """Degree and direction of departure at one cut."""

    level: int
    gc1: float
    gc2: float
    gamma: float
    upsilon1: float
    upsilon2: float
    direction: str
    weight: float = math.nan
    theta: float = math.nan


@dataclass
class MeasureReport:
    """Γ with its sub-measures and the baseline measures."""

    gamma_total: float | None = None
    subs: list[SubMeasure | None] = field(default_factory=list)
    phi: dict[float, float] = field(default_factory=dict)
    psi: float | None = None
    tau: tuple[float, float] | None = None
    estimator: str = SOURCE_SAMPLE
    # Per-level Kullback–Leibler divergence in both directions (λ = 0)
    kl_forward: list[float] = field(default_factory=list)
    kl_reverse: list[float] = field(default_factory=list)


def _check_pair(gc1: float, gc2: float) -> tuple[float, float]:
    if not (math.isfinite(gc1) and math.isfinite(gc2)):
        raise InvalidParameterError(f"not a 2-point distribution: ({gc1}, {gc2})")
    if not is_two_point(gc1, gc2, TWO_POINT_TOLERANCE):
        raise InvalidParameterError(f"not a 2-point distribution: ({gc1}, {gc2})")
    total = gc1 + gc2
    return gc1 / total, gc2 / total


def matusita_distance(u, v) -> float:
    """√(Σ (√u_k − √v_k)²) between two discrete distributions."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InvalidParameterError(f"shape mismatch: {u.shape} vs {v.shape}")
    if np.any(u < 0) or np.any(v < 0):
        raise InvalidParameterError("distributions must be non-negative")
    return float(np.sqrt(np.sum((np.sqrt(u) - np.sqrt(v)) ** 2)))


def sub_measure_gamma(gc1: float, gc2: float) -> float:
    """γ = √((2+√2)/2 · (υ1² + υ2²)), υ_k = √Gc_k − √½."""
    gc1, gc2 = _check_pair(gc1, gc2)
    if abs(gc1 - 0.5) <= CLAMP_TOLERANCE:
        return 0.0
    gamma = GAMMA_NORMALIZER * matusita_distance((gc1, gc2), HALF)
    if gamma > 1.0 + CLAMP_TOLERANCE:
        raise InvalidParameterError(f"sub-measure out of range: {gamma}")
    return min(gamma, 1.0)


def _sub_measure(level: int, gc1: float, gc2: float, weight: float, g1: float, g2: float) -> SubMeasure:
    gamma = sub_measure_gamma(gc1, gc2)
    return SubMeasure(
        level=level,
        gc1=float(gc1),
        gc2=float(gc2),
        gamma=gamma,
        upsilon1=math.sqrt(gc1) - SQRT_HALF,
        upsilon2=math.sqrt(gc2) - SQRT_HALF,
        direction=DIRECTION_IMPROVING if gc1 >= gc2 else DIRECTION_DETERIORATING,
        weight=float(weight),
        theta=_theta(g1, g2),
    )


def sub_measures(s: MarginalSummary) -> list[SubMeasure | None]:
    """One SubMeasure per level; None where the level is undefined.

    Never raises for undefined levels, so partially defined tables can still
    be drawn.
    """
    subs: list[SubMeasure | None] = []
    for k, level in enumerate(s.levels):
        if not s.defined[k]:
            subs.append(None)
            continue
        subs.append(
            _sub_measure(level, s.gc1[k], s.gc2[k], s.weights[k], s.g1[k], s.g2[k])
        )
    return subs


def measure_gamma(s: MarginalSummary) -> MeasureReport:
    """Γ = Σ w_i γ_i with the sub-measures populated."""
    s.require_defined()
    subs = sub_measures(s)
    gammas = np.array([sub.gamma for sub in subs])
    gamma_total = float(np.dot(s.weights, gammas))
    gamma_total = min(max(gamma_total, 0.0), 1.0)
    _LOGGER.debug("Γ = %.6f from γ = %s", gamma_total, np.round(gammas, 4).tolist())
    return MeasureReport(gamma_total=gamma_total, subs=subs, estimator=s.estimator_label)


def power_divergence(gc1: float, gc2: float, lam: float, reverse: bool = False) -> float:
    """Cressie–Read power divergence between {Gc1, Gc2} and {½, ½}.

    ``reverse=False`` gives I^(λ)({Gc1, Gc2}; {½, ½}), ``reverse=True`` gives
    I^(λ)({½, ½}; {Gc1, Gc2}). λ = 0 is Kullback–Leibler, λ = −½ is twice the
    squared Matusita distance. Conventions: 0·log 0 = 0 and 0·0^λ = 0; a
    reverse divergence against an empty cell is +inf.
    """
    if not math.isfinite(lam) or lam <= -1.0:
        raise InvalidParameterError(f"lambda must be > -1, got {lam}")
    gc1, gc2 = _check_pair(gc1, gc2)
    u = np.array([gc1, gc2])
    q = np.array(HALF)
    if reverse:
        u, q = q, u

    if abs(lam) < LAMBDA_LIMIT_TOLERANCE:
        return max(float(rel_entr(u, q).sum()), 0.0)

    if abs(lam + 0.5) < LAMBDA_LIMIT_TOLERANCE:
        return 2.0 * matusita_distance(u, q) ** 2

    # 0^(−λ) is +inf for λ > 0: a reverse divergence against an empty cell
    with np.errstate(divide="ignore"):
        terms = np.power(u, 1.0 + lam) * np.power(q, -lam)
    return max(float((terms.sum() - 1.0) / (lam * (lam + 1.0))), 0.0)


def _phi_normalizer(lam: float) -> float:
    """λ(λ+1)/(2^λ − 1), with its λ → 0 limit 1/ln 2."""
    if abs(lam) < LAMBDA_LIMIT_TOLERANCE:
        return 1.0 / math.log(2.0)
    return lam * (lam + 1.0) / (2.0**lam - 1.0)


def measure_phi(s: MarginalSummary, lam: float) -> float:
    """Power-divergence-type measure Φ^(λ) ∈ [0, 1]."""
    if not math.isfinite(lam) or lam <= -1.0:
        raise InvalidParameterError(f"lambda must be > -1, got {lam}")
    s.require_defined()
    divergences = np.array(
        [power_divergence(s.gc1[k], s.gc2[k], lam) for k in range(s.r - 1)]
    )
    phi = _phi_normalizer(lam) * float(np.dot(s.weights, divergences))
    return min(max(phi, 0.0), 1.0)


def _theta(g1: float, g2: float) -> float:
    # arccos(G1 / √(G1² + G2²)) for non-negative G; atan2 keeps full precision near 0 and π/2.
    return float(math.atan2(g2, g1))


def measure_psi(s: MarginalSummary) -> float:
    """Directional measure Ψ ∈ [−1, 1]; −1 is maximum upper-marginal inhomogeneity."""
    s.require_defined()
    thetas = np.array([_theta(s.g1[k], s.g2[k]) for k in range(s.r - 1)])
    psi = 4.0 / math.pi * float(np.dot(s.weights, thetas - math.pi / 4.0))
    return min(max(psi, -1.0), 1.0)


def measure_tau(s: MarginalSummary) -> tuple[float, float]:
    """Two-dimensional measure τ = (Φ^(0), Ψ)."""
    return measure_phi(s, 0.0), measure_psi(s)


def measure_report(s: MarginalSummary, lambdas: list[float] | None = None) -> MeasureReport:
    """Full MeasureReport: Γ, sub-measures, Φ^(λ) per λ, Ψ, τ and per-level KL."""
    lambdas = list(DEFAULT_LAMBDAS if lambdas is None else lambdas)
    if 0.0 not in lambdas:
        lambdas.append(0.0)

    report = measure_gamma(s)
    report.phi = {float(lam): measure_phi(s, lam) for lam in lambdas}
    report.psi = measure_psi(s)
    report.tau = (report.phi[0.0], report.psi)
    report.kl_forward = [power_divergence(s.gc1[k], s.gc2[k], 0.0) for k in range(s.r - 1)]
    report.kl_reverse = [
        power_divergence(s.gc1[k], s.gc2[k], 0.0, reverse=True) for k in range(s.r - 1)
    ]
    _LOGGER.debug(
        "Measures: Γ=%.4f Φ(0)=%.4f Ψ=%.4f", report.gamma_total, report.tau[0], report.psi
    )
    return report
