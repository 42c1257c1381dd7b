"""Analysis pipeline and the JSON report it produces."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import pandas as pd

from .analysis.inference import InferenceResult, select_probabilities, wald_interval
from .analysis.measures import measure_gamma, measure_report, sub_measures
from .analysis.simulation import (
    SimulationResult,
    SimulationScenario,
    run_coverage,
    true_measure,
)
from .analysis.table import (
    MarginalSummary,
    ProbTable,
    marginal_summary,
    parse_probabilities,
    parse_table,
)
from .const import (
    DEFAULT_ALPHA,
    DEFAULT_CI_LEVEL,
    DEFAULT_CUTOFFS,
    DEFAULT_LAMBDAS,
    DEFAULT_RHO,
    DEFAULT_WORKERS,
    ESTIMATOR_AUTO,
    SCHEMA_VERSION,
)
from .exceptions import MeasureUndefinedError
from .helpers import json_float
from .svg import build_viz_spec, render_svg

_LOGGER = logging.getLogger(__name__)


def _phi_key(lam: float) -> str:
    return repr(float(lam))


def _floats(values) -> list[float | None]:
    return [json_float(v) for v in values]


@dataclass
class AnalysisReport:
    """Everything ``analyze`` reports for one table."""

    dimension: int
    n: int | None
    sha256: str
    estimator: str
    marginal: list[dict] = field(default_factory=list)
    row_marginals: list[float] = field(default_factory=list)
    col_marginals: list[float] = field(default_factory=list)
    sub_measures: list[dict] = field(default_factory=list)
    gamma_total: float | None = None
    phi: dict[float, float] = field(default_factory=dict)
    psi: float | None = None
    tau: tuple[float, float] | None = None
    kl_forward: list[float | None] = field(default_factory=list)
    kl_reverse: list[float | None] = field(default_factory=list)
    inference: dict | None = None
    analysis_status: str = "idle"
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schemaVersion": self.schema_version,
            "input": {"dimension": self.dimension, "n": self.n, "sha256": self.sha256},
            "estimator": self.estimator,
            "marginalSummary": self.marginal,
            "rowMarginals": self.row_marginals,
            "colMarginals": self.col_marginals,
            "subMeasures": self.sub_measures,
            "gammaTotal": self.gamma_total,
            "phi": {_phi_key(lam): value for lam, value in self.phi.items()},
            "psi": self.psi,
            "tau": list(self.tau) if self.tau is not None else None,
            "klForward": self.kl_forward,
            "klReverse": self.kl_reverse,
            "inference": self.inference,
            "analysisStatus": self.analysis_status,
        }

    @classmethod
    def from_dict(cls, data: dict) -> AnalysisReport:
        tau = data.get("tau")
        return cls(
            dimension=data["input"]["dimension"],
            n=data["input"].get("n"),
            sha256=data["input"].get("sha256", ""),
            estimator=data.get("estimator", ""),
            marginal=data.get("marginalSummary", []),
            row_marginals=data.get("rowMarginals", []),
            col_marginals=data.get("colMarginals", []),
            sub_measures=data.get("subMeasures", []),
            gamma_total=data.get("gammaTotal"),
            phi={float(key): value for key, value in data.get("phi", {}).items()},
            psi=data.get("psi"),
            tau=tuple(tau) if tau is not None else None,
            kl_forward=data.get("klForward", []),
            kl_reverse=data.get("klReverse", []),
            inference=data.get("inference"),
            analysis_status=data.get("analysisStatus", "idle"),
            schema_version=data.get("schemaVersion", SCHEMA_VERSION),
        )


def inference_block(result: InferenceResult) -> dict:
    ci = None
    if result.ci_low is not None and result.ci_high is not None:
        ci = [result.ci_low, result.ci_high]
    return {
        "estimate": result.estimate,
        "se": result.se,
        "ci": ci,
        "level": result.level,
        "n": result.n,
        "estimatorUsed": result.estimator_used,
        "degenerateWarning": result.degenerate_warning,
        "clipped": result.clipped,
        "warnings": list(result.warnings),
    }


def marginal_records(s: MarginalSummary) -> list[dict]:
    """Per-level rows of the marginal summary with lowerCamelCase keys."""
    frame = s.to_frame().rename(columns=str.lower).reset_index()
    return [
        {key: (int(value) if key == "level" else json_float(value)) for key, value in row.items()}
        for row in frame.to_dict(orient="records")
    ]


class AnalysisCoordinator:
    """Runs the analysis steps for the command-line front end."""

    def __init__(self, config: dict | None = None) -> None:
        config = dict(config or {})
        self.estimator: str = config.get("estimator", ESTIMATOR_AUTO)
        self.alpha: float = config.get("alpha", DEFAULT_ALPHA)
        self.ci_level: float = config.get("ci_level", DEFAULT_CI_LEVEL)
        self.clip: bool = config.get("clip", False)
        self.lambdas: list[float] = list(config.get("lambdas") or DEFAULT_LAMBDAS)

    def _resolve(
        self, text: str, probs: bool, n: int | None = None
    ) -> tuple[ProbTable, int | None, list[str]]:
        """Parse the input and pick the probability table to analyze."""
        if probs:
            if self.estimator != ESTIMATOR_AUTO or self.alpha != DEFAULT_ALPHA:
                _LOGGER.warning("Ignoring estimator settings: probabilities are used as given")
            _LOGGER.info("Parsing probability table")
            return parse_probabilities(text), None, []
        if n is not None:
            _LOGGER.warning("Ignoring n=%d: the sample size comes from the counts", n)
        _LOGGER.info("Parsing count table")
        table = parse_table(text)
        p, notes = select_probabilities(table, self.estimator, self.alpha)
        _LOGGER.info("Estimator resolved to %s (n=%d)", p.estimator_label, table.n)
        return p, table.n, notes

    def analyze(self, text: str, probs: bool = False, n: int | None = None) -> AnalysisReport:
        """Measures, baselines and (when n is known) the Wald interval."""
        p, counted_n, notes = self._resolve(text, probs, n)
        n = counted_n if counted_n is not None else n

        report = AnalysisReport(
            dimension=p.r,
            n=n,
            sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
            estimator=p.estimator_label,
            analysis_status="running",
        )
        s = marginal_summary(p)
        report.marginal = marginal_records(s)
        report.row_marginals = _floats(s.row_marginals)
        report.col_marginals = _floats(s.col_marginals)

        _LOGGER.info("Computing measures")
        measures = measure_report(s, self.lambdas)
        report.gamma_total = measures.gamma_total
        report.sub_measures = [
            {
                "i": sub.level,
                "gc1": sub.gc1,
                "gc2": sub.gc2,
                "weight": sub.weight,
                "gamma": sub.gamma,
                "direction": sub.direction,
                "theta": sub.theta,
                "klForward": json_float(measures.kl_forward[sub.level - 1]),
                "klReverse": json_float(measures.kl_reverse[sub.level - 1]),
            }
            for sub in measures.subs
            if sub is not None
        ]
        report.phi = dict(measures.phi)
        report.psi = measures.psi
        report.tau = measures.tau
        report.kl_forward = _floats(measures.kl_forward)
        report.kl_reverse = _floats(measures.kl_reverse)

        if n is None:
            _LOGGER.info("Sample size unknown; skipping inference")
            report.analysis_status = "ok"
            return report

        _LOGGER.info("Computing %.0f%% confidence interval", 100 * self.ci_level)
        result = wald_interval(p, n, level=self.ci_level, clip=self.clip, notes=notes)
        report.inference = inference_block(result)
        report.analysis_status = "degenerate" if result.se is None else "ok"
        return report

    def visualize(
        self,
        text: str,
        probs: bool = False,
        style: dict | None = None,
        title: str | None = None,
    ) -> bytes:
        """Render the sub-measure figure for one table."""
        p, _, _ = self._resolve(text, probs)
        s = marginal_summary(p)
        subs = sub_measures(s)
        try:
            gamma_total = measure_gamma(s).gamma_total
        except MeasureUndefinedError as err:
            _LOGGER.warning("Rendering without Γ: %s", err)
            gamma_total = None
        _LOGGER.info("Rendering %d panel(s)", len(subs))
        return render_svg(build_viz_spec(s, subs, style=style, title=title, gamma_total=gamma_total))

    @staticmethod
    def simulate(
        scenarios: list[SimulationScenario], workers: int = DEFAULT_WORKERS
    ) -> list[SimulationResult]:
        results = []
        for index, scenario in enumerate(scenarios, start=1):
            _LOGGER.info("Scenario %d/%d: d=%g n=%d", index, len(scenarios), scenario.d, scenario.n)
            results.append(run_coverage(scenario, workers=workers))
        _LOGGER.info("Simulation finished: %d scenario(s)", len(results))
        return results

    @staticmethod
    def true_value(
        d: float, rho: float = DEFAULT_RHO, cutoffs: list[float] | None = None
    ) -> float:
        return true_measure(d, rho, tuple(cutoffs or DEFAULT_CUTOFFS))


def results_frame(results: list[SimulationResult]) -> pd.DataFrame:
    """Simulation results as a table, one row per (d, n)."""
    return pd.DataFrame([result.to_dict() for result in results])
