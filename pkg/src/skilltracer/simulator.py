"""Synthetic cohorts with known success rates, replayed through the engine.

Students are simulated with hidden per-skill success rates (optionally
drifting as a bounded random walk on the logit scale), outcomes are drawn
Bernoulli from the exercise polynomial evaluated at those rates, and the
resulting observation streams are fed through a real tracker.  The report
compares the engine's predictions with realized outcomes: reliability
bins, Brier score, log-loss, and credible-interval coverage of the true
rates.

Initial rates default to uniform draws over (0, 1), the engine's own
prior; a posterior-mean predictor is marginally calibrated against truth
drawn from its prior, so the reliability diagram isolates the engine's
forgetting bias instead of a selection artifact of a narrow rate band.
"""

from __future__ import annotations

import json
import math
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import inference, setup_dsl
from .graph import Observation, SkillGraph, graph_from_text
from .smoothing import DecayParams
from .store import Store
from .tracker import Tracker

DAY = 86400.0
LOGIT_BOUND = 6.0  # keeps drifting rates inside ~(0.0025, 0.9975)


@dataclass(frozen=True)
class CohortConfig:
    """Knobs for the synthetic cohort generator.

    steps observations per student, spaced mean_gap seconds apart with a
    uniform +-gap_jitter fraction of jitter; drift_sigma is the per-step
    standard deviation of the logit-scale random walk (0 = static rates).

    Stored orders stay bounded only while gaps are long enough for the
    decay schedule to emit at least one smoothing order; at the default
    decay parameters that means (gap + equivalent inactive time) above
    t_half * log2((n_s_max + 2) / n_s_max), about 6.7 days for the
    calibration graph.  Short-gap configs eventually overflow the maximum
    representable order, which the engine reports as an error.
    """

    steps: int = 60
    mean_gap: float = 7.0 * DAY
    gap_jitter: float = 0.0
    drift_sigma: float = 0.0
    rate_lo: float = 0.0
    rate_hi: float = 1.0
    start_at: float = 1_000_000_000.0

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps cannot be negative")
        if not 0.0 <= self.rate_lo <= self.rate_hi <= 1.0:
            raise ValueError("rate band must satisfy 0 <= lo <= hi <= 1")
        if self.mean_gap <= 0 or not 0.0 <= self.gap_jitter < 1.0:
            raise ValueError("gaps must be positive with jitter in [0, 1)")


@dataclass(frozen=True)
class ScriptedStep:
    exercise: str
    at: float
    outcome: str
    truth: float  # exercise-level true success probability
    rates: dict  # per-skill true rates at this step


@dataclass(frozen=True)
class ObservationScript:
    student: str
    steps: tuple


@dataclass(frozen=True)
class StepResult:
    student: str
    exercise: str
    at: float
    prediction: float
    outcome: str
    truth: float


@dataclass(frozen=True)
class FinalState:
    student: str
    skill: str
    mean: float
    interval: tuple
    truth: float

    @property
    def covered(self) -> bool:
        return self.interval[0] <= self.truth <= self.interval[1]


@dataclass
class RunResult:
    steps: list = field(default_factory=list)
    finals: list = field(default_factory=list)


def default_calibration_graph(n_skills: int = 1) -> SkillGraph:
    """Single-exercise-per-skill graph tuned for calibration runs.

    The smoothing-order ceiling sits just under the representable-order
    cap so the schedule retains as much evidence per step as the engine
    allows.
    """
    doc = {
        "decay": DecayParams(n_s_max=158).to_dict(),
        "skills": [{"id": f"s{i}"} for i in range(n_skills)],
        "exercises": [{"id": f"ex-s{i}", "setup": f"s{i}"} for i in range(n_skills)],
    }
    graph, report = graph_from_text(json.dumps(doc))
    if graph is None:
        raise RuntimeError(f"internal graph failed validation: {report.errors}")
    return graph


def _atomic_skills(graph: SkillGraph) -> list:
    return sorted(sid for sid in graph.skills if sid not in graph.skill_polys)


def _skill_rates(graph: SkillGraph, atomic_rates: dict) -> dict:
    """True rates for every skill; composite ones follow their set-ups."""
    rates = dict(atomic_rates)

    def rate(sid: str) -> float:
        if sid not in rates:
            poly = graph.skill_polys[sid]
            rates[sid] = setup_dsl.evaluate(poly, {v: rate(v) for v in poly.variables})
        return rates[sid]

    for sid in graph.skills:
        rate(sid)
    return rates


def gen_cohort(graph: SkillGraph, students: int, seed: int,
               config: CohortConfig = CohortConfig()) -> list:
    """Scripted observation streams with ground truth attached.

    Each student gets an independent substream of randomness, so scripts
    are reproducible per (seed, student index) regardless of cohort size.
    """
    if not graph.exercises:
        raise ValueError("the graph defines no exercises to practice")
    exercise_ids = sorted(graph.exercises)
    scripts = []
    for idx in range(students):
        rng = np.random.default_rng([seed, idx])
        atomic = {
            sid: config.rate_lo + (config.rate_hi - config.rate_lo) * rng.random()
            for sid in _atomic_skills(graph)
        }
        at = config.start_at
        steps = []
        for _ in range(config.steps):
            rates = _skill_rates(graph, atomic)
            eid = exercise_ids[rng.integers(len(exercise_ids))]
            poly = graph.exercise_polys[eid]
            truth = float(setup_dsl.evaluate(poly, {v: rates[v] for v in poly.variables}))
            outcome = "success" if rng.random() < truth else "failure"
            steps.append(ScriptedStep(eid, at, outcome, truth, dict(rates)))
            at += config.mean_gap * (
                1.0 + config.gap_jitter * (2.0 * rng.random() - 1.0)
            )
            if config.drift_sigma > 0.0:
                for sid in atomic:
                    p = min(max(atomic[sid], 1e-9), 1.0 - 1e-9)
                    logit = math.log(p / (1.0 - p))
                    logit += config.drift_sigma * rng.standard_normal()
                    logit = min(max(logit, -LOGIT_BOUND), LOGIT_BOUND)
                    atomic[sid] = 1.0 / (1.0 + math.exp(-logit))
        scripts.append(ObservationScript(student=f"sim-{idx:04d}", steps=tuple(steps)))
    return scripts


def run(graph: SkillGraph, scripts: list, store_root: Optional[str] = None) -> RunResult:
    """Replay scripts through a tracker, predicting before each outcome.

    The prediction is the expected success of the exercise under the
    current per-skill posteriors (read-path decay to the observation
    instant).  Snapshots are batched; the log still gets every record.
    """
    result = RunResult()
    with tempfile.TemporaryDirectory() as fallback:
        tracker = Tracker(
            graph, Store(store_root or fallback), snapshot_every=10 ** 9
        )
        for script in scripts:
            tracker.add_student(script.student)
            for step in script.steps:
                poly = graph.exercise_polys[step.exercise]
                dists = {
                    v: tracker.posterior(
                        script.student, v, step.at, with_interval=False
                    ).coeffs
                    for v in sorted(poly.variables)
                }
                prediction = inference.expected_success(poly, dists)
                result.steps.append(
                    StepResult(script.student, step.exercise, step.at,
                               prediction, step.outcome, step.truth)
                )
                tracker.record(
                    Observation(script.student, step.exercise, step.outcome, step.at)
                )
            if script.steps:
                last = script.steps[-1]
                for sid in sorted(graph.skills):
                    post = tracker.posterior(script.student, sid, last.at)
                    result.finals.append(
                        FinalState(script.student, sid, post.mean,
                                   post.interval, last.rates[sid])
                    )
        tracker.flush()
    return result


@dataclass
class ReliabilityBin:
    lo: float
    hi: float
    count: int
    mass: float
    mean_prediction: float
    empirical: float

    @property
    def gap(self) -> float:
        return abs(self.mean_prediction - self.empirical)

    def to_dict(self) -> dict:
        return {
            "lo": self.lo, "hi": self.hi, "count": self.count,
            "mass": self.mass, "mean_prediction": self.mean_prediction,
            "empirical": self.empirical, "gap": self.gap,
        }


@dataclass
class CalibrationReport:
    n_predictions: int
    bins: list
    skipped_bins: list
    brier: float
    log_loss: float
    overall_gap: float
    coverage: Optional[float]

    @property
    def max_bin_gap(self) -> float:
        return max((b.gap for b in self.bins), default=0.0)

    def to_dict(self) -> dict:
        return {
            "n_predictions": self.n_predictions,
            "bins": [b.to_dict() for b in self.bins],
            "skipped_bins": self.skipped_bins,
            "brier": self.brier,
            "log_loss": self.log_loss,
            "overall_gap": self.overall_gap,
            "max_bin_gap": self.max_bin_gap,
            "coverage": self.coverage,
        }

    def render(self) -> str:
        lines = [
            f"predictions: {self.n_predictions}",
            f"brier score: {self.brier:.6f}",
            f"log loss:    {self.log_loss:.6f}",
            f"overall gap: {self.overall_gap:.6f}",
            f"max bin gap: {self.max_bin_gap:.6f}",
        ]
        if self.coverage is not None:
            lines.append(f"90% interval coverage: {self.coverage:.3f}")
        lines.append("bin        count   mass    predicted  empirical  gap")
        for b in self.bins:
            lines.append(
                f"[{b.lo:.1f},{b.hi:.1f})  {b.count:6d}  {b.mass:6.3f}"
                f"  {b.mean_prediction:9.4f}  {b.empirical:9.4f}  {b.gap:.4f}"
            )
        if self.skipped_bins:
            skipped = ", ".join(f"[{lo:.1f},{hi:.1f})" for lo, hi in self.skipped_bins)
            lines.append(f"skipped (mass < threshold): {skipped}")
        return "\n".join(lines) + "\n"


def calibration_report(result: RunResult, n_bins: int = 10,
                       min_mass: float = 0.02) -> CalibrationReport:
    """Reliability diagram plus proper scores over one run's predictions.

    Bins with below-threshold mass are reported separately: their
    empirical frequency is too noisy to certify a gap either way.
    """
    preds = np.array([s.prediction for s in result.steps], dtype=float)
    outs = np.array([1.0 if s.outcome == "success" else 0.0 for s in result.steps])
    coverage = None
    if result.finals:
        coverage = float(np.mean([f.covered for f in result.finals]))
    n = len(preds)
    if n == 0:
        return CalibrationReport(0, [], [], float("nan"), float("nan"),
                                 float("nan"), coverage)
    edges = np.arange(n_bins + 1) / n_bins
    which = np.clip(np.digitize(preds, edges[1:-1], right=False), 0, n_bins - 1)
    bins, skipped = [], []
    for b in range(n_bins):
        mask = which == b
        count = int(mask.sum())
        if count == 0:
            continue
        if count / n < min_mass:
            skipped.append((float(edges[b]), float(edges[b + 1])))
            continue
        bins.append(
            ReliabilityBin(
                lo=float(edges[b]), hi=float(edges[b + 1]), count=count,
                mass=count / n,
                mean_prediction=float(preds[mask].mean()),
                empirical=float(outs[mask].mean()),
            )
        )
    clipped = np.clip(preds, 1e-9, 1.0 - 1e-9)
    log_loss = float(-np.mean(outs * np.log(clipped) + (1 - outs) * np.log1p(-clipped)))
    return CalibrationReport(
        n_predictions=n,
        bins=bins,
        skipped_bins=skipped,
        brier=float(np.mean((preds - outs) ** 2)),
        log_loss=log_loss,
        overall_gap=float(abs(preds.mean() - outs.mean())),
        coverage=coverage,
    )
