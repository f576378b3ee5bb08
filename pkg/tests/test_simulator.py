"""Tests for the synthetic-cohort generator and calibration harness."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from skilltracer import simulator
from skilltracer.graph import graph_from_text
from skilltracer.simulator import (
    CohortConfig,
    RunResult,
    StepResult,
    FinalState,
    calibration_report,
    default_calibration_graph,
    gen_cohort,
    run,
)

GRAPH = default_calibration_graph()


def composite_graph():
    doc = {
        "skills": [{"id": "a"}, {"id": "b"}],
        "exercises": [{"id": "ex-and", "setup": "and(a, b)"}],
    }
    graph, report = graph_from_text(json.dumps(doc))
    assert report.ok
    return graph


# ----------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValueError):
        CohortConfig(steps=-1)
    with pytest.raises(ValueError):
        CohortConfig(rate_lo=0.8, rate_hi=0.2)
    with pytest.raises(ValueError):
        CohortConfig(mean_gap=0.0)
    with pytest.raises(ValueError):
        CohortConfig(gap_jitter=1.0)


# ------------------------------------------------------------- gen_cohort


def test_gen_cohort_is_deterministic():
    a = gen_cohort(GRAPH, 4, seed=7)
    b = gen_cohort(GRAPH, 4, seed=7)
    assert a == b
    c = gen_cohort(GRAPH, 4, seed=8)
    assert a != c


def test_gen_cohort_substreams_are_stable():
    # Student k's script does not depend on how many students follow.
    small = gen_cohort(GRAPH, 2, seed=11)
    large = gen_cohort(GRAPH, 6, seed=11)
    assert large[:2] == small


def test_scripts_have_monotone_timestamps_and_valid_fields():
    cfg = CohortConfig(steps=30)
    for script in gen_cohort(GRAPH, 5, seed=3, config=cfg):
        ats = [s.at for s in script.steps]
        assert all(b > a for a, b in zip(ats, ats[1:]))
        for step in script.steps:
            assert step.exercise in GRAPH.exercises
            assert step.outcome in ("success", "failure")
            assert 0.0 <= step.truth <= 1.0


def test_outcome_frequency_matches_truth():
    cfg = CohortConfig(steps=400, rate_lo=0.7, rate_hi=0.7)
    script = gen_cohort(GRAPH, 1, seed=5, config=cfg)[0]
    rate = np.mean([s.outcome == "success" for s in script.steps])
    assert rate == pytest.approx(0.7, abs=0.08)


def test_composite_truth_is_the_setup_polynomial():
    graph = composite_graph()
    cfg = CohortConfig(steps=20)
    for script in gen_cohort(graph, 3, seed=13, config=cfg):
        for step in script.steps:
            assert step.truth == pytest.approx(
                step.rates["a"] * step.rates["b"], rel=1e-12
            )


def test_static_rates_do_not_move():
    cfg = CohortConfig(steps=25, drift_sigma=0.0)
    script = gen_cohort(GRAPH, 1, seed=17, config=cfg)[0]
    rates = {s.rates["s0"] for s in script.steps}
    assert len(rates) == 1


def test_drifting_rates_move_and_stay_bounded():
    cfg = CohortConfig(steps=200, drift_sigma=0.4)
    script = gen_cohort(GRAPH, 1, seed=19, config=cfg)[0]
    rates = [s.rates["s0"] for s in script.steps]
    assert len(set(rates)) > 100
    lo = 1.0 / (1.0 + np.exp(simulator.LOGIT_BOUND))
    assert all(lo <= r <= 1.0 - lo for r in rates)


def test_gen_cohort_requires_exercises():
    graph, report = graph_from_text(json.dumps({"skills": [{"id": "a"}]}))
    assert report.ok
    with pytest.raises(ValueError):
        gen_cohort(graph, 1, seed=0)


# -------------------------------------------------------------------- run


def test_run_is_deterministic():
    scripts = gen_cohort(GRAPH, 3, seed=23, config=CohortConfig(steps=15))
    r1 = run(GRAPH, scripts)
    r2 = run(GRAPH, scripts)
    assert [s.prediction for s in r1.steps] == [s.prediction for s in r2.steps]
    assert [(f.mean, f.interval) for f in r1.finals] == [
        (f.mean, f.interval) for f in r2.finals
    ]


def test_first_prediction_is_the_flat_prior():
    scripts = gen_cohort(GRAPH, 4, seed=29, config=CohortConfig(steps=1))
    result = run(GRAPH, scripts)
    assert [s.prediction for s in result.steps] == [0.5] * 4


def test_perfect_student_predictions_climb_and_stay_below_one():
    cfg = CohortConfig(steps=60, rate_lo=1.0, rate_hi=1.0, gap_jitter=0.0)
    result = run(GRAPH, gen_cohort(GRAPH, 1, seed=31, config=cfg))
    preds = np.array([s.prediction for s in result.steps])
    assert np.all(np.diff(preds) > 0)
    assert np.all(preds < 1.0)
    assert preds[-1] > 0.9


def test_static_cohort_recovers_the_rate_on_average():
    # Every student shares the true rate 0.6; the cohort-average final
    # posterior mean concentrates near it (individual trajectories keep a
    # stationary spread by design, because the schedule keeps forgetting).
    cfg = CohortConfig(steps=40, rate_lo=0.6, rate_hi=0.6)
    result = run(GRAPH, gen_cohort(GRAPH, 120, seed=37, config=cfg))
    finals = np.array([f.mean for f in result.finals])
    assert abs(finals.mean() - 0.6) <= 0.07
    report = calibration_report(result)
    assert report.overall_gap <= 0.05


def test_uniform_cohort_is_calibrated_with_coverage():
    cfg = CohortConfig(steps=60)
    result = run(GRAPH, gen_cohort(GRAPH, 80, seed=41, config=cfg))
    report = calibration_report(result)
    assert report.coverage >= 0.8
    assert report.max_bin_gap <= 0.06
    assert report.brier < 0.25


def test_run_through_composite_graph():
    graph = composite_graph()
    cfg = CohortConfig(steps=12)
    result = run(graph, gen_cohort(graph, 2, seed=43, config=cfg))
    assert len(result.steps) == 24
    assert all(0.0 < s.prediction < 1.0 for s in result.steps)
    # Finals cover both skills per student.
    assert sorted({f.skill for f in result.finals}) == ["a", "b"]


# ----------------------------------------------------------------- report


def synthetic_result(preds, outcomes):
    steps = [
        StepResult("s", "e", float(i), p, "success" if y else "failure", 0.5)
        for i, (p, y) in enumerate(zip(preds, outcomes))
    ]
    return RunResult(steps=steps)


def test_report_scores_are_exact_on_synthetic_data():
    result = synthetic_result([0.8, 0.2], [1, 0])
    report = calibration_report(result, min_mass=0.0)
    assert_allclose(report.brier, 0.04, rtol=1e-12)
    assert_allclose(report.log_loss, -np.log(0.8), rtol=1e-12)
    assert_allclose(report.overall_gap, 0.0, atol=1e-12)


def test_report_bins_count_mass_and_gap():
    preds = [0.05] + [0.55] * 99
    outcomes = [0] + [1] * 44 + [0] * 55
    report = calibration_report(synthetic_result(preds, outcomes))
    # The 1-sample bin is below the 2% mass threshold and gets skipped.
    assert report.skipped_bins == [(0.0, 0.1)]
    assert len(report.bins) == 1
    b = report.bins[0]
    assert (b.lo, b.hi, b.count) == (0.5, 0.6, 99)
    assert_allclose(b.mass, 0.99, rtol=1e-12)
    assert_allclose(b.mean_prediction, 0.55, rtol=1e-12)
    assert_allclose(b.empirical, 44.0 / 99.0, rtol=1e-12)
    assert_allclose(b.gap, 0.55 - 44.0 / 99.0, rtol=1e-12)
    assert_allclose(report.max_bin_gap, 0.55 - 44.0 / 99.0, rtol=1e-12)


def test_report_bin_edges_use_left_closed_intervals():
    report = calibration_report(
        synthetic_result([0.1, 0.3, 1.0], [0, 0, 1]), min_mass=0.0
    )
    spans = [(b.lo, b.hi) for b in report.bins]
    assert spans == [(0.1, 0.2), (0.3, 0.4), (0.9, 1.0)]


def test_report_handles_empty_run():
    report = calibration_report(RunResult())
    assert report.n_predictions == 0
    assert report.bins == []
    assert np.isnan(report.brier)
    assert report.coverage is None


def test_report_coverage_counts_contained_truths():
    result = RunResult(
        finals=[
            FinalState("s", "k", 0.5, (0.2, 0.8), 0.5),
            FinalState("s", "k", 0.5, (0.2, 0.8), 0.9),
            FinalState("s", "k", 0.5, (0.2, 0.8), 0.2),
            FinalState("s", "k", 0.5, (0.2, 0.8), 0.8),
        ]
    )
    report = calibration_report(result)
    assert_allclose(report.coverage, 0.75, rtol=1e-12)


def test_report_render_is_plain_text():
    cfg = CohortConfig(steps=20)
    result = run(GRAPH, gen_cohort(GRAPH, 10, seed=47, config=cfg))
    text = calibration_report(result).render()
    assert "brier score" in text
    assert "90% interval coverage" in text
    assert text.endswith("\n")
    payload = calibration_report(result).to_dict()
    assert json.dumps(payload)  # machine-readable form serializes
