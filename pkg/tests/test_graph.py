"""Tests for graph-definition parsing and validation."""

import json

import pytest

from skilltracer.graph import (
    MAX_VARIABLE_DEGREE,
    Observation,
    graph_from_text,
    graph_to_text,
)
from skilltracer.inference import InferenceConfig
from skilltracer.setup_dsl import ProbPolynomial
from skilltracer.smoothing import SECONDS_PER_YEAR


def build(doc):
    return graph_from_text(json.dumps(doc))


def error_codes(report):
    return {e["code"] for e in report.errors}


DEMO = {
    "decay": {"t_half": SECONDS_PER_YEAR, "t_e0": SECONDS_PER_YEAR / 6.0,
              "n_half": 8, "n_s_max": 120},
    "inference_order": 10,
    "skills": [
        {"id": "add", "name": "Addition"},
        {"id": "sub", "name": "Subtraction",
         "correlations": [{"skill": "mul", "n_c": 5}]},
        {"id": "mul", "name": "Multiplication",
         "correlations": [{"skill": "sub", "n_c": 5}]},
        {"id": "arith", "name": "Arithmetic", "setup": "and(add, or(sub, mul))"},
    ],
    "exercises": [
        {"id": "ex-add", "setup": "add"},
        {"id": "ex-mixed", "setup": "and(add, sub)"},
        {"id": "ex-part", "setup": "and(add, part(mul, 0.5))"},
    ],
}


# ------------------------------------------------------------ happy path


def test_demo_graph_validates():
    graph, report = build(DEMO)
    assert report.ok
    assert report.errors == []
    assert graph is not None
    assert set(graph.skills) == {"add", "sub", "mul", "arith"}
    assert set(graph.exercises) == {"ex-add", "ex-mixed", "ex-part"}


def test_setups_are_compiled():
    graph, _ = build(DEMO)
    # and(add, or(sub, mul)) = a(s + m - sm) = as + am - asm
    expected = (
        ProbPolynomial.variable("add") * ProbPolynomial.variable("sub")
        + ProbPolynomial.variable("add") * ProbPolynomial.variable("mul")
        + (ProbPolynomial.variable("add") * ProbPolynomial.variable("sub")
           * ProbPolynomial.variable("mul")).scaled(-1.0)
    )
    assert graph.skill_polys["arith"] == expected
    assert graph.exercise_polys["ex-add"] == ProbPolynomial.variable("add")


def test_decay_and_inference_params_are_honored():
    graph, _ = build(DEMO)
    assert graph.decay.t_e0 == SECONDS_PER_YEAR / 6.0
    assert graph.inference.n_i == 10


def test_inference_order_override():
    doc = {
        "skills": [
            {"id": "a"},
            {"id": "c", "setup": "a", "inference_order": 4},
        ],
        "exercises": [{"id": "e", "setup": "a"}],
    }
    graph, report = build(doc)
    assert report.ok
    assert graph.inference_order_for("c") == 4
    assert graph.inference_order_for("a") == InferenceConfig().n_i


def test_graph_to_text_round_trip():
    text = graph_to_text(DEMO)
    graph, report = graph_from_text(text)
    assert report.ok
    assert set(graph.skills) == {"add", "sub", "mul", "arith"}
    # Stable serialization: same document, same bytes.
    assert graph_to_text(json.loads(text)) == text


# --------------------------------------------------------- document errors


def test_rejects_invalid_json():
    graph, report = graph_from_text("{not json")
    assert graph is None
    assert error_codes(report) == {"bad-json"}


def test_rejects_non_object_document():
    graph, report = graph_from_text("[1, 2]")
    assert graph is None
    assert "bad-json" in error_codes(report)


def test_rejects_bad_decay_params():
    doc = dict(DEMO, decay={"t_half": -1.0})
    graph, report = build(doc)
    assert graph is None
    assert "bad-decay-params" in error_codes(report)


def test_rejects_bad_inference_order():
    doc = dict(DEMO, inference_order=0)
    graph, report = build(doc)
    assert graph is None
    assert "bad-inference-order" in error_codes(report)


# ------------------------------------------------------------ skill errors


def test_rejects_missing_skill_id():
    doc = {"skills": [{"name": "anon"}], "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "missing-id" in error_codes(report)


def test_rejects_reserved_skill_id():
    for name in ("and", "or", "pick", "part", "Pick"):
        doc = {"skills": [{"id": name}], "exercises": []}
        graph, report = build(doc)
        assert graph is None, name
        assert "reserved-id" in error_codes(report), name


def test_rejects_duplicate_skill_id():
    doc = {"skills": [{"id": "a"}, {"id": "a"}], "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "duplicate-id" in error_codes(report)


def test_rejects_unparsable_setup():
    doc = {"skills": [{"id": "a"}, {"id": "c", "setup": "and(a,"}], "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "bad-setup" in error_codes(report)


def test_rejects_setup_referencing_unknown_skill():
    doc = {"skills": [{"id": "c", "setup": "and(a, b)"}], "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "unknown-skill-reference" in error_codes(report)


def test_rejects_setup_exceeding_degree_bound():
    # Nine references to the same skill inside and() give degree 9.
    refs = ", ".join(["a"] * (MAX_VARIABLE_DEGREE + 1))
    doc = {"skills": [{"id": "a"}, {"id": "c", "setup": f"and({refs})"}],
           "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "degree-bound" in error_codes(report)
    # One fewer reference is accepted.
    refs_ok = ", ".join(["a"] * MAX_VARIABLE_DEGREE)
    doc_ok = {"skills": [{"id": "a"}, {"id": "c", "setup": f"and({refs_ok})"}],
              "exercises": []}
    _, report_ok = build(doc_ok)
    assert report_ok.ok


def test_rejects_setup_cycle():
    doc = {
        "skills": [
            {"id": "a", "setup": "b"},
            {"id": "b", "setup": "c"},
            {"id": "c", "setup": "a"},
        ],
        "exercises": [],
    }
    graph, report = build(doc)
    assert graph is None
    assert "setup-cycle" in error_codes(report)


def test_self_reference_is_a_cycle():
    doc = {"skills": [{"id": "a", "setup": "and(a, a)"}], "exercises": []}
    graph, report = build(doc)
    assert graph is None
    assert "setup-cycle" in error_codes(report)


# ------------------------------------------------------ correlation errors


def corr_doc(edges_a, edges_b):
    return {
        "skills": [
            {"id": "a", "correlations": edges_a},
            {"id": "b", "correlations": edges_b},
        ],
        "exercises": [],
    }


def test_rejects_self_correlation():
    doc = corr_doc([{"skill": "a", "n_c": 5}], [])
    graph, report = build(doc)
    assert graph is None
    assert "self-correlation" in error_codes(report)


def test_rejects_unknown_correlation_target():
    doc = corr_doc([{"skill": "ghost", "n_c": 5}], [])
    graph, report = build(doc)
    assert graph is None
    assert "unknown-skill-reference" in error_codes(report)


def test_rejects_correlation_order_out_of_range():
    for n_c in (0, 11, -3):
        doc = corr_doc(
            [{"skill": "b", "n_c": n_c}], [{"skill": "a", "n_c": n_c}]
        )
        graph, report = build(doc)
        assert graph is None, n_c
        assert "correlation-order" in error_codes(report), n_c


def test_rejects_asymmetric_correlation():
    # Missing reverse edge.
    doc = corr_doc([{"skill": "b", "n_c": 5}], [])
    graph, report = build(doc)
    assert graph is None
    assert "asymmetric-correlation" in error_codes(report)
    # Reverse edge with a different order is also asymmetric.
    doc = corr_doc([{"skill": "b", "n_c": 5}], [{"skill": "a", "n_c": 3}])
    graph, report = build(doc)
    assert graph is None
    assert "asymmetric-correlation" in error_codes(report)


def test_warns_on_correlation_triplet():
    doc = {
        "skills": [
            {"id": "a", "correlations": [{"skill": "b", "n_c": 5},
                                         {"skill": "c", "n_c": 5}]},
            {"id": "b", "correlations": [{"skill": "a", "n_c": 5}]},
            {"id": "c", "correlations": [{"skill": "a", "n_c": 5}]},
        ],
        "exercises": [],
    }
    graph, report = build(doc)
    assert report.ok
    assert graph is not None
    assert {w["code"] for w in report.warnings} == {"correlation-triplet"}


# --------------------------------------------------------- exercise errors


def test_rejects_missing_exercise_setup():
    doc = {"skills": [{"id": "a"}], "exercises": [{"id": "e"}]}
    graph, report = build(doc)
    assert graph is None
    assert "missing-setup" in error_codes(report)


def test_rejects_duplicate_exercise_id():
    doc = {"skills": [{"id": "a"}],
           "exercises": [{"id": "e", "setup": "a"}, {"id": "e", "setup": "a"}]}
    graph, report = build(doc)
    assert graph is None
    assert "duplicate-id" in error_codes(report)


def test_rejects_pick_in_exercise():
    doc = {
        "skills": [{"id": "a"}, {"id": "b"}],
        "exercises": [{"id": "e", "setup": "pick(1, a, b)"}],
    }
    graph, report = build(doc)
    assert graph is None
    assert "nondeterministic-exercise" in error_codes(report)


def test_part_in_exercise_is_allowed():
    doc = {
        "skills": [{"id": "a"}, {"id": "b"}],
        "exercises": [{"id": "e", "setup": "and(a, part(b, 0.3))"}],
    }
    graph, report = build(doc)
    assert report.ok
    assert graph is not None


def test_pick_in_skill_setup_is_allowed():
    doc = {
        "skills": [{"id": "a"}, {"id": "b"}, {"id": "c", "setup": "pick(1, a, b)"}],
        "exercises": [{"id": "e", "setup": "a"}],
    }
    graph, report = build(doc)
    assert report.ok
    assert graph is not None


def test_rejects_exercise_inference_overflow():
    # Inference order times polynomial degree must stay within the maximum
    # representable order: 21 * 8 = 168 > 160.
    refs = ", ".join(["a"] * 8)
    doc = {
        "inference_order": 21,
        "skills": [{"id": "a"}],
        "exercises": [{"id": "e", "setup": f"and({refs})"}],
    }
    graph, report = build(doc)
    assert graph is None
    assert "degree-bound" in error_codes(report)


# ------------------------------------------------------------ observations


def test_observation_record_round_trip():
    obs = Observation("ada", "ex-add", "success", 1234.5)
    record = obs.to_record()
    assert record == {"student": "ada", "exercise": "ex-add",
                      "outcome": "success", "at": 1234.5}
    assert Observation.from_record(record) == obs


def test_observation_record_carries_request_key():
    obs = Observation("ada", "ex-add", "failure", 7.0)
    record = obs.to_record(request_key="k-123")
    assert record["request_key"] == "k-123"
    assert Observation.from_record(record) == obs
