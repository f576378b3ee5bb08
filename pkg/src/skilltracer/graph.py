"""The skill graph: skills, composite set-ups, correlation edges, exercises.

A graph definition is a plain JSON document (see docs/STORAGE.md) listing
skills, exercises, and the decay and inference parameters to use.  Loading
compiles every set-up to its probability polynomial; validation returns a
machine-readable report instead of throwing, so a service can hand it back
to the caller verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .basis import MAX_ORDER, BasisCoefficients
from .errors import SetupError
from .fusion import MAX_CORRELATION_ORDER
from .inference import InferenceConfig
from .setup_dsl import Pick, ProbPolynomial, RESERVED, compile_setup, parse
from .smoothing import DecayParams

MAX_VARIABLE_DEGREE = 8


@dataclass(frozen=True)
class Skill:
    id: str
    name: str = ""
    setup: Optional[str] = None
    correlations: tuple = ()  # pairs of (skill id, n_c)
    inference_order: Optional[int] = None


@dataclass(frozen=True)
class Exercise:
    id: str
    setup: str


@dataclass(frozen=True)
class Observation:
    student: str
    exercise: str
    outcome: str
    at: float

    def to_record(self, request_key: Optional[str] = None) -> dict:
        record = {
            "student": self.student,
            "exercise": self.exercise,
            "outcome": self.outcome,
            "at": self.at,
        }
        if request_key is not None:
            record["request_key"] = request_key
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Observation":
        return cls(
            student=record["student"],
            exercise=record["exercise"],
            outcome=record["outcome"],
            at=float(record["at"]),
        )


@dataclass
class SkillState:
    """Stored per-student state: post-update, pre-smoothing coefficients."""

    skill: str
    coeffs: BasisCoefficients
    practice_count: int = 0
    last_practiced: float = 0.0

    def to_record(self) -> dict:
        return {
            "skill": self.skill,
            "coeffs": self.coeffs.to_dict(),
            "practice_count": self.practice_count,
            "last_practiced": self.last_practiced,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SkillState":
        return cls(
            skill=record["skill"],
            coeffs=BasisCoefficients.from_dict(record["coeffs"]),
            practice_count=int(record["practice_count"]),
            last_practiced=float(record["last_practiced"]),
        )


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add_error(self, code: str, where: str, message: str) -> None:
        self.errors.append({"code": code, "where": where, "message": message})

    def add_warning(self, code: str, where: str, message: str) -> None:
        self.warnings.append({"code": code, "where": where, "message": message})

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"ok": self.ok, "errors": self.errors, "warnings": self.warnings}


@dataclass
class SkillGraph:
    skills: dict
    exercises: dict
    decay: DecayParams = field(default_factory=DecayParams)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    skill_polys: dict = field(default_factory=dict)
    exercise_polys: dict = field(default_factory=dict)

    def inference_order_for(self, skill_id: str) -> int:
        override = self.skills[skill_id].inference_order
        return override if override is not None else self.inference.n_i


def _contains_pick(node) -> bool:
    if isinstance(node, Pick):
        return True
    children = getattr(node, "children", None) or ()
    child = getattr(node, "child", None)
    return any(_contains_pick(c) for c in children) or (
        child is not None and _contains_pick(child)
    )


def graph_from_text(text: str) -> tuple[Optional[SkillGraph], ValidationReport]:
    """Parse and validate a graph definition document.

    Always returns a report; the graph is None when errors make it
    unusable.  Warnings (e.g. three-way correlation groups) keep the graph
    usable.
    """
    report = ValidationReport()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        report.add_error("bad-json", "document", str(err))
        return None, report
    if not isinstance(doc, dict):
        report.add_error("bad-json", "document", "top level must be an object")
        return None, report

    try:
        decay = DecayParams.from_dict(doc.get("decay", {})) if doc.get("decay") else DecayParams()
    except (TypeError, ValueError) as err:
        report.add_error("bad-decay-params", "decay", str(err))
        decay = DecayParams()
    try:
        inference = InferenceConfig(int(doc.get("inference_order", 10)))
    except (TypeError, ValueError) as err:
        report.add_error("bad-inference-order", "inference_order", str(err))
        inference = InferenceConfig()

    skills: dict = {}
    for entry in doc.get("skills", []):
        sid = str(entry.get("id", ""))
        where = f"skill:{sid or '?'}"
        if not sid:
            report.add_error("missing-id", where, "skill entries need an id")
            continue
        if sid.lower() in RESERVED:
            report.add_error("reserved-id", where, f"{sid!r} is a reserved operator name")
            continue
        if sid in skills:
            report.add_error("duplicate-id", where, f"skill {sid!r} defined twice")
            continue
        correlations = tuple(
            (str(c["skill"]), int(c.get("n_c", 5))) for c in entry.get("correlations", [])
        )
        n_i = entry.get("inference_order")
        skills[sid] = Skill(
            id=sid,
            name=str(entry.get("name", sid)),
            setup=entry.get("setup"),
            correlations=correlations,
            inference_order=int(n_i) if n_i is not None else None,
        )

    exercises: dict = {}
    for entry in doc.get("exercises", []):
        eid = str(entry.get("id", ""))
        where = f"exercise:{eid or '?'}"
        if not eid:
            report.add_error("missing-id", where, "exercise entries need an id")
            continue
        if eid in exercises:
            report.add_error("duplicate-id", where, f"exercise {eid!r} defined twice")
            continue
        if "setup" not in entry:
            report.add_error("missing-setup", where, "exercises need a setup")
            continue
        exercises[eid] = Exercise(id=eid, setup=str(entry["setup"]))

    graph = SkillGraph(skills=skills, exercises=exercises, decay=decay, inference=inference)
    _validate(graph, report)
    return (graph if report.ok else None), report


def _compile_checked(setup_text: str, where: str, report: ValidationReport,
                     known_skills: dict) -> Optional[ProbPolynomial]:
    try:
        expr = parse(setup_text)
        poly = compile_setup(expr)
    except SetupError as err:
        report.add_error("bad-setup", where, str(err))
        return None
    unknown = poly.variables - set(known_skills)
    if unknown:
        report.add_error(
            "unknown-skill-reference", where, f"setup references undefined skill(s) {sorted(unknown)}"
        )
        return None
    for var in poly.variables:
        if poly.degree(var) > MAX_VARIABLE_DEGREE:
            report.add_error(
                "degree-bound", where,
                f"degree {poly.degree(var)} in {var!r} exceeds the bound {MAX_VARIABLE_DEGREE}",
            )
            return None
    return poly


def _validate(graph: SkillGraph, report: ValidationReport) -> None:
    for skill in graph.skills.values():
        where = f"skill:{skill.id}"
        if skill.setup is not None:
            poly = _compile_checked(skill.setup, where, report, graph.skills)
            if poly is not None:
                graph.skill_polys[skill.id] = poly
        if skill.inference_order is not None and skill.inference_order < 1:
            report.add_error("bad-inference-order", where, "inference order must be >= 1")
        for other, n_c in skill.correlations:
            if other not in graph.skills:
                report.add_error(
                    "unknown-skill-reference", where, f"correlation names undefined skill {other!r}"
                )
            elif other == skill.id:
                report.add_error("self-correlation", where, "a skill cannot correlate with itself")
            elif not 1 <= n_c <= MAX_CORRELATION_ORDER:
                report.add_error(
                    "correlation-order", where,
                    f"n_c={n_c} outside [1, {MAX_CORRELATION_ORDER}]",
                )
            else:
                back = dict(graph.skills[other].correlations)
                if back.get(skill.id) != n_c:
                    report.add_error(
                        "asymmetric-correlation", where,
                        f"correlation with {other!r} (n_c={n_c}) has no matching reverse edge",
                    )
        if len(skill.correlations) >= 2:
            report.add_warning(
                "correlation-triplet", where,
                "three-way or larger correlation groups often indicate an "
                "inconveniently chosen course set-up",
            )

    # Cycles through composite set-ups: depth-first search over the
    # references of each compiled setup.
    color: dict = {}

    def visit(sid: str, trail: tuple) -> None:
        if color.get(sid) == "done":
            return
        if color.get(sid) == "busy":
            cycle = " -> ".join(trail + (sid,))
            report.add_error("setup-cycle", f"skill:{sid}", f"setup cycle: {cycle}")
            return
        color[sid] = "busy"
        for ref in sorted(graph.skill_polys.get(sid, ProbPolynomial.constant(0.0)).variables):
            visit(ref, trail + (sid,))
        color[sid] = "done"

    for sid in graph.skills:
        visit(sid, ())

    for exercise in graph.exercises.values():
        where = f"exercise:{exercise.id}"
        try:
            expr = parse(exercise.setup)
        except SetupError as err:
            report.add_error("bad-setup", where, str(err))
            continue
        if _contains_pick(expr):
            report.add_error(
                "nondeterministic-exercise", where,
                "exercises must have deterministic set-ups (no pick)",
            )
            continue
        poly = _compile_checked(exercise.setup, where, report, graph.skills)
        if poly is not None:
            graph.exercise_polys[exercise.id] = poly
            n_i = max(
                [graph.inference.n_i]
                + [graph.inference_order_for(s) for s in poly.variables if s in graph.skills]
            )
            if n_i * poly.max_degree() > MAX_ORDER:
                report.add_error(
                    "degree-bound", where,
                    f"inference at order {n_i} would exceed the maximum stored order {MAX_ORDER}",
                )


def graph_to_text(doc: dict) -> str:
    """Serialize a definition document with stable key order."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
