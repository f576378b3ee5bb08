"""Orchestration: assemble posteriors, record observations, recommend.

The posterior for one skill merges up to three evidence streams, all
conditionally independent given the skill: the student's own practice data
(decayed to the query time), a distribution inferred from sub-skill states
when the skill is composite, and relaxed estimates from correlated skills
(combined element-wise per correlation group).  Observations update every
skill named by the exercise from one shared pre-observation snapshot, and
are persisted write-ahead: log first, snapshot after, so replaying the log
tail over the last snapshot always reproduces the exact state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import basis, fusion, inference, observe, smoothing
from .basis import BasisCoefficients
from .errors import (
    TimestampRegressionError,
    UnknownExerciseError,
    UnknownSkillError,
    UnknownStudentError,
)
from .graph import Observation, SkillGraph, SkillState
from .inference import InferenceConfig
from .store import Store


@dataclass
class EvidenceSource:
    """One merged stream with its pre-merge mean, for explainability."""

    source: str  # "own-data" | "subskills" | "correlated"
    mean: float
    skills: tuple = ()
    n_c: Optional[int] = None

    def to_dict(self) -> dict:
        out = {"source": self.source, "mean": self.mean}
        if self.skills:
            out["skills"] = list(self.skills)
        if self.n_c is not None:
            out["n_c"] = self.n_c
        return out


@dataclass
class Posterior:
    skill: str
    coeffs: BasisCoefficients
    mean: float
    interval: Optional[tuple]
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "skill": self.skill,
            "coeffs": self.coeffs.to_dict(),
            "mean": self.mean,
            "interval": list(self.interval) if self.interval else None,
            "trace": [t.to_dict() for t in self.trace],
        }


class Tracker:
    """Binds a validated graph to a store and serves the update/query loop."""

    def __init__(self, graph: SkillGraph, store: Store, snapshot_every: int = 1):
        self.graph = graph
        self.store = store
        self._snapshot_every = max(1, int(snapshot_every))
        self._students: dict = {}
        self._known_students = set(store.list_students())
        self._request_keys: set = set()
        self._pending: dict = {}
        self._recover()

    # ------------------------------------------------------------ students

    def add_student(self, student: str) -> None:
        if student not in self._known_students:
            self.store.append_student(student)
            self._known_students.add(student)

    def has_student(self, student: str) -> bool:
        return student in self._known_students

    def students(self) -> list:
        return sorted(self._known_students)

    # ------------------------------------------------------------- states

    def _states(self, student: str) -> dict:
        """In-memory skill states for a student, loaded once from disk."""
        if student not in self._students:
            records, _ = self.store.load_states(student)
            self._students[student] = {
                skill: SkillState.from_record(r) for skill, r in records.items()
            }
        return self._students[student]

    def _recover(self) -> None:
        """Replay any log records newer than each student's snapshot."""
        tails: dict = {}
        for record in self.store.replay(0):
            if record.get("request_key"):
                self._request_keys.add(record["request_key"])
            tails.setdefault(record["student"], []).append(record)
        for student, records in tails.items():
            self._known_students.add(student)
            _, applied = self.store.load_states(student)
            pending = [r for r in records if int(r["seq"]) > applied]
            last_seq = applied
            for record in pending:
                self._apply(Observation.from_record(record))
                last_seq = int(record["seq"])
            if pending:
                self._persist(student, last_seq)

    def _persist(self, student: str, last_seq: int) -> None:
        states = self._states(student)
        self.store.put_states(
            student, {k: s.to_record() for k, s in states.items()}, last_seq
        )

    def seen_request_key(self, key: str) -> bool:
        return key in self._request_keys

    def stored_states(self, student: str) -> dict:
        """Copy of the student's raw stored states, keyed by skill."""
        if not self.has_student(student):
            raise UnknownStudentError(f"student {student!r} is not registered")
        return dict(self._states(student))

    def last_activity(self, student: str) -> float:
        """Timestamp of the student's most recent observation; 0 if none."""
        if not self.has_student(student):
            raise UnknownStudentError(f"student {student!r} is not registered")
        at = self._last_at(student)
        return 0.0 if at == float("-inf") else at

    # ---------------------------------------------------------- decay view

    def _decayed(self, state: Optional[SkillState], now: float,
                 for_update: bool = False) -> BasisCoefficients:
        """Stored state relaxed to the query instant; flat when unseen.

        The learning-effect time is charged only when the state is carried
        into the next observation (for_update=True), so a query issued right
        after an observation returns the stored state unchanged.  Reads clamp
        negative intervals to zero (query at the last practice instant);
        writes enforce monotonicity separately.
        """
        if state is None:
            return BasisCoefficients.flat()
        t_since = max(0.0, now - state.last_practiced)
        return smoothing.apply_decay(
            state.coeffs, t_since, state.practice_count, self.graph.decay,
            include_learning_effect=for_update,
        )

    def _decayed_for(self, student: str, skill_id: str, now: float) -> BasisCoefficients:
        return self._decayed(self._states(student).get(skill_id), now)

    # ------------------------------------------------------------ posterior

    def posterior(self, student: str, skill_id: str, now: float,
                  with_interval: bool = True) -> Posterior:
        if skill_id not in self.graph.skills:
            raise UnknownSkillError(f"skill {skill_id!r} is not in the graph")
        if not self.has_student(student):
            raise UnknownStudentError(f"student {student!r} is not registered")
        skill = self.graph.skills[skill_id]
        streams: list = []

        own = self._decayed_for(student, skill_id, now)
        streams.append((own, EvidenceSource("own-data", basis.mean(own), (skill_id,))))

        poly = self.graph.skill_polys.get(skill_id)
        if poly is not None:
            sub_dists = {
                ref: self._decayed_for(student, ref, now) for ref in poly.variables
            }
            inferred = inference.infer(
                poly, sub_dists, InferenceConfig(self.graph.inference_order_for(skill_id))
            )
            streams.append(
                (
                    inferred,
                    EvidenceSource(
                        "subskills", basis.mean(inferred), tuple(sorted(poly.variables))
                    ),
                )
            )

        groups: dict = {}
        for other, n_c in skill.correlations:
            groups.setdefault(n_c, []).append(other)
        for n_c in sorted(groups):
            members = sorted(groups[n_c])
            relaxed = [
                fusion.correlate(self._decayed_for(student, m, now), n_c)
                for m in members
            ]
            combined = fusion.combine_group(relaxed)
            streams.append(
                (
                    combined,
                    EvidenceSource("correlated", basis.mean(combined), tuple(members), n_c),
                )
            )

        merged = fusion.merge_all([d for d, _ in streams])
        interval = None
        if with_interval:
            interval = (basis.quantile(merged, 0.05), basis.quantile(merged, 0.95))
        return Posterior(
            skill=skill_id,
            coeffs=merged,
            mean=basis.mean(merged),
            interval=interval,
            trace=[src for _, src in streams],
        )

    def all_posteriors(self, student: str, now: float) -> list:
        return [self.posterior(student, sid, now) for sid in sorted(self.graph.skills)]

    # --------------------------------------------------------------- record

    def _last_at(self, student: str) -> float:
        states = self._states(student)
        return max((s.last_practiced for s in states.values()), default=float("-inf"))

    def preview(self, obs: Observation) -> dict:
        """Dry-run: the per-skill states this observation would store."""
        self._check(obs)
        return self._compute_updates(obs)

    def _check(self, obs: Observation) -> None:
        if not self.has_student(obs.student):
            raise UnknownStudentError(f"student {obs.student!r} is not registered")
        if obs.exercise not in self.graph.exercises:
            raise UnknownExerciseError(f"exercise {obs.exercise!r} is not in the graph")
        last = self._last_at(obs.student)
        if obs.at < last:
            raise TimestampRegressionError(
                f"observation at {obs.at} precedes the student's latest at {last}"
            )

    def _compute_updates(self, obs: Observation) -> dict:
        """New coefficient vectors per skill, from one shared snapshot."""
        poly = self.graph.exercise_polys[obs.exercise]
        states = self._states(obs.student)
        snapshot = {
            v: self._decayed(states.get(v), obs.at, for_update=True)
            for v in sorted(poly.variables)
        }
        updated = {}
        for v in sorted(poly.variables):
            others = {s: d for s, d in snapshot.items() if s != v}
            h = observe.marginal_h(poly, v, obs.outcome, others)
            observe.check_h_range(h)
            updated[v] = observe.update_general(snapshot[v], h)
        return updated

    def record(self, obs: Observation, request_key: Optional[str] = None) -> list:
        """Validate, compute, persist (log first), and return new states.

        All skill updates are computed before anything is written, so a
        degenerate update aborts the whole observation; the log append
        precedes the snapshot write (write-ahead) for crash recovery.
        """
        self._check(obs)
        updated = self._compute_updates(obs)
        seq = self.store.append_observation(obs.to_record(request_key))
        if request_key:
            self._request_keys.add(request_key)
        states = self._states(obs.student)
        out = []
        for v, coeffs in updated.items():
            prior = states.get(v)
            states[v] = SkillState(
                skill=v,
                coeffs=coeffs,
                practice_count=(prior.practice_count if prior else 0) + 1,
                last_practiced=obs.at,
            )
            out.append(states[v])
        # Snapshots may lag the log (recovery replays the tail); batching
        # them amortizes rewrite cost over long observation streams.
        self._pending[obs.student] = self._pending.get(obs.student, 0) + 1
        if self._pending[obs.student] >= self._snapshot_every:
            self._persist(obs.student, seq)
            self._pending[obs.student] = 0
        return out

    def flush(self) -> None:
        """Write snapshots for every student with unpersisted updates."""
        for student, pending in list(self._pending.items()):
            if pending:
                self._persist(student, self.store.last_seq())
                self._pending[student] = 0

    def _apply(self, obs: Observation) -> None:
        """Recovery path: same computation as record, no log append."""
        updated = self._compute_updates(obs)
        states = self._states(obs.student)
        for v, coeffs in updated.items():
            prior = states.get(v)
            states[v] = SkillState(
                skill=v,
                coeffs=coeffs,
                practice_count=(prior.practice_count if prior else 0) + 1,
                last_practiced=obs.at,
            )

    # ------------------------------------------------------------ recommend

    def recommend(self, student: str, now: float, lo: float = 0.4, hi: float = 0.8) -> list:
        """Exercises ranked by |expected success - window midpoint|.

        Expected success uses the full per-skill posteriors, so sub-skill
        and correlation evidence feed recommendations too.
        """
        if not self.has_student(student):
            raise UnknownStudentError(f"student {student!r} is not registered")
        midpoint = (lo + hi) / 2.0
        cache: dict = {}

        def post(skill_id: str) -> BasisCoefficients:
            if skill_id not in cache:
                cache[skill_id] = self.posterior(
                    student, skill_id, now, with_interval=False
                ).coeffs
            return cache[skill_id]

        scored = []
        for eid in sorted(self.graph.exercises):
            poly = self.graph.exercise_polys[eid]
            dists = {v: post(v) for v in poly.variables}
            p = inference.expected_success(poly, dists)
            scored.append((abs(p - midpoint), eid, p))
        scored.sort(key=lambda row: (row[0], row[1]))
        return [(eid, p) for _, eid, p in scored]
