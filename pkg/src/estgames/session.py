"""Event-sourced estimation sessions.

The append-only event list is the source of truth: session state is a
deterministic fold over it, commands only validate, append, and apply.
Timestamps always come from the caller so replaying a log reproduces the
state byte for byte.
"""

from __future__ import annotations

import enum
import json
import uuid
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .core import (
    EstimationScale,
    PayoffConfig,
    RationalLike,
    as_fraction,
    check_actual,
    classify_accuracy,
    classify_choice,
    encode_rational,
    stag_payoffs,
    vickrey_payoff,
    vickrey_select,
)
from .errors import (
    AlreadyScored,
    AlreadySealed,
    DuplicateParticipant,
    GapInSequence,
    InvalidInput,
    NoOriginalEstimate,
    NotAllSubmitted,
    StoryNotDone,
    StoryNotEstimating,
    StoryNotInProgress,
    StoryNotRevealed,
    UnknownEventKind,
    UnknownParticipant,
    UnknownStory,
)


class StoryState(enum.Enum):
    DRAFT = "Draft"
    ESTIMATING = "Estimating"
    REVEALED = "Revealed"
    COMMITTED = "Committed"
    IN_PROGRESS = "InProgress"
    DONE = "Done"
    SCORED = "Scored"


EVENT_KINDS = (
    "SessionCreated",
    "ParticipantJoined",
    "StoryAdded",
    "EstimationOpened",
    "EstimateSubmitted",
    "ClarificationRaised",
    "Revealed",
    "Committed",
    "SprintStarted",
    "EstimateRevised",
    "ActualRecorded",
    "Scored",
)


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    at: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "at": self.at, "payload": self.payload}

    @classmethod
    def from_json(cls, doc: dict) -> "SessionEvent":
        return cls(seq=int(doc["seq"]), kind=str(doc["kind"]), at=str(doc["at"]), payload=dict(doc["payload"]))


@dataclass
class Participant:
    participant_id: str
    display_name: str
    cumulative_points: int = 0
    stories_scored: int = 0


@dataclass
class UserStory:
    story_id: str
    role: str
    function: str
    benefit: str
    sprint: int
    state: StoryState = StoryState.DRAFT
    final_estimate: Optional[Fraction] = None
    actual: Optional[Fraction] = None


@dataclass
class SealedEstimate:
    story_id: str
    participant_id: str
    value: Fraction
    submitted_at: str
    revised_value: Optional[Fraction] = None
    revision_note: Optional[str] = None

    @property
    def effective_value(self) -> Fraction:
        return self.value if self.revised_value is None else self.revised_value


@dataclass
class ClarificationRequest:
    story_id: str
    participant_id: str
    question: str
    raised_at: str


@dataclass(frozen=True)
class ScoreBreakdown:
    accuracy_points: int
    stag_points: int
    contribution_points: int
    adaptability_bonus: int
    total: int

    def to_json(self) -> dict:
        return {
            "accuracy_points": self.accuracy_points,
            "stag_points": self.stag_points,
            "contribution_points": self.contribution_points,
            "adaptability_bonus": self.adaptability_bonus,
            "total": self.total,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ScoreBreakdown":
        return cls(**{k: int(v) for k, v in doc.items()})


@dataclass(frozen=True)
class RevealView:
    """Anonymized reveal: the value multiset only, never who bid what."""

    story_id: str
    values: tuple[Fraction, ...]
    inconsistency: bool

    def to_json(self) -> dict:
        return {
            "story_id": self.story_id,
            "values": [encode_rational(v) for v in self.values],
            "inconsistency": self.inconsistency,
        }


class Session:
    """A live estimation session, mutated only through command methods."""

    def __init__(self):
        self.session_id: str = ""
        self.scale: EstimationScale = EstimationScale()
        self.cfg: PayoffConfig = PayoffConfig()
        self.sprint_counter: int = 1
        self.participants: dict[str, Participant] = {}
        self.stories: dict[str, UserStory] = {}
        self.estimates: dict[str, dict[str, SealedEstimate]] = {}
        self.clarifications: dict[str, list[ClarificationRequest]] = {}
        self.reveals: dict[str, RevealView] = {}
        self.scores: dict[str, dict[str, ScoreBreakdown]] = {}
        self.events: list[SessionEvent] = []

    # ----- construction and replay ------------------------------------

    @classmethod
    def create(
        cls,
        scale: Optional[EstimationScale] = None,
        cfg: Optional[PayoffConfig] = None,
        *,
        session_id: Optional[str] = None,
        at: str = "1970-01-01T00:00:00Z",
    ) -> "Session":
        session = cls()
        scale = scale if scale is not None else EstimationScale()
        cfg = cfg if cfg is not None else PayoffConfig()
        session._emit(
            "SessionCreated",
            {
                "session_id": session_id or uuid.uuid4().hex,
                "scale": scale.to_json(),
                "cfg": cfg.to_json(),
            },
            at,
        )
        return session

    @classmethod
    def replay(cls, events: Iterable[SessionEvent]) -> "Session":
        session = cls()
        count = 0
        for event in events:
            count += 1
            if event.seq != count:
                raise GapInSequence(f"expected seq {count}, got {event.seq}")
            if event.kind not in EVENT_KINDS:
                raise UnknownEventKind(f"unknown event kind {event.kind!r}")
            if count == 1 and event.kind != "SessionCreated":
                raise GapInSequence("log must start with SessionCreated")
            session._apply(event)
            session.events.append(event)
        if count == 0:
            raise GapInSequence("empty event log")
        return session

    @property
    def version(self) -> int:
        return len(self.events)

    def _emit(self, kind: str, payload: dict, at: str) -> SessionEvent:
        event = SessionEvent(seq=len(self.events) + 1, kind=kind, at=at, payload=payload)
        self._apply(event)
        self.events.append(event)
        return event

    # ----- lookups ------------------------------------------------------

    def _story(self, story_id: str) -> UserStory:
        story = self.stories.get(story_id)
        if story is None:
            raise UnknownStory(f"no story {story_id!r}")
        return story

    def _participant(self, participant_id: str) -> Participant:
        participant = self.participants.get(participant_id)
        if participant is None:
            raise UnknownParticipant(f"no participant {participant_id!r}")
        return participant

    # ----- commands -----------------------------------------------------

    def join_participant(
        self, display_name: str, *, participant_id: Optional[str] = None, at: str
    ) -> Participant:
        name = display_name.strip()
        if not name:
            raise InvalidInput("display name must be non-empty")
        if any(p.display_name == name for p in self.participants.values()):
            raise DuplicateParticipant(f"display name {name!r} already joined")
        pid = participant_id or uuid.uuid4().hex
        self._emit("ParticipantJoined", {"participant_id": pid, "display_name": name}, at)
        return self.participants[pid]

    def add_story(
        self,
        role: str,
        function: str,
        benefit: str,
        *,
        story_id: Optional[str] = None,
        at: str,
    ) -> UserStory:
        if not function.strip():
            raise InvalidInput("story function must be non-empty")
        sid = story_id or uuid.uuid4().hex
        self._emit(
            "StoryAdded",
            {
                "story_id": sid,
                "role": role,
                "function": function,
                "benefit": benefit,
                "sprint": self.sprint_counter,
            },
            at,
        )
        return self.stories[sid]

    def open_estimation(self, story_id: str, *, at: str) -> None:
        story = self._story(story_id)
        if story.state is not StoryState.DRAFT:
            raise StoryNotEstimating(f"story is {story.state.value}, expected Draft")
        self._emit("EstimationOpened", {"story_id": story_id}, at)

    def submit_estimate(
        self, story_id: str, participant_id: str, value: RationalLike, *, at: str
    ) -> SealedEstimate:
        story = self._story(story_id)
        self._participant(participant_id)
        if story.state is not StoryState.ESTIMATING:
            raise StoryNotEstimating(f"story is {story.state.value}")
        if participant_id in self.estimates.get(story_id, {}):
            raise AlreadySealed("estimate already sealed for this story")
        sealed = self.scale.require(value)
        self._emit(
            "EstimateSubmitted",
            {
                "story_id": story_id,
                "participant_id": participant_id,
                "value": encode_rational(sealed),
            },
            at,
        )
        return self.estimates[story_id][participant_id]

    def register_clarification(
        self, story_id: str, participant_id: str, question: str, *, at: str
    ) -> ClarificationRequest:
        story = self._story(story_id)
        self._participant(participant_id)
        if story.state is not StoryState.ESTIMATING:
            raise StoryNotEstimating(f"story is {story.state.value}")
        if not question.strip():
            raise InvalidInput("clarification question must be non-empty")
        self._emit(
            "ClarificationRaised",
            {
                "story_id": story_id,
                "participant_id": participant_id,
                "question": question,
            },
            at,
        )
        return self.clarifications[story_id][-1]

    def reveal(self, story_id: str, *, override: bool = False, at: str) -> RevealView:
        story = self._story(story_id)
        if story.state is not StoryState.ESTIMATING:
            raise StoryNotEstimating(f"story is {story.state.value}")
        submitted = self.estimates.get(story_id, {})
        if not override:
            missing = [p for p in self.participants if p not in submitted]
            if missing:
                raise NotAllSubmitted(f"{len(missing)} participant(s) have not submitted")
        values = sorted(e.value for e in submitted.values())
        inconsistency = bool(values) and values[-1] / values[0] > self.cfg.spread_threshold
        self._emit(
            "Revealed",
            {
                "story_id": story_id,
                "values": [encode_rational(v) for v in values],
                "inconsistency": inconsistency,
            },
            at,
        )
        return self.reveals[story_id]

    def commit_final(self, story_id: str, *, at: str) -> Fraction:
        story = self._story(story_id)
        if story.state is not StoryState.REVEALED:
            raise StoryNotRevealed(f"story is {story.state.value}")
        final = vickrey_select(e.value for e in self.estimates.get(story_id, {}).values())
        self._emit(
            "Committed",
            {"story_id": story_id, "final_estimate": encode_rational(final)},
            at,
        )
        return final

    def start_sprint(self, *, at: str) -> int:
        """Advance the sprint counter; committed stories enter their work phase."""
        self._emit("SprintStarted", {"sprint": self.sprint_counter + 1}, at)
        return self.sprint_counter

    def revise_estimate(
        self,
        story_id: str,
        participant_id: str,
        new_value: RationalLike,
        note: str = "",
        *,
        at: str,
    ) -> SealedEstimate:
        story = self._story(story_id)
        self._participant(participant_id)
        if story.state is not StoryState.IN_PROGRESS:
            raise StoryNotInProgress(f"story is {story.state.value}")
        if participant_id not in self.estimates.get(story_id, {}):
            raise NoOriginalEstimate("no sealed estimate to revise")
        revised = self.scale.require(new_value)
        self._emit(
            "EstimateRevised",
            {
                "story_id": story_id,
                "participant_id": participant_id,
                "new_value": encode_rational(revised),
                "note": note,
            },
            at,
        )
        return self.estimates[story_id][participant_id]

    def record_actual(self, story_id: str, actual: RationalLike, *, at: str) -> None:
        story = self._story(story_id)
        if story.state is not StoryState.IN_PROGRESS:
            raise StoryNotInProgress(f"story is {story.state.value}")
        value = check_actual(actual)
        self._emit(
            "ActualRecorded",
            {"story_id": story_id, "actual": encode_rational(value)},
            at,
        )

    def score_story(self, story_id: str, *, at: str) -> dict[str, ScoreBreakdown]:
        story = self._story(story_id)
        if story.state is StoryState.SCORED:
            raise AlreadyScored("story already scored")
        if story.state is not StoryState.DONE:
            raise StoryNotDone(f"story is {story.state.value}")
        assert story.actual is not None
        breakdowns = self._compute_breakdowns(story_id, story.actual)
        self._emit(
            "Scored",
            {
                "story_id": story_id,
                "breakdowns": {pid: b.to_json() for pid, b in breakdowns.items()},
            },
            at,
        )
        return self.scores[story_id]

    def _compute_breakdowns(
        self, story_id: str, actual: Fraction
    ) -> dict[str, ScoreBreakdown]:
        estimates = self.estimates.get(story_id, {})
        questions = self.clarifications.get(story_id, [])
        pids = list(estimates)
        choices = [
            classify_choice(estimates[pid].effective_value, actual, self.cfg)
            for pid in pids
        ]
        stag = stag_payoffs(choices, self.cfg) if pids else []
        breakdowns: dict[str, ScoreBreakdown] = {}
        for i, pid in enumerate(pids):
            sealed = estimates[pid]
            band = classify_accuracy(sealed.effective_value, actual, self.cfg, self.scale)
            accuracy = vickrey_payoff(band, self.cfg)
            contribution = self.cfg.contribution_point * (
                1 + sum(1 for q in questions if q.participant_id == pid)
            )
            bonus = 0
            if sealed.revised_value is not None:
                original_band = classify_accuracy(sealed.value, actual, self.cfg, self.scale)
                if band < original_band:
                    bonus = self.cfg.adaptability_bonus
            breakdowns[pid] = ScoreBreakdown(
                accuracy_points=accuracy,
                stag_points=stag[i],
                contribution_points=contribution,
                adaptability_bonus=bonus,
                total=accuracy + stag[i] + contribution + bonus,
            )
        return breakdowns

    # ----- fold ----------------------------------------------------------

    def _apply(self, event: SessionEvent) -> None:
        handler = getattr(self, "_on_" + _snake(event.kind), None)
        if handler is None:
            raise UnknownEventKind(f"unknown event kind {event.kind!r}")
        handler(event)

    def _on_session_created(self, event: SessionEvent) -> None:
        payload = event.payload
        self.session_id = payload["session_id"]
        self.scale = EstimationScale.from_json(payload["scale"])
        self.cfg = PayoffConfig.from_json(payload["cfg"])

    def _on_participant_joined(self, event: SessionEvent) -> None:
        pid = event.payload["participant_id"]
        self.participants[pid] = Participant(
            participant_id=pid, display_name=event.payload["display_name"]
        )

    def _on_story_added(self, event: SessionEvent) -> None:
        payload = event.payload
        self.stories[payload["story_id"]] = UserStory(
            story_id=payload["story_id"],
            role=payload["role"],
            function=payload["function"],
            benefit=payload["benefit"],
            sprint=int(payload["sprint"]),
        )

    def _on_estimation_opened(self, event: SessionEvent) -> None:
        self.stories[event.payload["story_id"]].state = StoryState.ESTIMATING

    def _on_estimate_submitted(self, event: SessionEvent) -> None:
        payload = event.payload
        sid, pid = payload["story_id"], payload["participant_id"]
        self.estimates.setdefault(sid, {})[pid] = SealedEstimate(
            story_id=sid,
            participant_id=pid,
            value=as_fraction(payload["value"]),
            submitted_at=event.at,
        )

    def _on_clarification_raised(self, event: SessionEvent) -> None:
        payload = event.payload
        self.clarifications.setdefault(payload["story_id"], []).append(
            ClarificationRequest(
                story_id=payload["story_id"],
                participant_id=payload["participant_id"],
                question=payload["question"],
                raised_at=event.at,
            )
        )

    def _on_revealed(self, event: SessionEvent) -> None:
        payload = event.payload
        sid = payload["story_id"]
        self.stories[sid].state = StoryState.REVEALED
        self.reveals[sid] = RevealView(
            story_id=sid,
            values=tuple(as_fraction(v) for v in payload["values"]),
            inconsistency=bool(payload["inconsistency"]),
        )

    def _on_committed(self, event: SessionEvent) -> None:
        payload = event.payload
        story = self.stories[payload["story_id"]]
        story.state = StoryState.COMMITTED
        story.final_estimate = as_fraction(payload["final_estimate"])

    def _on_sprint_started(self, event: SessionEvent) -> None:
        self.sprint_counter = int(event.payload["sprint"])
        for story in self.stories.values():
            if story.state is StoryState.COMMITTED:
                story.state = StoryState.IN_PROGRESS

    def _on_estimate_revised(self, event: SessionEvent) -> None:
        payload = event.payload
        sealed = self.estimates[payload["story_id"]][payload["participant_id"]]
        sealed.revised_value = as_fraction(payload["new_value"])
        sealed.revision_note = payload["note"]

    def _on_actual_recorded(self, event: SessionEvent) -> None:
        payload = event.payload
        story = self.stories[payload["story_id"]]
        story.state = StoryState.DONE
        story.actual = as_fraction(payload["actual"])

    def _on_scored(self, event: SessionEvent) -> None:
        payload = event.payload
        sid = payload["story_id"]
        self.stories[sid].state = StoryState.SCORED
        breakdowns = {
            pid: ScoreBreakdown.from_json(doc)
            for pid, doc in payload["breakdowns"].items()
        }
        self.scores[sid] = breakdowns
        for pid, breakdown in breakdowns.items():
            participant = self.participants[pid]
            participant.cumulative_points += breakdown.total
            participant.stories_scored += 1

    # ----- serialization -------------------------------------------------

    def snapshot(self) -> dict:
        """Complete canonical state, for persistence checks and diffing."""

        def opt(value: Optional[Fraction]):
            return None if value is None else encode_rational(value)

        return {
            "session_id": self.session_id,
            "version": self.version,
            "sprint_counter": self.sprint_counter,
            "scale": self.scale.to_json(),
            "cfg": self.cfg.to_json(),
            "participants": [
                {
                    "participant_id": p.participant_id,
                    "display_name": p.display_name,
                    "cumulative_points": p.cumulative_points,
                    "stories_scored": p.stories_scored,
                }
                for p in self.participants.values()
            ],
            "stories": [
                {
                    "story_id": s.story_id,
                    "role": s.role,
                    "function": s.function,
                    "benefit": s.benefit,
                    "sprint": s.sprint,
                    "state": s.state.value,
                    "final_estimate": opt(s.final_estimate),
                    "actual": opt(s.actual),
                }
                for s in self.stories.values()
            ],
            "estimates": {
                sid: {
                    pid: {
                        "value": encode_rational(e.value),
                        "submitted_at": e.submitted_at,
                        "revised_value": opt(e.revised_value),
                        "revision_note": e.revision_note,
                    }
                    for pid, e in by_pid.items()
                }
                for sid, by_pid in self.estimates.items()
            },
            "clarifications": {
                sid: [
                    {
                        "participant_id": c.participant_id,
                        "question": c.question,
                        "raised_at": c.raised_at,
                    }
                    for c in items
                ]
                for sid, items in self.clarifications.items()
            },
            "reveals": {sid: view.to_json() for sid, view in self.reveals.items()},
            "scores": {
                sid: {pid: b.to_json() for pid, b in by_pid.items()}
                for sid, by_pid in self.scores.items()
            },
        }

    def snapshot_bytes(self) -> bytes:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":")).encode()

    def public_snapshot(self) -> dict:
        """Client-facing view: sealed values stay hidden until reveal."""
        stories = []
        for story in self.stories.values():
            submitted = self.estimates.get(story.story_id, {})
            doc = {
                "story_id": story.story_id,
                "role": story.role,
                "function": story.function,
                "benefit": story.benefit,
                "sprint": story.sprint,
                "state": story.state.value,
                "submitted_count": len(submitted),
                "participant_count": len(self.participants),
                "clarifications": [
                    {"participant_id": c.participant_id, "question": c.question}
                    for c in self.clarifications.get(story.story_id, [])
                ],
                "reveal": None,
                "final_estimate": None,
                "actual": None,
                "scores": None,
            }
            if story.story_id in self.reveals:
                doc["reveal"] = self.reveals[story.story_id].to_json()
            if story.final_estimate is not None:
                doc["final_estimate"] = encode_rational(story.final_estimate)
            if story.actual is not None:
                doc["actual"] = encode_rational(story.actual)
            if story.story_id in self.scores:
                doc["scores"] = {
                    pid: b.to_json() for pid, b in self.scores[story.story_id].items()
                }
            stories.append(doc)
        return {
            "session_id": self.session_id,
            "version": self.version,
            "sprint_counter": self.sprint_counter,
            "scale": self.scale.to_json(),
            "cfg": self.cfg.to_json(),
            "participants": [
                {
                    "participant_id": p.participant_id,
                    "display_name": p.display_name,
                    "cumulative_points": p.cumulative_points,
                    "stories_scored": p.stories_scored,
                }
                for p in self.participants.values()
            ],
            "stories": stories,
        }


def _snake(kind: str) -> str:
    out = []
    for i, ch in enumerate(kind):
        if ch.isupper() and i > 0:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def events_to_jsonl(events: Iterable[SessionEvent]) -> str:
    return "".join(json.dumps(e.to_json(), separators=(",", ":")) + "\n" for e in events)


def events_from_jsonl(text: str) -> list[SessionEvent]:
    events = []
    for line in text.splitlines():
        if line.strip():
            events.append(SessionEvent.from_json(json.loads(line)))
    return events
