"""Durable session storage and derived reports.

The JSONL event log is the only stored state; velocity, leaderboard, and
report documents are recomputed views over a replayed session.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .core import encode_rational
from .errors import UnknownFormat, UnknownSession
from .session import Session, SessionEvent, events_from_jsonl

REPORT_CSV_COLUMNS = (
    "story_id",
    "participant",
    "accuracy_points",
    "stag_points",
    "contribution_points",
    "adaptability_bonus",
    "total",
)


@dataclass(frozen=True)
class VelocityPoint:
    sprint: int
    completed_points: Fraction

    def to_json(self) -> dict:
        return {"sprint": self.sprint, "completed_points": encode_rational(self.completed_points)}


@dataclass(frozen=True)
class LeaderboardEntry:
    display_name: str
    cumulative_points: int
    stories_scored: int

    def to_json(self) -> dict:
        return {
            "display_name": self.display_name,
            "cumulative_points": self.cumulative_points,
            "stories_scored": self.stories_scored,
        }


def velocity_series(session: Session) -> list[VelocityPoint]:
    """Committed points of scored stories, summed per sprint."""
    sums: dict[int, Fraction] = {}
    for story in session.stories.values():
        if story.state.value == "Scored" and story.final_estimate is not None:
            sums[story.sprint] = sums.get(story.sprint, Fraction(0)) + story.final_estimate
    return [VelocityPoint(sprint, sums[sprint]) for sprint in sorted(sums)]


def leaderboard(session: Session) -> list[LeaderboardEntry]:
    entries = [
        LeaderboardEntry(
            display_name=p.display_name,
            cumulative_points=p.cumulative_points,
            stories_scored=p.stories_scored,
        )
        for p in session.participants.values()
    ]
    entries.sort(key=lambda e: (-e.cumulative_points, e.display_name))
    return entries


def score_rows(session: Session) -> list[dict]:
    """One row per (scored story, participant), in story order."""
    rows = []
    for story in session.stories.values():
        breakdowns = session.scores.get(story.story_id)
        if not breakdowns:
            continue
        for pid, b in breakdowns.items():
            rows.append(
                {
                    "story_id": story.story_id,
                    "participant": session.participants[pid].display_name,
                    **b.to_json(),
                }
            )
    return rows


def report_document(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "leaderboard": [e.to_json() for e in leaderboard(session)],
        "velocity": [v.to_json() for v in velocity_series(session)],
        "scores": score_rows(session),
    }


def export_report(session: Session, format: str) -> str:
    """Serialize the session report; formats are "json" and "csv"."""
    if format == "json":
        return json.dumps(report_document(session), indent=2, sort_keys=True) + "\n"
    if format == "csv":
        out = io.StringIO()
        writer = csv.DictWriter(
            out, fieldnames=REPORT_CSV_COLUMNS, quoting=csv.QUOTE_MINIMAL, lineterminator="\n"
        )
        writer.writeheader()
        for row in score_rows(session):
            writer.writerow(row)
        return out.getvalue()
    raise UnknownFormat(f"unsupported report format {format!r}")


class EventLogStore:
    """Append-only JSONL files, one per session, under a data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.events.jsonl"

    def list_sessions(self) -> list[str]:
        return sorted(
            p.name[: -len(".events.jsonl")]
            for p in self.data_dir.glob("*.events.jsonl")
        )

    def append(self, session_id: str, events: Iterable[SessionEvent]) -> None:
        with open(self.path_for(session_id), "a", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(event.to_json(), separators=(",", ":")) + "\n")

    def load(self, session_id: str) -> Session:
        path = self.path_for(session_id)
        if not path.exists():
            raise UnknownSession(f"no event log for session {session_id!r}")
        return Session.replay(events_from_jsonl(path.read_text(encoding="utf-8")))

    def report_path(self, session_id: str, format: str) -> Path:
        return self.data_dir / f"report.{session_id}.{format}"
