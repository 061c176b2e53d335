"""Figure rendering for session reports.

Charts are written straight to files next to the delimited report output;
nothing here is needed for scoring or analysis.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ledger import leaderboard, velocity_series
from .session import Session


def save_velocity_figure(session: Session, path: str | Path) -> Path:
    """Bar chart of completed points per sprint."""
    points = velocity_series(session)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    sprints = [p.sprint for p in points]
    totals = [float(p.completed_points) for p in points]
    ax.bar(sprints, totals, color="#4878a8")
    ax.set_xlabel("sprint")
    ax.set_ylabel("completed story points")
    ax.set_title(f"Velocity — {session.session_id}")
    if sprints:
        ax.set_xticks(sprints)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_leaderboard_figure(session: Session, path: str | Path) -> Path:
    """Horizontal bar chart of cumulative points per participant."""
    entries = leaderboard(session)
    fig, ax = plt.subplots(figsize=(6, 0.6 * max(len(entries), 2) + 1.5))
    names = [e.display_name for e in entries][::-1]
    points = [e.cumulative_points for e in entries][::-1]
    ax.barh(names, points, color="#6aa84f")
    ax.set_xlabel("cumulative points")
    ax.set_title(f"Leaderboard — {session.session_id}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_report_figures(session: Session, directory: str | Path) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    return [
        save_velocity_figure(session, out / f"velocity.{session.session_id}.png"),
        save_leaderboard_figure(session, out / f"leaderboard.{session.session_id}.png"),
    ]
