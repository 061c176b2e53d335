"""Game-mechanism story-point estimation toolkit."""

from .core import (
    AccuracyBand,
    AggregateKind,
    Choice,
    EstimationScale,
    PayoffConfig,
    baseline_aggregate,
    classify_accuracy,
    classify_choice,
    stag_payoffs,
    vickrey_payoff,
    vickrey_select,
)
from .equilibrium import (
    EquilibriumReport,
    NormalFormGame,
    analyze,
    build_stag_game,
    find_dominant,
    find_pure_nash,
    solve_mixed_2x2,
)
from .ledger import EventLogStore, export_report, leaderboard, velocity_series
from .session import Session, SessionEvent
from .simulate import (
    AgentSpec,
    MetricsReport,
    SimulationConfig,
    agent_estimate,
    compare_mechanisms,
    run_simulation,
)

__all__ = [
    "AccuracyBand",
    "AgentSpec",
    "AggregateKind",
    "Choice",
    "EquilibriumReport",
    "EstimationScale",
    "EventLogStore",
    "MetricsReport",
    "NormalFormGame",
    "PayoffConfig",
    "Session",
    "SessionEvent",
    "SimulationConfig",
    "agent_estimate",
    "analyze",
    "baseline_aggregate",
    "build_stag_game",
    "classify_accuracy",
    "classify_choice",
    "compare_mechanisms",
    "export_report",
    "find_dominant",
    "find_pure_nash",
    "leaderboard",
    "run_simulation",
    "solve_mixed_2x2",
    "stag_payoffs",
    "velocity_series",
    "vickrey_payoff",
    "vickrey_select",
]

__version__ = "0.1.0"
