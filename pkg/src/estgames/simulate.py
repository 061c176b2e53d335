"""Agent-based Monte Carlo runs of the estimation mechanisms.

Every random draw comes from a sub-stream keyed by (seed, sprint, story,
agent), so two runs that differ only in mechanism or in one agent's
strategy see identical efforts and identical noise: common random numbers
by construction.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Optional, Sequence, Union

import numpy as np

from .core import (
    AggregateKind,
    Choice,
    EstimationScale,
    PayoffConfig,
    as_fraction,
    baseline_aggregate,
    classify_accuracy,
    classify_choice,
    stag_payoffs,
    vickrey_payoff,
    vickrey_select,
)
from .errors import InvalidConfig, NonPositiveEffort

_EFFORT_STREAM = 0
_AGENT_STREAM = 1


class Mechanism(enum.Enum):
    SECOND_HIGHEST = "SecondHighest"
    MEAN = "Mean"
    MEDIAN = "Median"
    MAX = "Max"


@dataclass(frozen=True)
class Honest:
    kind = "Honest"


@dataclass(frozen=True)
class Inflate:
    factor: float
    kind = "Inflate"

    def __post_init__(self):
        if not self.factor > 1:
            raise InvalidConfig("inflate factor must exceed 1")


@dataclass(frozen=True)
class Deflate:
    factor: float
    kind = "Deflate"

    def __post_init__(self):
        if not 0 < self.factor < 1:
            raise InvalidConfig("deflate factor must lie in (0, 1)")


@dataclass(frozen=True)
class Learner:
    initial_sigma: float
    decay: float
    kind = "Learner"

    def __post_init__(self):
        if self.initial_sigma < 0:
            raise InvalidConfig("initial sigma must be non-negative")
        if not 0 < self.decay < 1:
            raise InvalidConfig("decay must lie in (0, 1)")


Strategy = Union[Honest, Inflate, Deflate, Learner]


@dataclass(frozen=True)
class AgentSpec:
    name: str
    strategy: Strategy
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise InvalidConfig("noise sigma must be non-negative")

    def strategy_json(self) -> dict:
        doc: dict = {"kind": self.strategy.kind}
        if isinstance(self.strategy, (Inflate, Deflate)):
            doc["factor"] = self.strategy.factor
        elif isinstance(self.strategy, Learner):
            doc["initial_sigma"] = self.strategy.initial_sigma
            doc["decay"] = self.strategy.decay
        return doc


def strategy_from_json(doc: Union[str, dict]) -> Strategy:
    if isinstance(doc, str):
        doc = {"kind": doc}
    kind = doc.get("kind")
    if kind == "Honest":
        return Honest()
    if kind == "Inflate":
        return Inflate(factor=float(doc["factor"]))
    if kind == "Deflate":
        return Deflate(factor=float(doc["factor"]))
    if kind == "Learner":
        return Learner(
            initial_sigma=float(doc["initial_sigma"]), decay=float(doc["decay"])
        )
    raise InvalidConfig(f"unknown strategy {kind!r}")


@dataclass(frozen=True)
class SimulationConfig:
    agents: tuple[AgentSpec, ...]
    stories: int
    sprints: int
    effort_mu: float
    effort_sigma: float
    mechanism: Mechanism
    scale: EstimationScale
    payoff: PayoffConfig
    seed: int

    def __post_init__(self):
        if not self.agents:
            raise InvalidConfig("at least one agent required")
        if len({a.name for a in self.agents}) != len(self.agents):
            raise InvalidConfig("agent names must be unique")
        if self.stories < 1 or self.sprints < 1:
            raise InvalidConfig("stories and sprints must be positive")
        if self.effort_sigma < 0:
            raise InvalidConfig("effort sigma must be non-negative")

    @classmethod
    def from_json(cls, doc: dict) -> "SimulationConfig":
        try:
            agents = tuple(
                AgentSpec(
                    name=str(a["name"]),
                    strategy=strategy_from_json(a["strategy"]),
                    noise_sigma=float(a.get("noise_sigma", 0.0)),
                )
                for a in doc["agents"]
            )
            dist = doc.get("effort_distribution", {})
            return cls(
                agents=agents,
                stories=int(doc["stories"]),
                sprints=int(doc.get("sprints", 1)),
                effort_mu=float(dist.get("mu", math.log(8))),
                effort_sigma=float(dist.get("sigma", 0.5)),
                mechanism=Mechanism(doc.get("mechanism", "SecondHighest")),
                scale=EstimationScale.from_json(doc["scale"])
                if "scale" in doc
                else EstimationScale(),
                payoff=PayoffConfig.from_json(doc["payoff"])
                if "payoff" in doc
                else PayoffConfig(),
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad simulation config: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "agents": [
                {
                    "name": a.name,
                    "strategy": a.strategy_json(),
                    "noise_sigma": a.noise_sigma,
                }
                for a in self.agents
            ],
            "stories": self.stories,
            "sprints": self.sprints,
            "effort_distribution": {"mu": self.effort_mu, "sigma": self.effort_sigma},
            "mechanism": self.mechanism.value,
            "scale": self.scale.to_json(),
            "payoff": self.payoff.to_json(),
            "seed": self.seed,
        }

    def with_mechanism(self, mechanism: Mechanism) -> "SimulationConfig":
        return SimulationConfig(
            agents=self.agents,
            stories=self.stories,
            sprints=self.sprints,
            effort_mu=self.effort_mu,
            effort_sigma=self.effort_sigma,
            mechanism=mechanism,
            scale=self.scale,
            payoff=self.payoff,
            seed=self.seed,
        )


@dataclass(frozen=True)
class AgentMetrics:
    name: str
    strategy: dict
    mean_points_per_story: float
    cooperation_rate: float
    sigma_trajectory: Optional[list[float]]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "strategy": self.strategy,
            "mean_points_per_story": self.mean_points_per_story,
            "cooperation_rate": self.cooperation_rate,
            "sigma_trajectory": self.sigma_trajectory,
        }


@dataclass(frozen=True)
class MetricsReport:
    mechanism: str
    seed: int
    replications: int
    mape: float
    velocity: list[float]
    agents: list[AgentMetrics]
    draw_checksum: str

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "seed": self.seed,
            "replications": self.replications,
            "mape": self.mape,
            "velocity": self.velocity,
            "agents": [a.to_json() for a in self.agents],
            "draw_checksum": self.draw_checksum,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *key))))


def snap_to_scale(value: float, scale: EstimationScale) -> Fraction:
    """Nearest scale value; ties toward the smaller."""
    best = scale.values[0]
    best_gap = abs(value - float(best))
    for candidate in scale.values[1:]:
        gap = abs(value - float(candidate))
        if gap < best_gap:
            best, best_gap = candidate, gap
    return best


def _estimate_from_draw(
    agent: AgentSpec,
    true_effort: float,
    scale: EstimationScale,
    z: float,
    current_sigma: Optional[float],
) -> Fraction:
    strategy = agent.strategy
    if isinstance(strategy, Learner):
        sigma = strategy.initial_sigma if current_sigma is None else current_sigma
    else:
        sigma = agent.noise_sigma
    belief = true_effort * math.exp(sigma * z)
    if isinstance(strategy, (Inflate, Deflate)):
        belief *= strategy.factor
    return snap_to_scale(belief, scale)


def agent_estimate(
    agent: AgentSpec,
    true_effort: float,
    scale: EstimationScale,
    rng: np.random.Generator,
    current_sigma: Optional[float] = None,
) -> Fraction:
    """One agent's sealed estimate for a story with the given true effort.

    The estimate is a noisy multiplicative belief, skewed by the agent's
    strategy, then snapped onto the scale. The normal draw happens even at
    zero sigma so changing one agent's parameters never shifts another
    agent's stream.
    """
    if true_effort <= 0:
        raise NonPositiveEffort("true effort must be positive")
    return _estimate_from_draw(
        agent, true_effort, scale, float(rng.standard_normal()), current_sigma
    )


_MECHANISM_AGGREGATES = {
    Mechanism.MEAN: AggregateKind.MEAN,
    Mechanism.MEDIAN: AggregateKind.MEDIAN,
    Mechanism.MAX: AggregateKind.MAX,
}


def commit_estimate(values: Sequence[Fraction], mechanism: Mechanism) -> Fraction:
    if mechanism is Mechanism.SECOND_HIGHEST:
        return vickrey_select(values)
    return baseline_aggregate(values, _MECHANISM_AGGREGATES[mechanism])


def run_simulation(
    config: SimulationConfig, trace: Optional[IO[str]] = None
) -> MetricsReport:
    """Play stories × sprints under one mechanism and aggregate metrics.

    The same seed always produces the same report; an optional trace file
    receives one JSON line per story for independent re-scoring.
    """
    agents = config.agents
    cfg = config.payoff
    scale = config.scale
    checksum = hashlib.sha256()

    learners = {
        a.name: a.strategy for a in agents if isinstance(a.strategy, Learner)
    }
    sigmas = {name: s.initial_sigma for name, s in learners.items()}
    trajectories: dict[str, list[float]] = {name: [] for name in sigmas}
    points_total = {a.name: 0 for a in agents}
    cooperation_total = {a.name: 0 for a in agents}
    abs_pct_errors: list[float] = []
    velocity: list[float] = []

    for sprint in range(config.sprints):
        for name in sigmas:
            trajectories[name].append(sigmas[name])
        sprint_points = Fraction(0)
        for story in range(config.stories):
            effort_rng = _stream(config.seed, _EFFORT_STREAM, sprint, story)
            z_effort = float(effort_rng.standard_normal())
            checksum.update(repr(z_effort).encode())
            effort = math.exp(config.effort_mu + config.effort_sigma * z_effort)

            estimates = []
            for index, agent in enumerate(agents):
                agent_rng = _stream(config.seed, _AGENT_STREAM, sprint, story, index)
                z = float(agent_rng.standard_normal())
                checksum.update(repr(z).encode())
                estimates.append(
                    _estimate_from_draw(
                        agent, effort, scale, z, sigmas.get(agent.name)
                    )
                )

            final = commit_estimate(estimates, config.mechanism)
            actual = as_fraction(effort)
            abs_pct_errors.append(abs(float(final) - effort) / effort)
            sprint_points += final

            choices = [classify_choice(e, actual, cfg) for e in estimates]
            stag = stag_payoffs(choices, cfg)
            for agent, estimate, choice, stag_points_i in zip(
                agents, estimates, choices, stag
            ):
                band = classify_accuracy(estimate, actual, cfg, scale)
                points = vickrey_payoff(band, cfg) + stag_points_i
                points_total[agent.name] += points
                if choice is Choice.COOPERATE:
                    cooperation_total[agent.name] += 1

            if trace is not None:
                trace.write(
                    json.dumps(
                        {
                            "sprint": sprint + 1,
                            "story": story + 1,
                            "actual": effort,
                            "estimates": [str(e) for e in estimates],
                            "final": str(final),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
        velocity.append(float(sprint_points))
        for name, strategy in learners.items():
            sigmas[name] *= strategy.decay

    replications = config.sprints * config.stories
    agent_metrics = [
        AgentMetrics(
            name=a.name,
            strategy=a.strategy_json(),
            mean_points_per_story=points_total[a.name] / replications,
            cooperation_rate=cooperation_total[a.name] / replications,
            sigma_trajectory=trajectories.get(a.name),
        )
        for a in agents
    ]
    return MetricsReport(
        mechanism=config.mechanism.value,
        seed=config.seed,
        replications=replications,
        mape=sum(abs_pct_errors) / len(abs_pct_errors),
        velocity=velocity,
        agents=agent_metrics,
        draw_checksum=checksum.hexdigest(),
    )


def compare_mechanisms(
    config: SimulationConfig, mechanisms: Sequence[Mechanism]
) -> list[MetricsReport]:
    """Run each mechanism over the same seed and agent population."""
    if not mechanisms:
        raise InvalidConfig("at least one mechanism required")
    return [run_simulation(config.with_mechanism(m)) for m in mechanisms]


def reports_to_csv(reports: Sequence[MetricsReport]) -> str:
    """One row per agent and one aggregate row per mechanism."""
    lines = [
        "mechanism,row,name,mean_points_per_story,cooperation_rate,mape,"
        "replications,seed,draw_checksum"
    ]
    for report in reports:
        for agent in report.agents:
            lines.append(
                f"{report.mechanism},agent,{agent.name},"
                f"{agent.mean_points_per_story!r},{agent.cooperation_rate!r},,"
                f"{report.replications},{report.seed},"
            )
        lines.append(
            f"{report.mechanism},aggregate,,,,{report.mape!r},"
            f"{report.replications},{report.seed},{report.draw_checksum}"
        )
    return "\n".join(lines) + "\n"
