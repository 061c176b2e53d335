"""Pure selection and payoff rules for both estimation mechanisms.

Everything here is a deterministic function of its inputs. Values are exact
rationals (`fractions.Fraction`) so band boundaries like "exactly 10% off"
never depend on floating-point rounding.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import (
    EmptyChoiceList,
    EmptyEstimateSet,
    InvalidConfig,
    NonPositiveActual,
    ValueNotOnScale,
)

RationalLike = Union[int, float, str, Fraction]

DEFAULT_SCALE_VALUES = (1, 2, 3, 5, 8, 13, 21)


def as_fraction(value: RationalLike) -> Fraction:
    """Convert to an exact rational.

    Floats go through their decimal repr, so a JSON number like 0.1 becomes
    exactly 1/10 rather than the nearest binary float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def encode_rational(value: Fraction) -> int | str:
    """Canonical JSON encoding: int when integral, else a "p/q" string."""
    if value.denominator == 1:
        return int(value)
    return str(value)


@dataclass(frozen=True)
class EstimationScale:
    """The allowed story-point values, strictly increasing and positive."""

    values: tuple[Fraction, ...] = tuple(Fraction(v) for v in DEFAULT_SCALE_VALUES)

    def __post_init__(self):
        if not self.values:
            raise InvalidConfig("scale must be non-empty")
        vals = tuple(as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(v <= 0 for v in vals):
            raise InvalidConfig("scale values must be positive")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise InvalidConfig("scale values must be strictly increasing")

    def __contains__(self, value: object) -> bool:
        try:
            return as_fraction(value) in self.values  # type: ignore[arg-type]
        except (ValueError, TypeError, ZeroDivisionError):
            return False

    def require(self, value: RationalLike) -> Fraction:
        """Return the value as a Fraction, or raise ValueNotOnScale."""
        frac = as_fraction(value)
        if frac not in self.values:
            raise ValueNotOnScale(f"{value} is not on the scale")
        return frac

    def nearest(self, value: RationalLike) -> Fraction:
        """Snap to the closest scale value; ties go to the smaller one."""
        frac = as_fraction(value)
        best = self.values[0]
        best_gap = abs(frac - best)
        for candidate in self.values[1:]:
            gap = abs(frac - candidate)
            if gap < best_gap:
                best, best_gap = candidate, gap
        return best

    def to_json(self) -> list:
        return [encode_rational(v) for v in self.values]

    @classmethod
    def from_json(cls, values: Iterable[RationalLike]) -> "EstimationScale":
        return cls(tuple(as_fraction(v) for v in values))


@dataclass(frozen=True)
class PayoffConfig:
    """All scoring constants for both mechanisms.

    Accuracy payoffs and the band width come from the sealed-bid rule; the
    team-game constants are the four coordination-matrix cells. The bonus
    constants cover revision and participation rewards.
    """

    exact_points: int = 5
    band_points: int = 3
    miss_points: int = 0
    band: Fraction = Fraction(1, 10)
    stag_all_cooperate: int = 5
    stag_cooperate_with_defectors: int = 2
    stag_unilateral_defect: int = 3
    stag_defect_with_defectors: int = 0
    adaptability_bonus: int = 1
    contribution_point: int = 1
    spread_threshold: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "band", as_fraction(self.band))
        object.__setattr__(self, "spread_threshold", as_fraction(self.spread_threshold))
        if not self.exact_points >= self.band_points >= self.miss_points:
            raise InvalidConfig("accuracy payoffs must be ordered exact >= band >= miss")
        if not self.stag_all_cooperate > self.stag_unilateral_defect:
            raise InvalidConfig("all-cooperate payoff must exceed unilateral defection")
        if not 0 < self.band < 1:
            raise InvalidConfig("band must lie strictly between 0 and 1")
        if self.spread_threshold <= 0:
            raise InvalidConfig("spread threshold must be positive")

    def to_json(self) -> dict:
        return {
            "exact_points": self.exact_points,
            "band_points": self.band_points,
            "miss_points": self.miss_points,
            "band": encode_rational(self.band),
            "stag_all_cooperate": self.stag_all_cooperate,
            "stag_cooperate_with_defectors": self.stag_cooperate_with_defectors,
            "stag_unilateral_defect": self.stag_unilateral_defect,
            "stag_defect_with_defectors": self.stag_defect_with_defectors,
            "adaptability_bonus": self.adaptability_bonus,
            "contribution_point": self.contribution_point,
            "spread_threshold": encode_rational(self.spread_threshold),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PayoffConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfig(f"unknown payoff fields: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("band", "spread_threshold"):
            if key in kwargs:
                kwargs[key] = as_fraction(kwargs[key])
        return cls(**kwargs)


class Choice(enum.Enum):
    COOPERATE = "Cooperate"
    DEFECT = "Defect"


class AccuracyBand(enum.IntEnum):
    """Ordered by distance from the actual: lower is better."""

    EXACT = 0
    WITHIN_BAND = 1
    MISS = 2


class AggregateKind(enum.Enum):
    MEAN = "Mean"
    MEDIAN = "Median"
    MAX = "Max"


def check_actual(actual: RationalLike) -> Fraction:
    value = as_fraction(actual)
    if value <= 0:
        raise NonPositiveActual(f"actual effort must be positive, got {actual}")
    return value


def vickrey_select(estimates: Iterable[RationalLike]) -> Fraction:
    """Pick the second-highest estimate (duplicates count as distinct bids).

    A lone estimate is returned as-is: with one bidder there is no second
    bid, and the degenerate auction settles at the only one.
    """
    ordered = sorted((as_fraction(e) for e in estimates), reverse=True)
    if not ordered:
        raise EmptyEstimateSet("no estimates to select from")
    return ordered[1] if len(ordered) >= 2 else ordered[0]


def relative_deviation(estimate: RationalLike, actual: RationalLike) -> Fraction:
    actual_f = check_actual(actual)
    return abs(as_fraction(estimate) - actual_f) / actual_f


def classify_accuracy(
    estimate: RationalLike,
    actual: RationalLike,
    cfg: PayoffConfig,
    scale: EstimationScale,
) -> AccuracyBand:
    """Band an estimate against the actual effort.

    Exact matches beat everything; otherwise the relative deviation against
    the band width decides. The estimate must be a scale member.
    """
    est = scale.require(estimate)
    actual_f = check_actual(actual)
    if est == actual_f:
        return AccuracyBand.EXACT
    if abs(est - actual_f) / actual_f <= cfg.band:
        return AccuracyBand.WITHIN_BAND
    return AccuracyBand.MISS


def vickrey_payoff(band: AccuracyBand, cfg: PayoffConfig) -> int:
    if band is AccuracyBand.EXACT:
        return cfg.exact_points
    if band is AccuracyBand.WITHIN_BAND:
        return cfg.band_points
    return cfg.miss_points


def classify_choice(
    estimate: RationalLike, actual: RationalLike, cfg: PayoffConfig
) -> Choice:
    """Cooperate iff the estimate lands within the accuracy band."""
    if relative_deviation(estimate, actual) <= cfg.band:
        return Choice.COOPERATE
    return Choice.DEFECT


def stag_payoffs(choices: Sequence[Choice], cfg: PayoffConfig) -> list[int]:
    """Score the team coordination game, one payoff per player.

    A player's payoff depends only on their own choice and whether anyone
    *else* defected; a lone player counts as "all others cooperated".
    """
    if not choices:
        raise EmptyChoiceList("at least one player required")
    defectors = sum(1 for c in choices if c is Choice.DEFECT)
    payoffs = []
    for choice in choices:
        others_defected = defectors - (1 if choice is Choice.DEFECT else 0) > 0
        if choice is Choice.COOPERATE:
            payoffs.append(
                cfg.stag_cooperate_with_defectors
                if others_defected
                else cfg.stag_all_cooperate
            )
        else:
            payoffs.append(
                cfg.stag_defect_with_defectors
                if others_defected
                else cfg.stag_unilateral_defect
            )
    return payoffs


def baseline_aggregate(
    estimates: Iterable[RationalLike], kind: AggregateKind
) -> Fraction:
    """Consensus baselines: arithmetic mean, lower median, or maximum."""
    ordered = sorted(as_fraction(e) for e in estimates)
    if not ordered:
        raise EmptyEstimateSet("no estimates to aggregate")
    if kind is AggregateKind.MEAN:
        return Fraction(sum(ordered), len(ordered))
    if kind is AggregateKind.MEDIAN:
        return ordered[(len(ordered) - 1) // 2]
    return ordered[-1]
