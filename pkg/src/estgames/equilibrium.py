"""Finite normal-form games and brute-force solvers.

Payoffs are exact rationals: equilibrium membership hinges on strict
inequalities, so floating error must never flip a comparison. Games are
small by design; enumeration is capped rather than optimized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .core import Choice, PayoffConfig, RationalLike, as_fraction, stag_payoffs
from .errors import (
    GameTooLarge,
    MalformedGame,
    PlayerCountTooSmall,
    PlayerOutOfRange,
    WrongShape,
)

PROFILE_CAP = 2**20

Profile = tuple[int, ...]


@dataclass(frozen=True)
class NormalFormGame:
    """Players 0..n-1, each with a finite strategy set, and a total payoff map."""

    strategy_counts: tuple[int, ...]
    payoffs: Mapping[Profile, tuple[Fraction, ...]]
    strategy_labels: Optional[tuple[tuple[str, ...], ...]] = None

    def __post_init__(self):
        if not self.strategy_counts or any(c < 1 for c in self.strategy_counts):
            raise MalformedGame("every player needs at least one strategy")
        total = 1
        for count in self.strategy_counts:
            total *= count
        if total > PROFILE_CAP:
            raise GameTooLarge(f"{total} profiles exceed the cap of {PROFILE_CAP}")
        n = len(self.strategy_counts)
        payoffs = dict(self.payoffs)
        for profile in itertools.product(*(range(c) for c in self.strategy_counts)):
            if profile not in payoffs:
                raise MalformedGame(f"payoff missing for profile {profile}")
            row = tuple(as_fraction(v) for v in payoffs[profile])
            if len(row) != n:
                raise MalformedGame(f"profile {profile} needs {n} payoffs")
            payoffs[profile] = row
        if len(payoffs) != total:
            raise MalformedGame("payoff table has profiles outside the strategy space")
        object.__setattr__(self, "payoffs", payoffs)
        if self.strategy_labels is not None and (
            len(self.strategy_labels) != n
            or any(len(l) != c for l, c in zip(self.strategy_labels, self.strategy_counts))
        ):
            raise MalformedGame("strategy labels do not match strategy counts")

    @property
    def player_count(self) -> int:
        return len(self.strategy_counts)

    def profiles(self) -> Iterable[Profile]:
        return itertools.product(*(range(c) for c in self.strategy_counts))

    def payoff(self, profile: Profile, player: int) -> Fraction:
        return self.payoffs[profile][player]

    def label(self, player: int, strategy: int) -> str:
        if self.strategy_labels is not None:
            return self.strategy_labels[player][strategy]
        return str(strategy)


@dataclass(frozen=True)
class EquilibriumReport:
    pure_nash: tuple[Profile, ...]
    dominant_strategies: tuple[Optional[tuple[int, str]], ...]
    mixed_2x2: Optional[tuple[Fraction, Fraction]]

    def to_json(self, game: Optional[NormalFormGame] = None) -> dict:
        doc: dict = {
            "pure_nash": [list(p) for p in self.pure_nash],
            "dominant_strategies": [
                None if d is None else {"strategy": d[0], "order": d[1]}
                for d in self.dominant_strategies
            ],
            "mixed_2x2": None
            if self.mixed_2x2 is None
            else [float(self.mixed_2x2[0]), float(self.mixed_2x2[1])],
        }
        if game is not None and game.strategy_labels is not None:
            doc["pure_nash_labels"] = [
                [game.label(i, s) for i, s in enumerate(p)] for p in self.pure_nash
            ]
            for player, entry in enumerate(doc["dominant_strategies"]):
                if entry is not None:
                    entry["label"] = game.label(player, entry["strategy"])
        return doc


def build_stag_game(n: int, cfg: PayoffConfig) -> NormalFormGame:
    """Symmetric n-player cooperate/defect game under the team payoff rule."""
    if n < 2:
        raise PlayerCountTooSmall("need at least two players")
    choice_of = {0: Choice.COOPERATE, 1: Choice.DEFECT}
    payoffs = {}
    for profile in itertools.product((0, 1), repeat=n):
        row = stag_payoffs([choice_of[s] for s in profile], cfg)
        payoffs[profile] = tuple(Fraction(p) for p in row)
    return NormalFormGame(
        strategy_counts=(2,) * n,
        payoffs=payoffs,
        strategy_labels=(("Cooperate", "Defect"),) * n,
    )


def _deviations(profile: Profile, player: int, count: int) -> Iterable[Profile]:
    for alt in range(count):
        if alt != profile[player]:
            yield profile[:player] + (alt,) + profile[player + 1 :]


def find_pure_nash(game: NormalFormGame) -> list[Profile]:
    """All profiles where no player gains by unilateral deviation (exhaustive)."""
    equilibria = []
    for profile in game.profiles():
        stable = True
        for player, count in enumerate(game.strategy_counts):
            own = game.payoff(profile, player)
            if any(
                game.payoff(dev, player) > own
                for dev in _deviations(profile, player, count)
            ):
                stable = False
                break
        if stable:
            equilibria.append(profile)
    return equilibria


def find_dominant(game: NormalFormGame, player: int) -> Optional[tuple[int, str]]:
    """A strategy dominating all the player's others, with its order.

    Returns (strategy, "strict") when it beats every alternative against
    every opponent profile, (strategy, "weak") when it is never worse and
    somewhere better, else None.
    """
    if not 0 <= player < game.player_count:
        raise PlayerOutOfRange(f"player {player} out of range")
    own_count = game.strategy_counts[player]
    if own_count == 1:
        return (0, "weak")  # vacuously dominant
    opponent_sets = [
        range(c) for i, c in enumerate(game.strategy_counts) if i != player
    ]

    def payoff_with(strategy: int, others: tuple[int, ...]) -> Fraction:
        profile = others[:player] + (strategy,) + others[player:]
        return game.payoff(profile, player)

    for candidate in range(own_count):
        strict = True
        weak = True
        somewhere_better = False
        for others in itertools.product(*opponent_sets):
            mine = payoff_with(candidate, others)
            for alt in range(own_count):
                if alt == candidate:
                    continue
                theirs = payoff_with(alt, others)
                if mine <= theirs:
                    strict = False
                if mine < theirs:
                    weak = False
                if mine > theirs:
                    somewhere_better = True
            if not weak:
                break
        if strict:
            return (candidate, "strict")
        if weak and somewhere_better:
            return (candidate, "weak")
    return None


def solve_mixed_2x2(game: NormalFormGame) -> Optional[tuple[Fraction, Fraction]]:
    """Interior mixed equilibrium of a 2x2 game via indifference conditions.

    Returns (p, q) = P(player 0 plays strategy 0), P(player 1 plays strategy 0)
    when both lie strictly inside (0, 1); degenerate or infeasible
    indifference yields None.
    """
    if game.strategy_counts != (2, 2):
        raise WrongShape("mixed solver handles exactly 2x2 games")
    u = game.payoff

    def interior_root(const: Fraction, slope: Fraction) -> Optional[Fraction]:
        # Solve const + slope * x = 0 for x strictly inside (0, 1).
        if slope == 0:
            return None
        x = -const / slope
        return x if 0 < x < 1 else None

    # Player 0 indifferent between rows given q on column 0:
    #   q*(u0(0,0) - u0(1,0)) + (1-q)*(u0(0,1) - u0(1,1)) = 0
    d_top = u((0, 0), 0) - u((1, 0), 0)
    d_bottom = u((0, 1), 0) - u((1, 1), 0)
    q = interior_root(d_bottom, d_top - d_bottom)
    # Player 1 indifferent between columns given p on row 0.
    d_left = u((0, 0), 1) - u((0, 1), 1)
    d_right = u((1, 0), 1) - u((1, 1), 1)
    p = interior_root(d_right, d_left - d_right)
    if p is None or q is None:
        return None
    return (p, q)


def analyze(game: NormalFormGame) -> EquilibriumReport:
    mixed = None
    if game.strategy_counts == (2, 2):
        mixed = solve_mixed_2x2(game)
    return EquilibriumReport(
        pure_nash=tuple(find_pure_nash(game)),
        dominant_strategies=tuple(
            find_dominant(game, p) for p in range(game.player_count)
        ),
        mixed_2x2=mixed,
    )


def game_from_json(doc: dict) -> NormalFormGame:
    """Parse {player_count, strategy_counts, payoffs: {"i,j,...": [..]}}."""
    try:
        counts = tuple(int(c) for c in doc["strategy_counts"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedGame("strategy_counts must be a list of integers") from exc
    declared = doc.get("player_count")
    if declared is not None and int(declared) != len(counts):
        raise MalformedGame("player_count disagrees with strategy_counts")
    raw = doc.get("payoffs")
    if not isinstance(raw, dict):
        raise MalformedGame("payoffs must be an object keyed by profiles")
    payoffs: dict[Profile, tuple[Fraction, ...]] = {}
    for key, row in raw.items():
        try:
            profile = tuple(int(part) for part in str(key).split(","))
        except ValueError as exc:
            raise MalformedGame(f"bad profile key {key!r}") from exc
        if len(profile) != len(counts) or any(
            not 0 <= s < c for s, c in zip(profile, counts)
        ):
            raise MalformedGame(f"profile {key!r} outside the strategy space")
        payoffs[profile] = tuple(as_fraction(v) for v in row)
    labels = doc.get("strategy_labels")
    return NormalFormGame(
        strategy_counts=counts,
        payoffs=payoffs,
        strategy_labels=None
        if labels is None
        else tuple(tuple(str(s) for s in player) for player in labels),
    )


def game_to_json(game: NormalFormGame) -> dict:
    doc = {
        "player_count": game.player_count,
        "strategy_counts": list(game.strategy_counts),
        "payoffs": {
            ",".join(str(s) for s in profile): [
                int(v) if v.denominator == 1 else float(v) for v in row
            ]
            for profile, row in sorted(game.payoffs.items())
        },
    }
    if game.strategy_labels is not None:
        doc["strategy_labels"] = [list(l) for l in game.strategy_labels]
    return doc
