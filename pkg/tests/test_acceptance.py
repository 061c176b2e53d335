"""Acceptance gate: one test per release criterion, at stated tolerances.

Run with `pytest tests/test_acceptance.py -s` to see one PASS/FAIL line
per criterion.
"""

import itertools
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

from estgames.core import (
    Choice,
    EstimationScale,
    PayoffConfig,
    as_fraction,
    classify_accuracy,
    stag_payoffs,
    vickrey_payoff,
)
from estgames.equilibrium import build_stag_game, find_dominant, find_pure_nash, solve_mixed_2x2
from estgames.errors import AlreadySealed
from estgames.session import Session, events_from_jsonl, events_to_jsonl
from estgames.simulate import (
    AgentSpec,
    Deflate,
    Honest,
    Inflate,
    Mechanism,
    SimulationConfig,
    compare_mechanisms,
    run_simulation,
)

CFG = PayoffConfig()
SCALE = EstimationScale()
T = "2024-03-01T09:00:00Z"


def verdict(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_vickrey_payoff_table_fidelity():
    started = time.perf_counter()

    def oracle(e, a):  # the three table rows, top to bottom
        return 5 if e == a else (3 if abs(e - a) / a <= Fraction(1, 10) else 0)

    actuals = [Fraction(i, 10) for i in range(5, 148)]  # 0.5 .. 14.7
    pairs = [(e, a) for e in SCALE.values for a in actuals]
    pairs += [  # band boundaries, exactly on and just past 10%
        (Fraction(8), Fraction(80, 11)),
        (Fraction(8), Fraction(800, 111)),
        (Fraction(5), Fraction(50, 9)),
        (Fraction(5), Fraction(500, 89)),
    ]
    assert len(pairs) >= 1000
    mismatches = sum(
        1
        for e, a in pairs
        if vickrey_payoff(classify_accuracy(e, a, CFG, SCALE), CFG) != oracle(e, a)
    )
    elapsed = time.perf_counter() - started
    verdict(
        "vickrey payoff table fidelity",
        mismatches == 0 and elapsed < 1.0,
        f"{len(pairs)} pairs, {mismatches} mismatches, {elapsed:.3f}s",
    )


def test_stag_payoff_table_fidelity():
    started = time.perf_counter()

    def oracle(own: Choice, other_defectors: int) -> int:
        if own is Choice.COOPERATE:
            return 5 if other_defectors == 0 else 2
        return 3 if other_defectors == 0 else 0

    mismatches = 0
    vectors = 0
    for n in range(2, 7):
        for bits in itertools.product((0, 1), repeat=n):
            vectors += 1
            choices = [Choice.DEFECT if b else Choice.COOPERATE for b in bits]
            payoffs = stag_payoffs(choices, CFG)
            defectors = sum(bits)
            for choice, payoff, bit in zip(choices, payoffs, bits):
                if payoff != oracle(choice, defectors - bit):
                    mismatches += 1
    elapsed = time.perf_counter() - started
    verdict(
        "stag payoff table fidelity",
        mismatches == 0 and elapsed < 1.0,
        f"{vectors} vectors, {mismatches} mismatches, {elapsed:.3f}s",
    )


def test_equilibrium_all_cooperate():
    started = time.perf_counter()

    def deviation_check(game, profile):
        for player in range(game.player_count):
            for alt in range(game.strategy_counts[player]):
                deviated = profile[:player] + (alt,) + profile[player + 1 :]
                if game.payoff(deviated, player) > game.payoff(profile, player):
                    return False
        return True

    ok = True
    for n in range(2, 7):
        game = build_stag_game(n, CFG)
        nash = find_pure_nash(game)
        ok &= nash == [(0,) * n]
        ok &= all(deviation_check(game, p) for p in nash)
        ok &= all(
            not deviation_check(game, p)
            for p in game.profiles()
            if p not in nash
        )
        ok &= all(find_dominant(game, i) == (0, "strict") for i in range(n))
    elapsed = time.perf_counter() - started
    verdict("all-cooperate equilibrium, n=2..6", ok and elapsed < 5.0, f"{elapsed:.3f}s")


def test_mixed_equilibrium_nonexistence():
    started = time.perf_counter()
    stag_mixed = solve_mixed_2x2(build_stag_game(2, CFG))
    pennies = {
        (0, 0): (1, -1),
        (0, 1): (-1, 1),
        (1, 0): (-1, 1),
        (1, 1): (1, -1),
    }
    from estgames.equilibrium import NormalFormGame

    mix = solve_mixed_2x2(NormalFormGame(strategy_counts=(2, 2), payoffs=pennies))
    ok = (
        stag_mixed is None
        and mix is not None
        and abs(float(mix[0]) - 0.5) <= 1e-9
        and abs(float(mix[1]) - 0.5) <= 1e-9
    )
    elapsed = time.perf_counter() - started
    verdict("mixed equilibrium nonexistence", ok and elapsed < 1.0, f"{elapsed:.3f}s")


def _sim_config(agents, seed):
    return SimulationConfig(
        agents=tuple(agents),
        stories=1000,
        sprints=1,
        effort_mu=math.log(8),
        effort_sigma=0.5,
        mechanism=Mechanism.SECOND_HIGHEST,
        scale=SCALE,
        payoff=CFG,
        seed=seed,
    )


def test_outlier_resistance():
    started = time.perf_counter()
    wins = 0
    for seed in range(10):
        agents = [AgentSpec(name=f"h{i}", strategy=Honest(), noise_sigma=0.2) for i in range(4)]
        agents.append(AgentSpec(name="whale", strategy=Inflate(3.0), noise_sigma=0.2))
        second, maxed = compare_mechanisms(
            _sim_config(agents, seed), [Mechanism.SECOND_HIGHEST, Mechanism.MAX]
        )
        assert second.draw_checksum == maxed.draw_checksum  # common random numbers
        if second.mape < maxed.mape:
            wins += 1
    elapsed = time.perf_counter() - started
    verdict(
        "outlier resistance of second-highest commit",
        wins >= 9 and elapsed < 30.0,
        f"{wins}/10 seeds, {elapsed:.1f}s",
    )


def test_incentive_alignment():
    started = time.perf_counter()
    wins = 0
    for seed in range(10):
        def population(first_strategy):
            agents = [
                AgentSpec(name=f"a{i}", strategy=Honest(), noise_sigma=0.2)
                for i in range(5)
            ]
            agents[0] = AgentSpec(name="a0", strategy=first_strategy, noise_sigma=0.2)
            return agents

        honest = run_simulation(_sim_config(population(Honest()), seed))
        inflated = run_simulation(_sim_config(population(Inflate(1.5)), seed))
        deflated = run_simulation(_sim_config(population(Deflate(0.67)), seed))
        h = honest.agents[0].mean_points_per_story
        if h > inflated.agents[0].mean_points_per_story and h > deflated.agents[0].mean_points_per_story:
            wins += 1
    elapsed = time.perf_counter() - started
    verdict(
        "honesty beats inflation and deflation",
        wins >= 9 and elapsed < 30.0,
        f"{wins}/10 seeds, {elapsed:.1f}s",
    )


def test_sealing_and_anonymity():
    started = time.perf_counter()
    violations = 0
    rng = random.Random(2024)
    values = [1, 2, 3, 5, 8, 13, 21]
    for i in range(10_000):
        session = Session.create(session_id=f"s{i}", at=T)
        pids = [
            session.join_participant(f"dev{k}", participant_id=f"p{k}-{i}", at=T).participant_id
            for k in range(rng.randint(1, 4))
        ]
        session.add_story("r", "f", "b", story_id="st", at=T)
        session.open_estimation("st", at=T)
        submitted = set()
        for _ in range(rng.randint(1, 8)):
            pid = rng.choice(pids)
            try:
                session.submit_estimate("st", pid, rng.choice(values), at=T)
                if pid in submitted:
                    violations += 1  # resubmission got through
                submitted.add(pid)
            except AlreadySealed:
                if pid not in submitted:
                    violations += 1  # rejected a first submission
            if session.estimates["st"][pid].value not in values:
                violations += 1
        if submitted:
            view = session.reveal("st", override=True, at=T)
            serialized = json.dumps(view.to_json())
            if any(pid in serialized for pid in pids):
                violations += 1
            if session.version != len(session.events):
                violations += 1
    elapsed = time.perf_counter() - started
    verdict(
        "sealing and reveal anonymity over 10,000 sequences",
        violations == 0,
        f"{violations} violations, {elapsed:.1f}s",
    )


def _random_history(seed: int) -> Session:
    rng = random.Random(seed)
    session = Session.create(session_id=f"hist{seed}", at=T)
    pids = [
        session.join_participant(f"dev{k}", participant_id=f"p{k}", at=T).participant_id
        for k in range(rng.randint(1, 4))
    ]
    values = [1, 2, 3, 5, 8, 13, 21]
    for s in range(rng.randint(1, 3)):
        sid = f"st{s}"
        session.add_story("r", f"story {s}", "b", story_id=sid, at=T)
        session.open_estimation(sid, at=T)
        submitters = [p for p in pids if rng.random() < 0.8] or [rng.choice(pids)]
        for pid in submitters:
            session.submit_estimate(sid, pid, rng.choice(values), at=T)
            if rng.random() < 0.3:
                session.register_clarification(sid, pid, "scope?", at=T)
        session.reveal(sid, override=True, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        for pid in submitters:
            if rng.random() < 0.4:
                session.revise_estimate(sid, pid, rng.choice(values), "update", at=T)
        session.record_actual(sid, str(rng.choice([2, 4, 5, 7.5, 8, 8.5, 13])), at=T)
        session.score_story(sid, at=T)
    return session


def test_ledger_conservation_and_replay():
    started = time.perf_counter()
    violations = 0
    for seed in range(1000):
        session = _random_history(seed)
        emitted = {pid: 0 for pid in session.participants}
        for by_pid in session.scores.values():
            for pid, breakdown in by_pid.items():
                emitted[pid] += breakdown.total
        for pid, participant in session.participants.items():
            if participant.cumulative_points != emitted[pid]:
                violations += 1
        replayed = Session.replay(events_from_jsonl(events_to_jsonl(session.events)))
        if replayed.snapshot_bytes() != session.snapshot_bytes():
            violations += 1
    elapsed = time.perf_counter() - started
    verdict(
        "ledger conservation and byte-identical replay over 1,000 histories",
        violations == 0 and elapsed < 60.0,
        f"{violations} violations, {elapsed:.1f}s",
    )


def test_simulate_cli_determinism(tmp_path):
    config = {
        "agents": [
            {"name": f"a{i}", "strategy": {"kind": "Honest"}, "noise_sigma": 0.2}
            for i in range(3)
        ],
        "stories": 50,
        "sprints": 2,
        "effort_distribution": {"mu": math.log(8), "sigma": 0.5},
        "mechanism": "SecondHighest",
        "seed": 99,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))

    def run():
        return subprocess.run(
            [sys.executable, "-m", "estgames.cli", "simulate", "--config", str(path)],
            capture_output=True,
            check=True,
        ).stdout

    first, second = run(), run()
    verdict(
        "simulate stdout byte-identical across runs",
        first == second and len(first) > 0,
        f"{len(first)} bytes",
    )
