"""Session engine tests: lifecycle, preconditions, and fold properties."""

import json
import random
from fractions import Fraction

import pytest

from estgames.core import EstimationScale, PayoffConfig
from estgames.errors import (
    AlreadyScored,
    AlreadySealed,
    DuplicateParticipant,
    EmptyEstimateSet,
    GapInSequence,
    InvalidConfig,
    InvalidInput,
    NoOriginalEstimate,
    NonPositiveActual,
    NotAllSubmitted,
    StoryNotDone,
    StoryNotEstimating,
    StoryNotInProgress,
    StoryNotRevealed,
    UnknownEventKind,
    UnknownParticipant,
    ValueNotOnScale,
)
from estgames.session import (
    Session,
    SessionEvent,
    StoryState,
    events_from_jsonl,
    events_to_jsonl,
)

T = "2024-03-01T09:00:00Z"


def make_session(names=("ana", "bo", "cy")):
    session = Session.create(session_id="s1", at=T)
    pids = [session.join_participant(n, participant_id=f"p-{n}", at=T).participant_id for n in names]
    return session, pids


def add_open_story(session, sid="st1"):
    session.add_story("shopper", "filter search results", "find items faster", story_id=sid, at=T)
    session.open_estimation(sid, at=T)
    return sid


def drive_to_done(session, pids, values, actual, sid="st1"):
    sid = add_open_story(session, sid)
    for pid, value in zip(pids, values):
        session.submit_estimate(sid, pid, value, at=T)
    session.reveal(sid, at=T)
    session.commit_final(sid, at=T)
    session.start_sprint(at=T)
    session.record_actual(sid, actual, at=T)
    return sid


class TestCreation:
    def test_fresh_session(self):
        session = Session.create(session_id="s1", at=T)
        assert session.session_id == "s1"
        assert session.sprint_counter == 1
        assert not session.participants
        assert session.version == 1

    def test_invalid_band_rejected(self):
        with pytest.raises(InvalidConfig):
            Session.create(cfg=PayoffConfig(band=0), at=T)

    def test_invalid_ordering_rejected(self):
        with pytest.raises(InvalidConfig):
            Session.create(cfg=PayoffConfig(exact_points=3, band_points=5), at=T)

    def test_duplicate_display_name_rejected(self):
        session, _ = make_session()
        with pytest.raises(DuplicateParticipant):
            session.join_participant("ana", at=T)


class TestSubmission:
    def test_happy_path(self):
        session, pids = make_session()
        sid = add_open_story(session)
        sealed = session.submit_estimate(sid, pids[0], 8, at=T)
        assert sealed.value == 8

    def test_second_submission_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 8, at=T)
        version = session.version
        with pytest.raises(AlreadySealed):
            session.submit_estimate(sid, pids[0], 5, at=T)
        assert session.version == version  # log untouched
        assert session.estimates[sid][pids[0]].value == 8

    def test_off_scale_value_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        with pytest.raises(ValueNotOnScale):
            session.submit_estimate(sid, pids[0], 7, at=T)

    def test_unknown_participant_rejected(self):
        session, _ = make_session()
        sid = add_open_story(session)
        with pytest.raises(UnknownParticipant):
            session.submit_estimate(sid, "ghost", 8, at=T)

    def test_draft_story_not_estimating(self):
        session, pids = make_session()
        session.add_story("r", "f", "b", story_id="st1", at=T)
        with pytest.raises(StoryNotEstimating):
            session.submit_estimate("st1", pids[0], 8, at=T)


class TestReveal:
    def test_consistent_estimates(self):
        session, pids = make_session()
        sid = add_open_story(session)
        for pid, value in zip(pids, [5, 5, 8]):
            session.submit_estimate(sid, pid, value, at=T)
        view = session.reveal(sid, at=T)
        assert view.values == (5, 5, 8)
        assert view.inconsistency is False  # 8/5 = 1.6 <= 2.0

    def test_spread_flag(self):
        session, pids = make_session(names=("ana", "bo"))
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 3, at=T)
        session.submit_estimate(sid, pids[1], 13, at=T)
        view = session.reveal(sid, at=T)
        assert view.inconsistency is True  # 13/3 > 2.0

    def test_quorum_enforced(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 8, at=T)
        session.submit_estimate(sid, pids[1], 5, at=T)
        with pytest.raises(NotAllSubmitted):
            session.reveal(sid, at=T)

    def test_override_skips_quorum(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 8, at=T)
        view = session.reveal(sid, override=True, at=T)
        assert view.values == (8,)

    def test_no_participant_identifiers_in_view(self):
        session, pids = make_session()
        sid = add_open_story(session)
        for pid, value in zip(pids, [3, 5, 8]):
            session.submit_estimate(sid, pid, value, at=T)
        serialized = json.dumps(session.reveal(sid, at=T).to_json())
        for pid in pids:
            assert pid not in serialized


class TestCommit:
    def test_second_highest(self):
        session, pids = make_session(names=("a", "b", "c", "d"))
        sid = add_open_story(session)
        for pid, value in zip(pids, [3, 5, 8, 13]):
            session.submit_estimate(sid, pid, value, at=T)
        session.reveal(sid, at=T)
        assert session.commit_final(sid, at=T) == 8
        assert session.stories[sid].final_estimate == 8

    def test_single_estimator(self):
        session, pids = make_session(names=("solo",))
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 5, at=T)
        session.reveal(sid, at=T)
        assert session.commit_final(sid, at=T) == 5

    def test_commit_requires_reveal(self):
        session, _ = make_session()
        session.add_story("r", "f", "b", story_id="st1", at=T)
        with pytest.raises(StoryNotRevealed):
            session.commit_final("st1", at=T)

    def test_commit_with_no_estimates(self):
        session = Session.create(session_id="s1", at=T)
        sid = add_open_story(session)
        session.reveal(sid, at=T)  # vacuous quorum
        with pytest.raises(EmptyEstimateSet):
            session.commit_final(sid, at=T)


class TestRevision:
    def setup_in_progress(self):
        session, pids = make_session()
        sid = add_open_story(session)
        for pid, value in zip(pids, [5, 8, 8]):
            session.submit_estimate(sid, pid, value, at=T)
        session.reveal(sid, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        return session, pids, sid

    def test_revision_keeps_original(self):
        session, pids, sid = self.setup_in_progress()
        sealed = session.revise_estimate(sid, pids[0], 8, "scope grew", at=T)
        assert sealed.value == 5
        assert sealed.revised_value == 8
        assert sealed.effective_value == 8

    def test_revision_outside_window_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 5, at=T)
        with pytest.raises(StoryNotInProgress):
            session.revise_estimate(sid, pids[0], 8, at=T)

    def test_revision_without_original_rejected(self):
        session, pids, sid = self.setup_in_progress()
        ghost = session.join_participant("late", participant_id="p-late", at=T)
        with pytest.raises(NoOriginalEstimate):
            session.revise_estimate(sid, ghost.participant_id, 8, at=T)

    def test_sprint_counter_advances(self):
        session, pids, sid = self.setup_in_progress()
        assert session.sprint_counter == 2
        assert session.stories[sid].state is StoryState.IN_PROGRESS
        assert session.stories[sid].sprint == 1


class TestActualAndScoring:
    def test_actual_moves_to_done(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [8, 8, 8], "8.5")
        assert session.stories[sid].state is StoryState.DONE
        assert session.stories[sid].actual == Fraction("8.5")

    def test_nonpositive_actual_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        for pid in pids:
            session.submit_estimate(sid, pid, 8, at=T)
        session.reveal(sid, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        with pytest.raises(NonPositiveActual):
            session.record_actual(sid, -1, at=T)

    def test_actual_on_scored_story_rejected(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [8, 8, 8], 8)
        session.score_story(sid, at=T)
        with pytest.raises(StoryNotInProgress):
            session.record_actual(sid, 8, at=T)

    def test_all_exact_cooperators(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [8, 8, 8], "8.0")
        scores = session.score_story(sid, at=T)
        for pid in pids:
            b = scores[pid]
            assert (b.accuracy_points, b.stag_points, b.contribution_points) == (5, 5, 1)
            assert b.total == 11
            assert session.participants[pid].cumulative_points == 11

    def test_lone_defector_breakdown(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [8, 8, 21], "8.0")
        scores = session.score_story(sid, at=T)
        assert scores[pids[0]].total == 5 + 2 + 1
        assert scores[pids[1]].total == 5 + 2 + 1
        assert scores[pids[2]].total == 0 + 3 + 1

    def test_adaptability_bonus_for_improving_revision(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 13, at=T)
        session.submit_estimate(sid, pids[1], 8, at=T)
        session.submit_estimate(sid, pids[2], 8, at=T)
        session.reveal(sid, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        session.revise_estimate(sid, pids[0], 8, "new info", at=T)
        session.record_actual(sid, "8.0", at=T)
        scores = session.score_story(sid, at=T)
        assert scores[pids[0]].adaptability_bonus == 1  # Miss -> Exact
        assert scores[pids[0]].accuracy_points == 5

    def test_no_bonus_for_sideways_revision(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 13, at=T)
        session.submit_estimate(sid, pids[1], 8, at=T)
        session.submit_estimate(sid, pids[2], 8, at=T)
        session.reveal(sid, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        session.revise_estimate(sid, pids[0], 21, "churn", at=T)
        session.record_actual(sid, "8.0", at=T)
        scores = session.score_story(sid, at=T)
        assert scores[pids[0]].adaptability_bonus == 0  # Miss -> Miss

    def test_clarification_earns_contribution(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.register_clarification(sid, pids[1], "does this include auth?", at=T)
        for pid in pids:
            session.submit_estimate(sid, pid, 8, at=T)
        session.reveal(sid, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        session.record_actual(sid, "8.0", at=T)
        scores = session.score_story(sid, at=T)
        assert scores[pids[1]].contribution_points == 2
        assert scores[pids[0]].contribution_points == 1

    def test_non_submitter_gets_nothing(self):
        session, pids = make_session()
        sid = add_open_story(session)
        session.submit_estimate(sid, pids[0], 8, at=T)
        session.submit_estimate(sid, pids[1], 8, at=T)
        session.reveal(sid, override=True, at=T)
        session.commit_final(sid, at=T)
        session.start_sprint(at=T)
        session.record_actual(sid, "8.0", at=T)
        scores = session.score_story(sid, at=T)
        assert pids[2] not in scores
        assert session.participants[pids[2]].cumulative_points == 0

    def test_scoring_twice_rejected(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [8, 8, 8], 8)
        session.score_story(sid, at=T)
        before = {p: session.participants[p].cumulative_points for p in pids}
        with pytest.raises(AlreadyScored):
            session.score_story(sid, at=T)
        assert {p: session.participants[p].cumulative_points for p in pids} == before

    def test_scoring_requires_done(self):
        session, pids = make_session()
        sid = add_open_story(session)
        with pytest.raises(StoryNotDone):
            session.score_story(sid, at=T)


class TestClarifications:
    def test_after_reveal_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        for pid in pids:
            session.submit_estimate(sid, pid, 8, at=T)
        session.reveal(sid, at=T)
        with pytest.raises(StoryNotEstimating):
            session.register_clarification(sid, pids[0], "too late?", at=T)

    def test_empty_question_rejected(self):
        session, pids = make_session()
        sid = add_open_story(session)
        with pytest.raises(InvalidInput):
            session.register_clarification(sid, pids[0], "   ", at=T)


class TestReplay:
    def test_empty_log_rejected(self):
        with pytest.raises(GapInSequence):
            Session.replay([])

    def test_two_event_log(self):
        session, _ = make_session(names=("ana",))
        replayed = Session.replay(session.events[:2])
        assert len(replayed.participants) == 1

    def test_gap_rejected(self):
        session, _ = make_session()
        with pytest.raises(GapInSequence):
            Session.replay([session.events[0], session.events[2]])

    def test_unknown_kind_rejected(self):
        session, _ = make_session()
        bogus = SessionEvent(seq=2, kind="Refactored", at=T, payload={})
        with pytest.raises(UnknownEventKind):
            Session.replay([session.events[0], bogus])

    def test_round_trip_through_jsonl(self):
        session, pids = make_session()
        sid = drive_to_done(session, pids, [5, 8, 13], "7.5")
        session.score_story(sid, at=T)
        text = events_to_jsonl(session.events)
        replayed = Session.replay(events_from_jsonl(text))
        assert replayed.snapshot_bytes() == session.snapshot_bytes()


def random_walk(seed: int, log=None):
    """Drive a session with random commands, asserting nothing ever
    lands in an undeclared state and sealed values never change."""
    rng = random.Random(seed)
    session = Session.create(session_id=f"s{seed}", at=T)
    order = list(StoryState)
    names = ["ana", "bo", "cy", "dee"]
    for name in names[: rng.randint(1, 4)]:
        session.join_participant(name, participant_id=f"p-{name}", at=T)
    pids = list(session.participants)
    sid = "st1"
    session.add_story("r", "f", "b", story_id=sid, at=T)
    sealed_snapshot = {}
    scored_totals = {}
    for _ in range(rng.randint(4, 18)):
        action = rng.choice(
            ["open", "submit", "clarify", "reveal", "commit", "sprint", "revise", "actual", "score"]
        )
        before = session.stories[sid].state
        try:
            if action == "open":
                session.open_estimation(sid, at=T)
            elif action == "submit":
                session.submit_estimate(sid, rng.choice(pids), rng.choice([3, 5, 8, 13]), at=T)
            elif action == "clarify":
                session.register_clarification(sid, rng.choice(pids), "why?", at=T)
            elif action == "reveal":
                session.reveal(sid, override=rng.random() < 0.5, at=T)
            elif action == "commit":
                session.commit_final(sid, at=T)
            elif action == "sprint":
                session.start_sprint(at=T)
            elif action == "revise":
                session.revise_estimate(sid, rng.choice(pids), rng.choice([3, 5, 8]), at=T)
            elif action == "actual":
                session.record_actual(sid, rng.choice(["4.0", "7.5", "8.0"]), at=T)
            elif action == "score":
                scores = session.score_story(sid, at=T)
                scored_totals = {p: b.total for p, b in scores.items()}
        except Exception:
            assert session.stories[sid].state == before  # failed commands mutate nothing
        after = session.stories[sid].state
        assert order.index(after) >= order.index(before)
        for pid, sealed in session.estimates.get(sid, {}).items():
            if pid in sealed_snapshot:
                assert sealed.value == sealed_snapshot[pid]
            else:
                sealed_snapshot[pid] = sealed.value
    for pid, participant in session.participants.items():
        assert participant.cumulative_points == scored_totals.get(pid, 0)
    if log is not None:
        log.append(session)
    return session


class TestStateMachineSoundness:
    def test_random_walks(self):
        for seed in range(300):
            session = random_walk(seed)
            replayed = Session.replay(events_from_jsonl(events_to_jsonl(session.events)))
            assert replayed.snapshot_bytes() == session.snapshot_bytes()
