import numpy as np

from shotzone.context import CONTEXT_INDEX, InningsTracker, N_CONTEXT, context_feature_ledger
from shotzone.data import iter_innings, mirror_delivery
from shotzone.taxonomy import Handedness

from conftest import make_delivery


def ix(name):
    return CONTEXT_INDEX[name]


class TestLedger:
    def test_39_entries(self):
        assert N_CONTEXT == 39
        ledger = context_feature_ledger()
        assert len(ledger) == 39
        assert len({e["name"] for e in ledger}) == 39


class TestFirstBall:
    def test_initial_state(self):
        tracker = InningsTracker()
        v = tracker.context_vector(make_delivery())
        assert v[ix("balls_bowled")] == 0
        assert v[ix("team_wickets_lost")] == 0
        assert v[ix("batsman_balls_faced")] == 0
        assert v[ix("current_run_rate")] == 0
        assert v[ix("new_batsman_flag")] == 1
        assert v[ix("fielding_restriction_flag")] == 1

    def test_chase_context(self):
        tracker = InningsTracker(target=251)
        d = make_delivery(innings_index=2, over_number=10, ball_in_over=1,
                          team_runs_before=60)
        v = tracker.context_vector(d)
        assert v[ix("chasing_flag")] == 1
        assert v[ix("required_run_rate")] > 0
        # 191 needed from 240 balls
        assert v[ix("required_run_rate")] == 6.0 * 191 / 240


class TestStateMachine:
    def test_striker_accumulation(self):
        tracker = InningsTracker()
        d1 = make_delivery(ball_in_over=1, runs=4)
        tracker.context_vector(d1)
        tracker.update(d1)
        d2 = make_delivery(ball_in_over=2, runs=0, team_runs_before=4)
        v = tracker.context_vector(d2)
        assert v[ix("batsman_runs")] == 4
        assert v[ix("batsman_balls_faced")] == 1
        assert v[ix("fours_this_innings")] == 1
        assert v[ix("runs_off_previous_ball")] == 4
        assert v[ix("batsman_innings_strike_rate")] == 400.0

    def test_dot_streak_and_partnership(self):
        tracker = InningsTracker()
        for b in range(1, 4):
            d = make_delivery(ball_in_over=b, runs=0)
            tracker.context_vector(d)
            tracker.update(d)
        v = tracker.context_vector(make_delivery(ball_in_over=4))
        assert v[ix("consecutive_dot_balls")] == 3
        assert v[ix("partnership_balls")] == 3
        assert v[ix("partnership_runs")] == 0

    def test_wicket_resets_partnership(self):
        tracker = InningsTracker()
        d1 = make_delivery(ball_in_over=1, runs=2)
        tracker.context_vector(d1)
        tracker.update(d1)
        d2 = make_delivery(ball_in_over=2, wicket=True, runs=0, team_runs_before=2)
        tracker.context_vector(d2)
        tracker.update(d2)
        v = tracker.context_vector(
            make_delivery(ball_in_over=3, batsman_id="batC", team_runs_before=2,
                          team_wickets_before=1))
        assert v[ix("partnership_runs")] == 0
        assert v[ix("partnership_balls")] == 0
        assert v[ix("wicket_previous_ball")] == 1
        assert v[ix("striker_batting_position")] == 3

    def test_canonicalization_for_left_hander(self):
        tracker = InningsTracker()
        d = make_delivery(batsman_hand=Handedness.LEFT, line_offset_m=-0.3,
                          swing_deg=-1.2, turn_deg=0.4, bowler_hand=Handedness.LEFT)
        v = tracker.context_vector(d)
        assert v[ix("line_offset_m")] == 0.3
        assert v[ix("swing_deg")] == 1.2
        assert v[ix("turn_deg")] == -0.4
        # left-arm bowler to left-hand bat mirrors to a right-arm bowler
        assert v[ix("bowler_is_left_handed")] == 0.0
        assert v[ix("batsman_is_left_handed")] == 0.0

    def test_mirror_twin_equality(self, small_corpus):
        for (_, _), balls in list(iter_innings(small_corpus))[:3]:
            t1, t2 = InningsTracker(), InningsTracker()
            for d in balls:
                v1 = t1.context_vector(d)
                v2 = t2.context_vector(mirror_delivery(d))
                assert np.array_equal(v1, v2)
                t1.update(d)
                t2.update(mirror_delivery(d))


class TestRangeAudit:
    def test_full_corpus_finite_and_sane(self, small_corpus):
        for (_, _), balls in iter_innings(small_corpus):
            tracker = InningsTracker()
            for d in balls:
                v = tracker.context_vector(d)
                assert np.all(np.isfinite(v))
                assert abs(v[ix("line_offset_m")]) <= 1.6
                assert 0 <= v[ix("bounce_distance_m")] <= 20
                assert 40 <= v[ix("speed_kmh")] <= 165
                assert 0 <= v[ix("team_wickets_lost")] <= 9
                assert v[ix("balls_remaining")] >= 0
                assert v[ix("ball_in_over")] in (1, 2, 3, 4, 5, 6)
                tracker.update(d)
