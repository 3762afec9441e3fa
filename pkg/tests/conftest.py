import datetime as dt

import pytest

from shotzone.data import Delivery, MatchFormat
from shotzone.synth import make_default_roster, synthesize
from shotzone.taxonomy import BowlerStyle, BowlingAngle, Handedness


def make_delivery(**overrides) -> Delivery:
    base = dict(
        match_id="M1",
        date=dt.date(2021, 1, 1),
        format=MatchFormat.ODI,
        innings_index=1,
        over_number=0,
        ball_in_over=1,
        batsman_id="batA",
        non_striker_id="batB",
        bowler_id="bowlA",
        batsman_hand=Handedness.RIGHT,
        bowler_hand=Handedness.RIGHT,
        bowler_style=BowlerStyle.FAST,
        bowling_angle=BowlingAngle.OVER,
        speed_kmh=140.0,
        line_offset_m=0.15,
        bounce_distance_m=7.0,
        swing_deg=1.0,
        turn_deg=0.0,
        bounce_height_m=0.7,
        release_height_m=2.2,
        shot_label="Drive",
        shot_angle_deg=20.0,
        runs=1,
        wicket=False,
        team_runs_before=0,
        team_wickets_before=0,
    )
    base.update(overrides)
    return Delivery(**base)


@pytest.fixture(scope="session")
def small_corpus():
    roster = make_default_roster(n_batsmen=6, n_bowlers=4, seed=3)
    return synthesize(roster, 2400, seed=5)


@pytest.fixture(scope="session")
def small_roster():
    return make_default_roster(n_batsmen=6, n_bowlers=4, seed=3)
