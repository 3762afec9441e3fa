"""The 39-entry per-ball context vector and the innings state machine behind it.

All spatial quantities are mirrored into batsman-canonical coordinates
(striker always right-handed) before featurization; the striker-handedness
entry is therefore identically zero and is retained only to keep the
documented schema stable. Standardization happens inside the models, not here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import BALLS_PER_INNINGS, Delivery, MatchFormat
from .taxonomy import BowlerStyle, BowlingAngle, Handedness

FEATURE_LEDGER_VERSION = "1"

# fielding restrictions: opening powerplay overs per format
POWERPLAY_OVERS = {MatchFormat.ODI: 10, MatchFormat.T20: 6}

NEW_BATSMAN_BALLS = 10

CONTEXT_FEATURES = (
    # delivery trajectory (14)
    ("line_offset_m", "m", "[-1.6, 1.6] canonical, off side positive"),
    ("bounce_distance_m", "m", "[0, 20]; 0 for a full toss"),
    ("speed_kmh", "km/h", "[40, 165]"),
    ("swing_deg", "deg", "lateral in-flight deviation, canonical sign"),
    ("turn_deg", "deg", "off-pitch deviation, canonical sign"),
    ("bounce_height_m", "m", ">= 0"),
    ("release_height_m", "m", "[1, 2.6]"),
    ("bowler_is_left_handed", "flag", "canonical frame (flipped for left-hand strikers)"),
    ("style_fast", "flag", "one-hot"),
    ("style_fast_medium", "flag", "one-hot"),
    ("style_finger_spin", "flag", "one-hot"),
    ("style_wrist_spin", "flag", "one-hot"),
    ("around_the_wicket", "flag", "1 = around"),
    ("is_full_toss", "flag", "1 = no bounce"),
    # match state (17)
    ("format_is_t20", "flag", "1 = T20"),
    ("innings_index", "count", "{1, 2}"),
    ("balls_bowled", "count", "legal balls before this one"),
    ("balls_remaining", "count", "format allocation minus balls_bowled"),
    ("over_number", "count", "0-based"),
    ("ball_in_over", "count", "[1, 6]"),
    ("team_runs", "runs", "before this ball"),
    ("team_wickets_lost", "count", "[0, 9]"),
    ("current_run_rate", "runs/over", "6 * runs / balls, 0 at innings start"),
    ("required_run_rate", "runs/over", "0 unless chasing"),
    ("chasing_flag", "flag", "1 = second innings"),
    ("fielding_restriction_flag", "flag", "1 during the opening powerplay"),
    ("runs_off_previous_ball", "runs", "[0, 6], 0 at innings start"),
    ("wicket_previous_ball", "flag", ""),
    ("partnership_runs", "runs", "since the last wicket"),
    ("partnership_balls", "count", "since the last wicket"),
    ("striker_batting_position", "count", "order of arrival at the crease, 1-based"),
    # striker state (8)
    ("batsman_runs", "runs", "this innings"),
    ("batsman_balls_faced", "count", "this innings"),
    ("batsman_innings_strike_rate", "runs/100 balls", "0 before the first ball"),
    ("batsman_is_left_handed", "flag", "always 0 in the canonical frame"),
    ("consecutive_dot_balls", "count", "striker's current dot streak"),
    ("fours_this_innings", "count", "striker's"),
    ("sixes_this_innings", "count", "striker's"),
    ("new_batsman_flag", "flag", f"1 while balls faced < {NEW_BATSMAN_BALLS}"),
)

N_CONTEXT = len(CONTEXT_FEATURES)  # 39

CONTEXT_INDEX = {name: i for i, (name, _, _) in enumerate(CONTEXT_FEATURES)}

_STYLE_SLOT = {
    BowlerStyle.FAST: CONTEXT_INDEX["style_fast"],
    BowlerStyle.FAST_MEDIUM: CONTEXT_INDEX["style_fast_medium"],
    BowlerStyle.FINGER_SPIN: CONTEXT_INDEX["style_finger_spin"],
    BowlerStyle.WRIST_SPIN: CONTEXT_INDEX["style_wrist_spin"],
}


@dataclass
class _BatsmanInnings:
    runs: int = 0
    balls: int = 0
    fours: int = 0
    sixes: int = 0
    dot_streak: int = 0


@dataclass
class InningsTracker:
    """Streaming innings state; feed deliveries in order after reading features."""

    target: int | None = None  # first-innings total + 1 when chasing
    batsmen: dict[str, _BatsmanInnings] = field(default_factory=dict)
    positions: dict[str, int] = field(default_factory=dict)
    partnership_runs: int = 0
    partnership_balls: int = 0
    prev_runs: int = 0
    prev_wicket: bool = False

    def _position(self, player_id: str) -> int:
        if player_id not in self.positions:
            self.positions[player_id] = len(self.positions) + 1
        return self.positions[player_id]

    def _innings(self, player_id: str) -> _BatsmanInnings:
        return self.batsmen.setdefault(player_id, _BatsmanInnings())

    def context_vector(self, d: Delivery) -> np.ndarray:
        """The 39 features describing the state *before* this ball is bowled."""
        left = d.batsman_hand is Handedness.LEFT
        sign = -1.0 if left else 1.0
        position = self._position(d.batsman_id)
        self._position(d.non_striker_id)
        striker = self._innings(d.batsman_id)
        self._innings(d.non_striker_id)

        balls_bowled = d.balls_bowled_before
        allocation = BALLS_PER_INNINGS[d.format]
        runs_before = d.team_runs_before
        crr = 6.0 * runs_before / balls_bowled if balls_bowled > 0 else 0.0
        if d.innings_index == 2 and self.target is not None:
            remaining = max(allocation - balls_bowled, 1)
            rrr = max(0.0, 6.0 * (self.target - runs_before) / remaining)
        else:
            rrr = 0.0

        v = np.zeros(N_CONTEXT, dtype=np.float64)
        v[0] = sign * d.line_offset_m
        v[1] = 0.0 if d.bounce_distance_m is None else d.bounce_distance_m
        v[2] = d.speed_kmh
        v[3] = sign * d.swing_deg
        v[4] = sign * d.turn_deg
        v[5] = d.bounce_height_m
        v[6] = d.release_height_m
        v[7] = 1.0 if d.bowler_hand is not d.batsman_hand else 0.0
        v[_STYLE_SLOT[d.bowler_style]] = 1.0
        v[12] = 1.0 if d.bowling_angle is BowlingAngle.AROUND else 0.0
        v[13] = 1.0 if d.bounce_distance_m is None else 0.0
        v[14] = 1.0 if d.format is MatchFormat.T20 else 0.0
        v[15] = float(d.innings_index)
        v[16] = float(balls_bowled)
        v[17] = float(max(allocation - balls_bowled, 0))
        v[18] = float(d.over_number)
        v[19] = float(d.ball_in_over)
        v[20] = float(runs_before)
        v[21] = float(d.team_wickets_before)
        v[22] = crr
        v[23] = rrr
        v[24] = 1.0 if d.innings_index == 2 else 0.0
        v[25] = 1.0 if d.over_number < POWERPLAY_OVERS[d.format] else 0.0
        v[26] = float(self.prev_runs)
        v[27] = 1.0 if self.prev_wicket else 0.0
        v[28] = float(self.partnership_runs)
        v[29] = float(self.partnership_balls)
        v[30] = float(position)
        v[31] = float(striker.runs)
        v[32] = float(striker.balls)
        v[33] = 100.0 * striker.runs / striker.balls if striker.balls > 0 else 0.0
        # v[34] batsman_is_left_handed: canonical frame, always 0
        v[35] = float(striker.dot_streak)
        v[36] = float(striker.fours)
        v[37] = float(striker.sixes)
        v[38] = 1.0 if striker.balls < NEW_BATSMAN_BALLS else 0.0
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite context feature for ball {d.ball_key}")
        return v

    def update(self, d: Delivery) -> None:
        striker = self._innings(d.batsman_id)
        striker.balls += 1
        striker.runs += d.runs
        if d.runs == 4:
            striker.fours += 1
        elif d.runs >= 6:
            striker.sixes += 1
        striker.dot_streak = 0 if d.runs > 0 else striker.dot_streak + 1
        self.partnership_balls += 1
        self.partnership_runs += d.runs
        if d.wicket:
            self.partnership_runs = 0
            self.partnership_balls = 0
        self.prev_runs = d.runs
        self.prev_wicket = d.wicket


def context_vector(d: Delivery, tracker: InningsTracker) -> np.ndarray:
    """Build the feature row for one ball given its innings tracker state."""
    return tracker.context_vector(d)


def context_feature_ledger() -> list[dict]:
    return [
        {"index": i, "name": name, "unit": unit, "notes": notes}
        for i, (name, unit, notes) in enumerate(CONTEXT_FEATURES)
    ]
