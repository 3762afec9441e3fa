"""Rolling player profiles and the 46-entry personalized feature vector.

Each player carries two independent windows over their last 500 involvements,
one as striker and one as bowler. Window statistics stream in O(1) per ball
(integer counters plus float sums) and must always equal a from-scratch
recompute over the buffer contents; tests enforce that equivalence.

Personal values blend with global (train-split) means by
``w = min(n_seen, 500) / 500``; a statistic whose within-window denominator
is zero falls back to the global mean outright.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .data import Delivery
from .errors import RoleMismatch
from .taxonomy import (
    COARSE_LENGTHS,
    Handedness,
    PACE_STYLES,
    SECTORS,
    aggression_label,
    canonical_offset,
    coarse_length_index,
    mirror_angle,
    normalize_angle,
    sector_of,
)

WINDOW = 500

N_BANDS = len(COARSE_LENGTHS)  # 4
N_SECTORS = len(SECTORS)  # 9

_SECTOR_SNAKE = (
    "mid_off", "extra_cover", "cover", "point", "third_man",
    "fine_leg", "square_leg", "mid_wicket", "mid_on",
)

BATSMAN_FEATURES = tuple(
    [f"bat_{band.value}_{stat}"
     for band in COARSE_LENGTHS
     for stat in ("attack_share", "runs_per_ball", "dismissal_rate")]
    + [f"bat_dir_share_{s}" for s in _SECTOR_SNAKE]
    + ["bat_strike_rate", "bat_attack_share", "bat_defensive_share",
       "bat_boundary_rate", "bat_dot_rate"]
    + ["bat_attack_share_vs_pace", "bat_attack_share_vs_spin"]
)

BOWLER_FEATURES = tuple(
    [f"bowl_{band.value}_{stat}"
     for band in COARSE_LENGTHS
     for stat in ("runs_per_ball", "dot_share", "boundary_share")]
    + ["bowl_economy", "bowl_dot_rate", "bowl_boundary_rate", "bowl_wicket_rate"]
    + ["bowl_line_consistency", "bowl_length_consistency"]
)

AUX_FEATURES = BATSMAN_FEATURES + BOWLER_FEATURES
N_BATSMAN = len(BATSMAN_FEATURES)  # 28
N_BOWLER = len(BOWLER_FEATURES)  # 18
N_AUX = len(AUX_FEATURES)  # 46

# safety-net priors for statistics undefined even globally
_DEFAULTS = {name: 0.0 for name in AUX_FEATURES}
for _s in _SECTOR_SNAKE:
    _DEFAULTS[f"bat_dir_share_{_s}"] = 1.0 / N_SECTORS


def blend_weight(n_seen: int) -> float:
    """Personal-vs-global weight: 0 with no history, 1 from 500 involvements on."""
    if n_seen < 0:
        raise ValueError("n_seen must be >= 0")
    return min(n_seen, WINDOW) / WINDOW


def blend(personal: float, global_mean: float, n_seen: int) -> float:
    w = blend_weight(n_seen)
    return w * personal + (1.0 - w) * global_mean


def _ratio(num, den):
    return None if den == 0 else num / den


def _spread(total, total_sq, n):
    if n == 0:
        return None
    mean = total / n
    return math.sqrt(max(total_sq / n - mean * mean, 0.0))


# per-ball batting record:
# (band, aggression, sector, runs, wicket, is_pace, labeled)
# aggression/sector are -1 when absent; labeled means a shot decision was recorded
class _BattingStats:
    __slots__ = ("n", "runs", "boundaries", "dots", "labeled", "attack", "defensive",
                 "band_n", "band_labeled", "band_attack", "band_runs", "band_wickets",
                 "directional", "sector_n", "pace_labeled", "pace_attack",
                 "spin_labeled", "spin_attack")

    def __init__(self):
        self.n = 0
        self.runs = 0
        self.boundaries = 0
        self.dots = 0
        self.labeled = 0
        self.attack = 0
        self.defensive = 0
        self.band_n = [0] * N_BANDS
        self.band_labeled = [0] * N_BANDS
        self.band_attack = [0] * N_BANDS
        self.band_runs = [0] * N_BANDS
        self.band_wickets = [0] * N_BANDS
        self.directional = 0
        self.sector_n = [0] * N_SECTORS
        self.pace_labeled = 0
        self.pace_attack = 0
        self.spin_labeled = 0
        self.spin_attack = 0

    def apply(self, rec, sign: int) -> None:
        band, agg, sector, runs, wicket, is_pace, labeled = rec
        self.n += sign
        self.runs += sign * runs
        if runs == 4 or runs >= 6:
            self.boundaries += sign
        if runs == 0:
            self.dots += sign
        self.band_n[band] += sign
        self.band_runs[band] += sign * runs
        if wicket:
            self.band_wickets[band] += sign
        if labeled:
            self.labeled += sign
            self.band_labeled[band] += sign
            if is_pace:
                self.pace_labeled += sign
                if agg == 2:
                    self.pace_attack += sign
            else:
                self.spin_labeled += sign
                if agg == 2:
                    self.spin_attack += sign
            if agg == 2:
                self.attack += sign
                self.band_attack[band] += sign
            elif agg == 0:
                self.defensive += sign
            if agg >= 1 and sector >= 0:
                self.directional += sign
                self.sector_n[sector] += sign

    def values(self) -> list:
        out = []
        for b in range(N_BANDS):
            out.append(_ratio(self.band_attack[b], self.band_labeled[b]))
            out.append(_ratio(self.band_runs[b], self.band_n[b]))
            out.append(_ratio(self.band_wickets[b], self.band_n[b]))
        for s in range(N_SECTORS):
            out.append(_ratio(self.sector_n[s], self.directional))
        sr = _ratio(self.runs, self.n)
        out.append(None if sr is None else 100.0 * sr)
        out.append(_ratio(self.attack, self.labeled))
        out.append(_ratio(self.defensive, self.labeled))
        out.append(_ratio(self.boundaries, self.n))
        out.append(_ratio(self.dots, self.n))
        out.append(_ratio(self.pace_attack, self.pace_labeled))
        out.append(_ratio(self.spin_attack, self.spin_labeled))
        return out


# per-ball bowling record: (band, runs, wicket, canonical_line, bounce_distance)
class _BowlingStats:
    __slots__ = ("n", "runs", "dots", "boundaries", "wickets",
                 "band_n", "band_runs", "band_dots", "band_boundaries",
                 "line_sum", "line_sq", "len_sum", "len_sq")

    def __init__(self):
        self.n = 0
        self.runs = 0
        self.dots = 0
        self.boundaries = 0
        self.wickets = 0
        self.band_n = [0] * N_BANDS
        self.band_runs = [0] * N_BANDS
        self.band_dots = [0] * N_BANDS
        self.band_boundaries = [0] * N_BANDS
        self.line_sum = 0.0
        self.line_sq = 0.0
        self.len_sum = 0.0
        self.len_sq = 0.0

    def apply(self, rec, sign: int) -> None:
        band, runs, wicket, line, dist = rec
        self.n += sign
        self.runs += sign * runs
        boundary = runs == 4 or runs >= 6
        if runs == 0:
            self.dots += sign
        if boundary:
            self.boundaries += sign
        if wicket:
            self.wickets += sign
        self.band_n[band] += sign
        self.band_runs[band] += sign * runs
        if runs == 0:
            self.band_dots[band] += sign
        if boundary:
            self.band_boundaries[band] += sign
        self.line_sum += sign * line
        self.line_sq += sign * (line * line)
        self.len_sum += sign * dist
        self.len_sq += sign * (dist * dist)

    def values(self) -> list:
        out = []
        for b in range(N_BANDS):
            out.append(_ratio(self.band_runs[b], self.band_n[b]))
            out.append(_ratio(self.band_dots[b], self.band_n[b]))
            out.append(_ratio(self.band_boundaries[b], self.band_n[b]))
        rpb = _ratio(self.runs, self.n)
        out.append(None if rpb is None else 6.0 * rpb)
        out.append(_ratio(self.dots, self.n))
        out.append(_ratio(self.boundaries, self.n))
        out.append(_ratio(self.wickets, self.n))
        out.append(_spread(self.line_sum, self.line_sq, self.n))
        out.append(_spread(self.len_sum, self.len_sq, self.n))
        return out

    # the running float sums drift from a fresh fold at the 1e-16 level;
    # persistence restores them exactly so save/load is state-faithful
    def float_state(self) -> list[float]:
        return [self.line_sum, self.line_sq, self.len_sum, self.len_sq]

    def set_float_state(self, state: list[float]) -> None:
        self.line_sum, self.line_sq, self.len_sum, self.len_sq = state


class _RoleWindow:
    """Ring buffer of per-ball records with streaming aggregates."""

    def __init__(self, stats_cls, window: int | None = WINDOW):
        self.buffer = deque()
        self.window = window
        self.stats = stats_cls()
        self.n_seen = 0  # lifetime
        self.n_matches = 0
        self._last_match = None

    def push(self, rec, match_id: str) -> None:
        self.buffer.append(rec)
        self.stats.apply(rec, +1)
        if self.window is not None and len(self.buffer) > self.window:
            evicted = self.buffer.popleft()
            self.stats.apply(evicted, -1)
        self.n_seen += 1
        if match_id != self._last_match:
            self.n_matches += 1
            self._last_match = match_id

    def values(self) -> list:
        return self.stats.values()

    def recomputed_values(self) -> list:
        """From-scratch fold over the buffer; the streaming oracle."""
        fresh = type(self.stats)()
        for rec in self.buffer:
            fresh.apply(rec, +1)
        return fresh.values()


def _batting_record(d: Delivery):
    band = coarse_length_index(d.bounce_distance_m)
    if d.shot_label is None:
        return (band, -1, -1, d.runs, d.wicket, d.bowler_style in PACE_STYLES, False)
    agg = aggression_label(d.shot_label)
    sector = -1
    if agg >= 1 and d.shot_angle_deg is not None:
        theta = normalize_angle(d.shot_angle_deg)
        if d.batsman_hand is Handedness.LEFT:
            theta = mirror_angle(theta)
        sector = SECTORS.index(sector_of(theta))
    return (band, agg, sector, d.runs, d.wicket, d.bowler_style in PACE_STYLES, True)


def _bowling_record(d: Delivery):
    band = coarse_length_index(d.bounce_distance_m)
    line = canonical_offset(d.line_offset_m, d.batsman_hand)
    dist = 0.0 if d.bounce_distance_m is None else d.bounce_distance_m
    return (band, d.runs, d.wicket, line, dist)


class PlayerProfile:
    """Streaming window statistics for one player, batting and bowling kept apart."""

    def __init__(self, player_id: str, window: int | None = WINDOW):
        self.player_id = player_id
        self.batting = _RoleWindow(_BattingStats, window)
        self.bowling = _RoleWindow(_BowlingStats, window)

    def update(self, d: Delivery) -> None:
        involved = False
        if d.batsman_id == self.player_id:
            self.batting.push(_batting_record(d), d.match_id)
            involved = True
        if d.bowler_id == self.player_id:
            self.bowling.push(_bowling_record(d), d.match_id)
            involved = True
        if not involved:
            raise RoleMismatch(
                f"player {self.player_id} is neither striker nor bowler on {d.ball_key}")

    def batting_values(self) -> list:
        return self.batting.values()

    def bowling_values(self) -> list:
        return self.bowling.values()

    def statistics(self) -> dict[str, float | None]:
        """Current personal (unblended) values keyed by ledger name."""
        out = dict(zip(BATSMAN_FEATURES, self.batting.values()))
        out.update(zip(BOWLER_FEATURES, self.bowling.values()))
        return out


@dataclass
class AuxGlobals:
    """Train-split pooled means for every personalized entry."""

    values: np.ndarray  # (46,)

    @classmethod
    def from_pooled(cls, batting: _BattingStats, bowling: _BowlingStats) -> "AuxGlobals":
        raw = batting.values() + bowling.values()
        values = np.array(
            [(_DEFAULTS[name] if v is None else float(v))
             for name, v in zip(AUX_FEATURES, raw)],
            dtype=np.float64)
        return cls(values=values)

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(AUX_FEATURES, self.values)}


def compute_aux_globals(deliveries) -> AuxGlobals:
    """Pool every delivery (all strikers, all bowlers) into one global profile."""
    bat = _BattingStats()
    bowl = _BowlingStats()
    for d in deliveries:
        bat.apply(_batting_record(d), +1)
        bowl.apply(_bowling_record(d), +1)
    return AuxGlobals.from_pooled(bat, bowl)


def aux_vector(batsman: PlayerProfile | None, bowler: PlayerProfile | None,
               globals_: AuxGlobals) -> np.ndarray:
    """Blend both players' personal statistics with the global means.

    Passing None for a player (unknown in the profile store) uses the global
    means outright, i.e. a blend weight of zero.
    """
    out = globals_.values.copy()
    if batsman is not None:
        w = blend_weight(batsman.batting.n_seen)
        if w > 0.0:
            for i, personal in enumerate(batsman.batting_values()):
                if personal is not None:
                    out[i] = w * personal + (1.0 - w) * out[i]
    if bowler is not None:
        w = blend_weight(bowler.bowling.n_seen)
        if w > 0.0:
            for i, personal in enumerate(bowler.bowling_values()):
                if personal is not None:
                    j = N_BATSMAN + i
                    out[j] = w * personal + (1.0 - w) * out[j]
    return out


def aux_feature_ledger() -> list[dict]:
    entries = []
    for i, name in enumerate(AUX_FEATURES):
        entries.append({
            "index": i,
            "name": name,
            "role": "batsman" if i < N_BATSMAN else "bowler",
            "notes": "blend of the player's last-500-ball value with the global mean",
        })
    return entries


def export_feature_vectors(profiles: dict[str, PlayerProfile], role: str,
                           min_matches: int = 10) -> tuple[list[str], list[list]]:
    """Most recent personal (unblended) statistics, one row per qualifying player.

    Returns (header, rows); undefined entries are None. Suitable input for any
    external embedding tool.
    """
    if role == "batsman":
        names, pick = BATSMAN_FEATURES, lambda p: (p.batting, p.batting_values())
    elif role == "bowler":
        names, pick = BOWLER_FEATURES, lambda p: (p.bowling, p.bowling_values())
    else:
        raise ValueError("role must be 'batsman' or 'bowler'")
    header = ["player_id", *names]
    rows = []
    for pid in sorted(profiles):
        window, values = pick(profiles[pid])
        if window.n_matches >= min_matches:
            rows.append([pid, *values])
    return header, rows
