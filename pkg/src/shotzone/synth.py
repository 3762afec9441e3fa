"""Synthetic ball-by-ball corpus generator with planted player tendencies.

Each batsman archetype plants a recoverable signal: favored hitting sectors,
a baseline aggression propensity with an innings ramp, and sensitivities to
delivery length, speed and bowler style, plus a short-horizon momentum effect
(recent boundaries raise aggression) that only a sequence model can see.
Bowler traits drive the delivery generator. Everything is deterministic for
a given (roster, n, seed).
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Corpus, Delivery, MatchFormat, OVERS_PER_INNINGS, _build_players
from .errors import ConfigError
from .taxonomy import (
    ATTACKING_SHOTS,
    DEFENSIVE_SHOTS,
    WORKING_SHOTS,
    BowlerStyle,
    BowlingAngle,
    Handedness,
    LengthBand,
    SECTOR_WIDTH_DEG,
    SECTORS,
    length_band,
    mirror_angle,
)

N_SECTORS = len(SECTORS)

# share of non-attacking intent that is fully defensive (vs run-rotation)
DEFENSIVE_SPLIT = 0.5

EXTRA_RATE = 0.025  # wides/no-balls: rows with no shot decision

RUN_DISTRIBUTIONS = {
    0: ((0,), (1.0,)),
    1: ((0, 1, 2, 3), (0.35, 0.50, 0.12, 0.03)),
    2: ((0, 1, 2, 4, 6), (0.28, 0.18, 0.12, 0.26, 0.16)),
}

WICKET_RATES = {0: 0.005, 1: 0.015, 2: 0.035}

SHOTS_BY_LEVEL = {0: DEFENSIVE_SHOTS, 1: WORKING_SHOTS, 2: ATTACKING_SHOTS}

# flat bounce-distance sampling ranges per band; FullToss draws no distance
_BAND_RANGES = {
    LengthBand.YORKER: (0.2, 2.0),
    LengthBand.FULL: (2.0, 6.0),
    LengthBand.GOOD_LENGTH: (6.0, 8.0),
    LengthBand.BACK_OF_A_LENGTH: (8.0, 10.0),
    LengthBand.SHORT: (10.0, 14.0),
}


@dataclass
class BatsmanArchetype:
    player_id: str
    hand: Handedness
    sector_weights: list[float]  # 9 entries, normalized
    base_aggression: float
    aggression_ramp: float  # added linearly over the first 60 balls faced
    length_sensitivity: dict[LengthBand, float]
    speed_sensitivity: float  # per km/h above 120
    style_sensitivity: dict[BowlerStyle, float]
    defensive_floor: float
    momentum_boost: float  # applied when >=2 boundaries in the last 5 balls

    def __post_init__(self):
        total = float(sum(self.sector_weights))
        if total <= 0 or any(w < 0 for w in self.sector_weights):
            raise ConfigError(f"{self.player_id}: sector weights must be non-negative, nonzero")
        if abs(total - 1.0) > 1e-12:  # keep already-normalized weights bit-stable
            self.sector_weights = [w / total for w in self.sector_weights]
        if not 0.0 <= self.base_aggression <= 1.0:
            raise ConfigError(f"{self.player_id}: base_aggression outside [0, 1]")
        if not 0.0 <= self.defensive_floor <= 1.0:
            raise ConfigError(f"{self.player_id}: defensive_floor outside [0, 1]")


@dataclass
class BowlerTraits:
    player_id: str
    hand: Handedness
    style: BowlerStyle
    speed_mean: float
    speed_sd: float
    length_mix: dict[LengthBand, float]  # includes FullToss
    line_mean: float  # canonical meters off middle stump (striker's off side +)
    line_sd: float
    around_rate: float


@dataclass
class Roster:
    batsmen: list[BatsmanArchetype]
    bowlers: list[BowlerTraits]
    noise: float = 0.15  # sector-choice mixing toward uniform
    signal: str = "High"  # High keeps archetypes as-is; Low shrinks them together
    format_mix: dict[MatchFormat, float] = field(
        default_factory=lambda: {MatchFormat.ODI: 1.0})

    def batsman(self, player_id: str) -> BatsmanArchetype:
        for b in self.batsmen:
            if b.player_id == player_id:
                return b
        raise ConfigError(f"no batsman {player_id!r} in roster")


SIGNAL_FACTORS = {"High": 1.0, "Low": 0.15}


def effective_archetypes(roster: Roster) -> list[BatsmanArchetype]:
    """Archetypes after signal shrinkage toward the pooled roster mean.

    Low signal collapses player differences so that personalization has
    little to recover; High leaves the planted tendencies intact.
    """
    factor = SIGNAL_FACTORS.get(roster.signal)
    if factor is None:
        raise ConfigError(f"signal must be one of {sorted(SIGNAL_FACTORS)}")
    n = len(roster.batsmen)
    mean_weights = [sum(b.sector_weights[s] for b in roster.batsmen) / n
                    for s in range(N_SECTORS)]
    mean_base = sum(b.base_aggression for b in roster.batsmen) / n
    mean_ramp = sum(b.aggression_ramp for b in roster.batsmen) / n
    mean_floor = sum(b.defensive_floor for b in roster.batsmen) / n
    mean_momentum = sum(b.momentum_boost for b in roster.batsmen) / n
    mean_speed = sum(b.speed_sensitivity for b in roster.batsmen) / n
    mean_len = {band: sum(b.length_sensitivity[band] for b in roster.batsmen) / n
                for band in LengthBand}
    mean_style = {st: sum(b.style_sensitivity[st] for b in roster.batsmen) / n
                  for st in BowlerStyle}

    def blend_scalar(own, mean):
        return mean + factor * (own - mean)

    out = []
    for b in roster.batsmen:
        out.append(BatsmanArchetype(
            player_id=b.player_id,
            hand=b.hand,
            sector_weights=[blend_scalar(b.sector_weights[s], mean_weights[s])
                            for s in range(N_SECTORS)],
            base_aggression=blend_scalar(b.base_aggression, mean_base),
            aggression_ramp=blend_scalar(b.aggression_ramp, mean_ramp),
            length_sensitivity={band: blend_scalar(b.length_sensitivity[band], mean_len[band])
                                for band in LengthBand},
            speed_sensitivity=blend_scalar(b.speed_sensitivity, mean_speed),
            style_sensitivity={st: blend_scalar(b.style_sensitivity[st], mean_style[st])
                               for st in BowlerStyle},
            defensive_floor=blend_scalar(b.defensive_floor, mean_floor),
            momentum_boost=blend_scalar(b.momentum_boost, mean_momentum),
        ))
    return out


def expected_sector_shares(roster: Roster, batsman_id: str) -> np.ndarray:
    """Closed-form sector distribution of a batsman's directional shots."""
    arch = next(b for b in effective_archetypes(roster) if b.player_id == batsman_id)
    w = np.asarray(arch.sector_weights, dtype=float)
    return (1.0 - roster.noise) * w + roster.noise / N_SECTORS


def aggression_propensity(arch: BatsmanArchetype, *, balls_faced: int,
                          band: LengthBand, speed_kmh: float,
                          style: BowlerStyle, hot_streak: bool) -> float:
    """Probability-scale attacking intent for one ball, clipped to (0.02, 0.98)."""
    q = (arch.base_aggression
         + arch.aggression_ramp * min(balls_faced, 60) / 60.0
         + arch.length_sensitivity[band]
         + arch.speed_sensitivity * (speed_kmh - 120.0)
         + arch.style_sensitivity[style]
         + (arch.momentum_boost if hot_streak else 0.0))
    return min(max(q, 0.02), 0.98)


def intent_probabilities(arch: BatsmanArchetype, q: float) -> tuple[float, float, float]:
    """(defensive, rotate, attack) masses for a propensity value."""
    floor = arch.defensive_floor
    p_def = floor + (1.0 - floor) * (1.0 - q) * DEFENSIVE_SPLIT
    p_rot = (1.0 - floor) * (1.0 - q) * (1.0 - DEFENSIVE_SPLIT)
    p_att = (1.0 - floor) * q
    return p_def, p_rot, p_att


# --- roster construction ---------------------------------------------------------

_GLOBAL_LENGTH_SENS = {
    LengthBand.FULL_TOSS: 0.28,
    LengthBand.YORKER: -0.22,
    LengthBand.FULL: 0.0,
    LengthBand.GOOD_LENGTH: -0.06,
    LengthBand.BACK_OF_A_LENGTH: 0.08,
    LengthBand.SHORT: 0.18,
}

_GLOBAL_STYLE_SENS = {
    BowlerStyle.FAST: 0.0,
    BowlerStyle.FAST_MEDIUM: 0.02,
    BowlerStyle.FINGER_SPIN: 0.06,
    BowlerStyle.WRIST_SPIN: 0.04,
}

_LENGTH_MIX_BY_STYLE = {
    BowlerStyle.FAST: {
        LengthBand.FULL_TOSS: 0.04, LengthBand.YORKER: 0.12, LengthBand.FULL: 0.24,
        LengthBand.GOOD_LENGTH: 0.34, LengthBand.BACK_OF_A_LENGTH: 0.16,
        LengthBand.SHORT: 0.10,
    },
    BowlerStyle.FAST_MEDIUM: {
        LengthBand.FULL_TOSS: 0.05, LengthBand.YORKER: 0.10, LengthBand.FULL: 0.28,
        LengthBand.GOOD_LENGTH: 0.35, LengthBand.BACK_OF_A_LENGTH: 0.14,
        LengthBand.SHORT: 0.08,
    },
    BowlerStyle.FINGER_SPIN: {
        LengthBand.FULL_TOSS: 0.05, LengthBand.YORKER: 0.05, LengthBand.FULL: 0.38,
        LengthBand.GOOD_LENGTH: 0.38, LengthBand.BACK_OF_A_LENGTH: 0.10,
        LengthBand.SHORT: 0.04,
    },
    BowlerStyle.WRIST_SPIN: {
        LengthBand.FULL_TOSS: 0.06, LengthBand.YORKER: 0.04, LengthBand.FULL: 0.36,
        LengthBand.GOOD_LENGTH: 0.36, LengthBand.BACK_OF_A_LENGTH: 0.12,
        LengthBand.SHORT: 0.06,
    },
}

_SPEED_BY_STYLE = {
    BowlerStyle.FAST: 140.0,
    BowlerStyle.FAST_MEDIUM: 128.0,
    BowlerStyle.FINGER_SPIN: 90.0,
    BowlerStyle.WRIST_SPIN: 86.0,
}


def make_default_roster(n_batsmen: int = 20, n_bowlers: int = 8, seed: int = 0,
                        signal: str = "High", noise: float = 0.15,
                        format_mix: dict[MatchFormat, float] | None = None) -> Roster:
    """A randomized but reproducible roster with well-separated archetypes."""
    rng = np.random.default_rng(seed)
    batsmen = []
    for i in range(n_batsmen):
        raw = rng.gamma(0.5, size=N_SECTORS) + 0.02
        weights = (raw / raw.sum()).tolist()
        jitter = {band: float(rng.uniform(-0.04, 0.04)) for band in LengthBand}
        batsmen.append(BatsmanArchetype(
            player_id=f"bat{i + 1:02d}",
            hand=Handedness.LEFT if rng.random() < 0.25 else Handedness.RIGHT,
            sector_weights=weights,
            base_aggression=float(rng.uniform(0.22, 0.72)),
            aggression_ramp=float(rng.uniform(0.10, 0.40)),
            length_sensitivity={band: _GLOBAL_LENGTH_SENS[band] + jitter[band]
                                for band in LengthBand},
            speed_sensitivity=float(rng.uniform(-0.006, -0.001)),
            style_sensitivity={st: _GLOBAL_STYLE_SENS[st] + float(rng.uniform(-0.02, 0.02))
                               for st in BowlerStyle},
            defensive_floor=float(rng.uniform(0.08, 0.18)),
            momentum_boost=float(rng.uniform(0.06, 0.16)),
        ))
    styles = list(BowlerStyle)
    bowlers = []
    for j in range(n_bowlers):
        style = styles[j % len(styles)]
        bowlers.append(BowlerTraits(
            player_id=f"bowl{j + 1:02d}",
            hand=Handedness.LEFT if rng.random() < 0.25 else Handedness.RIGHT,
            style=style,
            speed_mean=_SPEED_BY_STYLE[style] + float(rng.uniform(-3.0, 3.0)),
            speed_sd=float(rng.uniform(2.0, 4.0)),
            length_mix=dict(_LENGTH_MIX_BY_STYLE[style]),
            line_mean=float(rng.uniform(0.05, 0.30)),
            line_sd=float(rng.uniform(0.20, 0.35)),
            around_rate=0.10 if j % 7 == 0 else float(rng.uniform(0.15, 0.35)),
        ))
    return Roster(batsmen=batsmen, bowlers=bowlers, noise=noise, signal=signal,
                  format_mix=format_mix or {MatchFormat.ODI: 1.0})


# --- roster (de)serialization ------------------------------------------------------

def roster_to_dict(roster: Roster) -> dict:
    return {
        "noise": roster.noise,
        "signal": roster.signal,
        "format_mix": {fmt.value: w for fmt, w in roster.format_mix.items()},
        "batsmen": [
            {
                "id": b.player_id,
                "hand": b.hand.value,
                "sector_weights": b.sector_weights,
                "base_aggression": b.base_aggression,
                "aggression_ramp": b.aggression_ramp,
                "length_sensitivity": {k.value: v for k, v in b.length_sensitivity.items()},
                "speed_sensitivity": b.speed_sensitivity,
                "style_sensitivity": {k.value: v for k, v in b.style_sensitivity.items()},
                "defensive_floor": b.defensive_floor,
                "momentum_boost": b.momentum_boost,
            }
            for b in roster.batsmen
        ],
        "bowlers": [
            {
                "id": w.player_id,
                "hand": w.hand.value,
                "style": w.style.value,
                "speed_mean": w.speed_mean,
                "speed_sd": w.speed_sd,
                "length_mix": {k.value: v for k, v in w.length_mix.items()},
                "line_mean": w.line_mean,
                "line_sd": w.line_sd,
                "around_rate": w.around_rate,
            }
            for w in roster.bowlers
        ],
    }


def roster_from_dict(doc: dict) -> Roster:
    try:
        batsmen = [
            BatsmanArchetype(
                player_id=b["id"],
                hand=Handedness(b["hand"]),
                sector_weights=list(b["sector_weights"]),
                base_aggression=b["base_aggression"],
                aggression_ramp=b["aggression_ramp"],
                length_sensitivity={LengthBand(k): v
                                    for k, v in b["length_sensitivity"].items()},
                speed_sensitivity=b["speed_sensitivity"],
                style_sensitivity={BowlerStyle(k): v
                                   for k, v in b["style_sensitivity"].items()},
                defensive_floor=b["defensive_floor"],
                momentum_boost=b["momentum_boost"],
            )
            for b in doc["batsmen"]
        ]
        bowlers = [
            BowlerTraits(
                player_id=w["id"],
                hand=Handedness(w["hand"]),
                style=BowlerStyle(w["style"]),
                speed_mean=w["speed_mean"],
                speed_sd=w["speed_sd"],
                length_mix={LengthBand(k): v for k, v in w["length_mix"].items()},
                line_mean=w["line_mean"],
                line_sd=w["line_sd"],
                around_rate=w["around_rate"],
            )
            for w in doc["bowlers"]
        ]
        return Roster(
            batsmen=batsmen,
            bowlers=bowlers,
            noise=doc.get("noise", 0.15),
            signal=doc.get("signal", "High"),
            format_mix={MatchFormat(k): v
                        for k, v in doc.get("format_mix", {"ODI": 1.0}).items()},
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad roster document: {exc}") from exc


def load_roster(path: str | Path) -> Roster:
    with open(path, "r", encoding="utf-8") as fh:
        return roster_from_dict(json.load(fh))


def save_roster(roster: Roster, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(roster_to_dict(roster), fh, indent=2)


# --- generation --------------------------------------------------------------------

def _sample_categorical(rng, values, probs):
    u = rng.random()
    acc = 0.0
    for v, p in zip(values, probs):
        acc += p
        if u < acc:
            return v
    return values[-1]


class _InningsSim:
    def __init__(self, roster: Roster, archetypes: dict[str, BatsmanArchetype],
                 rng, match_id: str, date: dt.date, fmt: MatchFormat,
                 innings_index: int, lineup: list[str], target: int | None):
        self.roster = roster
        self.archetypes = archetypes
        self.rng = rng
        self.match_id = match_id
        self.date = date
        self.fmt = fmt
        self.innings_index = innings_index
        self.lineup = lineup
        self.target = target
        self.rows: list[Delivery] = []

    def run(self) -> list[Delivery]:
        rng = self.rng
        striker, non_striker = self.lineup[0], self.lineup[1]
        next_up = 2
        balls_faced = {pid: 0 for pid in self.lineup}
        team_runs = 0
        wickets = 0
        recent_runs: list[int] = []  # last 5 team deliveries
        overs_bowled = {w.player_id: 0 for w in self.roster.bowlers}
        prev_bowler = None
        max_wickets = min(10, len(self.lineup) - 1)

        for over in range(OVERS_PER_INNINGS[self.fmt]):
            bowler = self._pick_bowler(overs_bowled, prev_bowler)
            overs_bowled[bowler.player_id] += 1
            prev_bowler = bowler.player_id
            for ball in range(1, 7):
                arch = self.archetypes[striker]
                d, runs, wicket = self._one_ball(
                    arch, bowler, over, ball, team_runs, wickets,
                    balls_faced[striker], striker, non_striker, recent_runs)
                self.rows.append(d)
                balls_faced[striker] += 1
                team_runs += runs
                recent_runs.append(runs)
                if len(recent_runs) > 5:
                    recent_runs.pop(0)
                if wicket:
                    wickets += 1
                    if wickets >= max_wickets:
                        return self.rows
                    striker = self.lineup[next_up]
                    balls_faced.setdefault(striker, 0)
                    next_up += 1
                elif runs % 2 == 1:
                    striker, non_striker = non_striker, striker
                if self.target is not None and team_runs > self.target:
                    return self.rows
            striker, non_striker = non_striker, striker
        return self.rows

    def _pick_bowler(self, overs_bowled, prev_bowler) -> BowlerTraits:
        # least-used bowler who did not bowl the previous over;
        # enforces the ceil(total/n) quota implicitly
        candidates = [w for w in self.roster.bowlers if w.player_id != prev_bowler]
        candidates.sort(key=lambda w: (overs_bowled[w.player_id], w.player_id))
        return candidates[0]

    def _one_ball(self, arch, bowler, over, ball, team_runs, wickets,
                  striker_balls, striker, non_striker, recent_runs):
        rng = self.rng
        band = _sample_categorical(rng, list(bowler.length_mix), list(bowler.length_mix.values()))
        if band is LengthBand.FULL_TOSS:
            bounce = None
            bounce_height = 0.0
        else:
            lo, hi = _BAND_RANGES[band]
            bounce = float(rng.uniform(lo, hi))
            bounce_height = max(0.05, 0.25 + 0.055 * bounce + float(rng.normal(0.0, 0.08)))
        speed = float(np.clip(rng.normal(bowler.speed_mean, bowler.speed_sd), 40.0, 165.0))
        canonical_line = float(np.clip(rng.normal(bowler.line_mean, bowler.line_sd), -1.59, 1.59))
        is_pace = bowler.style in (BowlerStyle.FAST, BowlerStyle.FAST_MEDIUM)
        canonical_swing = float(rng.normal(0.0, 2.2 if is_pace else 0.6))
        canonical_turn = float(rng.normal(0.0, 0.5 if is_pace else 3.0))
        release = float(np.clip(rng.normal(2.15, 0.12), 1.0, 2.6))
        angle = (BowlingAngle.AROUND if rng.random() < bowler.around_rate
                 else BowlingAngle.OVER)

        left_bat = arch.hand is Handedness.LEFT
        line_offset = -canonical_line if left_bat else canonical_line
        swing = -canonical_swing if left_bat else canonical_swing
        turn = -canonical_turn if left_bat else canonical_turn

        is_extra = rng.random() < EXTRA_RATE
        if is_extra:
            shot = None
            shot_angle = None
            runs = 1
            wicket = False
        else:
            hot = sum(1 for r in recent_runs if r >= 4) >= 2
            q = aggression_propensity(arch, balls_faced=striker_balls, band=band,
                                      speed_kmh=speed, style=bowler.style, hot_streak=hot)
            p_def, p_rot, p_att = intent_probabilities(arch, q)
            level = _sample_categorical(rng, (0, 1, 2), (p_def, p_rot, p_att))
            shot = SHOTS_BY_LEVEL[level][int(rng.integers(len(SHOTS_BY_LEVEL[level])))]
            if level == 0:
                shot_angle = None
            else:
                mix = [(1.0 - self.roster.noise) * w + self.roster.noise / N_SECTORS
                       for w in arch.sector_weights]
                sector = _sample_categorical(rng, list(range(N_SECTORS)), mix)
                canonical_theta = (sector + float(rng.random())) * SECTOR_WIDTH_DEG
                shot_angle = mirror_angle(canonical_theta) if left_bat else canonical_theta
            wicket = rng.random() < WICKET_RATES[level]
            if wicket:
                runs = 0
            else:
                values, probs = RUN_DISTRIBUTIONS[level]
                runs = _sample_categorical(rng, values, probs)

        d = Delivery(
            match_id=self.match_id,
            date=self.date,
            format=self.fmt,
            innings_index=self.innings_index,
            over_number=over,
            ball_in_over=ball,
            batsman_id=striker,
            non_striker_id=non_striker,
            bowler_id=bowler.player_id,
            batsman_hand=arch.hand,
            bowler_hand=bowler.hand,
            bowler_style=bowler.style,
            bowling_angle=angle,
            speed_kmh=speed,
            line_offset_m=line_offset,
            bounce_distance_m=bounce,
            swing_deg=swing,
            turn_deg=turn,
            bounce_height_m=bounce_height,
            release_height_m=release,
            shot_label=shot,
            shot_angle_deg=shot_angle,
            runs=runs,
            wicket=wicket,
            team_runs_before=team_runs,
            team_wickets_before=wickets,
        )
        return d, runs, wicket


def synthesize(roster: Roster, n_deliveries: int, seed: int) -> Corpus:
    """Generate a corpus of exactly n_deliveries balls (the tail match is cut short)."""
    if len(roster.batsmen) < 2 or len(roster.bowlers) < 2:
        raise ConfigError("need at least 2 batsmen and 2 bowlers")
    if n_deliveries < 1:
        raise ConfigError("n_deliveries must be >= 1")
    rng = np.random.default_rng(seed)
    archetypes = {b.player_id: b for b in effective_archetypes(roster)}
    formats = list(roster.format_mix)
    fmt_weights = np.asarray([roster.format_mix[f] for f in formats], dtype=float)
    fmt_weights = fmt_weights / fmt_weights.sum()

    rows: list[Delivery] = []
    match_idx = 0
    base_date = dt.date(2021, 1, 1)
    while len(rows) < n_deliveries:
        match_idx += 1
        match_id = f"SYN{match_idx:04d}"
        date = base_date + dt.timedelta(days=match_idx - 1)
        fmt = formats[int(_sample_categorical(rng, list(range(len(formats))), fmt_weights))]
        lineup_ids = [b.player_id for b in roster.batsmen]
        first = [lineup_ids[i] for i in rng.permutation(len(lineup_ids))]
        sim1 = _InningsSim(roster, archetypes, rng, match_id, date, fmt, 1, first, None)
        innings1 = sim1.run()
        rows.extend(innings1)
        if len(rows) >= n_deliveries:
            break
        total = innings1[-1].team_runs_before + innings1[-1].runs
        second = [lineup_ids[i] for i in rng.permutation(len(lineup_ids))]
        sim2 = _InningsSim(roster, archetypes, rng, match_id, date, fmt, 2, second, total)
        rows.extend(sim2.run())

    rows = rows[:n_deliveries]
    return Corpus(deliveries=tuple(rows), players=_build_players(rows))
