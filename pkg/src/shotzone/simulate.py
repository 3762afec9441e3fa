"""What-if engine: hypothetical scenarios, Cartesian grids, tactical summaries.

A scenario pins a batsman/bowler pairing, one delivery, and a match state;
prediction synthesizes a feature frame (cold-start masked history by default,
or the actual previous ≤5 balls) and runs it through a trained bundle. Grids
expand axis-major over line → length → bowler → angle → batsman phase, with
left-arm bowlers contributing a single habitual angle.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace

import numpy as np

from .context import InningsTracker, _BatsmanInnings
from .data import Delivery, MatchFormat
from .errors import ConfigError, UnknownPlayer
from .frames import LOOKBACK, FeatureFrame, ProfileStore
from .models import ModelBundle
from .profiles import AuxGlobals, N_AUX, aux_vector
from .taxonomy import (
    ATTACK_ZONE_IDS,
    BowlerStyle,
    BowlingAngle,
    DEFENSIVE_ZONE_ID,
    DEFLECT_ZONE_IDS,
    Handedness,
    LEG_SIDE_ZONE_IDS,
    LENGTH_BAND_MIDPOINTS_M,
    LINE_BAND_MIDPOINTS_M,
    LengthBand,
    LineBand,
    OFF_SIDE_ZONE_IDS,
    ROTATE_ZONE_IDS,
    ZONES,
)

MAX_HISTORY = LOOKBACK - 1  # prior balls accepted alongside the current one

# innings-phase presets: representative (balls faced, runs) pairs
PHASE_PRESETS = {
    "0-9": (5, 4),
    ">60": (65, 55),
    "fresh": (5, 4),
    "set": (65, 55),
}

DEFAULT_LEFT_ARM_ANGLE = BowlingAngle.OVER


@dataclass(frozen=True)
class Scenario:
    """One hypothetical ball. Spatial numbers are in the physical frame
    (positive toward a right-hander's off side); named bands are already
    batsman-relative and resolve to canonical midpoints."""

    batsman_id: str
    bowler_id: str
    # delivery: give a band or an explicit number for line and length
    line: LineBand | None = None
    line_offset_m: float | None = None
    length: LengthBand | None = None
    bounce_distance_m: float | None = None
    speed_kmh: float = 135.0
    swing_deg: float = 0.0
    turn_deg: float = 0.0
    bounce_height_m: float | None = None
    release_height_m: float = 2.2
    bowling_angle: BowlingAngle = BowlingAngle.OVER
    # participant overrides (defaults come from the profile store)
    batsman_hand: Handedness | None = None
    bowler_hand: Handedness | None = None
    bowler_style: BowlerStyle | None = None
    # striker state
    batsman_runs: int = 0
    batsman_balls_faced: int = 0
    phase: str | None = None
    consecutive_dots: int = 0
    fours: int = 0
    sixes: int = 0
    batting_position: int = 3
    # match state
    format: MatchFormat = MatchFormat.ODI
    innings_index: int = 1
    over_number: int = 0
    ball_in_over: int = 1
    team_runs: int = 0
    team_wickets: int = 0
    target: int | None = None
    partnership_runs: int = 0
    partnership_balls: int = 0
    prev_ball_runs: int = 0
    prev_ball_wicket: bool = False
    # lookback: None = cold start (fully masked history)
    history: tuple[Delivery, ...] | None = None
    allow_unknown: bool = False


def mirror_scenario(s: Scenario) -> Scenario:
    """The mirrored twin: explicit hands flipped, signed spatial fields negated.

    Requires explicit handedness overrides (store-resolved hands cannot flip).
    """
    if s.batsman_hand is None or s.bowler_hand is None:
        raise ValueError("mirror_scenario needs explicit batsman_hand and bowler_hand")
    flip = {Handedness.RIGHT: Handedness.LEFT, Handedness.LEFT: Handedness.RIGHT}
    from .data import mirror_delivery

    return replace(
        s,
        batsman_hand=flip[s.batsman_hand],
        bowler_hand=flip[s.bowler_hand],
        line_offset_m=None if s.line_offset_m is None else -s.line_offset_m,
        swing_deg=-s.swing_deg,
        turn_deg=-s.turn_deg,
        history=None if s.history is None
        else tuple(mirror_delivery(d) for d in s.history),
    )


def _resolve_players(scenario: Scenario, store: ProfileStore):
    """(batsman_hand, bowler_hand, bowler_style, bat_profile, bowl_profile)."""
    bat_profile = store.profiles.get(scenario.batsman_id)
    bowl_profile = store.profiles.get(scenario.bowler_id)
    bat_meta = store.players.get(scenario.batsman_id)
    bowl_meta = store.players.get(scenario.bowler_id)
    if (bat_profile is None or bowl_profile is None) and not scenario.allow_unknown:
        missing = [pid for pid, prof in
                   ((scenario.batsman_id, bat_profile), (scenario.bowler_id, bowl_profile))
                   if prof is None]
        raise UnknownPlayer(f"unknown players: {missing}")
    bat_hand = scenario.batsman_hand or (bat_meta.batting_hand if bat_meta else None) \
        or Handedness.RIGHT
    bowl_hand = scenario.bowler_hand or (bowl_meta.bowling_hand if bowl_meta else None) \
        or Handedness.RIGHT
    style = scenario.bowler_style or (bowl_meta.bowling_style if bowl_meta else None) \
        or BowlerStyle.FAST_MEDIUM
    return bat_hand, bowl_hand, style, bat_profile, bowl_profile


def _resolve_trajectory(scenario: Scenario, bat_hand: Handedness):
    """(physical_line_offset, bounce_distance_or_None, bounce_height)."""
    if scenario.line_offset_m is not None:
        physical_line = scenario.line_offset_m
    elif scenario.line is not None:
        canonical = LINE_BAND_MIDPOINTS_M[scenario.line]
        physical_line = canonical if bat_hand is Handedness.RIGHT else -canonical
    else:
        raise ConfigError("scenario needs a line band or an explicit line_offset_m")

    if scenario.bounce_distance_m is not None:
        bounce = scenario.bounce_distance_m
    elif scenario.length is LengthBand.FULL_TOSS:
        bounce = None
    elif scenario.length is not None:
        bounce = LENGTH_BAND_MIDPOINTS_M[scenario.length]
    else:
        raise ConfigError("scenario needs a length band or an explicit bounce_distance_m")

    if scenario.bounce_height_m is not None:
        height = scenario.bounce_height_m
    else:
        height = 0.0 if bounce is None else 0.25 + 0.055 * bounce
    return physical_line, bounce, height


def _phase_state(scenario: Scenario) -> tuple[int, int]:
    if scenario.phase is not None:
        try:
            balls, runs = PHASE_PRESETS[scenario.phase]
        except KeyError:
            raise ConfigError(
                f"unknown phase {scenario.phase!r}; expected one of "
                f"{sorted(set(PHASE_PRESETS))}") from None
        return balls, runs
    return scenario.batsman_balls_faced, scenario.batsman_runs


def _scenario_delivery(scenario: Scenario, bat_hand, bowl_hand, style) -> Delivery:
    physical_line, bounce, height = _resolve_trajectory(scenario, bat_hand)
    return Delivery(
        match_id="SCENARIO",
        date=dt.date(2000, 1, 1),
        format=scenario.format,
        innings_index=scenario.innings_index,
        over_number=scenario.over_number,
        ball_in_over=scenario.ball_in_over,
        batsman_id=scenario.batsman_id,
        non_striker_id="__non_striker__",
        bowler_id=scenario.bowler_id,
        batsman_hand=bat_hand,
        bowler_hand=bowl_hand,
        bowler_style=style,
        bowling_angle=scenario.bowling_angle,
        speed_kmh=scenario.speed_kmh,
        line_offset_m=physical_line,
        bounce_distance_m=bounce,
        swing_deg=scenario.swing_deg,
        turn_deg=scenario.turn_deg,
        bounce_height_m=height,
        release_height_m=scenario.release_height_m,
        shot_label=None,
        shot_angle_deg=None,
        runs=0,
        wicket=False,
        team_runs_before=scenario.team_runs,
        team_wickets_before=scenario.team_wickets,
    )


def build_frame(scenario: Scenario, store: ProfileStore,
                aux_globals: AuxGlobals) -> FeatureFrame:
    """Synthesize the model input frame for one scenario."""
    bat_hand, bowl_hand, style, bat_profile, bowl_profile = _resolve_players(
        scenario, store)
    current = _scenario_delivery(scenario, bat_hand, bowl_hand, style)

    history = list(scenario.history or ())
    if len(history) > MAX_HISTORY:
        raise ConfigError(f"history holds {len(history)} balls; at most "
                          f"{MAX_HISTORY} prior deliveries are used")

    tracker = InningsTracker(target=scenario.target)
    vectors = []
    for d in history:
        vectors.append(tracker.context_vector(d))
        tracker.update(d)
    # seed the current ball's innings state from the scenario's explicit fields
    balls_faced, runs = _phase_state(scenario)
    tracker.batsmen[scenario.batsman_id] = _BatsmanInnings(
        runs=runs, balls=balls_faced, fours=scenario.fours, sixes=scenario.sixes,
        dot_streak=scenario.consecutive_dots)
    tracker.positions[scenario.batsman_id] = scenario.batting_position
    tracker.positions.setdefault("__non_striker__", scenario.batting_position + 1)
    tracker.partnership_runs = scenario.partnership_runs
    tracker.partnership_balls = scenario.partnership_balls
    tracker.prev_runs = scenario.prev_ball_runs
    tracker.prev_wicket = scenario.prev_ball_wicket
    vectors.append(tracker.context_vector(current))

    seq = np.zeros((LOOKBACK, vectors[0].shape[0]), dtype=np.float64)
    mask = np.ones(LOOKBACK, dtype=bool)
    seq[LOOKBACK - len(vectors):] = vectors
    mask[LOOKBACK - len(vectors):] = False
    aux = aux_vector(bat_profile, bowl_profile, aux_globals)
    return FeatureFrame(sequence=seq, mask=mask, aux=aux, target=None)


def predict_scenario(bundle: ModelBundle, store: ProfileStore,
                     scenario: Scenario) -> np.ndarray:
    """17-entry zone distribution; a pure function of (bundle, store, scenario)."""
    store.check_versions(bundle.taxonomy_version, bundle.ledger_version)
    frame = build_frame(scenario, store, AuxGlobals(values=bundle.aux_globals))
    return bundle.predict(frame)


# --- tactical summaries ----------------------------------------------------------

@dataclass(frozen=True)
class TacticalSummary:
    p_defensive: float
    p_rotate: float
    p_attack: float
    p_deflect: float
    off_side_share: float | None
    leg_side_share: float | None
    direction_defined: bool
    top_zones: list[tuple[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p_defensive": self.p_defensive,
            "p_rotate": self.p_rotate,
            "p_attack": self.p_attack,
            "p_deflect": self.p_deflect,
            "off_side_share": self.off_side_share,
            "leg_side_share": self.leg_side_share,
            "direction_defined": self.direction_defined,
            "top_zones": [{"zone": z, "p": p} for z, p in self.top_zones],
        }


def summarize(dist: np.ndarray, top_k: int = 5) -> TacticalSummary:
    """Aggregate a zone distribution into aggression groups and field sides."""
    dist = np.asarray(dist, dtype=np.float64)
    if dist.shape != (len(ZONES),):
        raise ConfigError(f"distribution must have {len(ZONES)} entries")
    p_def = float(dist[DEFENSIVE_ZONE_ID])
    p_rot = float(dist[list(ROTATE_ZONE_IDS)].sum())
    p_att = float(dist[list(ATTACK_ZONE_IDS)].sum())
    p_defl = float(dist[list(DEFLECT_ZONE_IDS)].sum())
    off = float(dist[list(OFF_SIDE_ZONE_IDS)].sum())
    leg = float(dist[list(LEG_SIDE_ZONE_IDS)].sum())
    directional = off + leg
    if directional > 0.0:
        off_share, leg_share, defined = off / directional, leg / directional, True
    else:
        off_share, leg_share, defined = None, None, False
    order = sorted(range(len(ZONES)), key=lambda z: (-dist[z], z))[:top_k]
    top = [(ZONES[z].name, float(dist[z])) for z in order]
    return TacticalSummary(
        p_defensive=p_def, p_rotate=p_rot, p_attack=p_att, p_deflect=p_defl,
        off_side_share=off_share, leg_side_share=leg_share,
        direction_defined=defined, top_zones=top)


# --- grids -----------------------------------------------------------------------

@dataclass
class ScenarioGrid:
    """Cartesian axes over a base scenario. None axes stay at the base value."""

    base: Scenario
    lines: list[LineBand] | None = None
    lengths: list[LengthBand] | None = None
    bowlers: list[str] | None = None
    angles: list[BowlingAngle] | None = None
    phases: list[str] | None = None


def _bowler_hand(grid: ScenarioGrid, store: ProfileStore, bowler_id: str) -> Handedness:
    if bowler_id == grid.base.bowler_id and grid.base.bowler_hand is not None:
        return grid.base.bowler_hand
    meta = store.players.get(bowler_id)
    if meta is None or meta.bowling_hand is None:
        if grid.base.allow_unknown:
            return grid.base.bowler_hand or Handedness.RIGHT
        raise ConfigError(f"unknown bowler {bowler_id!r} in grid")
    return meta.bowling_hand


def build_grid(grid: ScenarioGrid, store: ProfileStore) -> list[tuple[dict, Scenario]]:
    """Expand to (axes, scenario) cells in axis-major order.

    Right-arm bowlers take every angle on the angle axis; left-armers pin to
    their single habitual side, so a 4-line x 4-length x (4 right x 2 + 1 left
    x 1) grid yields exactly 144 cells.
    """
    for name, axis in (("lines", grid.lines), ("lengths", grid.lengths),
                       ("bowlers", grid.bowlers), ("angles", grid.angles),
                       ("phases", grid.phases)):
        if axis is not None and len(axis) == 0:
            raise ConfigError(f"grid axis {name} is empty")
    lines = grid.lines if grid.lines is not None else [None]
    lengths = grid.lengths if grid.lengths is not None else [None]
    bowlers = grid.bowlers if grid.bowlers is not None else [grid.base.bowler_id]
    angles = grid.angles if grid.angles is not None else [None]
    phases = grid.phases if grid.phases is not None else [None]

    cells: list[tuple[dict, Scenario]] = []
    for line in lines:
        for length in lengths:
            for bowler_id in bowlers:
                hand = _bowler_hand(grid, store, bowler_id)
                if grid.angles is None:
                    bowler_angles = [None]  # keep the base scenario's angle
                elif hand is Handedness.LEFT and len(angles) > 1:
                    bowler_angles = [DEFAULT_LEFT_ARM_ANGLE]
                else:
                    bowler_angles = angles
                for angle in bowler_angles:
                    for phase in phases:
                        overrides: dict = {"bowler_id": bowler_id}
                        axes = {"bowler": bowler_id}
                        if line is not None:
                            overrides["line"] = line
                            overrides["line_offset_m"] = None
                            axes["line"] = line.value
                        if length is not None:
                            overrides["length"] = length
                            overrides["bounce_distance_m"] = None
                            axes["length"] = length.value
                        if bowler_id != grid.base.bowler_id:
                            overrides["bowler_hand"] = None
                            overrides["bowler_style"] = None
                        if angle is not None:
                            overrides["bowling_angle"] = angle
                            axes["angle"] = angle.value
                        else:
                            axes["angle"] = grid.base.bowling_angle.value
                        if phase is not None:
                            overrides["phase"] = phase
                            axes["phase"] = phase
                        cells.append((axes, replace(grid.base, **overrides)))
    return cells


@dataclass
class SweepRow:
    axes: dict
    distribution: np.ndarray
    summary: TacticalSummary
    deltas: dict | None = None

    def to_dict(self) -> dict:
        doc = {
            "axes": self.axes,
            "distribution": {z.name: float(p)
                             for z, p in zip(ZONES, self.distribution)},
            "summary": self.summary.to_dict(),
        }
        if self.deltas is not None:
            doc["deltas"] = self.deltas
        return doc


def sweep_report(bundle: ModelBundle, store: ProfileStore,
                 grid: ScenarioGrid) -> list[SweepRow]:
    """One row per grid cell, axis-major; adds per-cell aggression deltas
    against the first phase when the grid sweeps batsman phases."""
    cells = build_grid(grid, store)
    rows = []
    for axes, scenario in cells:
        dist = predict_scenario(bundle, store, scenario)
        rows.append(SweepRow(axes=axes, distribution=dist, summary=summarize(dist)))
    return attach_phase_deltas(rows, grid)


def attach_phase_deltas(rows: list[SweepRow], grid: ScenarioGrid) -> list[SweepRow]:
    if grid.phases is None or len(grid.phases) < 2:
        return rows
    first_phase = grid.phases[0]
    baselines = {}
    for row in rows:
        key = tuple(sorted((k, v) for k, v in row.axes.items() if k != "phase"))
        if row.axes.get("phase") == first_phase:
            baselines[key] = row.summary
    for row in rows:
        key = tuple(sorted((k, v) for k, v in row.axes.items() if k != "phase"))
        base = baselines.get(key)
        if base is not None and row.axes.get("phase") != first_phase:
            row.deltas = {
                "vs_phase": first_phase,
                "p_attack_delta": row.summary.p_attack - base.p_attack,
                "p_defensive_delta": row.summary.p_defensive - base.p_defensive,
            }
    return rows


def grid_size(grid: ScenarioGrid, store: ProfileStore) -> int:
    return len(build_grid(grid, store))


# --- document parsing (shared by the CLI and the HTTP service) ---------------------

def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from the published request schema."""
    try:
        delivery = doc.get("delivery", {})
        state = doc.get("batsman_state", {})
        match = doc.get("match", {})
        length = delivery.get("length")
        line = delivery.get("line")
        history = doc.get("history")
        from .data import delivery_from_dict

        return Scenario(
            batsman_id=doc["batsman"],
            bowler_id=doc["bowler"],
            batsman_hand=Handedness(doc["batsman_hand"]) if doc.get("batsman_hand") else None,
            bowler_hand=Handedness(doc["bowler_hand"]) if doc.get("bowler_hand") else None,
            bowler_style=BowlerStyle(doc["bowler_style"]) if doc.get("bowler_style") else None,
            line=LineBand(line) if line else None,
            line_offset_m=delivery.get("line_offset_m"),
            length=LengthBand(length) if length else None,
            bounce_distance_m=delivery.get("bounce_distance_m"),
            speed_kmh=float(delivery.get("speed_kmh", 135.0)),
            swing_deg=float(delivery.get("swing_deg", 0.0)),
            turn_deg=float(delivery.get("turn_deg", 0.0)),
            bounce_height_m=delivery.get("bounce_height_m"),
            release_height_m=float(delivery.get("release_height_m", 2.2)),
            bowling_angle=BowlingAngle(delivery.get("angle", "OverTheWicket")),
            batsman_runs=int(state.get("runs", 0)),
            batsman_balls_faced=int(state.get("balls_faced", 0)),
            phase=state.get("phase"),
            consecutive_dots=int(state.get("consecutive_dots", 0)),
            fours=int(state.get("fours", 0)),
            sixes=int(state.get("sixes", 0)),
            batting_position=int(state.get("position", 3)),
            format=MatchFormat(match.get("format", "ODI")),
            innings_index=int(match.get("innings", 1)),
            over_number=int(match.get("over", 0)),
            ball_in_over=int(match.get("ball", 1)),
            team_runs=int(match.get("team_runs", 0)),
            team_wickets=int(match.get("team_wickets", 0)),
            target=match.get("target"),
            partnership_runs=int(match.get("partnership_runs", 0)),
            partnership_balls=int(match.get("partnership_balls", 0)),
            prev_ball_runs=int(match.get("prev_ball_runs", 0)),
            prev_ball_wicket=bool(match.get("prev_ball_wicket", False)),
            history=None if not history
            else tuple(delivery_from_dict(h) for h in history),
            allow_unknown=bool(doc.get("allow_unknown", False)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad scenario document: {exc}") from exc


def grid_from_dict(doc: dict) -> ScenarioGrid:
    try:
        base = scenario_from_dict(doc["base"])
        axes = doc.get("axes", {})
        return ScenarioGrid(
            base=base,
            lines=[LineBand(v) for v in axes["line"]] if "line" in axes else None,
            lengths=[LengthBand(v) for v in axes["length"]] if "length" in axes else None,
            bowlers=list(axes["bowler"]) if "bowler" in axes else None,
            angles=[BowlingAngle(v) for v in axes["angle"]] if "angle" in axes else None,
            phases=list(axes["phase"]) if "phase" in axes else None,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad grid document: {exc}") from exc
