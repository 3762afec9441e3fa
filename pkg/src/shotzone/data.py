"""Ball-by-ball corpus model: the open delivery schema, CSV parsing and validation.

One delivery per row; the column order below is the file format. The
no-bounce marker in ``bounce_distance_m`` is the literal token ``FT``.
Lateral offsets, swing and turn are recorded in a fixed physical frame
(positive toward a right-handed striker's off side); shot angles use the
physical frame of whoever is batting and are mirrored downstream.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import MissingAngle, MissingShot, OrderError, SchemaError
from .taxonomy import (
    BowlerStyle,
    BowlingAngle,
    Handedness,
    aggression_label,
    canonical_shot_label,
    mirror_angle,
    normalize_angle,
    zone_of,
)


class MatchFormat(str, Enum):
    ODI = "ODI"
    T20 = "T20"


OVERS_PER_INNINGS = {MatchFormat.ODI: 50, MatchFormat.T20: 20}
BALLS_PER_INNINGS = {MatchFormat.ODI: 300, MatchFormat.T20: 120}

FULL_TOSS_TOKEN = "FT"

COLUMNS = (
    "match_id",
    "date",
    "format",
    "innings_index",
    "over_number",
    "ball_in_over",
    "batsman_id",
    "non_striker_id",
    "bowler_id",
    "batsman_hand",
    "bowler_hand",
    "bowler_style",
    "bowling_angle",
    "speed_kmh",
    "line_offset_m",
    "bounce_distance_m",
    "swing_deg",
    "turn_deg",
    "bounce_height_m",
    "release_height_m",
    "shot_label",
    "shot_angle_deg",
    "runs",
    "wicket",
    "team_runs_before",
    "team_wickets_before",
)


@dataclass(frozen=True, slots=True)
class Delivery:
    """One bowled ball: trajectory, participants, match state and outcome."""

    match_id: str
    date: dt.date
    format: MatchFormat
    innings_index: int
    over_number: int
    ball_in_over: int
    batsman_id: str
    non_striker_id: str
    bowler_id: str
    batsman_hand: Handedness
    bowler_hand: Handedness
    bowler_style: BowlerStyle
    bowling_angle: BowlingAngle
    speed_kmh: float
    line_offset_m: float
    bounce_distance_m: float | None  # None = full toss
    swing_deg: float
    turn_deg: float
    bounce_height_m: float
    release_height_m: float
    shot_label: str | None  # None on extras (no shot decision recorded)
    shot_angle_deg: float | None
    runs: int
    wicket: bool
    team_runs_before: int
    team_wickets_before: int

    @property
    def ball_key(self) -> tuple[str, int, int, int]:
        return (self.match_id, self.innings_index, self.over_number, self.ball_in_over)

    @property
    def is_extra(self) -> bool:
        return self.shot_label is None

    @property
    def balls_bowled_before(self) -> int:
        return self.over_number * 6 + (self.ball_in_over - 1)


@dataclass(frozen=True)
class Player:
    player_id: str
    display_name: str
    batting_hand: Handedness | None = None
    bowling_hand: Handedness | None = None
    bowling_style: BowlerStyle | None = None
    roles: frozenset[str] = field(default_factory=frozenset)

    @property
    def handedness(self) -> Handedness:
        return self.batting_hand or self.bowling_hand or Handedness.RIGHT


@dataclass(frozen=True)
class Corpus:
    deliveries: tuple[Delivery, ...]
    players: dict[str, Player]

    def __len__(self) -> int:
        return len(self.deliveries)

    def digest(self) -> str:
        """sha256 of the canonical serialized form, used as the training manifest id."""
        buf = io.StringIO()
        write_corpus(self, buf)
        return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()


SORT_KEY = lambda d: (d.date, d.match_id, d.innings_index, d.over_number, d.ball_in_over)  # noqa: E731


def target_of(d: Delivery) -> int:
    """Zone id this delivery's shot belongs to (the training target)."""
    if d.shot_label is None:
        raise MissingShot(f"delivery {d.ball_key} has no shot label")
    agg = aggression_label(d.shot_label)
    if agg == 0:
        return zone_of(0, 0.0, d.batsman_hand)
    if d.shot_angle_deg is None:
        raise MissingAngle(f"delivery {d.ball_key}: aggression {agg} shot without an angle")
    return zone_of(agg, d.shot_angle_deg, d.batsman_hand)


def mirror_delivery(d: Delivery) -> Delivery:
    """The mirror-image delivery: hands flipped, signed spatial fields negated.

    A left-hander's ball and its mirror twin produce identical canonical
    features; over/around the wicket is preserved because the bowler's arm
    flips together with the field.
    """
    return replace(
        d,
        batsman_hand=_flip(d.batsman_hand),
        bowler_hand=_flip(d.bowler_hand),
        line_offset_m=-d.line_offset_m,
        swing_deg=-d.swing_deg,
        turn_deg=-d.turn_deg,
        shot_angle_deg=None if d.shot_angle_deg is None else mirror_angle(d.shot_angle_deg),
    )


def _flip(hand: Handedness) -> Handedness:
    return Handedness.LEFT if hand is Handedness.RIGHT else Handedness.RIGHT


# --- parsing -------------------------------------------------------------------

def _fail(row_num: int, msg: str) -> None:
    raise ValueError(f"row {row_num}: {msg}")


def _parse_enum(enum_cls, raw: str, row_num: int, field_name: str):
    try:
        return enum_cls(raw)
    except ValueError:
        _fail(row_num, f"{field_name} must be one of "
                       f"{[e.value for e in enum_cls]}, got {raw!r}")


def _parse_float(raw: str, row_num: int, field_name: str, lo: float | None = None,
                 hi: float | None = None) -> float:
    try:
        value = float(raw)
    except ValueError:
        _fail(row_num, f"{field_name} is not a number: {raw!r}")
    if not math.isfinite(value):
        _fail(row_num, f"{field_name} is not finite: {raw!r}")
    if lo is not None and value < lo or hi is not None and value > hi:
        _fail(row_num, f"{field_name}={value} outside [{lo}, {hi}]")
    return value


def _parse_int(raw: str, row_num: int, field_name: str, lo: int | None = None,
               hi: int | None = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        _fail(row_num, f"{field_name} is not an integer: {raw!r}")
    if lo is not None and value < lo or hi is not None and value > hi:
        _fail(row_num, f"{field_name}={value} outside [{lo}, {hi}]")
    return value


def _parse_row(row: dict[str, str], row_num: int) -> Delivery:
    fmt = _parse_enum(MatchFormat, row["format"], row_num, "format")
    try:
        date = dt.date.fromisoformat(row["date"])
    except ValueError:
        _fail(row_num, f"date is not ISO yyyy-mm-dd: {row['date']!r}")

    raw_bounce = row["bounce_distance_m"].strip()
    if raw_bounce == FULL_TOSS_TOKEN:
        bounce = None
    else:
        bounce = _parse_float(raw_bounce, row_num, "bounce_distance_m", 0.0, 20.0)

    shot = row["shot_label"].strip() or None
    if shot is not None:
        try:
            shot = canonical_shot_label(shot)
        except Exception:
            _fail(row_num, f"unknown shot label {shot!r}")

    raw_angle = row["shot_angle_deg"].strip()
    angle = None if raw_angle == "" else normalize_angle(
        _parse_float(raw_angle, row_num, "shot_angle_deg")
    )
    if shot is not None and aggression_label(shot) > 0 and angle is None:
        _fail(row_num, f"shot {shot!r} requires a shot angle")

    d = Delivery(
        match_id=row["match_id"].strip(),
        date=date,
        format=fmt,
        innings_index=_parse_int(row["innings_index"], row_num, "innings_index", 1, 2),
        over_number=_parse_int(row["over_number"], row_num, "over_number", 0,
                               OVERS_PER_INNINGS[fmt] - 1),
        ball_in_over=_parse_int(row["ball_in_over"], row_num, "ball_in_over", 1, 6),
        batsman_id=row["batsman_id"].strip(),
        non_striker_id=row["non_striker_id"].strip(),
        bowler_id=row["bowler_id"].strip(),
        batsman_hand=_parse_enum(Handedness, row["batsman_hand"], row_num, "batsman_hand"),
        bowler_hand=_parse_enum(Handedness, row["bowler_hand"], row_num, "bowler_hand"),
        bowler_style=_parse_enum(BowlerStyle, row["bowler_style"], row_num, "bowler_style"),
        bowling_angle=_parse_enum(BowlingAngle, row["bowling_angle"], row_num, "bowling_angle"),
        speed_kmh=_parse_float(row["speed_kmh"], row_num, "speed_kmh", 40.0, 165.0),
        line_offset_m=_parse_float(row["line_offset_m"], row_num, "line_offset_m", -1.6, 1.6),
        bounce_distance_m=bounce,
        swing_deg=_parse_float(row["swing_deg"], row_num, "swing_deg"),
        turn_deg=_parse_float(row["turn_deg"], row_num, "turn_deg"),
        bounce_height_m=_parse_float(row["bounce_height_m"], row_num, "bounce_height_m", 0.0, None),
        release_height_m=_parse_float(row["release_height_m"], row_num, "release_height_m", 1.0, 2.6),
        shot_label=shot,
        shot_angle_deg=angle,
        runs=_parse_int(row["runs"], row_num, "runs", 0, 6),
        wicket=_parse_int(row["wicket"], row_num, "wicket", 0, 1) == 1,
        team_runs_before=_parse_int(row["team_runs_before"], row_num, "team_runs_before", 0, None),
        team_wickets_before=_parse_int(row["team_wickets_before"], row_num,
                                       "team_wickets_before", 0, 9),
    )
    if not d.match_id or not d.batsman_id or not d.bowler_id or not d.non_striker_id:
        _fail(row_num, "empty identifier field")
    if d.batsman_id == d.non_striker_id:
        _fail(row_num, "batsman and non-striker are the same player")
    return d


def _build_players(deliveries: Iterable[Delivery]) -> dict[str, Player]:
    bat_hand: dict[str, Handedness] = {}
    bowl_hand: dict[str, Handedness] = {}
    bowl_style: dict[str, BowlerStyle] = {}
    roles: dict[str, set[str]] = {}
    for d in deliveries:
        for pid, role in ((d.batsman_id, "batsman"), (d.non_striker_id, "batsman"),
                          (d.bowler_id, "bowler")):
            roles.setdefault(pid, set()).add(role)
        prev = bat_hand.setdefault(d.batsman_id, d.batsman_hand)
        if prev is not d.batsman_hand:
            raise ValueError(
                f"ball {d.ball_key}: batsman {d.batsman_id} changes handedness mid-corpus")
        prev = bowl_hand.setdefault(d.bowler_id, d.bowler_hand)
        if prev is not d.bowler_hand:
            raise ValueError(
                f"ball {d.ball_key}: bowler {d.bowler_id} changes bowling arm mid-corpus")
        bowl_style[d.bowler_id] = d.bowler_style
    return {
        pid: Player(
            player_id=pid,
            display_name=pid,
            batting_hand=bat_hand.get(pid),
            bowling_hand=bowl_hand.get(pid),
            bowling_style=bowl_style.get(pid),
            roles=frozenset(r),
        )
        for pid, r in sorted(roles.items())
    }


def _validate_structure(deliveries: list[Delivery]) -> None:
    seen: set[tuple] = set()
    for d in deliveries:
        if d.ball_key in seen:
            raise OrderError(f"duplicate ball key {d.ball_key}")
        seen.add(d.ball_key)
    last: dict[tuple[str, int], Delivery] = {}
    for d in deliveries:
        key = (d.match_id, d.innings_index)
        prev = last.get(key)
        if prev is not None:
            if d.team_wickets_before < prev.team_wickets_before:
                raise ValueError(
                    f"ball {d.ball_key}: team_wickets_before decreases within an innings")
            if d.team_runs_before < prev.team_runs_before:
                raise ValueError(
                    f"ball {d.ball_key}: team_runs_before decreases within an innings")
        last[key] = d


def parse_corpus(source: str | Path | io.TextIOBase) -> Corpus:
    """Parse and validate a delivery CSV into a sorted Corpus.

    Raises SchemaError for header problems, ValueError with the offending row
    number for bad field values, and OrderError for duplicate ball keys.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return _parse_stream(fh)
    return _parse_stream(source)


def _parse_stream(fh) -> Corpus:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty corpus file") from None
    if tuple(header) != COLUMNS:
        missing = set(COLUMNS) - set(header)
        extra = set(header) - set(COLUMNS)
        raise SchemaError(
            f"bad header: missing={sorted(missing)} extra={sorted(extra)} "
            f"(columns must appear exactly as documented)")
    deliveries = []
    for row_num, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(COLUMNS):
            _fail(row_num, f"expected {len(COLUMNS)} fields, got {len(raw)}")
        deliveries.append(_parse_row(dict(zip(COLUMNS, raw)), row_num))
    deliveries.sort(key=SORT_KEY)
    _validate_structure(deliveries)
    players = _build_players(deliveries)
    return Corpus(deliveries=tuple(deliveries), players=players)


# --- serialization ---------------------------------------------------------------

def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Enum):
        return value.value
    return str(value)


def _row_of(d: Delivery) -> list[str]:
    return [
        d.match_id,
        d.date.isoformat(),
        d.format.value,
        str(d.innings_index),
        str(d.over_number),
        str(d.ball_in_over),
        d.batsman_id,
        d.non_striker_id,
        d.bowler_id,
        d.batsman_hand.value,
        d.bowler_hand.value,
        d.bowler_style.value,
        d.bowling_angle.value,
        repr(d.speed_kmh),
        repr(d.line_offset_m),
        FULL_TOSS_TOKEN if d.bounce_distance_m is None else repr(d.bounce_distance_m),
        repr(d.swing_deg),
        repr(d.turn_deg),
        repr(d.bounce_height_m),
        repr(d.release_height_m),
        d.shot_label or "",
        "" if d.shot_angle_deg is None else repr(d.shot_angle_deg),
        str(d.runs),
        "1" if d.wicket else "0",
        str(d.team_runs_before),
        str(d.team_wickets_before),
    ]


def write_corpus(corpus: Corpus, destination: str | Path | io.TextIOBase) -> None:
    """Serialize a corpus; floats use repr so parse(write(c)) == c exactly."""
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            _write_stream(corpus, fh)
    else:
        _write_stream(corpus, destination)


def _write_stream(corpus: Corpus, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for d in corpus.deliveries:
        writer.writerow(_row_of(d))


def delivery_from_dict(doc: dict) -> Delivery:
    """Build a Delivery from a JSON-style mapping (scenario history rows).

    Keys follow the corpus column names; bounce_distance_m accepts the "FT"
    token or null for a full toss.
    """
    missing = [c for c in COLUMNS if c not in doc]
    if missing:
        raise SchemaError(f"history delivery missing fields: {missing}")
    bounce = doc["bounce_distance_m"]
    if bounce == FULL_TOSS_TOKEN:
        bounce = None
    shot = doc["shot_label"] or None
    if shot is not None:
        shot = canonical_shot_label(shot)
    angle = doc["shot_angle_deg"]
    return Delivery(
        match_id=str(doc["match_id"]),
        date=dt.date.fromisoformat(doc["date"]),
        format=MatchFormat(doc["format"]),
        innings_index=int(doc["innings_index"]),
        over_number=int(doc["over_number"]),
        ball_in_over=int(doc["ball_in_over"]),
        batsman_id=str(doc["batsman_id"]),
        non_striker_id=str(doc["non_striker_id"]),
        bowler_id=str(doc["bowler_id"]),
        batsman_hand=Handedness(doc["batsman_hand"]),
        bowler_hand=Handedness(doc["bowler_hand"]),
        bowler_style=BowlerStyle(doc["bowler_style"]),
        bowling_angle=BowlingAngle(doc["bowling_angle"]),
        speed_kmh=float(doc["speed_kmh"]),
        line_offset_m=float(doc["line_offset_m"]),
        bounce_distance_m=None if bounce is None else float(bounce),
        swing_deg=float(doc["swing_deg"]),
        turn_deg=float(doc["turn_deg"]),
        bounce_height_m=float(doc["bounce_height_m"]),
        release_height_m=float(doc["release_height_m"]),
        shot_label=shot,
        shot_angle_deg=None if angle is None else normalize_angle(float(angle)),
        runs=int(doc["runs"]),
        wicket=doc["wicket"] in (True, 1, "1"),
        team_runs_before=int(doc["team_runs_before"]),
        team_wickets_before=int(doc["team_wickets_before"]),
    )


def delivery_to_dict(d: Delivery) -> dict:
    return {
        "match_id": d.match_id,
        "date": d.date.isoformat(),
        "format": d.format.value,
        "innings_index": d.innings_index,
        "over_number": d.over_number,
        "ball_in_over": d.ball_in_over,
        "batsman_id": d.batsman_id,
        "non_striker_id": d.non_striker_id,
        "bowler_id": d.bowler_id,
        "batsman_hand": d.batsman_hand.value,
        "bowler_hand": d.bowler_hand.value,
        "bowler_style": d.bowler_style.value,
        "bowling_angle": d.bowling_angle.value,
        "speed_kmh": d.speed_kmh,
        "line_offset_m": d.line_offset_m,
        "bounce_distance_m": d.bounce_distance_m,
        "swing_deg": d.swing_deg,
        "turn_deg": d.turn_deg,
        "bounce_height_m": d.bounce_height_m,
        "release_height_m": d.release_height_m,
        "shot_label": d.shot_label,
        "shot_angle_deg": d.shot_angle_deg,
        "runs": d.runs,
        "wicket": d.wicket,
        "team_runs_before": d.team_runs_before,
        "team_wickets_before": d.team_wickets_before,
    }


def iter_innings(corpus: Corpus) -> Iterator[tuple[tuple[str, int], list[Delivery]]]:
    """Yield ((match_id, innings_index), deliveries) groups in corpus order."""
    current_key = None
    bucket: list[Delivery] = []
    for d in corpus.deliveries:
        key = (d.match_id, d.innings_index)
        if key != current_key:
            if bucket:
                yield current_key, bucket
            current_key, bucket = key, []
        bucket.append(d)
    if bucket:
        yield current_key, bucket


def innings_first_total(corpus: Corpus) -> dict[str, int]:
    """Final first-innings total per match, for chase-target context."""
    totals: dict[str, int] = {}
    for (match_id, innings), balls in iter_innings(corpus):
        if innings == 1:
            last = balls[-1]
            totals[match_id] = last.team_runs_before + last.runs
    return totals
