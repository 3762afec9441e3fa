"""Shot taxonomy, 17-zone target space, pitch geometry bands and mirroring.

Everything downstream (features, models, simulation, the UI) derives its
ground truth from the tables in this module. Angles are measured in degrees,
counterclockwise from straight down the pitch toward the bowler's stumps,
in batsman-canonical coordinates: the world is mirrored so the striker is
always right-handed, which puts his off side in (0, 180).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import OutOfRange, UnknownShotLabel

TAXONOMY_VERSION = "1"


class Handedness(str, Enum):
    RIGHT = "Right"
    LEFT = "Left"


class BowlingAngle(str, Enum):
    OVER = "OverTheWicket"
    AROUND = "AroundTheWicket"


class BowlerStyle(str, Enum):
    FAST = "Fast"
    FAST_MEDIUM = "FastMedium"
    FINGER_SPIN = "FingerSpin"
    WRIST_SPIN = "WristSpin"


PACE_STYLES = frozenset({BowlerStyle.FAST, BowlerStyle.FAST_MEDIUM})
SPIN_STYLES = frozenset({BowlerStyle.FINGER_SPIN, BowlerStyle.WRIST_SPIN})


# --- shot labels -> aggression level ----------------------------------------

DEFENSIVE_SHOTS = (
    "No shot",
    "Forward Defensive",
    "Backward Defensive",
    "Fended",
    "Leave",
    "Padded",
    "Shoulders Arms",
)

WORKING_SHOTS = ("Worked", "Pushed", "Steer", "Dropped")

ATTACKING_SHOTS = (
    "Drive",
    "Sweep",
    "Cut",
    "Slog-sweep",
    "Hook",
    "Upper Cut",
    "Pull",
    "Glance",
    "Reverse Sweep",
    "Flick",
    "Late Cut",
    "Slog",
    "Scoop",
    "Switch Hit",
)

SHOT_LABELS = DEFENSIVE_SHOTS + WORKING_SHOTS + ATTACKING_SHOTS

_AGGRESSION_BY_KEY = {}


def _shot_key(name: str) -> str:
    # case/whitespace-insensitive lookup; hyphens are significant
    return " ".join(name.split()).lower()


for _name in DEFENSIVE_SHOTS:
    _AGGRESSION_BY_KEY[_shot_key(_name)] = 0
for _name in WORKING_SHOTS:
    _AGGRESSION_BY_KEY[_shot_key(_name)] = 1
for _name in ATTACKING_SHOTS:
    _AGGRESSION_BY_KEY[_shot_key(_name)] = 2

_CANONICAL_BY_KEY = {_shot_key(n): n for n in SHOT_LABELS}


def canonical_shot_label(name: str) -> str:
    """Return the canonical spelling of a shot label, or raise UnknownShotLabel."""
    try:
        return _CANONICAL_BY_KEY[_shot_key(name)]
    except KeyError:
        raise UnknownShotLabel(f"unknown shot label: {name!r}") from None


def aggression_label(shot: str) -> int:
    """Map a raw shot label to its aggression level 0 (defensive), 1 (working) or 2 (attacking)."""
    try:
        return _AGGRESSION_BY_KEY[_shot_key(shot)]
    except KeyError:
        raise UnknownShotLabel(f"unknown shot label: {shot!r}") from None


# --- field sectors and zones -------------------------------------------------

SECTOR_WIDTH_DEG = 40.0

# angular order, 9 x 40 degrees starting at theta = 0 (down the pitch),
# counterclockwise through the off side
SECTORS = (
    "MidOff",
    "ExtraCover",
    "Cover",
    "Point",
    "ThirdMan",
    "FineLeg",
    "SquareLeg",
    "MidWicket",
    "MidOn",
)

# deflection zones: the two sectors behind the bat where both aggression
# levels share a single target id
COMBINED_SECTORS = frozenset({"ThirdMan", "FineLeg"})

OFF_SIDE_SECTORS = frozenset({"MidOff", "ExtraCover", "Cover", "Point", "ThirdMan"})
LEG_SIDE_SECTORS = frozenset({"FineLeg", "SquareLeg", "MidWicket", "MidOn"})


class AggressionClass(str, Enum):
    DEFENSIVE = "Defensive"
    ROTATE = "Rotate"
    ATTACK = "Attack"
    COMBINED = "Combined"


@dataclass(frozen=True)
class Zone:
    id: int
    name: str
    sector: str | None  # None for the defensive zone
    aggression_class: AggressionClass
    theta_start: float | None  # canonical sector extent, None for defensive
    theta_end: float | None


def _build_zones() -> tuple[Zone, ...]:
    zones = [Zone(0, "defensive", None, AggressionClass.DEFENSIVE, None, None)]
    next_id = 1
    for i, sector in enumerate(SECTORS):
        start, end = i * SECTOR_WIDTH_DEG, (i + 1) * SECTOR_WIDTH_DEG
        snake = _snake(sector)
        if sector in COMBINED_SECTORS:
            zones.append(Zone(next_id, snake, sector, AggressionClass.COMBINED, start, end))
            next_id += 1
        else:
            zones.append(Zone(next_id, f"{snake}_rotate", sector, AggressionClass.ROTATE, start, end))
            zones.append(Zone(next_id + 1, f"{snake}_attack", sector, AggressionClass.ATTACK, start, end))
            next_id += 2
    return tuple(zones)


def _snake(name: str) -> str:
    out = [name[0].lower()]
    for ch in name[1:]:
        if ch.isupper():
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


ZONES: tuple[Zone, ...] = _build_zones()
N_ZONES = len(ZONES)  # 17

ZONE_BY_NAME = {z.name: z for z in ZONES}
DEFENSIVE_ZONE_ID = 0
ROTATE_ZONE_IDS = tuple(z.id for z in ZONES if z.aggression_class is AggressionClass.ROTATE)
ATTACK_ZONE_IDS = tuple(z.id for z in ZONES if z.aggression_class is AggressionClass.ATTACK)
DEFLECT_ZONE_IDS = tuple(z.id for z in ZONES if z.aggression_class is AggressionClass.COMBINED)
OFF_SIDE_ZONE_IDS = tuple(z.id for z in ZONES if z.sector in OFF_SIDE_SECTORS)
LEG_SIDE_ZONE_IDS = tuple(z.id for z in ZONES if z.sector in LEG_SIDE_SECTORS)

_ZONE_LOOKUP: dict[tuple[str, int], int] = {}
for _z in ZONES:
    if _z.sector is None:
        continue
    if _z.aggression_class is AggressionClass.COMBINED:
        _ZONE_LOOKUP[(_z.sector, 1)] = _z.id
        _ZONE_LOOKUP[(_z.sector, 2)] = _z.id
    elif _z.aggression_class is AggressionClass.ROTATE:
        _ZONE_LOOKUP[(_z.sector, 1)] = _z.id
    else:
        _ZONE_LOOKUP[(_z.sector, 2)] = _z.id


def normalize_angle(theta_deg: float) -> float:
    """Reduce an angle to [0, 360)."""
    theta = theta_deg % 360.0
    return theta if theta != 360.0 else 0.0


def mirror_angle(theta_deg: float) -> float:
    """Reflect an angle across the down-the-pitch axis; involutive."""
    return (360.0 - normalize_angle(theta_deg)) % 360.0


def sector_of(theta_deg: float) -> str:
    """Canonical sector containing a (canonical) angle."""
    theta = normalize_angle(theta_deg)
    return SECTORS[int(theta // SECTOR_WIDTH_DEG)]


def zone_of(aggression: int, theta_deg: float, batsman: Handedness) -> int:
    """Target zone id for an aggression level, shot angle and striker handedness.

    Defensive shots land in the single defensive zone regardless of angle.
    Left-handers' angles are mirrored into the right-handed canonical frame
    before the sector lookup.
    """
    if aggression == 0:
        return DEFENSIVE_ZONE_ID
    if aggression not in (1, 2):
        raise ValueError(f"aggression must be 0, 1 or 2, got {aggression}")
    theta = normalize_angle(theta_deg)
    if batsman is Handedness.LEFT:
        theta = mirror_angle(theta)
    return _ZONE_LOOKUP[(sector_of(theta), aggression)]


# --- pitch bands --------------------------------------------------------------

class LengthBand(str, Enum):
    FULL_TOSS = "FullToss"
    YORKER = "Yorker"
    FULL = "Full"
    GOOD_LENGTH = "GoodLength"
    BACK_OF_A_LENGTH = "BackOfALength"
    SHORT = "Short"


# meters from the striker's stumps to the bounce point, left-closed/right-open,
# final band closed at the 20 m domain edge
LENGTH_THRESHOLDS = (
    (LengthBand.YORKER, 0.0, 2.0),
    (LengthBand.FULL, 2.0, 6.0),
    (LengthBand.GOOD_LENGTH, 6.0, 8.0),
    (LengthBand.BACK_OF_A_LENGTH, 8.0, 10.0),
    (LengthBand.SHORT, 10.0, 20.0),
)

MAX_BOUNCE_DISTANCE_M = 20.0


class LineBand(str, Enum):
    WIDE_OUTSIDE_OFF = "WideOutsideOff"
    OUTSIDE_OFF = "OutsideOff"
    OFF_STUMP = "OffStump"
    MIDDLE_AND_LEG = "MiddleAndLeg"
    DOWN_LEG = "DownLeg"


# meters off middle stump in canonical coordinates (positive = striker's off
# side), left-closed/right-open, top band closed at the +1.6 m domain edge
LINE_THRESHOLDS = (
    (LineBand.DOWN_LEG, -1.6, -0.25),
    (LineBand.MIDDLE_AND_LEG, -0.25, 0.1),
    (LineBand.OFF_STUMP, 0.1, 0.25),
    (LineBand.OUTSIDE_OFF, 0.25, 0.6),
    (LineBand.WIDE_OUTSIDE_OFF, 0.6, 1.6),
)

MAX_LINE_OFFSET_M = 1.6


def length_band(bounce_distance_m: float | None) -> LengthBand:
    """Band for a bounce distance; None marks a delivery that never bounced."""
    if bounce_distance_m is None:
        return LengthBand.FULL_TOSS
    d = float(bounce_distance_m)
    if d < 0.0 or d > MAX_BOUNCE_DISTANCE_M:
        raise OutOfRange(f"bounce distance {d} m outside [0, {MAX_BOUNCE_DISTANCE_M}]")
    for band, lo, hi in LENGTH_THRESHOLDS:
        if lo <= d < hi:
            return band
    return LengthBand.SHORT  # d == 20.0 exactly


def canonical_offset(lateral_offset_m: float, batsman: Handedness) -> float:
    """Mirror a physical lateral offset into batsman-canonical coordinates.

    Physical offsets are measured positive toward a right-hander's off side;
    canonically, positive is always the striker's own off side.
    """
    return -lateral_offset_m if batsman is Handedness.LEFT else lateral_offset_m


def line_band(lateral_offset_m: float, batsman: Handedness) -> LineBand:
    """Band for a physical lateral offset, canonicalized for handedness."""
    x = canonical_offset(float(lateral_offset_m), batsman)
    if x < -MAX_LINE_OFFSET_M or x > MAX_LINE_OFFSET_M:
        raise OutOfRange(f"lateral offset {lateral_offset_m} m outside ±{MAX_LINE_OFFSET_M}")
    for band, lo, hi in LINE_THRESHOLDS:
        if lo <= x < hi:
            return band
    return LineBand.WIDE_OUTSIDE_OFF  # x == 1.6 exactly


# coarse length grouping used by rolling player profiles and simulation sweeps
class CoarseLength(str, Enum):
    YORKER = "yorker"  # Yorker + FullToss
    FULL = "full"
    GOOD = "good"  # GoodLength + BackOfALength
    SHORT = "short"


COARSE_LENGTHS = tuple(CoarseLength)

_COARSE_BY_BAND = {
    LengthBand.FULL_TOSS: CoarseLength.YORKER,
    LengthBand.YORKER: CoarseLength.YORKER,
    LengthBand.FULL: CoarseLength.FULL,
    LengthBand.GOOD_LENGTH: CoarseLength.GOOD,
    LengthBand.BACK_OF_A_LENGTH: CoarseLength.GOOD,
    LengthBand.SHORT: CoarseLength.SHORT,
}


def coarse_length(band: LengthBand) -> CoarseLength:
    return _COARSE_BY_BAND[band]


def coarse_length_index(bounce_distance_m: float | None) -> int:
    return COARSE_LENGTHS.index(coarse_length(length_band(bounce_distance_m)))


# band midpoints used when a simulation scenario names a band instead of a number
LENGTH_BAND_MIDPOINTS_M = {
    LengthBand.YORKER: 1.0,
    LengthBand.FULL: 4.0,
    LengthBand.GOOD_LENGTH: 7.0,
    LengthBand.BACK_OF_A_LENGTH: 9.0,
    LengthBand.SHORT: 15.0,
}

LINE_BAND_MIDPOINTS_M = {
    LineBand.DOWN_LEG: -0.925,
    LineBand.MIDDLE_AND_LEG: -0.075,
    LineBand.OFF_STUMP: 0.175,
    LineBand.OUTSIDE_OFF: 0.425,
    LineBand.WIDE_OUTSIDE_OFF: 1.1,
}


# --- machine-readable export ---------------------------------------------------

def taxonomy_export() -> dict:
    """One document shared by tests, the service and the UI.

    Zone display ranges are included for both handedness values: left-handed
    strikers render the same canonical zones mirrored across the pitch axis.
    """
    zones = []
    for z in ZONES:
        entry = {
            "id": z.id,
            "name": z.name,
            "sector": z.sector,
            "aggression_class": z.aggression_class.value,
            "theta_start": z.theta_start,
            "theta_end": z.theta_end,
        }
        if z.theta_start is not None:
            entry["display"] = {
                "Right": [z.theta_start, z.theta_end],
                "Left": [mirror_angle(z.theta_end), mirror_angle(z.theta_start) or 360.0],
            }
        zones.append(entry)
    return {
        "taxonomy_version": TAXONOMY_VERSION,
        "shots": [{"name": n, "aggression": aggression_label(n)} for n in SHOT_LABELS],
        "zones": zones,
        "zone_groups": {
            "defensive": [DEFENSIVE_ZONE_ID],
            "rotate": list(ROTATE_ZONE_IDS),
            "attack": list(ATTACK_ZONE_IDS),
            "deflect": list(DEFLECT_ZONE_IDS),
            "off_side": list(OFF_SIDE_ZONE_IDS),
            "leg_side": list(LEG_SIDE_ZONE_IDS),
        },
        "length_bands": [
            {"name": band.value, "lo_m": lo, "hi_m": hi} for band, lo, hi in LENGTH_THRESHOLDS
        ],
        "full_toss_marker": "FT",
        "line_bands": [
            {"name": band.value, "lo_m": lo, "hi_m": hi} for band, lo, hi in LINE_THRESHOLDS
        ],
        "coarse_lengths": {b.value: c.value for b, c in _COARSE_BY_BAND.items()},
        "band_midpoints": {
            "length_m": {b.value: v for b, v in LENGTH_BAND_MIDPOINTS_M.items()},
            "line_m": {b.value: v for b, v in LINE_BAND_MIDPOINTS_M.items()},
        },
    }
