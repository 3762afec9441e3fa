"""Lookback-6 sequence frames, full-corpus dataset assembly and the profile store.

A frame is the model input for one ball: the context vectors of the previous
five balls of the same innings plus the current one (padded with zeros and
masked at an innings start), the 46-entry personalized vector, and the target
zone when the ball carries a shot. Profiles and personalized entries for ball
i are computed strictly from balls before i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .context import FEATURE_LEDGER_VERSION, InningsTracker, N_CONTEXT
from .data import Corpus, Delivery, Player, innings_first_total, iter_innings, target_of
from .errors import FormatVersionError, VersionMismatch
from .profiles import (
    AuxGlobals,
    N_AUX,
    PlayerProfile,
    aux_vector,
    compute_aux_globals,
)
from .taxonomy import TAXONOMY_VERSION, BowlerStyle, Handedness

LOOKBACK = 6  # including the current delivery

STORE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FeatureFrame:
    """One model input: lookback sequence, padding mask, personalized vector."""

    sequence: np.ndarray  # (6, 39), oldest first, current delivery last
    mask: np.ndarray  # (6,) bool, True marks a padded slot
    aux: np.ndarray  # (46,)
    target: int | None = None

    def __post_init__(self):
        assert self.sequence.shape == (LOOKBACK, N_CONTEXT)
        assert self.mask.shape == (LOOKBACK,)
        assert self.aux.shape == (N_AUX,)
        assert not self.mask[-1], "the current delivery is never masked"
        assert not np.any(self.sequence[self.mask]), "padded slots must be zero"


def sequence_window(innings_deliveries: list[Delivery], i: int,
                    chase_target: int | None = None,
                    aux: np.ndarray | None = None) -> FeatureFrame:
    """Frame for ball i of one innings; earlier slots are zero-padded and masked."""
    if not 0 <= i < len(innings_deliveries):
        raise IndexError(f"index {i} outside innings of {len(innings_deliveries)} balls")
    tracker = InningsTracker(target=chase_target)
    vectors = []
    for d in innings_deliveries[: i + 1]:
        vectors.append(tracker.context_vector(d))
        tracker.update(d)
    seq = np.zeros((LOOKBACK, N_CONTEXT), dtype=np.float64)
    mask = np.ones(LOOKBACK, dtype=bool)
    start = max(0, i - LOOKBACK + 1)
    window = vectors[start: i + 1]
    seq[LOOKBACK - len(window):] = window
    mask[LOOKBACK - len(window):] = False
    d = innings_deliveries[i]
    target = None if d.shot_label is None else target_of(d)
    return FeatureFrame(
        sequence=seq,
        mask=mask,
        aux=np.zeros(N_AUX, dtype=np.float64) if aux is None else aux,
        target=target,
    )


@dataclass
class FrameDataset:
    """Column-oriented frames for a whole corpus, ready for batched training.

    ``win[i]`` holds the global row indices of frame i's sequence slots
    (-1 = padded); gathering ``ctx[win[i]]`` with the mask applied yields the
    frame's sequence.
    """

    ctx: np.ndarray  # (N, 39) float64
    aux: np.ndarray  # (N, 46) float64
    win: np.ndarray  # (N, 6) int32
    mask: np.ndarray  # (N, 6) bool, True = padded
    y: np.ndarray  # (N,) int16, -1 = no training target
    dates: np.ndarray  # (N,) int64, proleptic ordinals
    match_ids: list[str] = field(repr=False, default_factory=list)
    innings_spans: list[tuple[int, int]] = field(repr=False, default_factory=list)

    def __len__(self) -> int:
        return self.ctx.shape[0]

    @property
    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.y >= 0)

    def frame(self, i: int) -> FeatureFrame:
        idx = self.win[i]
        seq = np.where(idx[:, None] >= 0, self.ctx[np.maximum(idx, 0)], 0.0)
        return FeatureFrame(
            sequence=seq,
            mask=self.mask[i].copy(),
            aux=self.aux[i].copy(),
            target=int(self.y[i]) if self.y[i] >= 0 else None,
        )


def build_dataset(corpus: Corpus, aux_globals: AuxGlobals,
                  profiles: dict[str, PlayerProfile] | None = None) -> FrameDataset:
    """Fold the corpus into frames; profiles update as the fold advances.

    Passing a profiles dict warm-starts the fold (e.g. evaluating new matches
    on top of an existing history) and leaves the final state in that dict.
    """
    n = len(corpus.deliveries)
    ctx = np.zeros((n, N_CONTEXT), dtype=np.float64)
    aux = np.zeros((n, N_AUX), dtype=np.float64)
    win = np.full((n, LOOKBACK), -1, dtype=np.int32)
    mask = np.ones((n, LOOKBACK), dtype=bool)
    y = np.full(n, -1, dtype=np.int16)
    dates = np.zeros(n, dtype=np.int64)
    match_ids: list[str] = []
    spans: list[tuple[int, int]] = []
    if profiles is None:
        profiles = {}
    chase_targets = innings_first_total(corpus)

    row = 0
    for (match_id, innings_index), balls in iter_innings(corpus):
        target = None
        if innings_index == 2 and match_id in chase_targets:
            target = chase_targets[match_id] + 1
        tracker = InningsTracker(target=target)
        start_row = row
        for local, d in enumerate(balls):
            ctx[row] = tracker.context_vector(d)
            bat = profiles.get(d.batsman_id)
            bowl = profiles.get(d.bowler_id)
            aux[row] = aux_vector(bat, bowl, aux_globals)
            if d.shot_label is not None:
                y[row] = target_of(d)
            first = max(0, local - LOOKBACK + 1)
            width = local - first + 1
            win[row, LOOKBACK - width:] = np.arange(start_row + first, row + 1)
            mask[row, LOOKBACK - width:] = False
            dates[row] = d.date.toordinal()
            match_ids.append(d.match_id)

            tracker.update(d)
            if bat is None:
                bat = profiles.setdefault(d.batsman_id, PlayerProfile(d.batsman_id))
            bat.update(d)
            if bowl is None:
                bowl = profiles.setdefault(d.bowler_id, PlayerProfile(d.bowler_id))
            if d.bowler_id != d.batsman_id:
                bowl.update(d)
            row += 1
        spans.append((start_row, row))

    return FrameDataset(ctx=ctx, aux=aux, win=win, mask=mask, y=y, dates=dates,
                        match_ids=match_ids, innings_spans=spans)


# --- profile store -----------------------------------------------------------------

@dataclass
class ProfileStore:
    """Immutable-after-build player directory + rolling profiles for serving."""

    profiles: dict[str, PlayerProfile]
    players: dict[str, Player]
    taxonomy_version: str = TAXONOMY_VERSION
    ledger_version: str = FEATURE_LEDGER_VERSION

    def check_versions(self, taxonomy_version: str, ledger_version: str) -> None:
        if (self.taxonomy_version != taxonomy_version
                or self.ledger_version != ledger_version):
            raise VersionMismatch(
                f"profile store versions ({self.taxonomy_version}, {self.ledger_version}) "
                f"!= bundle versions ({taxonomy_version}, {ledger_version})")


def build_profile_store(corpus: Corpus) -> ProfileStore:
    profiles: dict[str, PlayerProfile] = {}
    for d in corpus.deliveries:
        profiles.setdefault(d.batsman_id, PlayerProfile(d.batsman_id)).update(d)
        if d.bowler_id != d.batsman_id:
            profiles.setdefault(d.bowler_id, PlayerProfile(d.bowler_id)).update(d)
    return ProfileStore(profiles=profiles, players=dict(corpus.players))


def _window_to_dict(window) -> dict:
    doc = {
        "records": [list(rec) for rec in window.buffer],
        "n_seen": window.n_seen,
        "n_matches": window.n_matches,
        "last_match": window._last_match,
    }
    if hasattr(window.stats, "float_state"):
        doc["float_state"] = window.stats.float_state()
    return doc


def _window_from_dict(window, doc: dict) -> None:
    for rec in doc["records"]:
        window.buffer.append(tuple(rec))
        window.stats.apply(tuple(rec), +1)
    window.n_seen = doc["n_seen"]
    window.n_matches = doc["n_matches"]
    window._last_match = doc["last_match"]
    if "float_state" in doc and hasattr(window.stats, "set_float_state"):
        window.stats.set_float_state(doc["float_state"])


def save_profile_store(store: ProfileStore, path: str | Path) -> None:
    doc = {
        "format_version": STORE_FORMAT_VERSION,
        "taxonomy_version": store.taxonomy_version,
        "ledger_version": store.ledger_version,
        "players": {
            pid: {
                "display_name": p.display_name,
                "batting_hand": p.batting_hand.value if p.batting_hand else None,
                "bowling_hand": p.bowling_hand.value if p.bowling_hand else None,
                "bowling_style": p.bowling_style.value if p.bowling_style else None,
                "roles": sorted(p.roles),
            }
            for pid, p in store.players.items()
        },
        "profiles": {
            pid: {
                "batting": _window_to_dict(prof.batting),
                "bowling": _window_to_dict(prof.bowling),
            }
            for pid, prof in store.profiles.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_profile_store(path: str | Path) -> ProfileStore:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatVersionError(f"unreadable profile store: {exc}") from exc
    if doc.get("format_version") != STORE_FORMAT_VERSION:
        raise FormatVersionError(
            f"profile store format {doc.get('format_version')!r}, expected "
            f"{STORE_FORMAT_VERSION}")
    players = {
        pid: Player(
            player_id=pid,
            display_name=p["display_name"],
            batting_hand=Handedness(p["batting_hand"]) if p["batting_hand"] else None,
            bowling_hand=Handedness(p["bowling_hand"]) if p["bowling_hand"] else None,
            bowling_style=BowlerStyle(p["bowling_style"]) if p["bowling_style"] else None,
            roles=frozenset(p["roles"]),
        )
        for pid, p in doc["players"].items()
    }
    profiles = {}
    for pid, pdoc in doc["profiles"].items():
        prof = PlayerProfile(pid)
        _window_from_dict(prof.batting, pdoc["batting"])
        _window_from_dict(prof.bowling, pdoc["bowling"])
        profiles[pid] = prof
    return ProfileStore(
        profiles=profiles,
        players=players,
        taxonomy_version=doc["taxonomy_version"],
        ledger_version=doc["ledger_version"],
    )


def feature_ledger_export() -> dict:
    """The combined 39 + 46 feature ledger shared with docs and the UI."""
    from .context import context_feature_ledger
    from .profiles import aux_feature_ledger

    return {
        "ledger_version": FEATURE_LEDGER_VERSION,
        "context_features": context_feature_ledger(),
        "aux_features": aux_feature_ledger(),
        "lookback": LOOKBACK,
    }


def compute_globals_for_split(corpus: Corpus, train_end: int) -> AuxGlobals:
    """Global means pooled over the training prefix only (leakage control)."""
    return compute_aux_globals(corpus.deliveries[:train_end])
