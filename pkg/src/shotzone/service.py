"""HTTP JSON service: prediction and simulation against an immutable snapshot.

Zone names, not indices, travel on the wire. The loaded bundle + profile
store form an atomic snapshot; reload builds a fresh snapshot off to the side
and swaps it in, so in-flight requests finish on the old one.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .data import parse_corpus
from .errors import ConfigError, ShotzoneError, UnknownPlayer
from .frames import (
    ProfileStore,
    build_profile_store,
    feature_ledger_export,
    load_profile_store,
)
from .models import ModelBundle, load_bundle
from .profiles import WINDOW, blend_weight
from .simulate import (
    ScenarioGrid,
    build_grid,
    grid_from_dict,
    predict_scenario,
    scenario_from_dict,
    summarize,
    sweep_report,
)
from .taxonomy import ZONES, taxonomy_export

MAX_GRID_CELLS = 4096


@dataclass
class ServiceConfig:
    bundle_path: str | Path
    corpus_path: str | Path | None = None  # fold profiles from a corpus...
    store_path: str | Path | None = None  # ...or load a prebuilt store
    allow_unknown: bool = False
    static_dir: str | Path | None = None


@dataclass(frozen=True)
class Snapshot:
    bundle: ModelBundle
    store: ProfileStore


class ServiceState:
    """Holds the current snapshot; reload swaps atomically under a lock."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.Lock()
        self._snapshot: Snapshot | None = None

    def load(self, bundle_path: str | Path | None = None) -> Snapshot:
        path = bundle_path or self.config.bundle_path
        bundle = load_bundle(path)
        if self.config.store_path:
            store = load_profile_store(self.config.store_path)
        elif self.config.corpus_path:
            store = build_profile_store(parse_corpus(self.config.corpus_path))
        else:
            raise ConfigError("service needs a corpus_path or a store_path")
        store.check_versions(bundle.taxonomy_version, bundle.ledger_version)
        snapshot = Snapshot(bundle=bundle, store=store)
        with self._lock:
            self._snapshot = snapshot
        return snapshot

    def snapshot(self) -> Snapshot:
        with self._lock:
            snap = self._snapshot
        if snap is None:
            raise _NotLoaded()
        return snap


class _NotLoaded(Exception):
    pass


# --- request schemas ---------------------------------------------------------------

LineName = Literal["WideOutsideOff", "OutsideOff", "OffStump", "MiddleAndLeg", "DownLeg"]
LengthName = Literal["FullToss", "Yorker", "Full", "GoodLength", "BackOfALength", "Short"]
AngleName = Literal["OverTheWicket", "AroundTheWicket"]
HandName = Literal["Right", "Left"]
StyleName = Literal["Fast", "FastMedium", "FingerSpin", "WristSpin"]


class DeliverySpec(BaseModel):
    line: LineName | None = None
    line_offset_m: float | None = Field(None, ge=-1.6, le=1.6)
    length: LengthName | None = None
    bounce_distance_m: float | None = Field(None, ge=0.0, le=20.0)
    speed_kmh: float = Field(135.0, ge=40.0, le=165.0)
    swing_deg: float = 0.0
    turn_deg: float = 0.0
    bounce_height_m: float | None = Field(None, ge=0.0)
    release_height_m: float = Field(2.2, ge=1.0, le=2.6)
    angle: AngleName = "OverTheWicket"

    @model_validator(mode="after")
    def _complete(self):
        if self.length is None and self.bounce_distance_m is None:
            raise ValueError("length: give a length band or bounce_distance_m")
        if self.line is None and self.line_offset_m is None:
            raise ValueError("line: give a line band or line_offset_m")
        return self


class BatsmanState(BaseModel):
    runs: int = Field(0, ge=0)
    balls_faced: int = Field(0, ge=0)
    phase: Literal["0-9", ">60", "fresh", "set"] | None = None
    consecutive_dots: int = Field(0, ge=0)
    fours: int = Field(0, ge=0)
    sixes: int = Field(0, ge=0)
    position: int = Field(3, ge=1, le=11)


class MatchState(BaseModel):
    format: Literal["ODI", "T20"] = "ODI"
    innings: int = Field(1, ge=1, le=2)
    over: int = Field(0, ge=0, le=49)
    ball: int = Field(1, ge=1, le=6)
    team_runs: int = Field(0, ge=0)
    team_wickets: int = Field(0, ge=0, le=9)
    target: int | None = Field(None, ge=1)
    partnership_runs: int = Field(0, ge=0)
    partnership_balls: int = Field(0, ge=0)
    prev_ball_runs: int = Field(0, ge=0, le=6)
    prev_ball_wicket: bool = False


class ScenarioRequest(BaseModel):
    batsman: str
    bowler: str
    batsman_hand: HandName | None = None
    bowler_hand: HandName | None = None
    bowler_style: StyleName | None = None
    delivery: DeliverySpec
    batsman_state: BatsmanState = Field(default_factory=BatsmanState)
    match: MatchState = Field(default_factory=MatchState)
    history: list[dict] | None = None


class GridAxes(BaseModel):
    line: list[LineName] | None = None
    length: list[LengthName] | None = None
    bowler: list[str] | None = None
    angle: list[AngleName] | None = None
    phase: list[Literal["0-9", ">60", "fresh", "set"]] | None = None


class GridRequest(BaseModel):
    base: ScenarioRequest
    axes: GridAxes = Field(default_factory=GridAxes)


def _scenario_doc(req: ScenarioRequest, allow_unknown: bool) -> dict:
    doc = req.model_dump()
    doc["allow_unknown"] = allow_unknown
    return doc


def _distribution_doc(dist: np.ndarray) -> dict[str, float]:
    return {zone.name: float(p) for zone, p in zip(ZONES, dist)}


def _model_info(bundle: ModelBundle) -> dict:
    return {
        "kind": bundle.kind,
        "taxonomy_version": bundle.taxonomy_version,
        "ledger_version": bundle.ledger_version,
        "manifest": bundle.manifest,
        "config": bundle.config,
        "service_version": __version__,
    }


def create_app(config: ServiceConfig, defer_load: bool = False) -> FastAPI:
    app = FastAPI(title="shotzone", version=__version__)
    state = ServiceState(config)
    app.state.service = state
    if not defer_load:
        state.load()

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"),
             "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(_NotLoaded)
    async def _not_loaded_handler(request: Request, exc: _NotLoaded):
        return JSONResponse(status_code=503, content={"detail": "bundle not loaded"})

    @app.exception_handler(UnknownPlayer)
    async def _unknown_player_handler(request: Request, exc: UnknownPlayer):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ConfigError)
    async def _config_handler(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400,
                            content={"errors": [{"field": "", "message": str(exc)}]})

    @app.exception_handler(ShotzoneError)
    async def _domain_handler(request: Request, exc: ShotzoneError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/api/players")
    def players():
        snap = state.snapshot()
        out = []
        for pid in sorted(snap.store.players):
            meta = snap.store.players[pid]
            profile = snap.store.profiles.get(pid)
            n_bat = profile.batting.n_seen if profile else 0
            n_bowl = profile.bowling.n_seen if profile else 0
            out.append({
                "id": pid,
                "name": meta.display_name,
                "handedness": meta.handedness.value,
                "roles": sorted(meta.roles),
                "batting": {
                    "n_seen": n_bat,
                    "blend_weight": blend_weight(n_bat),
                    "fully_personalized": n_bat >= WINDOW,
                },
                "bowling": {
                    "n_seen": n_bowl,
                    "blend_weight": blend_weight(n_bowl),
                    "fully_personalized": n_bowl >= WINDOW,
                    "style": meta.bowling_style.value if meta.bowling_style else None,
                },
            })
        return {"players": out}

    @app.get("/api/model")
    def model_info():
        snap = state.snapshot()
        return _model_info(snap.bundle)

    @app.get("/api/taxonomy")
    def taxonomy():
        doc = taxonomy_export()
        doc["feature_ledger"] = feature_ledger_export()
        return doc

    @app.post("/api/predict")
    def predict(req: ScenarioRequest):
        snap = state.snapshot()
        scenario = scenario_from_dict(_scenario_doc(req, config.allow_unknown))
        dist = predict_scenario(snap.bundle, snap.store, scenario)
        return {
            "distribution": _distribution_doc(dist),
            "summary": summarize(dist).to_dict(),
            "model_info": _model_info(snap.bundle),
        }

    @app.post("/api/simulate")
    def simulate(req: GridRequest):
        snap = state.snapshot()
        axes = {k: v for k, v in req.axes.model_dump().items() if v is not None}
        grid_doc = {"base": _scenario_doc(req.base, config.allow_unknown), "axes": axes}
        grid: ScenarioGrid = grid_from_dict(grid_doc)
        n_cells = len(build_grid(grid, snap.store))
        if n_cells > MAX_GRID_CELLS:
            return JSONResponse(
                status_code=413,
                content={"detail": f"grid of {n_cells} scenarios exceeds the "
                                   f"cap of {MAX_GRID_CELLS}"})
        rows = sweep_report(snap.bundle, snap.store, grid)
        return {"n_scenarios": len(rows), "rows": [r.to_dict() for r in rows]}

    @app.post("/api/reload")
    def reload(body: dict | None = None):
        path = (body or {}).get("bundle_path")
        snap = state.load(path)
        return {"status": "reloaded", "model_info": _model_info(snap.bundle)}

    if config.static_dir:
        app.mount("/", StaticFiles(directory=str(config.static_dir), html=True),
                  name="ui")
    return app
