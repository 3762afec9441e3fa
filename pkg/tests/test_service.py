import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from shotzone.data import write_corpus
from shotzone.frames import build_profile_store, save_profile_store
from shotzone.models import TrainConfig, make_experiment, save_bundle, train_model
from shotzone.profiles import blend_weight
from shotzone.service import MAX_GRID_CELLS, ServiceConfig, create_app

FAST = TrainConfig(hidden=16, depth=2, hidden_head=16, max_epochs=2, batch_size=128)


@pytest.fixture(scope="module")
def artifacts(small_corpus, tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    corpus_path = root / "corpus.csv"
    write_corpus(small_corpus, corpus_path)
    experiment = make_experiment(small_corpus, 0.2)
    bundle = train_model("personalized_lstm", experiment, FAST, seed=3)
    bundle_path = root / "model.bin"
    save_bundle(bundle, bundle_path)
    store = build_profile_store(small_corpus)
    store_path = root / "store.json"
    save_profile_store(store, store_path)
    batsman = sorted(p for p, meta in store.players.items() if "batsman" in meta.roles)[0]
    bowler = sorted(p for p, meta in store.players.items() if "bowler" in meta.roles)[0]
    return {"root": root, "corpus": corpus_path, "bundle": bundle_path,
            "store": store_path, "batsman": batsman, "bowler": bowler,
            "corpus_obj": small_corpus}


@pytest.fixture(scope="module")
def client(artifacts):
    config = ServiceConfig(bundle_path=artifacts["bundle"],
                           store_path=artifacts["store"])
    app = create_app(config)
    return TestClient(app)


def scenario_body(artifacts, **delivery_overrides):
    delivery = {"line": "OffStump", "length": "GoodLength", "speed_kmh": 138.0,
                "angle": "OverTheWicket"}
    delivery.update(delivery_overrides)
    return {
        "batsman": artifacts["batsman"],
        "bowler": artifacts["bowler"],
        "delivery": delivery,
        "batsman_state": {"runs": 12, "balls_faced": 15},
        "match": {"format": "ODI", "innings": 1, "over": 20, "ball": 3,
                  "team_runs": 95, "team_wickets": 2},
    }


class TestPlayersAndModel:
    def test_players_directory(self, client, artifacts):
        body = client.get("/api/players").json()
        players = {p["id"]: p for p in body["players"]}
        store_players = artifacts["corpus_obj"].players
        assert set(players) == set(store_players)
        for pid, entry in players.items():
            assert entry["batting"]["blend_weight"] == blend_weight(
                entry["batting"]["n_seen"])
            assert entry["bowling"]["blend_weight"] == blend_weight(
                entry["bowling"]["n_seen"])
            assert entry["handedness"] in ("Right", "Left")

    def test_model_manifest(self, client, artifacts):
        body = client.get("/api/model").json()
        assert body["kind"] == "personalized_lstm"
        assert body["manifest"]["seed"] == 3
        assert body["manifest"]["corpus_digest"] == artifacts["corpus_obj"].digest()

    def test_taxonomy_export(self, client):
        body = client.get("/api/taxonomy").json()
        assert len(body["zones"]) == 17
        assert len(body["shots"]) == 25
        assert len(body["feature_ledger"]["context_features"]) == 39
        assert len(body["feature_ledger"]["aux_features"]) == 46


class TestPredict:
    def test_valid_scenario(self, client, artifacts):
        resp = client.post("/api/predict", json=scenario_body(artifacts))
        assert resp.status_code == 200
        body = resp.json()
        dist = body["distribution"]
        assert len(dist) == 17
        assert abs(sum(dist.values()) - 1.0) < 1e-9
        assert all(v >= 0 for v in dist.values())
        assert "defensive" in dist and "mid_wicket_attack" in dist
        summary = body["summary"]
        group_total = (summary["p_defensive"] + summary["p_rotate"]
                       + summary["p_attack"] + summary["p_deflect"])
        assert abs(group_total - 1.0) < 1e-9

    def test_replay_byte_identical(self, client, artifacts):
        body = scenario_body(artifacts)
        r1 = client.post("/api/predict", json=body)
        r2 = client.post("/api/predict", json=body)
        assert r1.content == r2.content

    def test_missing_length_names_field(self, client, artifacts):
        body = scenario_body(artifacts)
        del body["delivery"]["length"]
        resp = client.post("/api/predict", json=body)
        assert resp.status_code == 400
        text = json.dumps(resp.json()["errors"])
        assert "length" in text

    def test_unknown_player_404(self, client, artifacts):
        body = scenario_body(artifacts)
        body["batsman"] = "ghost"
        resp = client.post("/api/predict", json=body)
        assert resp.status_code == 404

    def test_unknown_player_allowed(self, artifacts):
        config = ServiceConfig(bundle_path=artifacts["bundle"],
                               store_path=artifacts["store"], allow_unknown=True)
        app = create_app(config)
        with TestClient(app) as permissive:
            body = scenario_body(artifacts)
            body["batsman"] = "ghost"
            body["batsman_hand"] = "Right"
            resp = permissive.post("/api/predict", json=body)
            assert resp.status_code == 200

    def test_bad_band_rejected(self, client, artifacts):
        body = scenario_body(artifacts, length="Beamer")
        resp = client.post("/api/predict", json=body)
        assert resp.status_code == 400


class TestSimulate:
    def test_sweep_rows_in_axis_order(self, client, artifacts):
        body = {"base": scenario_body(artifacts),
                "axes": {"length": ["Yorker", "GoodLength", "Short"]}}
        resp = client.post("/api/simulate", json=body)
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert [r["axes"]["length"] for r in rows] == ["Yorker", "GoodLength", "Short"]
        for row in rows:
            assert abs(sum(row["distribution"].values()) - 1.0) < 1e-9

    def test_single_cell_matches_predict(self, client, artifacts):
        grid = {"base": scenario_body(artifacts), "axes": {}}
        sim = client.post("/api/simulate", json=grid).json()
        pred = client.post("/api/predict", json=scenario_body(artifacts)).json()
        assert sim["n_scenarios"] == 1
        assert sim["rows"][0]["distribution"] == pred["distribution"]
        assert sim["rows"][0]["summary"] == pred["summary"]

    def test_grid_cap_413(self, client, artifacts):
        # 5 lines x 6 lengths x 2 angles x 2 phases = 120 per bowler; need > 4096
        bowlers = [artifacts["bowler"]] * 40
        body = {"base": scenario_body(artifacts),
                "axes": {"line": ["WideOutsideOff", "OutsideOff", "OffStump",
                                   "MiddleAndLeg", "DownLeg"],
                         "length": ["FullToss", "Yorker", "Full", "GoodLength",
                                    "BackOfALength", "Short"],
                         "angle": ["OverTheWicket", "AroundTheWicket"],
                         "phase": ["0-9", ">60"],
                         "bowler": bowlers}}
        resp = client.post("/api/simulate", json=body)
        assert resp.status_code == 413
        assert str(MAX_GRID_CELLS) in resp.json()["detail"]


class TestLifecycle:
    def test_503_before_load(self, artifacts):
        config = ServiceConfig(bundle_path=artifacts["bundle"],
                               store_path=artifacts["store"])
        app = create_app(config, defer_load=True)
        with TestClient(app) as cold:
            assert cold.get("/api/players").status_code == 503
            assert cold.post("/api/predict",
                             json=scenario_body(artifacts)).status_code == 503

    def test_reload(self, artifacts):
        config = ServiceConfig(bundle_path=artifacts["bundle"],
                               store_path=artifacts["store"])
        app = create_app(config, defer_load=True)
        with TestClient(app) as c:
            assert c.get("/api/model").status_code == 503
            assert c.post("/api/reload", json={}).status_code == 200
            assert c.get("/api/model").status_code == 200
