import dataclasses

import numpy as np
import pytest

from shotzone.errors import ConfigError, UnknownPlayer
from shotzone.frames import build_profile_store
from shotzone.models import TrainConfig, make_experiment, train_model
from shotzone.simulate import (
    PHASE_PRESETS,
    Scenario,
    ScenarioGrid,
    build_grid,
    grid_from_dict,
    mirror_scenario,
    predict_scenario,
    scenario_from_dict,
    summarize,
    sweep_report,
)
from shotzone.taxonomy import (
    BowlingAngle,
    Handedness,
    LengthBand,
    LineBand,
    ZONE_BY_NAME,
)

FAST = TrainConfig(hidden=16, depth=2, hidden_head=16, max_epochs=2, batch_size=128)


@pytest.fixture(scope="module")
def store(small_corpus):
    return build_profile_store(small_corpus)


@pytest.fixture(scope="module")
def bundle(small_corpus):
    experiment = make_experiment(small_corpus, holdout_fraction=0.2)
    return train_model("personalized_lstm", experiment, FAST, seed=2)


def base_scenario(store, **overrides):
    batsmen = sorted(pid for pid, p in store.players.items() if "batsman" in p.roles)
    bowlers = sorted(pid for pid, p in store.players.items() if "bowler" in p.roles)
    kw = dict(batsman_id=batsmen[0], bowler_id=bowlers[0],
              line=LineBand.OFF_STUMP, length=LengthBand.GOOD_LENGTH)
    kw.update(overrides)
    return Scenario(**kw)


class TestSummarize:
    def test_uniform_distribution(self):
        summary = summarize(np.full(17, 1.0 / 17.0))
        assert summary.p_defensive == pytest.approx(1 / 17, abs=1e-12)
        assert summary.p_rotate == pytest.approx(7 / 17, abs=1e-12)
        assert summary.p_attack == pytest.approx(7 / 17, abs=1e-12)
        assert summary.p_deflect == pytest.approx(2 / 17, abs=1e-12)
        total = (summary.p_defensive + summary.p_rotate + summary.p_attack
                 + summary.p_deflect)
        assert abs(total - 1.0) < 1e-9
        assert summary.off_side_share + summary.leg_side_share == pytest.approx(1.0, abs=1e-9)
        # 9 of the 16 directional zones sit on the off side
        assert summary.off_side_share == pytest.approx(9 / 16, abs=1e-12)

    def test_all_defensive(self):
        dist = np.zeros(17)
        dist[0] = 1.0
        summary = summarize(dist)
        assert summary.p_defensive == 1.0
        assert not summary.direction_defined
        assert summary.off_side_share is None

    def test_group_sums_linear(self):
        rng = np.random.default_rng(0)
        d1 = rng.dirichlet(np.ones(17))
        d2 = rng.dirichlet(np.ones(17))
        for alpha in (0.0, 0.25, 0.7, 1.0):
            mix = alpha * d1 + (1 - alpha) * d2
            s_mix = summarize(mix)
            s1, s2 = summarize(d1), summarize(d2)
            for name in ("p_defensive", "p_rotate", "p_attack", "p_deflect"):
                expected = alpha * getattr(s1, name) + (1 - alpha) * getattr(s2, name)
                assert getattr(s_mix, name) == pytest.approx(expected, abs=1e-12)

    def test_top_zones_ranked(self):
        dist = np.zeros(17)
        dist[5] = 0.5
        dist[9] = 0.3
        dist[0] = 0.2
        summary = summarize(dist)
        names = [z for z, _ in summary.top_zones]
        assert names[:3] == [
            next(z.name for z in __import__("shotzone.taxonomy", fromlist=["ZONES"]).ZONES if z.id == 5),
            "third_man",
            "defensive",
        ]


class TestGrid:
    def test_paper_grid_is_144(self, store, bundle):
        # 4 lines x 4 lengths x (4 right-arm x 2 angles + 1 left-arm x 1)
        players = {
            f"rb{i}": dataclasses.replace(store.players[sorted(store.players)[0]],
                                          player_id=f"rb{i}",
                                          bowling_hand=Handedness.RIGHT,
                                          roles=frozenset({"bowler"}))
            for i in range(4)
        }
        players["lb"] = dataclasses.replace(players["rb0"], player_id="lb",
                                            bowling_hand=Handedness.LEFT)
        fake_store = dataclasses.replace(store, players={**store.players, **players})
        grid = ScenarioGrid(
            base=base_scenario(store, allow_unknown=True),
            lines=[LineBand.WIDE_OUTSIDE_OFF, LineBand.OUTSIDE_OFF,
                   LineBand.OFF_STUMP, LineBand.MIDDLE_AND_LEG],
            lengths=[LengthBand.YORKER, LengthBand.FULL,
                     LengthBand.GOOD_LENGTH, LengthBand.SHORT],
            bowlers=["rb0", "rb1", "rb2", "rb3", "lb"],
            angles=[BowlingAngle.OVER, BowlingAngle.AROUND],
        )
        cells = build_grid(grid, fake_store)
        assert len(cells) == 144

    def test_single_cell(self, store):
        grid = ScenarioGrid(base=base_scenario(store))
        assert len(build_grid(grid, store)) == 1

    def test_combinatorial_count(self, store):
        bowlers = sorted(pid for pid, p in store.players.items()
                         if p.bowling_hand is Handedness.RIGHT and "bowler" in p.roles)[:2]
        grid = ScenarioGrid(
            base=base_scenario(store),
            lines=[LineBand.OFF_STUMP, LineBand.DOWN_LEG],
            lengths=[LengthBand.YORKER, LengthBand.FULL, LengthBand.SHORT],
            bowlers=bowlers,
            angles=[BowlingAngle.OVER, BowlingAngle.AROUND],
        )
        assert len(build_grid(grid, store)) == 2 * 3 * 2 * 2

    def test_cardinality_formula_random_axes(self, store):
        rng = np.random.default_rng(4)
        right = sorted(pid for pid, p in store.players.items()
                       if "bowler" in p.roles and p.bowling_hand is Handedness.RIGHT)
        left = sorted(pid for pid, p in store.players.items()
                      if "bowler" in p.roles and p.bowling_hand is Handedness.LEFT)
        for _ in range(20):
            n_lines = int(rng.integers(1, 5))
            n_lengths = int(rng.integers(1, 5))
            n_right = int(rng.integers(0, len(right) + 1))
            n_left = int(rng.integers(0 if n_right else 1, len(left) + 1))
            angles = [BowlingAngle.OVER, BowlingAngle.AROUND][: int(rng.integers(1, 3))]
            bowlers = right[:n_right] + left[:n_left]
            grid = ScenarioGrid(
                base=base_scenario(store),
                lines=list(LineBand)[:n_lines],
                lengths=list(LengthBand)[1:1 + n_lengths],
                bowlers=bowlers,
                angles=angles,
            )
            per_bowler = (n_right * len(angles)
                          + n_left * (1 if len(angles) > 1 else len(angles)))
            assert len(build_grid(grid, store)) == n_lines * n_lengths * per_bowler

    def test_empty_axis_rejected(self, store):
        with pytest.raises(ConfigError):
            build_grid(ScenarioGrid(base=base_scenario(store), lines=[]), store)

    def test_unknown_bowler_rejected(self, store):
        grid = ScenarioGrid(base=base_scenario(store), bowlers=["ghost"])
        with pytest.raises(ConfigError):
            build_grid(grid, store)


class TestPredictScenario:
    def test_purity(self, store, bundle):
        s = base_scenario(store)
        p1 = predict_scenario(bundle, store, s)
        p2 = predict_scenario(bundle, store, s)
        assert np.array_equal(p1, p2)

    def test_simplex(self, store, bundle):
        p = predict_scenario(bundle, store, base_scenario(store))
        assert p.shape == (17,)
        assert np.all(p >= 0) and abs(p.sum() - 1.0) < 1e-9

    def test_length_sweep_changes_distribution(self, store, bundle):
        dists = []
        for band in (LengthBand.FULL_TOSS, LengthBand.YORKER, LengthBand.SHORT):
            dists.append(predict_scenario(bundle, store,
                                          base_scenario(store, length=band)))
        assert not np.array_equal(dists[0], dists[1])
        assert not np.array_equal(dists[1], dists[2])

    def test_unknown_player(self, store, bundle):
        s = base_scenario(store, batsman_id="ghost")
        with pytest.raises(UnknownPlayer):
            predict_scenario(bundle, store, s)

    def test_unknown_player_allowed_uses_global_aux(self, store, bundle):
        s1 = base_scenario(store, batsman_id="ghost1", bowler_id="ghost2",
                           allow_unknown=True, batsman_hand=Handedness.RIGHT,
                           bowler_hand=Handedness.RIGHT)
        p1 = predict_scenario(bundle, store, s1)
        assert abs(p1.sum() - 1.0) < 1e-9

    def test_mirror_bitwise(self, store, bundle):
        rng = np.random.default_rng(9)
        batsmen = sorted(pid for pid, p in store.players.items() if "batsman" in p.roles)
        bowlers = sorted(pid for pid, p in store.players.items() if "bowler" in p.roles)
        for _ in range(25):
            s = Scenario(
                batsman_id=batsmen[int(rng.integers(len(batsmen)))],
                bowler_id=bowlers[int(rng.integers(len(bowlers)))],
                batsman_hand=Handedness.LEFT,
                bowler_hand=Handedness.LEFT if rng.random() < 0.5 else Handedness.RIGHT,
                line_offset_m=float(rng.uniform(-1.5, 1.5)),
                bounce_distance_m=float(rng.uniform(0, 19)),
                speed_kmh=float(rng.uniform(70, 150)),
                swing_deg=float(rng.normal(0, 2)),
                turn_deg=float(rng.normal(0, 2)),
                over_number=int(rng.integers(0, 49)),
                team_runs=int(rng.integers(0, 250)),
                team_wickets=int(rng.integers(0, 9)),
                batsman_balls_faced=int(rng.integers(0, 80)),
                batsman_runs=int(rng.integers(0, 90)),
            )
            twin = mirror_scenario(s)
            left = predict_scenario(bundle, store, s)
            right = predict_scenario(bundle, store, twin)
            assert np.array_equal(left, right)

    def test_history_mode(self, store, bundle, small_corpus):
        history = tuple(small_corpus.deliveries[:3])
        s = base_scenario(store, history=history)
        cold = base_scenario(store)
        p_hist = predict_scenario(bundle, store, s)
        p_cold = predict_scenario(bundle, store, cold)
        assert not np.array_equal(p_hist, p_cold)

    def test_history_too_long(self, store, bundle, small_corpus):
        s = base_scenario(store, history=tuple(small_corpus.deliveries[:6]))
        with pytest.raises(ConfigError):
            predict_scenario(bundle, store, s)

    def test_phase_presets(self, store, bundle):
        early = predict_scenario(bundle, store, base_scenario(store, phase="0-9"))
        late = predict_scenario(bundle, store, base_scenario(store, phase=">60"))
        assert not np.array_equal(early, late)
        assert PHASE_PRESETS["0-9"] == (5, 4)
        assert PHASE_PRESETS[">60"] == (65, 55)

    def test_band_or_number_required(self, store, bundle):
        s = Scenario(batsman_id=base_scenario(store).batsman_id,
                     bowler_id=base_scenario(store).bowler_id,
                     length=LengthBand.FULL)
        with pytest.raises(ConfigError):
            predict_scenario(bundle, store, s)


class TestSweepReport:
    def test_row_order_and_composition(self, store, bundle):
        grid = ScenarioGrid(
            base=base_scenario(store),
            lengths=[LengthBand.YORKER, LengthBand.SHORT],
        )
        rows = sweep_report(bundle, store, grid)
        assert [r.axes["length"] for r in rows] == ["Yorker", "Short"]
        single = predict_scenario(bundle, store,
                                  base_scenario(store, length=LengthBand.YORKER))
        assert np.array_equal(rows[0].distribution, single)
        assert rows[0].summary == summarize(single)

    def test_phase_deltas(self, store, bundle):
        grid = ScenarioGrid(base=base_scenario(store), phases=["0-9", ">60"])
        rows = sweep_report(bundle, store, grid)
        assert rows[0].deltas is None
        assert rows[1].deltas is not None
        expected = rows[1].summary.p_attack - rows[0].summary.p_attack
        assert rows[1].deltas["p_attack_delta"] == pytest.approx(expected, abs=1e-12)

    def test_sweep_axis_isolates_features(self, store, bundle):
        from shotzone.profiles import AuxGlobals
        from shotzone.simulate import build_frame

        grid = ScenarioGrid(base=base_scenario(store),
                            lengths=[LengthBand.YORKER, LengthBand.SHORT])
        cells = build_grid(grid, store)
        globals_ = AuxGlobals(values=bundle.aux_globals)
        frames = [build_frame(s, store, globals_) for _, s in cells]
        diff = frames[0].sequence[-1] != frames[1].sequence[-1]
        from shotzone.context import CONTEXT_INDEX

        allowed = {CONTEXT_INDEX["bounce_distance_m"], CONTEXT_INDEX["bounce_height_m"],
                   CONTEXT_INDEX["is_full_toss"]}
        assert set(np.flatnonzero(diff)) <= allowed
        assert np.array_equal(frames[0].aux, frames[1].aux)


class TestDocumentParsing:
    def test_scenario_roundtrip(self, store, bundle):
        doc = {
            "batsman": base_scenario(store).batsman_id,
            "bowler": base_scenario(store).bowler_id,
            "delivery": {"line": "OffStump", "length": "Yorker", "speed_kmh": 140,
                         "angle": "AroundTheWicket"},
            "batsman_state": {"phase": "0-9"},
            "match": {"format": "T20", "innings": 2, "over": 19, "ball": 4,
                      "team_runs": 150, "team_wickets": 5, "target": 160},
        }
        s = scenario_from_dict(doc)
        assert s.line is LineBand.OFF_STUMP
        assert s.length is LengthBand.YORKER
        assert s.bowling_angle is BowlingAngle.AROUND
        assert s.target == 160
        predict_scenario(bundle, store, s)

    def test_grid_document(self, store):
        doc = {
            "base": {"batsman": base_scenario(store).batsman_id,
                     "bowler": base_scenario(store).bowler_id,
                     "delivery": {"line": "OffStump", "length": "Full"}},
            "axes": {"length": ["Yorker", "Short"], "phase": ["0-9", ">60"]},
        }
        grid = grid_from_dict(doc)
        assert grid.lengths == [LengthBand.YORKER, LengthBand.SHORT]
        assert grid.phases == ["0-9", ">60"]

    def test_bad_documents(self):
        with pytest.raises(ConfigError):
            scenario_from_dict({"batsman": "x"})
        with pytest.raises(ConfigError):
            grid_from_dict({"axes": {}})
