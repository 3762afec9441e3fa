import numpy as np
import pytest

from shotzone.context import InningsTracker
from shotzone.data import iter_innings
from shotzone.errors import FormatVersionError
from shotzone.frames import (
    LOOKBACK,
    build_dataset,
    build_profile_store,
    compute_globals_for_split,
    feature_ledger_export,
    load_profile_store,
    save_profile_store,
    sequence_window,
)
from shotzone.profiles import PlayerProfile, aux_vector, compute_aux_globals


@pytest.fixture(scope="module")
def dataset(small_corpus):
    globals_ = compute_aux_globals(small_corpus.deliveries)
    return build_dataset(small_corpus, globals_)


class TestSequenceWindow:
    def test_innings_start_masked(self, small_corpus):
        _, balls = next(iter_innings(small_corpus))
        frame = sequence_window(balls, 0)
        assert frame.mask.tolist() == [True] * 5 + [False]
        assert np.all(frame.sequence[:5] == 0.0)

    def test_full_window_no_masking(self, small_corpus):
        _, balls = next(iter_innings(small_corpus))
        frame = sequence_window(balls, 7)
        assert not frame.mask.any()
        # slots are balls 2..7: check the ball_in_over feature column
        tracker = InningsTracker()
        vectors = []
        for d in balls[:8]:
            vectors.append(tracker.context_vector(d))
            tracker.update(d)
        assert np.array_equal(frame.sequence, np.stack(vectors[2:8]))

    def test_out_of_bounds(self, small_corpus):
        _, balls = next(iter_innings(small_corpus))
        with pytest.raises(IndexError):
            sequence_window(balls, len(balls))


class TestDatasetAssembly:
    def test_shapes(self, small_corpus, dataset):
        n = len(small_corpus)
        assert dataset.ctx.shape == (n, 39)
        assert dataset.aux.shape == (n, 46)
        assert dataset.win.shape == (n, 6)
        assert dataset.mask.shape == (n, 6)
        assert len(dataset.labeled_indices) == sum(
            1 for d in small_corpus.deliveries if d.shot_label is not None)

    def test_no_cross_innings_windows(self, small_corpus, dataset):
        for start, end in dataset.innings_spans:
            rows = dataset.win[start:end]
            valid = rows[rows >= 0]
            assert valid.min() >= start and valid.max() < end

    def test_current_slot_is_self(self, dataset):
        n = len(dataset)
        assert np.array_equal(dataset.win[:, -1], np.arange(n, dtype=np.int32))
        assert not dataset.mask[:, -1].any()

    def test_masked_iff_negative_index(self, dataset):
        assert np.array_equal(dataset.mask, dataset.win < 0)

    def test_frame_view_matches_sequence_window(self, small_corpus, dataset):
        key, balls = next(iter_innings(small_corpus))
        for i in (0, 3, 11):
            frame = dataset.frame(i)
            standalone = sequence_window(balls, i)
            assert np.array_equal(frame.sequence, standalone.sequence)
            assert np.array_equal(frame.mask, standalone.mask)
            assert frame.target == standalone.target

    def test_no_leakage(self, small_corpus, dataset):
        """Aux for row i must equal a fold over deliveries strictly before i."""
        globals_ = compute_aux_globals(small_corpus.deliveries)
        rng = np.random.default_rng(0)
        for i in rng.integers(0, len(small_corpus), 5):
            profiles = {}
            for d in small_corpus.deliveries[:i]:
                profiles.setdefault(d.batsman_id, PlayerProfile(d.batsman_id)).update(d)
                profiles.setdefault(d.bowler_id, PlayerProfile(d.bowler_id)).update(d)
            d = small_corpus.deliveries[i]
            expected = aux_vector(profiles.get(d.batsman_id),
                                  profiles.get(d.bowler_id), globals_)
            assert np.array_equal(dataset.aux[i], expected)

    def test_globals_use_train_prefix_only(self, small_corpus):
        cut = len(small_corpus) // 2
        g_train = compute_globals_for_split(small_corpus, cut)
        g_all = compute_aux_globals(small_corpus.deliveries)
        assert not np.array_equal(g_train.values, g_all.values)
        g_prefix = compute_aux_globals(small_corpus.deliveries[:cut])
        assert np.array_equal(g_train.values, g_prefix.values)


class TestProfileStore:
    def test_roundtrip(self, small_corpus, tmp_path):
        store = build_profile_store(small_corpus)
        path = tmp_path / "store.json"
        save_profile_store(store, path)
        again = load_profile_store(path)
        assert set(again.profiles) == set(store.profiles)
        for pid in store.profiles:
            a, b = store.profiles[pid], again.profiles[pid]
            assert a.batting_values() == b.batting_values()
            assert a.bowling_values() == b.bowling_values()
            assert a.batting.n_seen == b.batting.n_seen
            assert a.bowling.n_matches == b.bowling.n_matches
        assert again.players == store.players

    def test_bad_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{truncated")
        with pytest.raises(FormatVersionError):
            load_profile_store(path)


class TestLedgerExport:
    def test_counts_and_names(self):
        doc = feature_ledger_export()
        assert len(doc["context_features"]) == 39
        assert len(doc["aux_features"]) == 46
        assert doc["lookback"] == LOOKBACK == 6
