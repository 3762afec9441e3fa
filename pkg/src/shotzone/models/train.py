"""Chronological splitting, the mini-batch training loop, and evaluation."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from ..data import Corpus
from ..errors import ConfigError, DivergenceError
from ..frames import FrameDataset, build_dataset, compute_globals_for_split
from ..nn import Adam, backend_name
from ..nn.losses import batch_softmax_xent
from ..taxonomy import N_ZONES
from .bundle import STD_FLOOR, ModelBundle
from .nets import Batch, NaiveModel, make_model

LOG_LOSS_FLOOR = 1e-12


@dataclass
class TrainConfig:
    hidden: int = 64
    depth: int = 2
    hidden_head: int = 64
    lr: float = 1e-3
    batch_size: int = 256
    max_epochs: int = 30
    patience: int = 3
    val_fraction: float = 0.1
    precision: str = "float32"

    def as_dict(self) -> dict:
        return {
            "hidden": self.hidden, "depth": self.depth,
            "hidden_head": self.hidden_head, "lr": self.lr,
            "batch_size": self.batch_size, "max_epochs": self.max_epochs,
            "patience": self.patience, "val_fraction": self.val_fraction,
            "precision": self.precision,
        }


def split_chronological(corpus: Corpus, holdout_fraction: float) -> tuple[Corpus, Corpus]:
    """Hold out the last fraction of deliveries, never splitting a match."""
    cut = split_index(corpus, holdout_fraction)
    train = Corpus(deliveries=corpus.deliveries[:cut], players=corpus.players)
    test = Corpus(deliveries=corpus.deliveries[cut:], players=corpus.players)
    return train, test


def split_index(corpus: Corpus, holdout_fraction: float) -> int:
    if not 0.0 < holdout_fraction < 1.0:
        raise ConfigError(f"holdout fraction must be in (0, 1), got {holdout_fraction}")
    n = len(corpus.deliveries)
    if n < 2:
        raise ConfigError("corpus too small to split")
    target_train = (1.0 - holdout_fraction) * n
    boundaries = []  # index just past each match
    last_match = None
    for i, d in enumerate(corpus.deliveries):
        if d.match_id != last_match:
            if last_match is not None:
                boundaries.append(i)
            last_match = d.match_id
    boundaries.append(n)
    for b in boundaries:
        if b >= target_train:
            if b == n:  # never leave the test side empty
                if len(boundaries) < 2:
                    raise ConfigError("need at least two matches to split by match")
                return boundaries[-2]
            return b
    return boundaries[-2]


@dataclass
class Experiment:
    """A corpus folded into frames with a frozen chronological split."""

    corpus: Corpus
    dataset: FrameDataset
    train_end: int  # delivery-level cut index
    holdout_fraction: float
    corpus_digest: str
    aux_globals: np.ndarray  # (46,) pooled over the training prefix

    @property
    def train_rows(self) -> np.ndarray:
        labeled = self.dataset.labeled_indices
        return labeled[labeled < self.train_end]

    @property
    def test_rows(self) -> np.ndarray:
        labeled = self.dataset.labeled_indices
        return labeled[labeled >= self.train_end]

    def split_dates(self) -> dict:
        train_last = self.corpus.deliveries[self.train_end - 1].date
        test_first = self.corpus.deliveries[self.train_end].date
        return {"train_end_date": train_last.isoformat(),
                "test_start_date": test_first.isoformat()}


def make_experiment(corpus: Corpus, holdout_fraction: float = 0.2) -> Experiment:
    cut = split_index(corpus, holdout_fraction)
    aux_globals = compute_globals_for_split(corpus, cut)
    dataset = build_dataset(corpus, aux_globals)
    return Experiment(corpus=corpus, dataset=dataset, train_end=cut,
                      holdout_fraction=holdout_fraction,
                      corpus_digest=corpus.digest(),
                      aux_globals=aux_globals.values)


def _fit_standardization(values: np.ndarray):
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    return mean, np.maximum(std, STD_FLOOR)


class _BatchSource:
    """Standardized, gatherable frame columns for one experiment."""

    def __init__(self, experiment: Experiment, precision: str):
        ds = experiment.dataset
        cut = experiment.train_end
        self.ctx_mean, self.ctx_std = _fit_standardization(ds.ctx[:cut])
        self.aux_mean, self.aux_std = _fit_standardization(ds.aux[:cut])
        dtype = np.dtype(precision).type
        self.ctx_all = ((ds.ctx - self.ctx_mean) / self.ctx_std).astype(dtype)
        self.aux_all = ((ds.aux - self.aux_mean) / self.aux_std).astype(dtype)
        self.ds = ds

    def gather(self, rows: np.ndarray) -> Batch:
        win = self.ds.win[rows]
        mask = self.ds.mask[rows]
        seq = self.ctx_all[np.maximum(win, 0)]
        seq[mask] = 0.0
        return Batch(seq=seq, mask=mask, aux=self.aux_all[rows],
                     y=self.ds.y[rows].astype(np.int64))


def _floored_log_loss(probs: np.ndarray, y: np.ndarray) -> float:
    picked = probs[np.arange(len(y)), y]
    return float(-np.log(np.maximum(picked, LOG_LOSS_FLOOR)).sum())


def _batched_loss(net, source: _BatchSource, rows: np.ndarray,
                  batch_size: int) -> float:
    # same float64 + floor metric as evaluate(), so stored validation metrics
    # reproduce exactly when the bundle is re-applied
    total = 0.0
    for start in range(0, len(rows), batch_size):
        chunk = rows[start:start + batch_size]
        batch = source.gather(chunk)
        probs = net.predict_proba(batch)
        total += _floored_log_loss(probs, batch.y)
    return total / max(len(rows), 1)


def train_model(kind: str, experiment: Experiment, config: TrainConfig | None = None,
                seed: int = 0) -> ModelBundle:
    """Train one rung on the experiment's training split; deterministic per seed."""
    config = config or TrainConfig()
    source = _BatchSource(experiment, config.precision)
    train_rows = experiment.train_rows
    if len(train_rows) == 0:
        raise ConfigError("no labeled training frames")
    globals_values = experiment.aux_globals
    manifest = {
        "kind": kind,
        "seed": seed,
        "corpus_digest": experiment.corpus_digest,
        "holdout_fraction": experiment.holdout_fraction,
        "n_train_frames": int(len(train_rows)),
        "backend": backend_name(),
        **experiment.split_dates(),
    }

    if kind == "naive":
        counts = np.bincount(experiment.dataset.y[train_rows], minlength=N_ZONES)
        probs = counts / counts.sum()
        manifest["epochs_run"] = 0
        return ModelBundle(
            kind="naive", params={"class_probs": probs},
            ctx_mean=source.ctx_mean, ctx_std=source.ctx_std,
            aux_mean=source.aux_mean, aux_std=source.aux_std,
            aux_globals=globals_values, manifest=manifest,
            config=config.as_dict())

    rng = np.random.default_rng(seed)
    net = make_model(kind, rng, hidden=config.hidden, depth=config.depth,
                     hidden_head=config.hidden_head,
                     dtype=np.dtype(config.precision).type)
    params = net.parameters()
    optimizer = Adam(params, lr=config.lr)

    n_val = max(1, int(round(config.val_fraction * len(train_rows))))
    if n_val >= len(train_rows):
        raise ConfigError("validation slice would consume the whole training split")
    fit_rows = train_rows[:-n_val]
    val_rows = train_rows[-n_val:]

    best_val = math.inf
    best_params = {k: v.copy() for k, v in params.items()}
    best_epoch = 0
    stale = 0
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        order = fit_rows[rng.permutation(len(fit_rows))]
        for start in range(0, len(order), config.batch_size):
            batch = source.gather(order[start:start + config.batch_size])
            loss, grads = net.loss_and_grads(batch)
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            optimizer.step(params, grads)
        epochs_run = epoch
        val_loss = _batched_loss(net, source, val_rows, config.batch_size)
        if not math.isfinite(val_loss):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        if val_loss < best_val - 1e-6:
            best_val = val_loss
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    manifest["epochs_run"] = epochs_run
    manifest["best_epoch"] = best_epoch
    manifest["val_log_loss"] = None if math.isinf(best_val) else best_val
    return ModelBundle(
        kind=kind, params=best_params,
        ctx_mean=source.ctx_mean, ctx_std=source.ctx_std,
        aux_mean=source.aux_mean, aux_std=source.aux_std,
        aux_globals=globals_values, manifest=manifest, config=config.as_dict())


@dataclass
class EvalReport:
    """Holdout metrics in the shape of the accuracy/log-loss comparison table."""

    kind: str
    n: int
    accuracy: float
    log_loss: float
    confusion: list[list[int]] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"model": self.kind, "n": self.n, "accuracy": self.accuracy,
                "log_loss": self.log_loss, "confusion": self.confusion}


def evaluate(bundle: ModelBundle, dataset: FrameDataset,
             rows: np.ndarray | None = None, batch_size: int = 1024) -> EvalReport:
    """Top-1 accuracy (ties break to the lowest zone id) and mean natural-log
    loss with a 1e-12 probability floor, plus the 17x17 confusion counts."""
    ds = dataset
    if rows is None:
        rows = ds.labeled_indices
    confusion = np.zeros((N_ZONES, N_ZONES), dtype=np.int64)
    total_loss = 0.0
    correct = 0
    for start in range(0, len(rows), batch_size):
        chunk = rows[start:start + batch_size]
        win = ds.win[chunk]
        mask = ds.mask[chunk]
        seq = ds.ctx[np.maximum(win, 0)]
        seq[mask] = 0.0
        probs = bundle.predict_batch(seq, mask, ds.aux[chunk])
        y = ds.y[chunk].astype(np.int64)
        picked = probs.argmax(axis=1)
        correct += int((picked == y).sum())
        total_loss += _floored_log_loss(probs, y)
        np.add.at(confusion, (y, picked), 1)
    n = int(len(rows))
    return EvalReport(
        kind=bundle.kind,
        n=n,
        accuracy=correct / n if n else 0.0,
        log_loss=total_loss / n if n else 0.0,
        confusion=confusion.tolist(),
    )
