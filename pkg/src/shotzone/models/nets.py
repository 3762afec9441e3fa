"""The four model rungs: class-frequency baseline, feed-forward, LSTM, and
LSTM + personalized features. Neural rungs share the same two-hidden-layer
head into the 17-way softmax; the personalized variant concatenates the
46-entry player vector onto the final LSTM hidden state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..nn import Dense, LstmStack, batch_softmax_xent
from ..taxonomy import N_ZONES

N_CTX = 39
N_AUX = 46

MODEL_KINDS = ("naive", "ffn", "lstm", "personalized_lstm")


@dataclass
class Batch:
    """Standardized model inputs: seq (B, 6, 39), mask (B, 6) bool (True =
    padded), aux (B, 46), y (B,) int targets (ignored at predict time)."""

    seq: np.ndarray
    mask: np.ndarray
    aux: np.ndarray
    y: np.ndarray | None = None


class NaiveModel:
    """Constant prediction: the training-set class proportions."""

    kind = "naive"

    def __init__(self, class_probs: np.ndarray):
        probs = np.asarray(class_probs, dtype=np.float64)
        if probs.shape != (N_ZONES,):
            raise ConfigError(f"class_probs must have shape ({N_ZONES},)")
        self.class_probs = probs

    def predict_proba(self, batch: Batch) -> np.ndarray:
        return np.tile(self.class_probs, (batch.seq.shape[0], 1))

    def parameters(self) -> dict[str, np.ndarray]:
        return {"class_probs": self.class_probs}


class _NeuralModel:
    """Shared head + loss plumbing; subclasses provide the feature extractor."""

    feature_width: int

    def _init_head(self, rng, hidden_head: int, dtype):
        self.head0 = Dense(rng, self.feature_width, hidden_head, "relu", dtype=dtype)
        self.head1 = Dense(rng, hidden_head, hidden_head, "relu", dtype=dtype)
        self.out = Dense(rng, hidden_head, N_ZONES, "identity", dtype=dtype)

    def _features(self, batch: Batch) -> np.ndarray:
        raise NotImplementedError

    def _features_backward(self, dfeats: np.ndarray) -> dict[str, np.ndarray]:
        return {}

    def forward_logits(self, batch: Batch) -> np.ndarray:
        feats = self._features(batch)
        return self.out.forward(self.head1.forward(self.head0.forward(feats)))

    def predict_proba(self, batch: Batch) -> np.ndarray:
        logits = self.forward_logits(batch).astype(np.float64)
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)

    def loss(self, batch: Batch) -> float:
        logits = self.forward_logits(batch)
        loss, _, _ = batch_softmax_xent(logits, batch.y)
        return loss

    def loss_and_grads(self, batch: Batch):
        logits = self.forward_logits(batch)
        loss, _, dlogits = batch_softmax_xent(logits, batch.y)
        dh1, dW_out, db_out = self.out.backward(dlogits.astype(logits.dtype))
        dh0, dW1, db1 = self.head1.backward(dh1)
        dfeats, dW0, db0 = self.head0.backward(dh0)
        grads = {
            "head0.W": dW0, "head0.b": db0,
            "head1.W": dW1, "head1.b": db1,
            "out.W": dW_out, "out.b": db_out,
        }
        grads.update(self._features_backward(dfeats))
        return loss, grads

    def parameters(self) -> dict[str, np.ndarray]:
        params = {}
        params.update(self.head0.parameters("head0"))
        params.update(self.head1.parameters("head1"))
        params.update(self.out.parameters("out"))
        return params

    def load_parameters(self, params: dict[str, np.ndarray]) -> None:
        own = self.parameters()
        missing = set(own) ^ set(params)
        if missing:
            raise ConfigError(f"parameter blocks do not match: {sorted(missing)}")
        for name, value in params.items():
            target = own[name]
            if target.shape != value.shape:
                raise ConfigError(f"{name}: shape {value.shape} != {target.shape}")
            target[:] = value.astype(target.dtype)


class FfnModel(_NeuralModel):
    """Memoryless rung: consumes only the current delivery's context vector."""

    kind = "ffn"

    def __init__(self, rng: np.random.Generator, hidden_head: int = 64,
                 dtype=np.float32):
        self.feature_width = N_CTX
        self._init_head(rng, hidden_head, dtype)

    def _features(self, batch: Batch) -> np.ndarray:
        return np.ascontiguousarray(batch.seq[:, -1, :])


class LstmModel(_NeuralModel):
    """Sequence rung: the lookback-6 window through a stacked LSTM."""

    kind = "lstm"

    def __init__(self, rng: np.random.Generator, hidden: int = 64, depth: int = 2,
                 hidden_head: int = 64, dtype=np.float32, kernels=None):
        self.stack = LstmStack(rng, N_CTX, hidden, depth, dtype=dtype, kernels=kernels)
        self.feature_width = hidden
        self._init_head(rng, hidden_head, dtype)

    def _features(self, batch: Batch) -> np.ndarray:
        return self.stack.forward(batch.seq, batch.mask)

    def _features_backward(self, dfeats: np.ndarray) -> dict[str, np.ndarray]:
        _, grads = self.stack.backward(dfeats)
        return grads

    def parameters(self) -> dict[str, np.ndarray]:
        params = self.stack.parameters()
        params.update(super().parameters())
        return params


class PersonalizedLstmModel(_NeuralModel):
    """Sequence rung plus the 46 personalized entries, concatenated before the head."""

    kind = "personalized_lstm"

    def __init__(self, rng: np.random.Generator, hidden: int = 64, depth: int = 2,
                 hidden_head: int = 64, dtype=np.float32, kernels=None):
        self.stack = LstmStack(rng, N_CTX, hidden, depth, dtype=dtype, kernels=kernels)
        self.hidden = hidden
        self.feature_width = hidden + N_AUX
        self._init_head(rng, hidden_head, dtype)

    def _features(self, batch: Batch) -> np.ndarray:
        h_last = self.stack.forward(batch.seq, batch.mask)
        return np.concatenate([h_last, batch.aux.astype(h_last.dtype)], axis=1)

    def _features_backward(self, dfeats: np.ndarray) -> dict[str, np.ndarray]:
        _, grads = self.stack.backward(np.ascontiguousarray(dfeats[:, :self.hidden]))
        return grads

    def parameters(self) -> dict[str, np.ndarray]:
        params = self.stack.parameters()
        params.update(super().parameters())
        return params


def make_model(kind: str, rng: np.random.Generator, *, hidden: int = 64,
               depth: int = 2, hidden_head: int = 64, dtype=np.float32,
               kernels=None):
    if kind == "ffn":
        return FfnModel(rng, hidden_head=hidden_head, dtype=dtype)
    if kind == "lstm":
        return LstmModel(rng, hidden=hidden, depth=depth, hidden_head=hidden_head,
                         dtype=dtype, kernels=kernels)
    if kind == "personalized_lstm":
        return PersonalizedLstmModel(rng, hidden=hidden, depth=depth,
                                     hidden_head=hidden_head, dtype=dtype,
                                     kernels=kernels)
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
