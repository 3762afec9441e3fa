"""Stabilized softmax cross-entropy over the 17 target zones."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax along the last axis; safe for logits up to ±1e3."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(logits: np.ndarray, target: int):
    """Single-sample loss: returns (loss, probs, dlogits = probs - onehot)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = float(log_z - shifted[target])
    probs = np.exp(shifted - log_z)
    dlogits = probs.copy()
    dlogits[target] -= 1.0
    return loss, probs, dlogits


def batch_softmax_xent(logits: np.ndarray, targets: np.ndarray):
    """Mean loss over a batch: returns (loss, probs, dlogits) with dlogits
    already divided by the batch size so it back-propagates the mean."""
    B = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    loss = float(-log_probs[np.arange(B), targets].mean())
    probs = np.exp(log_probs)
    dlogits = probs.copy()
    dlogits[np.arange(B), targets] -= 1.0
    dlogits /= B
    return loss, probs, dlogits
