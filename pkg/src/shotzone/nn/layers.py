"""Dense layers and masked LSTM stacks with hand-derived backward passes.

No autodiff graph: each block computes its own analytic gradients, and
``gradcheck`` validates every one of them against finite differences. All
blocks run in float32 (training) or float64 (checking); the input projection
for all timesteps is fused into a single matmul, leaving only the recurrent
product inside the time loop.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from . import backend


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeMismatch(msg)


class Dense:
    """y = act(x @ W.T + b) with act in {identity, relu, tanh}."""

    def __init__(self, rng: np.random.Generator, n_in: int, n_out: int,
                 activation: str = "identity", dtype=np.float32):
        _check(activation in ("identity", "relu", "tanh"), f"bad activation {activation}")
        bound = 1.0 / np.sqrt(n_in)
        self.W = rng.uniform(-bound, bound, size=(n_out, n_in)).astype(dtype)
        self.b = np.zeros(n_out, dtype=dtype)
        self.activation = activation
        self.n_in = n_in
        self.n_out = n_out
        self._x = None
        self._act_cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        _check(x.ndim == 2 and x.shape[1] == self.n_in,
               f"dense expects (B, {self.n_in}), got {x.shape}")
        y = x @ self.W.T + self.b
        if self.activation == "relu":
            self._act_cache = y > 0
            np.maximum(y, 0.0, out=y)
        elif self.activation == "tanh":
            np.tanh(y, out=y)
            self._act_cache = y
        self._x = x
        return y

    def backward(self, dy: np.ndarray):
        """Returns (dx, dW, db) for the most recent forward call."""
        _check(self._x is not None, "backward before forward")
        if self.activation == "relu":
            dpre = dy * self._act_cache
        elif self.activation == "tanh":
            dpre = dy * (1.0 - self._act_cache * self._act_cache)
        else:
            dpre = dy
        dx = dpre @ self.W
        dW = dpre.T @ self._x
        db = dpre.sum(axis=0)
        return dx, dW, db

    def parameters(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.W": self.W, f"{prefix}.b": self.b}


class LstmLayer:
    """One LSTM layer unrolled over a fixed-length, left-padded sequence."""

    def __init__(self, rng: np.random.Generator, n_in: int, hidden: int,
                 dtype=np.float32, kernels=None):
        bound = 1.0 / np.sqrt(n_in + hidden)
        self.Wx = rng.uniform(-bound, bound, size=(4 * hidden, n_in)).astype(dtype)
        self.Wh = rng.uniform(-bound, bound, size=(4 * hidden, hidden)).astype(dtype)
        self.b = np.zeros(4 * hidden, dtype=dtype)
        self.b[hidden:2 * hidden] = 1.0  # forget gate open at init
        self.n_in = n_in
        self.hidden = hidden
        self.kernels = kernels or backend.KERNELS
        self._cache = None

    def step(self, x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
        """Single unmasked step (inference convenience); returns (h, c)."""
        B, H = x_t.shape[0], self.hidden
        dtype = self.Wx.dtype
        z = x_t @ self.Wx.T + h_prev @ self.Wh.T + self.b
        z = np.ascontiguousarray(z, dtype=dtype)
        active = np.ones((B, 1), dtype=dtype)
        a = np.empty((B, 4 * H), dtype=dtype)
        c = np.empty((B, H), dtype=dtype)
        h = np.empty((B, H), dtype=dtype)
        tanh_c = np.empty((B, H), dtype=dtype)
        self.kernels.lstm_cell_forward(
            z, np.ascontiguousarray(c_prev, dtype=dtype),
            np.ascontiguousarray(h_prev, dtype=dtype), active, a, c, h, tanh_c)
        return h, c

    def forward(self, x_tm: np.ndarray, active_tm: np.ndarray) -> np.ndarray:
        """x_tm: time-major (T, B, n_in) contiguous; active_tm: (T, B, 1).

        Returns the hidden sequence, time-major (T, B, H). Time-major layout
        keeps every per-step slice contiguous for the kernels.
        """
        _check(x_tm.ndim == 3 and x_tm.shape[2] == self.n_in,
               f"lstm expects (T, B, {self.n_in}), got {x_tm.shape}")
        T, B, _ = x_tm.shape
        H = self.hidden
        dtype = self.Wx.dtype
        zx = (x_tm.reshape(T * B, self.n_in) @ self.Wx.T).reshape(T, B, 4 * H)
        zx += self.b
        h_seq = np.empty((T, B, H), dtype=dtype)
        c_seq = np.empty((T, B, H), dtype=dtype)
        a_seq = np.empty((T, B, 4 * H), dtype=dtype)
        tanh_seq = np.empty((T, B, H), dtype=dtype)
        h = np.zeros((B, H), dtype=dtype)
        c = np.zeros((B, H), dtype=dtype)
        for t in range(T):
            z = zx[t] + h @ self.Wh.T
            self.kernels.lstm_cell_forward(
                z, c, h, active_tm[t], a_seq[t], c_seq[t], h_seq[t], tanh_seq[t])
            h = h_seq[t]
            c = c_seq[t]
        self._cache = (x_tm, active_tm, a_seq, c_seq, tanh_seq, h_seq)
        return h_seq

    def backward(self, dh_seq: np.ndarray):
        """dh_seq: (T, B, H) upstream gradient on every hidden state.

        Returns (dx_tm, grads) where grads holds Wx/Wh/b gradients.
        """
        _check(self._cache is not None, "backward before forward")
        x_tm, active_tm, a_seq, c_seq, tanh_seq, h_seq = self._cache
        T, B, _ = x_tm.shape
        H = self.hidden
        dtype = self.Wx.dtype
        dz_seq = np.empty((T, B, 4 * H), dtype=dtype)
        dh_carry = np.zeros((B, H), dtype=dtype)
        dc_carry = np.zeros((B, H), dtype=dtype)
        dc_prev = np.empty((B, H), dtype=dtype)
        dh_prev = np.empty((B, H), dtype=dtype)
        zeros = np.zeros((B, H), dtype=dtype)
        for t in range(T - 1, -1, -1):
            dh_t = dh_seq[t] + dh_carry
            c_prev = c_seq[t - 1] if t > 0 else zeros
            self.kernels.lstm_cell_backward(
                dh_t, dc_carry, a_seq[t], c_prev, tanh_seq[t], active_tm[t],
                dz_seq[t], dc_prev, dh_prev)
            dh_carry = dh_prev + dz_seq[t] @ self.Wh
            dc_carry = dc_prev.copy()
        dz_flat = dz_seq.reshape(T * B, 4 * H)
        h_prev_seq = np.concatenate([np.zeros((1, B, H), dtype=dtype), h_seq[:-1]], axis=0)
        grads = {
            "Wx": dz_flat.T @ x_tm.reshape(T * B, self.n_in),
            "Wh": dz_flat.T @ h_prev_seq.reshape(T * B, H),
            "b": dz_flat.sum(axis=0),
        }
        dx = (dz_flat @ self.Wx).reshape(T, B, self.n_in)
        return dx, grads

    def parameters(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.Wx": self.Wx, f"{prefix}.Wh": self.Wh, f"{prefix}.b": self.b}


class LstmStack:
    """Stacked LSTM layers sharing one padding mask; exposes the final hidden state."""

    def __init__(self, rng: np.random.Generator, n_in: int, hidden: int, depth: int,
                 dtype=np.float32, kernels=None):
        _check(depth >= 1, "depth must be >= 1")
        self.layers = []
        for k in range(depth):
            self.layers.append(LstmLayer(rng, n_in if k == 0 else hidden, hidden,
                                         dtype=dtype, kernels=kernels))
        self.hidden = hidden

    def forward(self, x: np.ndarray, padded_mask: np.ndarray) -> np.ndarray:
        """x: (B, T, n_in); padded_mask: (B, T) bool, True = padded slot.

        Returns the final hidden state (B, H); the final step is never padded.
        """
        dtype = self.layers[0].Wx.dtype
        x_tm = np.ascontiguousarray(x.transpose(1, 0, 2), dtype=dtype)
        active_tm = np.ascontiguousarray(
            (~padded_mask).T.astype(dtype)[:, :, None])
        out = x_tm
        for layer in self.layers:
            out = layer.forward(out, active_tm)
        return out[-1]

    def backward(self, dh_last: np.ndarray):
        """Returns (dx_seq time-major, grads dict keyed lstm{k}.*)."""
        grads: dict[str, np.ndarray] = {}
        T = self.layers[0]._cache[0].shape[0]
        B, H = dh_last.shape
        dh_seq = np.zeros((T, B, H), dtype=dh_last.dtype)
        dh_seq[-1] = dh_last
        dcur = dh_seq
        for k in range(len(self.layers) - 1, -1, -1):
            dcur, layer_grads = self.layers[k].backward(dcur)
            for name, g in layer_grads.items():
                grads[f"lstm{k}.{name}"] = g
        return dcur, grads

    def parameters(self) -> dict[str, np.ndarray]:
        params: dict[str, np.ndarray] = {}
        for k, layer in enumerate(self.layers):
            params.update(layer.parameters(f"lstm{k}"))
        return params
