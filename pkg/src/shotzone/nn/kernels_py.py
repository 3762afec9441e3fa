"""Pure-numpy reference kernels for the LSTM cell elementwise math.

The compiled extension (`_kernels`) implements the same signatures with the
loops fused; either backend fills caller-allocated output arrays so the two
are interchangeable. Gate order inside the 4H axis is [input, forget,
candidate, output]. ``active`` is 1.0 for real steps and 0.0 for padded ones;
padded steps pass the previous state through untouched.
"""

from __future__ import annotations

import numpy as np


def _sigmoid_into(z: np.ndarray, out: np.ndarray) -> None:
    with np.errstate(over="ignore"):
        np.exp(-z, out=out)
    out += 1.0
    np.reciprocal(out, out=out)


def lstm_cell_forward(z, c_prev, h_prev, active, a, c, h, tanh_c):
    """One gated LSTM step.

    z: (B, 4H) pre-activations; a receives the activated gates; c/h the new
    states; tanh_c the tanh of the *candidate* cell state (cached for backward).
    """
    H = c_prev.shape[1]
    _sigmoid_into(z[:, :H], a[:, :H])
    _sigmoid_into(z[:, H:2 * H], a[:, H:2 * H])
    np.tanh(z[:, 2 * H:3 * H], out=a[:, 2 * H:3 * H])
    _sigmoid_into(z[:, 3 * H:], a[:, 3 * H:])

    i, f, g, o = (a[:, :H], a[:, H:2 * H], a[:, 2 * H:3 * H], a[:, 3 * H:])
    c_cand = f * c_prev + i * g
    np.tanh(c_cand, out=tanh_c)
    m = active
    c[:] = m * c_cand + (1.0 - m) * c_prev
    h[:] = m * (o * tanh_c) + (1.0 - m) * h_prev


def lstm_cell_backward(dh, dc, a, c_prev, tanh_c, active, dz, dc_prev, dh_prev):
    """Backward of one step; dz gets the pre-activation gradients.

    dh/dc are the incoming state gradients; dc_prev/dh_prev receive the
    gradients flowing to the previous step (the recurrent matmul term is the
    layer's job, not the kernel's).
    """
    H = c_prev.shape[1]
    i, f, g, o = (a[:, :H], a[:, H:2 * H], a[:, 2 * H:3 * H], a[:, 3 * H:])
    m = active
    dh_cand = m * dh
    dh_prev[:] = (1.0 - m) * dh
    do = dh_cand * tanh_c
    dt = dh_cand * o
    dc_cand = m * dc + dt * (1.0 - tanh_c * tanh_c)
    dc_prev[:] = (1.0 - m) * dc + dc_cand * f
    di = dc_cand * g
    df = dc_cand * c_prev
    dg = dc_cand * i
    dz[:, :H] = di * i * (1.0 - i)
    dz[:, H:2 * H] = df * f * (1.0 - f)
    dz[:, 2 * H:3 * H] = dg * (1.0 - g * g)
    dz[:, 3 * H:] = do * o * (1.0 - o)
