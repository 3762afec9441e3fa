# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Fused elementwise kernels for the LSTM cell; same contract as kernels_py."""

cimport cython
from libc.math cimport exp, tanh

ctypedef fused floating:
    float
    double


def lstm_cell_forward(floating[:, ::1] z, floating[:, ::1] c_prev,
                      floating[:, ::1] h_prev, floating[:, ::1] active,
                      floating[:, ::1] a, floating[:, ::1] c,
                      floating[:, ::1] h, floating[:, ::1] tanh_c):
    cdef Py_ssize_t B = c_prev.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, j
    cdef floating gi, gf, gg, go, cc, t, m
    for b in range(B):
        m = active[b, 0]
        for j in range(H):
            gi = <floating>(1.0 / (1.0 + exp(-z[b, j])))
            gf = <floating>(1.0 / (1.0 + exp(-z[b, H + j])))
            gg = <floating>tanh(z[b, 2 * H + j])
            go = <floating>(1.0 / (1.0 + exp(-z[b, 3 * H + j])))
            cc = gf * c_prev[b, j] + gi * gg
            t = <floating>tanh(cc)
            a[b, j] = gi
            a[b, H + j] = gf
            a[b, 2 * H + j] = gg
            a[b, 3 * H + j] = go
            tanh_c[b, j] = t
            c[b, j] = m * cc + (<floating>1.0 - m) * c_prev[b, j]
            h[b, j] = m * (go * t) + (<floating>1.0 - m) * h_prev[b, j]


def lstm_cell_backward(floating[:, ::1] dh, floating[:, ::1] dc,
                       floating[:, ::1] a, floating[:, ::1] c_prev,
                       floating[:, ::1] tanh_c, floating[:, ::1] active,
                       floating[:, ::1] dz, floating[:, ::1] dc_prev,
                       floating[:, ::1] dh_prev):
    cdef Py_ssize_t B = c_prev.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, j
    cdef floating gi, gf, gg, go, t, m, dh_cand, do, dt, dcc, di, df, dg
    for b in range(B):
        m = active[b, 0]
        for j in range(H):
            gi = a[b, j]
            gf = a[b, H + j]
            gg = a[b, 2 * H + j]
            go = a[b, 3 * H + j]
            t = tanh_c[b, j]
            dh_cand = m * dh[b, j]
            dh_prev[b, j] = (<floating>1.0 - m) * dh[b, j]
            do = dh_cand * t
            dt = dh_cand * go
            dcc = m * dc[b, j] + dt * (<floating>1.0 - t * t)
            dc_prev[b, j] = (<floating>1.0 - m) * dc[b, j] + dcc * gf
            di = dcc * gg
            df = dcc * c_prev[b, j]
            dg = dcc * gi
            dz[b, j] = di * gi * (<floating>1.0 - gi)
            dz[b, H + j] = df * gf * (<floating>1.0 - gf)
            dz[b, 2 * H + j] = dg * (<floating>1.0 - gg * gg)
            dz[b, 3 * H + j] = do * go * (<floating>1.0 - go)
