"""Pure-numpy LSTM time loop.  Reference for the compiled kernel.

Gate layout along the last axis is [input, forget, cell, output].  Inputs
are time-major: ``xproj`` has shape (T, B, 4H) and already includes the
input projection and bias.
"""

import numpy as np


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def lstm_forward(xproj, Wh):
    T, B, H4 = xproj.shape
    H = H4 // 4
    dtype = xproj.dtype
    G = np.empty((T, B, H4), dtype=dtype)
    C = np.empty((T, B, H), dtype=dtype)
    Hs = np.empty((T, B, H), dtype=dtype)
    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    for t in range(T):
        z = xproj[t] + h @ Wh
        g = G[t]
        g[:, : 2 * H] = _sigmoid(z[:, : 2 * H])
        g[:, 2 * H: 3 * H] = np.tanh(z[:, 2 * H: 3 * H])
        g[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
        c = g[:, H: 2 * H] * c + g[:, :H] * g[:, 2 * H: 3 * H]
        h = g[:, 3 * H:] * np.tanh(c)
        C[t] = c
        Hs[t] = h
    return Hs, C, G


def lstm_backward(dH, Wh, G, C, Hs):
    """Gradients w.r.t. ``xproj`` and ``Wh`` given dLoss/dh for every step."""
    T, B, H = dH.shape
    dtype = dH.dtype
    dX = np.empty((T, B, 4 * H), dtype=dtype)
    dWh = np.zeros_like(Wh)
    dh_next = np.zeros((B, H), dtype=dtype)
    dc_next = np.zeros((B, H), dtype=dtype)
    zeros = np.zeros((B, H), dtype=dtype)
    for t in range(T - 1, -1, -1):
        g = G[t]
        i, f, cg, o = g[:, :H], g[:, H: 2 * H], g[:, 2 * H: 3 * H], g[:, 3 * H:]
        c_prev = C[t - 1] if t else zeros
        h_prev = Hs[t - 1] if t else zeros
        tc = np.tanh(C[t])
        dh = dH[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dX[t]
        dz[:, :H] = dc * cg * i * (1.0 - i)
        dz[:, H: 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H: 3 * H] = dc * i * (1.0 - cg * cg)
        dz[:, 3 * H:] = dh * tc * o * (1.0 - o)
        dWh += h_prev.T @ dz
        dh_next = dz @ Wh.T
        dc_next = dc * f
    return dX, dWh
