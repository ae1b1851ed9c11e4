"""Compiled inner loops for the LSTM and the optimizer.

Only the strictly sequential parts live here: the per-timestep recurrence
of one layer (forward and backward) and the elementwise Adam update. The
batched matrix products around them stay in numpy. Loops are written so
the innermost index is contiguous and needs no reassociation, which lets
LLVM vectorize them without ``fastmath``; results are deterministic.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def layer_forward(pre, WhT, hidden, cell, gates, tanh_cell):
    """Run one layer over time.

    pre: (T, 4H) input projections ``W_x x_t + b``.
    WhT: (H, 4H) transposed recurrent block of the gate matrix.
    hidden, cell: (T + 1, H) outputs; row 0 must hold the initial state.
    gates: (T, 4H) output activations in (f, i, C, o) order.
    tanh_cell: (T, H) output.
    """
    T, G = pre.shape
    H = G // 4
    z = np.empty(G)
    for t in range(T):
        for r in range(G):
            z[r] = 0.0
        for j in range(H):
            hj = hidden[t, j]
            for r in range(G):
                z[r] += WhT[j, r] * hj
        for r in range(G):
            z[r] = pre[t, r] + z[r]
        for k in range(H):
            f = _sigmoid(z[k])
            i = _sigmoid(z[H + k])
            cb = math.tanh(z[2 * H + k])
            o = _sigmoid(z[3 * H + k])
            gates[t, k] = f
            gates[t, H + k] = i
            gates[t, 2 * H + k] = cb
            gates[t, 3 * H + k] = o
            c = f * cell[t, k] + i * cb
            cell[t + 1, k] = c
            tc = math.tanh(c)
            tanh_cell[t, k] = tc
            hidden[t + 1, k] = o * tc


@njit(cache=True)
def layer_backward(d_above, Wh, cell, gates, tanh_cell, dz):
    """Backpropagate through one layer's recurrence.

    d_above: (T, H) loss gradient arriving at each h_t from above.
    Wh: (4H, H) recurrent block of the gate matrix.
    dz: (T, 4H) output, gradient w.r.t. the gate pre-activations.
    """
    T, H = d_above.shape
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in range(T - 1, -1, -1):
        for k in range(H):
            f = gates[t, k]
            i = gates[t, H + k]
            cb = gates[t, 2 * H + k]
            o = gates[t, 3 * H + k]
            tc = tanh_cell[t, k]
            dh = d_above[t, k] + dh_next[k]
            dc = dc_next[k] + dh * (o * (1.0 - tc * tc))
            dz[t, k] = dc * (cell[t, k] * f * (1.0 - f))
            dz[t, H + k] = dc * (cb * i * (1.0 - i))
            dz[t, 2 * H + k] = dc * (i * (1.0 - cb * cb))
            dz[t, 3 * H + k] = dh * (tc * o * (1.0 - o))
            dc_next[k] = dc * f
        for k in range(H):
            dh_next[k] = 0.0
        for r in range(4 * H):
            d = dz[t, r]
            for k in range(H):
                dh_next[k] += Wh[r, k] * d


@njit(cache=True)
def adam_update(params, grads, m, v, lr, b1, b2, eps, t):
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for n in range(params.shape[0]):
        g = grads[n]
        m[n] = b1 * m[n] + (1.0 - b1) * g
        v[n] = b2 * v[n] + (1.0 - b2) * (g * g)
        params[n] -= lr * (m[n] / c1) / (math.sqrt(v[n] / c2) + eps)
