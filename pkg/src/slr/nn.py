"""Stacked LSTM sequence classifier written directly in numpy.

Each layer computes, for every timestep ``t`` with ``z = [h_{t-1}, x_t]``::

    f_t  = sigmoid(W_f z + b_f)          forget gate
    i_t  = sigmoid(W_i z + b_i)          input gate
    cc_t = tanh(W_C z + b_C)             candidate cell values
    C_t  = f_t * C_{t-1} + i_t * cc_t
    o_t  = sigmoid(W_o z + b_o)          output gate
    h_t  = o_t * tanh(C_t)

The top layer's last hidden state feeds an affine head producing class
logits. Gradients are obtained by backpropagation through time.

Storage layout: the four gate matrices of a layer are stacked row-wise in
the order (f, i, C, o) into one ``(4H, H + X)`` matrix whose first ``H``
columns multiply ``h_{t-1}`` and remaining ``X`` columns multiply ``x_t``.
All tensors of a model are views into a single flat float64 buffer, which
keeps optimizer updates and serialization simple.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import expit

from . import _kernels
from .exceptions import (DimensionMismatch, InvalidDimension, LabelOutOfRange,
                         TraceMismatch)

GATES = ("f", "i", "C", "o")


class LstmLayerParams:
    """Gate weights and biases of one LSTM layer.

    ``W`` has shape ``(4 * hidden, hidden + input)`` and ``b`` shape
    ``(4 * hidden,)``; the per-gate properties (``W_f``, ``b_o``...) are
    views into them.
    """

    def __init__(self, W: np.ndarray, b: np.ndarray):
        if W.ndim != 2 or W.shape[0] % 4 or b.shape != (W.shape[0],):
            raise DimensionMismatch(f"bad LSTM layer shapes W{W.shape} b{b.shape}")
        self.W = W
        self.b = b

    @property
    def hidden_size(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[1] - self.hidden_size

    def gate_weight(self, gate: str) -> np.ndarray:
        k = GATES.index(gate)
        H = self.hidden_size
        return self.W[k * H:(k + 1) * H]

    def gate_bias(self, gate: str) -> np.ndarray:
        k = GATES.index(gate)
        H = self.hidden_size
        return self.b[k * H:(k + 1) * H]

    W_f = property(lambda self: self.gate_weight("f"))
    W_i = property(lambda self: self.gate_weight("i"))
    W_C = property(lambda self: self.gate_weight("C"))
    W_o = property(lambda self: self.gate_weight("o"))
    b_f = property(lambda self: self.gate_bias("f"))
    b_i = property(lambda self: self.gate_bias("i"))
    b_C = property(lambda self: self.gate_bias("C"))
    b_o = property(lambda self: self.gate_bias("o"))

    @classmethod
    def from_gates(cls, W_f, W_i, W_C, W_o, b_f, b_i, b_C, b_o) -> "LstmLayerParams":
        W = np.concatenate([np.atleast_2d(w) for w in (W_f, W_i, W_C, W_o)]).astype(np.float64)
        b = np.concatenate([np.atleast_1d(v) for v in (b_f, b_i, b_C, b_o)]).astype(np.float64)
        return cls(W, b)


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int) -> "LstmState":
        return cls(np.zeros(hidden_size), np.zeros(hidden_size))


@dataclass
class GateRecord:
    f: np.ndarray
    i: np.ndarray
    c_bar: np.ndarray
    o: np.ndarray


class ModelParams:
    """Parameters of a stacked LSTM plus its linear classifier head.

    Also used to hold gradients, which have exactly the same structure.
    """

    def __init__(self, num_classes: int, input_size: int, hidden_size: int,
                 num_layers: int, data: np.ndarray | None = None):
        for name, value, low in (("num_classes", num_classes, 2), ("input_size", input_size, 1),
                                 ("hidden_size", hidden_size, 1), ("num_layers", num_layers, 1)):
            if int(value) != value or value < low:
                raise InvalidDimension(f"{name} must be an integer >= {low}, got {value}")
        self.num_classes = int(num_classes)
        self.input_size = int(input_size)
        self.hidden_size = int(hidden_size)
        self.num_layers = int(num_layers)
        size = self.size_for(self.num_classes, self.input_size, self.hidden_size, self.num_layers)
        if data is None:
            data = np.zeros(size)
        elif data.shape != (size,) or data.dtype != np.float64:
            raise DimensionMismatch(f"flat buffer must be float64 of shape ({size},), got {data.dtype}{data.shape}")
        self.data = data
        self.layers: list[LstmLayerParams] = []
        H, offset = self.hidden_size, 0
        for k in range(self.num_layers):
            X = self.input_size if k == 0 else H
            W = data[offset:offset + 4 * H * (H + X)].reshape(4 * H, H + X)
            offset += W.size
            b = data[offset:offset + 4 * H]
            offset += b.size
            self.layers.append(LstmLayerParams(W, b))
        self.W_out = data[offset:offset + self.num_classes * H].reshape(self.num_classes, H)
        offset += self.W_out.size
        self.b_out = data[offset:offset + self.num_classes]

    @staticmethod
    def size_for(num_classes, input_size, hidden_size, num_layers) -> int:
        H = hidden_size
        total = 4 * H * (H + input_size + 1)
        total += (num_layers - 1) * 4 * H * (2 * H + 1)
        return total + num_classes * (H + 1)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.num_classes, self.input_size, self.hidden_size, self.num_layers

    def zeros_like(self) -> "ModelParams":
        return ModelParams(*self.dims)

    def copy(self) -> "ModelParams":
        return ModelParams(*self.dims, data=self.data.copy())

    def named_tensors(self) -> Iterator[tuple[str, np.ndarray]]:
        """``(name, view)`` pairs in serialization order; biases are 1-D."""
        for k, layer in enumerate(self.layers):
            for gate in GATES:
                yield f"W_{gate}.{k}", layer.gate_weight(gate)
                yield f"b_{gate}.{k}", layer.gate_bias(gate)
        yield "W_out", self.W_out
        yield "b_out", self.b_out

    def identical(self, other: "ModelParams") -> bool:
        """Bitwise equality of dimensions and every parameter."""
        return (self.dims == other.dims
                and np.array_equal(self.data.view(np.uint64), other.data.view(np.uint64)))


@dataclass
class LayerTrace:
    inputs: np.ndarray    # (T, X) layer inputs x_t
    hidden: np.ndarray    # (T + 1, H); row 0 is the zero initial state
    cell: np.ndarray      # (T + 1, H); row 0 is the zero initial state
    gates: np.ndarray     # (T, 4H) activated gates in (f, i, C, o) order
    tanh_cell: np.ndarray  # (T, H)

    def gate(self, name: str) -> np.ndarray:
        H = self.hidden.shape[1]
        k = GATES.index(name)
        return self.gates[:, k * H:(k + 1) * H]


@dataclass
class ForwardTrace:
    layers: list[LayerTrace]
    dims: tuple[int, int, int, int]

    def __len__(self) -> int:
        return self.layers[0].inputs.shape[0]


def init_params(num_classes: int, input_size: int, hidden_size: int, num_layers: int,
                seed: int = 0) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, forget bias 1."""
    model = ModelParams(num_classes, input_size, hidden_size, num_layers)
    rng = np.random.default_rng(seed)
    for layer in model.layers:
        s = 1.0 / np.sqrt(layer.W.shape[1])
        layer.W[...] = rng.uniform(-s, s, size=layer.W.shape)
        layer.b_f[...] = 1.0
    s = 1.0 / np.sqrt(model.hidden_size)
    model.W_out[...] = rng.uniform(-s, s, size=model.W_out.shape)
    return model


def lstm_cell_step(params: LstmLayerParams, state: LstmState, x: np.ndarray
                   ) -> tuple[LstmState, GateRecord]:
    """Advance one layer by one timestep."""
    H = params.hidden_size
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_size,) or state.h.shape != (H,) or state.c.shape != (H,):
        raise DimensionMismatch(
            f"cell expects x({params.input_size},), h({H},), c({H},); "
            f"got x{x.shape}, h{state.h.shape}, c{state.c.shape}")
    # Same association as forward(): (W_x x + b) + W_h h.
    z = (params.W[:, H:] @ x + params.b) + params.W[:, :H] @ state.h
    f = expit(z[:H])
    i = expit(z[H:2 * H])
    c_bar = np.tanh(z[2 * H:3 * H])
    o = expit(z[3 * H:])
    c = f * state.c + i * c_bar
    h = o * np.tanh(c)
    return LstmState(h, c), GateRecord(f, i, c_bar, o)


def _run_layer(layer: LstmLayerParams, inputs: np.ndarray) -> LayerTrace:
    T = inputs.shape[0]
    H = layer.hidden_size
    pre = inputs @ layer.W[:, H:].T + layer.b
    hidden = np.zeros((T + 1, H))
    cell = np.zeros((T + 1, H))
    gates = np.empty((T, 4 * H))
    tanh_cell = np.empty((T, H))
    _kernels.layer_forward(pre, np.ascontiguousarray(layer.W[:, :H].T), hidden, cell, gates, tanh_cell)
    return LayerTrace(inputs, hidden, cell, gates, tanh_cell)


def forward(model: ModelParams, features: np.ndarray) -> tuple[np.ndarray, ForwardTrace]:
    """Run the network over a ``(T, input_size)`` sequence from zero state.

    Returns the class logits computed from the top layer's final hidden
    state, plus the trace required by :func:`backward`.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] != model.input_size:
        raise DimensionMismatch(
            f"expected features of shape (T >= 1, {model.input_size}), got {features.shape}")
    traces = []
    inputs = features
    for layer in model.layers:
        tr = _run_layer(layer, inputs)
        traces.append(tr)
        inputs = tr.hidden[1:]
    logits = model.W_out @ inputs[-1] + model.b_out
    return logits, ForwardTrace(traces, model.dims)


def predict_logits(model: ModelParams, features: np.ndarray) -> np.ndarray:
    return forward(model, features)[0]


def softmax_cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of ``softmax(logits)`` against ``label`` and its logit gradient."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.shape[0]:
        raise LabelOutOfRange(f"label {label} outside [0, {logits.shape[0]})")
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    log_p = shifted - log_z
    grad = np.exp(log_p)
    grad[label] -= 1.0
    return float(-log_p[label]), grad


def backward(model: ModelParams, trace: ForwardTrace, dlogits: np.ndarray,
             out: ModelParams | None = None) -> ModelParams:
    """Gradients of a scalar loss w.r.t. every parameter, given ``dL/dlogits``.

    Pass ``out`` to reuse a gradient buffer; it is overwritten, not
    accumulated into.
    """
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if trace.dims != model.dims or len(trace.layers) != model.num_layers:
        raise TraceMismatch(f"trace built for model dims {trace.dims}, got {model.dims}")
    if dlogits.shape != (model.num_classes,):
        raise TraceMismatch(f"dlogits must have shape ({model.num_classes},), got {dlogits.shape}")
    grads = model.zeros_like() if out is None else out
    H = model.hidden_size
    T = len(trace)

    top = trace.layers[-1].hidden
    np.outer(dlogits, top[-1], out=grads.W_out)
    grads.b_out[...] = dlogits
    d_above = np.zeros((T, H))
    d_above[-1] = model.W_out.T @ dlogits

    for k in range(model.num_layers - 1, -1, -1):
        layer, tr, g_layer = model.layers[k], trace.layers[k], grads.layers[k]
        dz = np.empty((T, 4 * H))
        _kernels.layer_backward(d_above, np.ascontiguousarray(layer.W[:, :H]), tr.cell, tr.gates,
                                tr.tanh_cell, dz)
        np.matmul(dz.T, np.hstack([tr.hidden[:-1], tr.inputs]), out=g_layer.W)
        np.sum(dz, axis=0, out=g_layer.b)
        if k > 0:
            d_above = dz @ layer.W[:, H:]
    return grads
