import math

import numpy as np
import pytest

import oracles
from slr import gradcheck, nn
from slr.exceptions import DimensionMismatch, InvalidDimension, LabelOutOfRange, TraceMismatch


def random_model(rng, classes=3, inputs=3, hidden=4, layers=2, scale=0.5):
    model = nn.ModelParams(classes, inputs, hidden, layers)
    model.data[...] = rng.normal(0.0, scale, size=model.data.shape)
    return model


def scalar_layer():
    return nn.LstmLayerParams(np.full((4, 2), 0.5), np.zeros(4))


# -- cell step ----------------------------------------------------------------

def test_zero_cell_step(rng):
    layer = nn.LstmLayerParams(np.zeros((12, 5)), np.zeros(12))
    state, g = nn.lstm_cell_step(layer, nn.LstmState.zeros(3), rng.normal(size=2))
    for gate in (g.f, g.i, g.o):
        assert np.all(gate == 0.5)
    assert not g.c_bar.any() and not state.c.any() and not state.h.any()


def test_scalar_hand_example():
    state, g = nn.lstm_cell_step(scalar_layer(), nn.LstmState.zeros(1), np.array([1.0]))
    s = 1.0 / (1.0 + math.exp(-0.5))
    c = s * math.tanh(0.5)
    h = s * math.tanh(c)
    for gate in (g.f, g.i, g.o):
        assert gate[0] == pytest.approx(s, abs=1e-15)
    assert g.c_bar[0] == pytest.approx(math.tanh(0.5), abs=1e-15)
    assert state.c[0] == pytest.approx(c, abs=1e-15)
    assert state.h[0] == pytest.approx(h, abs=1e-15)
    # Pinned decimal values of the hand evaluation.
    assert g.f[0] == pytest.approx(0.6224593, abs=1e-7)
    assert g.c_bar[0] == pytest.approx(0.4621172, abs=1e-7)
    assert state.c[0] == pytest.approx(0.2876491, abs=1e-7)
    assert state.h[0] == pytest.approx(0.1742697, abs=1e-7)


def test_scalar_example_through_forward():
    model = nn.ModelParams(2, 1, 1, 1)
    model.layers[0].W[...] = 0.5
    model.W_out[...] = [[1.0], [-2.0]]
    model.b_out[...] = [0.25, 0.0]
    logits, trace = nn.forward(model, np.array([[1.0]]))
    h = trace.layers[0].hidden[1, 0]
    assert h == pytest.approx(0.1742697, abs=1e-7)
    assert logits[0] == h + 0.25 and logits[1] == -2.0 * h


def test_saturated_gates_carry_cell_state(rng):
    H = 3
    layer = nn.LstmLayerParams.from_gates(
        np.zeros((H, H + 2)), np.zeros((H, H + 2)), rng.normal(size=(H, H + 2)), rng.normal(size=(H, H + 2)),
        np.full(H, 60.0), np.full(H, -60.0), np.zeros(H), np.zeros(H))
    c0 = rng.normal(size=H)
    state = nn.LstmState(np.zeros(H), c0.copy())
    for _ in range(50):
        state, g = nn.lstm_cell_step(layer, state, rng.normal(size=2))
    assert np.allclose(state.c, c0, atol=1e-14)


def test_cell_step_rejects_bad_dims():
    with pytest.raises(DimensionMismatch):
        nn.lstm_cell_step(scalar_layer(), nn.LstmState.zeros(1), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        nn.lstm_cell_step(scalar_layer(), nn.LstmState.zeros(2), np.zeros(1))


def test_gate_views_share_storage():
    layer = nn.LstmLayerParams(np.arange(24.0).reshape(8, 3), np.arange(8.0))
    assert layer.hidden_size == 2 and layer.input_size == 1
    assert layer.W_C.tolist() == [[12, 13, 14], [15, 16, 17]]
    assert layer.b_o.tolist() == [6, 7]
    layer.W_i[...] = -1
    assert np.all(layer.W[2:4] == -1)


# -- forward ----------------------------------------------------------------

def test_zero_model_logits_are_zero(rng):
    model = nn.ModelParams(5, 60, 8, 2)
    logits, _ = nn.forward(model, rng.normal(size=(7, 60)))
    assert np.array_equal(logits, np.zeros(5))


def test_single_step_single_layer_is_cell_plus_head(rng):
    model = random_model(rng, layers=1)
    x = rng.normal(size=3)
    logits, _ = nn.forward(model, x[None])
    state, _ = nn.lstm_cell_step(model.layers[0], nn.LstmState.zeros(4), x)
    assert np.allclose(logits, model.W_out @ state.h + model.b_out, atol=1e-15, rtol=0)


def test_forward_matches_straight_line_oracle(rng):
    for _ in range(100):
        classes, inputs, hidden, layers, steps = (int(rng.integers(2, 5)), int(rng.integers(1, 5)),
                                                  int(rng.integers(1, 6)), int(rng.integers(1, 4)),
                                                  int(rng.integers(1, 8)))
        model = random_model(rng, classes, inputs, hidden, layers)
        x = rng.normal(size=(steps, inputs))
        layers_, W_out, b_out = oracles.gates_from_model(model)
        expected = oracles.lstm_logits(layers_, W_out, b_out, x.tolist())
        logits = nn.predict_logits(model, x)
        assert np.max(np.abs(logits - expected)) < 1e-12


def test_forward_equals_iterated_cell_steps(rng):
    model = random_model(rng, inputs=3, hidden=4, layers=3)
    x = rng.normal(size=(9, 3))
    logits, trace = nn.forward(model, x)
    states = [nn.LstmState.zeros(4) for _ in model.layers]
    for t in range(9):
        inp = x[t]
        for k, layer in enumerate(model.layers):
            states[k], g = nn.lstm_cell_step(layer, states[k], inp)
            tr = trace.layers[k]
            assert np.max(np.abs(tr.gate("f")[t] - g.f)) <= 1e-15
            assert np.max(np.abs(tr.gate("C")[t] - g.c_bar)) <= 1e-15
            assert np.max(np.abs(tr.cell[t + 1] - states[k].c)) <= 1e-15
            inp = states[k].h
    assert np.max(np.abs(logits - (model.W_out @ states[-1].h + model.b_out))) <= 1e-15


def test_gate_ranges_and_trace_shapes(rng):
    # Moderate scale: far enough out, the rounded sigmoid reaches exactly 0 or 1.
    model = random_model(rng, hidden=5, scale=1.0)
    logits, trace = nn.forward(model, rng.normal(0, 2, size=(12, 3)))
    assert len(trace) == 12
    for tr in trace.layers:
        assert tr.hidden.shape == (13, 5) and tr.gates.shape == (12, 20)
        for name in ("f", "i", "o"):
            assert np.all((tr.gate(name) > 0) & (tr.gate(name) < 1))
        assert np.all(np.abs(tr.gate("C")) <= 1)
        assert np.all(np.isfinite(tr.gates))


def test_forward_deterministic_and_validates(rng):
    model = random_model(rng)
    x = rng.normal(size=(6, 3))
    a, b = nn.predict_logits(model, x), nn.predict_logits(model, x)
    assert np.array_equal(a.view(np.uint64), b.view(np.uint64))
    for bad in (np.zeros((0, 3)), np.zeros((4, 2)), np.zeros(3)):
        with pytest.raises(DimensionMismatch):
            nn.forward(model, bad)


# -- loss ---------------------------------------------------------------------

def test_softmax_uniform_logits():
    loss, grad = nn.softmax_cross_entropy(np.full(4, 2.5), 1)
    assert loss == pytest.approx(math.log(4), abs=1e-15)
    assert np.allclose(grad, [0.25, -0.75, 0.25, 0.25], atol=1e-16)


def test_softmax_stability_and_zero_sum(rng):
    loss, grad = nn.softmax_cross_entropy(np.array([1000.0, 0.0]), 0)
    assert loss == pytest.approx(0.0, abs=1e-300) and np.all(np.isfinite(grad))
    loss, _ = nn.softmax_cross_entropy(np.array([1000.0, 0.0]), 1)
    assert loss == pytest.approx(1000.0)
    for _ in range(20):
        _, grad = nn.softmax_cross_entropy(rng.normal(0, 5, size=6), int(rng.integers(6)))
        assert abs(grad.sum()) < 1e-15


def test_softmax_label_range():
    with pytest.raises(LabelOutOfRange):
        nn.softmax_cross_entropy(np.zeros(3), 3)
    with pytest.raises(LabelOutOfRange):
        nn.softmax_cross_entropy(np.zeros(3), -1)


# -- backward -------------------------------------------------------------------

def test_zero_dlogits_zero_gradients(rng):
    model = random_model(rng)
    _, trace = nn.forward(model, rng.normal(size=(5, 3)))
    assert not nn.backward(model, trace, np.zeros(3)).data.any()


def test_gradcheck_reference_config():
    for seed in range(3):
        result = gradcheck.check_gradients(seed)
        assert result.passed(), result.errors
        assert set(result.errors) == {name for name, _ in nn.ModelParams(3, 3, 4, 2).named_tensors()}


def test_gradcheck_other_shapes():
    assert gradcheck.check_gradients(7, input_size=2, hidden_size=3, num_layers=3, steps=8, num_classes=4).passed()
    assert gradcheck.check_gradients(8, input_size=5, hidden_size=2, num_layers=1, steps=1, num_classes=2).passed()


def test_gradcheck_detects_wrong_gradient(monkeypatch):
    real = nn.backward

    def broken(model, trace, dlogits, out=None):
        grads = real(model, trace, dlogits, out)
        grads.layers[0].b_i[...] *= 1.01
        return grads

    monkeypatch.setattr(nn, "backward", broken)
    result = gradcheck.check_gradients(0)
    assert not result.passed() and result.worst == "b_i.0"


def test_backward_deterministic_and_buffer_reuse(rng):
    model = random_model(rng)
    logits, trace = nn.forward(model, rng.normal(size=(5, 3)))
    _, d = nn.softmax_cross_entropy(logits, 1)
    a = nn.backward(model, trace, d)
    b = nn.backward(model, trace, d)
    assert a.identical(b)
    buf = model.zeros_like()
    buf.data[...] = 7.0
    assert nn.backward(model, trace, d, out=buf).identical(a)


def test_backward_trace_mismatch(rng):
    model = random_model(rng)
    other = random_model(rng, hidden=5)
    _, trace = nn.forward(other, rng.normal(size=(5, 3)))
    with pytest.raises(TraceMismatch):
        nn.backward(model, trace, np.zeros(3))
    _, trace = nn.forward(model, rng.normal(size=(5, 3)))
    with pytest.raises(TraceMismatch):
        nn.backward(model, trace, np.zeros(4))


# -- parameters ---------------------------------------------------------------

def test_init_rules():
    a = nn.init_params(4, 60, 16, 2, seed=3)
    assert a.identical(nn.init_params(4, 60, 16, 2, seed=3))
    assert not a.identical(nn.init_params(4, 60, 16, 2, seed=4))
    for k, layer in enumerate(a.layers):
        assert np.all(layer.b_f == 1.0)
        assert not layer.b_i.any() and not layer.b_C.any() and not layer.b_o.any()
        s = 1.0 / math.sqrt(16 + (60 if k == 0 else 16))
        assert np.max(np.abs(layer.W)) <= s
        assert np.max(np.abs(layer.W)) > 0.9 * s
    assert not a.b_out.any()
    assert np.max(np.abs(a.W_out)) <= 0.25


@pytest.mark.parametrize("dims", [(1, 60, 8, 1), (3, 0, 8, 1), (3, 60, 0, 1), (3, 60, 8, 0), (3, 60, 2.5, 1)])
def test_init_rejects_bad_dims(dims):
    with pytest.raises(InvalidDimension):
        nn.init_params(*dims)


def test_flat_buffer_layout():
    model = nn.ModelParams(3, 5, 2, 2)
    assert model.data.size == nn.ModelParams.size_for(3, 5, 2, 2) == 8 * 7 + 8 + 8 * 4 + 8 + 3 * 2 + 3
    names = [n for n, _ in model.named_tensors()]
    assert names[:3] == ["W_f.0", "b_f.0", "W_i.0"] and names[-2:] == ["W_out", "b_out"]
    model.b_out[...] = 9.0
    assert np.all(model.data[-3:] == 9.0)
    with pytest.raises(DimensionMismatch):
        nn.ModelParams(3, 5, 2, 2, data=np.zeros(4))
