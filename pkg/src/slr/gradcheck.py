"""Finite-difference verification of the BPTT gradients in :mod:`slr.nn`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn

TOLERANCE = 1e-6


@dataclass
class GradCheckResult:
    errors: dict[str, float]   # relative error per named tensor

    @property
    def max_error(self) -> float:
        return max(self.errors.values())

    @property
    def worst(self) -> str:
        return max(self.errors, key=self.errors.get)

    def passed(self, tolerance: float = TOLERANCE) -> bool:
        return self.max_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``|a - n| / max(|a|, |n|)`` in the L2 norm; 0 when both vanish."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def numeric_gradient(model: nn.ModelParams, features: np.ndarray, label: int,
                     step: float = 1e-5) -> np.ndarray:
    """Central differences of the cross-entropy loss w.r.t. the flat parameters."""
    def loss() -> float:
        return nn.softmax_cross_entropy(nn.forward(model, features)[0], label)[0]

    grad = np.empty_like(model.data)
    for j in range(model.data.size):
        saved = model.data[j]
        model.data[j] = saved + step
        plus = loss()
        model.data[j] = saved - step
        minus = loss()
        model.data[j] = saved
        grad[j] = (plus - minus) / (2.0 * step)
    return grad


def check_gradients(seed: int = 0, input_size: int = 3, hidden_size: int = 4, num_layers: int = 2,
                    steps: int = 5, num_classes: int = 3, step: float = 1e-5) -> GradCheckResult:
    """Compare :func:`nn.backward` with finite differences on a random model and input."""
    rng = np.random.default_rng(seed)
    model = nn.init_params(num_classes, input_size, hidden_size, num_layers, seed=seed)
    # Perturb biases too so no gradient is trivially structured.
    model.data += rng.normal(0.0, 0.1, size=model.data.shape)
    features = rng.normal(size=(steps, input_size))
    label = int(rng.integers(num_classes))

    logits, trace = nn.forward(model, features)
    _, dlogits = nn.softmax_cross_entropy(logits, label)
    analytic = nn.backward(model, trace, dlogits)
    numeric = model.zeros_like()
    numeric.data[...] = numeric_gradient(model, features, label, step)
    errors = {name: relative_error(a, n)
              for (name, a), (_, n) in zip(analytic.named_tensors(), numeric.named_tensors())}
    return GradCheckResult(errors)


def check_many(seed: int = 0, trials: int = 10, **kwargs) -> GradCheckResult:
    """Worst error per tensor over ``trials`` consecutive seeds starting at ``seed``."""
    worst: dict[str, float] = {}
    for s in range(seed, seed + trials):
        for name, err in check_gradients(s, **kwargs).errors.items():
            worst[name] = max(err, worst.get(name, 0.0))
    return GradCheckResult(worst)
