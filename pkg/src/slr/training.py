"""Per-sample Adam training of :class:`~slr.nn.ModelParams`."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels, nn
from .exceptions import DimensionMismatch, EmptyDataset, InvalidConfig, LabelOutOfRange, ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise InvalidConfig(f"epochs must be an integer >= 1, got {self.epochs}")
        if not self.learning_rate >= 0:
            raise InvalidConfig(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise InvalidConfig("Adam betas must lie strictly between 0 and 1")
        if not self.adam_eps > 0 or not self.grad_clip > 0:
            raise InvalidConfig("adam_eps and grad_clip must be > 0")


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


@dataclass
class TrainLog:
    epochs: list[EpochStats] = field(default_factory=list)

    @property
    def losses(self) -> list[float]:
        return [e.loss for e in self.epochs]

    @property
    def accuracies(self) -> list[float]:
        return [e.accuracy for e in self.epochs]

    def __len__(self) -> int:
        return len(self.epochs)


@dataclass
class AdamMoments:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, size: int) -> "AdamMoments":
        return cls(np.zeros(size), np.zeros(size))


def adam_step(params: np.ndarray, grads: np.ndarray, moments: AdamMoments, t: int,
              config: TrainConfig) -> None:
    """Bias-corrected Adam update, applied in place to ``params`` and ``moments``."""
    if params.shape != grads.shape or moments.m.shape != params.shape or moments.v.shape != params.shape:
        raise ShapeMismatch(f"params {params.shape}, grads {grads.shape}, "
                            f"moments {moments.m.shape}/{moments.v.shape}")
    if params.ndim != 1:
        raise ShapeMismatch(f"Adam operates on flat parameter vectors, got shape {params.shape}")
    if t < 1:
        raise InvalidConfig(f"Adam step index starts at 1, got {t}")
    _kernels.adam_update(params, grads, moments.m, moments.v, config.learning_rate,
                         config.adam_beta1, config.adam_beta2, config.adam_eps, t)


def clip_global_norm(grads: np.ndarray, max_norm: float) -> float:
    """Scale ``grads`` in place so its L2 norm is at most ``max_norm``; returns the original norm."""
    norm = float(np.sqrt(np.dot(grads, grads)))
    if norm > max_norm:
        grads *= max_norm / norm
    return norm


def _check_dataset(dataset, model: nn.ModelParams):
    if len(dataset) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    for n, (features, label) in enumerate(dataset):
        if features.ndim != 2 or features.shape[1] != model.input_size or features.shape[0] < 1:
            raise DimensionMismatch(
                f"sample {n}: features {features.shape} do not match model input {model.input_size}")
        if not 0 <= label < model.num_classes:
            raise LabelOutOfRange(f"sample {n}: label {label} outside [0, {model.num_classes})")


def train(dataset: Sequence[tuple[np.ndarray, int]], config: TrainConfig,
          model_init: nn.ModelParams,
          on_epoch: Callable[[EpochStats], None] | None = None
          ) -> tuple[nn.ModelParams, TrainLog]:
    """Fit a copy of ``model_init`` with one Adam step per sample.

    Loss and accuracy in the log are measured on each sample just before
    its update, averaged over the epoch.
    """
    dataset = [(np.asarray(f, dtype=np.float64), int(y)) for f, y in dataset]
    _check_dataset(dataset, model_init)
    model = model_init.copy()
    grads = model.zeros_like()
    moments = AdamMoments.zeros(model.data.size)
    rng = np.random.default_rng(config.seed)
    log = TrainLog()
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(dataset)) if config.shuffle else np.arange(len(dataset))
        total_loss = 0.0
        correct = 0
        for idx in order:
            features, label = dataset[idx]
            logits, trace = nn.forward(model, features)
            loss, dlogits = nn.softmax_cross_entropy(logits, label)
            total_loss += loss
            correct += int(np.argmax(logits) == label)
            nn.backward(model, trace, dlogits, out=grads)
            clip_global_norm(grads.data, config.grad_clip)
            step += 1
            adam_step(model.data, grads.data, moments, step, config)
        stats = EpochStats(epoch, total_loss / len(dataset), correct / len(dataset))
        log.epochs.append(stats)
        logger.debug("epoch %d loss %.6f acc %.4f", stats.epoch, stats.loss, stats.accuracy)
        if on_epoch is not None:
            on_epoch(stats)
    return model, log


def dataset_loss(model: nn.ModelParams, dataset) -> float:
    """Mean cross-entropy of ``model`` over ``dataset`` without updating it."""
    total = 0.0
    for features, label in dataset:
        total += nn.softmax_cross_entropy(nn.predict_logits(model, features), label)[0]
    return total / len(dataset)
