"""scikit-learn compatible wrappers around the normalization and LSTM code.

Sequences have variable length, so ``X`` is a list (or object array) of
per-sequence arrays rather than a 2-D matrix. Each element may be a
``(T, 20, 3)`` joint array, a ``(T, 60)`` feature matrix or a
:class:`~slr.skeleton.GestureSequence`. A 3-D array ``(n, T, d)`` is also
accepted and treated as ``n`` equal-length sequences.

Example::

    pipe = make_pipeline(SkeletonNormalizer(), FrameFlattener(),
                         LSTMSequenceClassifier(hidden_size=64, epochs=30))
    pipe.fit(train_sequences, train_labels).score(test_sequences, test_labels)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import nn
from .exceptions import DimensionMismatch, InvalidValue
from .geometry import NormalizationConfig, normalize_joints
from .skeleton import FEATURES_PER_FRAME, NUM_JOINTS, GestureSequence
from .training import TrainConfig, train


def check_sequences(X, *, joints: bool = False) -> list[np.ndarray]:
    """Validate a collection of sequences and return float64 arrays.

    Args:
        X: iterable of sequences (see module docstring).
        joints: return ``(T, 20, 3)`` arrays instead of ``(T, d)`` matrices.

    Raises:
        InvalidValue: empty collection, empty sequence or non-finite values.
        DimensionMismatch: sequences of inconsistent or unsupported shape.
    """
    if isinstance(X, GestureSequence):
        raise InvalidValue("expected a collection of sequences, got a single GestureSequence")
    items = list(X)
    if not items:
        raise InvalidValue("X contains no sequences")
    out = []
    width = None
    for n, item in enumerate(items):
        arr = item.joints if isinstance(item, GestureSequence) else np.asarray(item, dtype=np.float64)
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 3 and arr.shape[1:] == (NUM_JOINTS, 3):
            arr = arr.reshape(arr.shape[0], FEATURES_PER_FRAME)
        if arr.ndim != 2:
            raise DimensionMismatch(f"sequence {n}: expected (T, d) or (T, 20, 3), got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InvalidValue(f"sequence {n} has no frames")
        if width is None:
            width = arr.shape[1]
        elif arr.shape[1] != width:
            raise DimensionMismatch(f"sequence {n} has {arr.shape[1]} features, expected {width}")
        if not np.all(np.isfinite(arr)):
            raise InvalidValue(f"sequence {n} contains non-finite values")
        if joints:
            if width != FEATURES_PER_FRAME:
                raise DimensionMismatch(f"sequence {n}: {width} features cannot hold 20 joints")
            arr = arr.reshape(arr.shape[0], NUM_JOINTS, 3)
        out.append(arr)
    return out


class SkeletonNormalizer(TransformerMixin, BaseEstimator):
    """Per-frame translation and Y-rotation normalization; stateless."""

    def __init__(self, epsilon: float = 1e-9, strict: bool = False):
        self.epsilon = epsilon
        self.strict = strict

    def fit(self, X, y=None):
        check_sequences(X, joints=True)
        self.n_features_in_ = FEATURES_PER_FRAME
        return self

    def transform(self, X):
        config = NormalizationConfig(self.epsilon, self.strict)
        return [normalize_joints(seq, config)[0] for seq in check_sequences(X, joints=True)]


class FrameFlattener(TransformerMixin, BaseEstimator):
    """Reshape ``(T, 20, 3)`` joint arrays into ``(T, 60)`` feature rows."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return check_sequences(X)


class LSTMSequenceClassifier(ClassifierMixin, BaseEstimator):
    """Stacked LSTM over a sequence, classifying from the last hidden state.

    Trained with per-sample Adam steps and global-norm gradient clipping.
    After ``fit``: ``classes_``, ``model_`` (:class:`~slr.nn.ModelParams`),
    ``train_log_`` and ``n_features_in_``.
    """

    def __init__(self, hidden_size: int = 128, num_layers: int = 2, epochs: int = 30,
                 learning_rate: float = 1e-3, grad_clip: float = 5.0, shuffle: bool = True,
                 random_state: int = 0):
        self.hidden_size = hidden_size
        self.num_layers = num_layers
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.grad_clip = grad_clip
        self.shuffle = shuffle
        self.random_state = random_state

    def fit(self, X, y):
        seqs = check_sequences(X)
        y = np.asarray(y)
        if y.shape != (len(seqs),):
            raise DimensionMismatch(f"{len(seqs)} sequences but y has shape {y.shape}")
        self.classes_, labels = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise InvalidValue("need at least two classes to fit a classifier")
        self.n_features_in_ = seqs[0].shape[1]
        init = nn.init_params(len(self.classes_), self.n_features_in_, self.hidden_size,
                              self.num_layers, seed=self.random_state)
        config = TrainConfig(epochs=self.epochs, learning_rate=self.learning_rate,
                             grad_clip=self.grad_clip, seed=self.random_state, shuffle=self.shuffle)
        self.model_, self.train_log_ = train(list(zip(seqs, labels.tolist())), config, init)
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        seqs = check_sequences(X)
        if seqs[0].shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"X has {seqs[0].shape[1]} features, "
                                    f"classifier was fitted with {self.n_features_in_}")
        return np.stack([nn.predict_logits(self.model_, s) for s in seqs])

    def predict_proba(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        logits = logits - logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
