"""Leave-one-signer-out cross-validation and accuracy reporting."""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import nn
from .exceptions import EmptyTestSet, InsufficientClasses, InsufficientSigners, LabelOutOfRange
from .geometry import NormalizationConfig, normalize_joints
from .skeleton import FEATURES_PER_FRAME, GestureSequence, HandMode
from .training import TrainConfig, train

logger = logging.getLogger(__name__)


class HandFilter(str, enum.Enum):
    Single = "Single"
    Double = "Double"
    Combined = "Combined"

    @classmethod
    def parse(cls, value) -> "HandFilter":
        if isinstance(value, cls):
            return value
        return cls(str(value).capitalize())


@dataclass(frozen=True)
class ModelConfig:
    hidden_size: int = 128
    num_layers: int = 2


@dataclass
class FoldResult:
    held_out_signer: int
    accuracy: float
    confusion: np.ndarray


@dataclass
class EvalReport:
    folds: list[FoldResult]
    hand_mode_filter: HandFilter = HandFilter.Combined
    class_names: list[str] = field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean([f.accuracy for f in self.folds]))

    def format_table(self) -> str:
        """Aligned text table: one row per held-out signer plus the mean."""
        lines = [f"{'signer':>8}  {'accuracy':>8}"]
        for fold in self.folds:
            lines.append(f"{fold.held_out_signer:>8}  {fold.accuracy:>8.4f}")
        lines.append(f"{'mean':>8}  {self.mean_accuracy:>8.4f}")
        return "\n".join(lines) + "\n"

    def confusion_total(self) -> np.ndarray:
        return np.sum([f.confusion for f in self.folds], axis=0)


def format_confusion(confusion: np.ndarray) -> str:
    """Comma-separated integer rows; row = true class, column = prediction."""
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in confusion)


def split_loocv(dataset: Sequence[GestureSequence]
                ) -> list[tuple[list[GestureSequence], list[GestureSequence]]]:
    """One ``(train, test)`` pair per signer, ordered by signer id."""
    signers = sorted({seq.signer_id for seq in dataset})
    if len(signers) < 2:
        raise InsufficientSigners(f"leave-one-signer-out needs >= 2 signers, found {len(signers)}")
    return [([s for s in dataset if s.signer_id != held], [s for s in dataset if s.signer_id == held])
            for held in signers]


def predict(model: nn.ModelParams, features: np.ndarray) -> int:
    """Arg-max class; ``np.argmax`` resolves ties to the lowest index."""
    return int(np.argmax(nn.predict_logits(model, features)))


def evaluate(model: nn.ModelParams, test: Sequence[tuple[np.ndarray, int]]
             ) -> tuple[float, np.ndarray]:
    """Accuracy and ``(K, K)`` confusion counts of ``model`` on ``test``."""
    if len(test) == 0:
        raise EmptyTestSet("cannot evaluate on an empty test set")
    K = model.num_classes
    confusion = np.zeros((K, K), dtype=np.int64)
    for features, label in test:
        if not 0 <= label < K:
            raise LabelOutOfRange(f"label {label} outside [0, {K})")
        confusion[label, predict(model, features)] += 1
    return float(np.trace(confusion) / confusion.sum()), confusion


def filter_hand_mode(dataset: Sequence[GestureSequence], hand: HandFilter | str
                     ) -> tuple[list[GestureSequence], dict[int, int], list[str]]:
    """Keep sequences of the requested hand mode and relabel classes densely.

    Returns the kept sequences, the original-to-dense label map and the
    class names in dense order.
    """
    hand = HandFilter.parse(hand)
    if hand is HandFilter.Combined:
        kept = list(dataset)
    else:
        mode = HandMode(hand.value)
        kept = [s for s in dataset if s.hand_mode is mode]
    names = {}
    for s in kept:
        names.setdefault(s.class_id, s.class_name)
    originals = sorted(names)
    mapping = {c: n for n, c in enumerate(originals)}
    return kept, mapping, [names[c] for c in originals]


def to_examples(dataset: Sequence[GestureSequence], mapping: dict[int, int],
                normalize: bool = True, config: NormalizationConfig = NormalizationConfig()
                ) -> list[tuple[np.ndarray, int]]:
    """``(features, dense_label)`` pairs, normalizing each frame when asked."""
    out = []
    for seq in dataset:
        joints = normalize_joints(seq.joints, config)[0] if normalize else seq.joints
        out.append((joints.reshape(len(seq), FEATURES_PER_FRAME), mapping[seq.class_id]))
    return out


def _run_fold(held_out: int, train_set, test_set, num_classes: int, train_config: TrainConfig,
              model_config: ModelConfig) -> FoldResult:
    fold_seed = train_config.seed + held_out
    init = nn.init_params(num_classes, FEATURES_PER_FRAME, model_config.hidden_size,
                          model_config.num_layers, seed=fold_seed)
    config = TrainConfig(**{**train_config.__dict__, "seed": fold_seed})
    model, log = train(train_set, config, init)
    accuracy, confusion = evaluate(model, test_set)
    logger.info("fold signer=%d train_loss=%.4f accuracy=%.4f", held_out, log.losses[-1], accuracy)
    return FoldResult(held_out, accuracy, confusion)


def run_loocv(dataset: Sequence[GestureSequence], hand_mode_filter: HandFilter | str = HandFilter.Combined,
              normalize: bool = True, train_config: TrainConfig = TrainConfig(),
              model_config: ModelConfig = ModelConfig(), jobs: int | None = 1,
              normalization: NormalizationConfig = NormalizationConfig()) -> EvalReport:
    """Train and test one model per held-out signer.

    Fold ``s`` trains from an initialization and shuffle seeded with
    ``train_config.seed + s``, so results do not depend on execution order
    and folds may run in parallel (``jobs``; ``None`` means one per CPU).
    """
    hand = HandFilter.parse(hand_mode_filter)
    kept, mapping, names = filter_hand_mode(dataset, hand)
    if len(mapping) < 2:
        raise InsufficientClasses(f"{hand.value} subset has {len(mapping)} class(es); need >= 2")
    folds = split_loocv(kept)
    # Normalization is per frame, so it can be done once for all folds.
    examples = to_examples(kept, mapping, normalize, normalization)
    index = {id(seq): n for n, seq in enumerate(kept)}
    work = []
    for train_seqs, test_seqs in folds:
        held = test_seqs[0].signer_id
        work.append((held, [examples[index[id(s)]] for s in train_seqs],
                     [examples[index[id(s)]] for s in test_seqs]))
    jobs = min(len(work), os.cpu_count() or 1) if jobs is None else max(1, jobs)
    args = [(held, tr, te, len(mapping), train_config, model_config) for held, tr, te in work]
    if jobs == 1:
        results = [_run_fold(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_fold, *zip(*args)))
    return EvalReport(results, hand, names)
