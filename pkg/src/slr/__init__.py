"""Skeleton-based sign gesture recognition with a from-scratch LSTM.

Modules:
    skeleton     joint enumeration, frames and gesture sequences
    geometry     translation and Y-rotation normalization of frames
    nn           stacked LSTM forward pass and backpropagation through time
    training     per-sample Adam training loop
    evaluation   leave-one-signer-out cross-validation
    datagen      synthetic gesture datasets
    dataio       dataset and model file formats
    estimators   scikit-learn compatible wrappers
"""

from .datagen import GenConfig, generate_dataset
from .evaluation import EvalReport, HandFilter, ModelConfig, run_loocv
from .exceptions import SLRError
from .geometry import NormalizationConfig, normalize_frame, normalize_sequence
from .nn import ModelParams, forward, init_params
from .skeleton import GestureSequence, HandMode, JointId, SkeletonFrame, Vec3
from .training import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "EvalReport", "GenConfig", "GestureSequence", "HandFilter", "HandMode", "JointId", "ModelConfig",
    "ModelParams", "NormalizationConfig", "SLRError", "SkeletonFrame", "TrainConfig", "Vec3",
    "forward", "generate_dataset", "init_params", "normalize_frame", "normalize_sequence",
    "run_loocv", "train",
]
