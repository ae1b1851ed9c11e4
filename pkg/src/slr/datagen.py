"""Deterministic synthetic gesture datasets.

Mimics a Kinect recording session: every signer performs every class
``reps_per_signer`` times, at a random position and at one of a fixed set
of body rotations about the vertical axis (by default 0, 45 and 90 degrees,
each for a third of the repetitions).

A gesture is a canonical standing skeleton whose hands follow a
class-specific path. Classes differ in path shape, stroke direction,
number of cycles and, for two-handed classes, how the left hand relates to
the right. Stroke directions lie largely in the horizontal plane, so an
un-normalized rotated gesture resembles a different class.

The torso (hips, spine, shoulders, head) stays still, and the spine and
both shoulders share z = 0 in canonical coordinates. With zero noise the
body plane is exactly the XY plane, so normalization recovers the
canonical trajectory up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InsufficientClasses, InvalidConfig
from .geometry import normalize_joints, rotate_joints_about_y
from .skeleton import NUM_JOINTS, GestureSequence, HandMode, JointId as J

SINGLE_FRACTION = 16 / 30

# Canonical pose, meters, spine at the origin, signer facing +Z.
TEMPLATE = np.zeros((NUM_JOINTS, 3))
TEMPLATE[J.HipCenter] = (0.0, -0.15, 0.0)
TEMPLATE[J.Spine] = (0.0, 0.0, 0.0)
TEMPLATE[J.ShoulderCenter] = (0.0, 0.45, 0.0)
TEMPLATE[J.Head] = (0.0, 0.65, 0.02)
TEMPLATE[J.ShoulderLeft] = (-0.2, 0.42, 0.0)
TEMPLATE[J.ElbowLeft] = (-0.26, 0.15, 0.02)
TEMPLATE[J.WristLeft] = (-0.27, -0.1, 0.06)
TEMPLATE[J.HandLeft] = (-0.27, -0.18, 0.08)
TEMPLATE[J.ShoulderRight] = (0.2, 0.42, 0.0)
TEMPLATE[J.ElbowRight] = (0.26, 0.15, 0.02)
TEMPLATE[J.WristRight] = (0.27, -0.1, 0.06)
TEMPLATE[J.HandRight] = (0.27, -0.18, 0.08)
TEMPLATE[J.HipLeft] = (-0.1, -0.2, 0.0)
TEMPLATE[J.KneeLeft] = (-0.11, -0.62, 0.03)
TEMPLATE[J.AnkleLeft] = (-0.11, -1.02, 0.0)
TEMPLATE[J.FootLeft] = (-0.11, -1.08, 0.1)
TEMPLATE[J.HipRight] = (0.1, -0.2, 0.0)
TEMPLATE[J.KneeRight] = (0.11, -0.62, 0.03)
TEMPLATE[J.AnkleRight] = (0.11, -1.02, 0.0)
TEMPLATE[J.FootRight] = (0.11, -1.08, 0.1)

_ARMS = {
    "right": (J.ShoulderRight, J.ElbowRight, J.WristRight, J.HandRight, 1.0),
    "left": (J.ShoulderLeft, J.ElbowLeft, J.WristLeft, J.HandLeft, -1.0),
}


@dataclass(frozen=True)
class GenConfig:
    num_classes: int = 30
    num_signers: int = 10
    reps_per_signer: int = 9
    frames_per_gesture: int = 45
    noise_sigma: float = 0.01
    translation_range: float = 0.5
    rotation_set: tuple[float, ...] = (0.0, 45.0, 90.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rotation_set", tuple(float(r) for r in self.rotation_set))
        checks = [
            (self.num_classes >= 2, f"num_classes must be >= 2, got {self.num_classes}"),
            (self.num_signers >= 1, f"num_signers must be >= 1, got {self.num_signers}"),
            (self.reps_per_signer >= 1, f"reps_per_signer must be >= 1, got {self.reps_per_signer}"),
            (self.frames_per_gesture >= 2, f"frames_per_gesture must be >= 2, got {self.frames_per_gesture}"),
            (self.noise_sigma >= 0, f"noise_sigma must be >= 0, got {self.noise_sigma}"),
            (self.translation_range >= 0, f"translation_range must be >= 0, got {self.translation_range}"),
            (len(self.rotation_set) >= 1, "rotation_set must not be empty"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidConfig(message)
        if self.reps_per_signer % len(self.rotation_set):
            raise InvalidConfig(f"reps_per_signer ({self.reps_per_signer}) must be divisible by "
                                f"the number of rotations ({len(self.rotation_set)})")

    @property
    def num_single(self) -> int:
        """Leading classes that are one-handed, in the 16-of-30 proportion."""
        return max(1, min(self.num_classes - 1, round(self.num_classes * SINGLE_FRACTION)))


@dataclass(frozen=True)
class ClassSpec:
    """Parameters of one synthetic sign."""

    class_id: int
    hand_mode: HandMode
    shape: str            # "stroke", "circle", "wave" or "zigzag"
    heading: float        # stroke direction in the horizontal plane, radians
    elevation: float      # tilt of the stroke out of the horizontal plane, radians
    cycles: int
    amplitude: float
    partner: str = "none"  # left-hand behaviour: "none", "mirror", "parallel" or "hold"
    name: str = field(default="")


_SHAPES = ("stroke", "circle", "wave", "zigzag")
_PARTNERS = ("mirror", "parallel", "hold")


def class_spec(k: int, num_single: int) -> ClassSpec:
    """Trajectory parameters of class ``k``; a pure function of its index."""
    double = k >= num_single
    j = k - num_single if double else k
    shape = _SHAPES[j % 4]
    # Headings step by 45 degrees so a 45/90 degree body turn maps one
    # class's stroke onto another's.
    heading = math.radians(45.0 * ((j // 4 + 3 * (j % 4)) % 8))
    elevation = math.radians((0.0, 25.0, -20.0)[(j // 8) % 3])
    cycles = 1 + (j // 4) % 2 + (j // 24)
    amplitude = 0.12 + 0.02 * ((k * 7) % 3)
    partner = _PARTNERS[j % 3] if double else "none"
    mode = HandMode.Double if double else HandMode.Single
    name = f"{'double' if double else 'single'}_{shape}_{j:02d}"
    return ClassSpec(k, mode, shape, heading, elevation, cycles, amplitude, partner, name)


def _path(spec: ClassSpec, s: np.ndarray) -> np.ndarray:
    """Hand offset (T, 3) from the gesture anchor at progress ``s`` in [0, 1]."""
    d = np.array([math.sin(spec.heading) * math.cos(spec.elevation),
                  math.sin(spec.elevation),
                  math.cos(spec.heading) * math.cos(spec.elevation)])
    # A unit vector perpendicular to d, as vertical as possible.
    up = np.array([0.0, 1.0, 0.0]) - d[1] * d
    up /= np.linalg.norm(up)
    phase = 2.0 * math.pi * spec.cycles * s
    if spec.shape == "stroke":
        a, b = 2.0 * s - 1.0, np.zeros_like(s)
    elif spec.shape == "circle":
        a, b = np.cos(phase) - 1.0, np.sin(phase)
    elif spec.shape == "wave":
        a, b = 2.0 * s - 1.0, 0.6 * np.sin(phase)
    else:
        a, b = 2.0 * s - 1.0, 0.6 * (2.0 / math.pi) * np.arcsin(np.sin(phase))
    return spec.amplitude * (a[:, None] * d + b[:, None] * up)


def _place_arm(joints: np.ndarray, arm: str, hand: np.ndarray) -> None:
    shoulder_j, elbow_j, wrist_j, hand_j, side = _ARMS[arm]
    shoulder = joints[:, shoulder_j]
    reach = hand - shoulder
    joints[:, elbow_j] = shoulder + 0.5 * reach + np.array([0.06 * side, -0.1, -0.02])
    joints[:, wrist_j] = shoulder + 0.88 * reach
    joints[:, hand_j] = hand


def canonical_gesture(spec: ClassSpec, frames: int, limb_scale: float = 1.0,
                      speed: float = 1.0) -> np.ndarray:
    """Noise-free gesture in canonical coordinates, shape ``(frames, 20, 3)``.

    ``speed`` warps time as ``s = u ** (1 / speed)`` so every signer
    completes the whole sign; ``limb_scale`` scales the body about the spine.
    """
    u = np.linspace(0.0, 1.0, frames)
    s = u ** (1.0 / speed)
    joints = np.repeat(TEMPLATE[None], frames, axis=0)
    anchor_right = np.array([0.14, 0.22, 0.3])
    offset = _path(spec, s)
    # Ease in from the rest pose over the first fifth of the gesture.
    ease = np.clip(u / 0.2, 0.0, 1.0)[:, None]
    rest_right = TEMPLATE[J.HandRight]
    right = rest_right + ease * (anchor_right + offset - rest_right)
    _place_arm(joints, "right", right)
    if spec.partner != "none":
        mirror = np.array([-1.0, 1.0, 1.0])
        anchor_left = anchor_right * mirror
        if spec.partner == "mirror":
            target = anchor_left + offset * mirror
        elif spec.partner == "parallel":
            target = anchor_left + offset
        else:
            target = np.broadcast_to(anchor_left + np.array([0.05, 0.05, 0.0]), offset.shape)
        rest_left = TEMPLATE[J.HandLeft]
        _place_arm(joints, "left", rest_left + ease * (target - rest_left))
    return joints * limb_scale


def signer_modifiers(signer_id: int, seed: int) -> tuple[float, float]:
    """``(limb_scale, speed)`` of a signer; fixed across all its recordings."""
    rng = np.random.default_rng([seed, 1, signer_id])
    return float(rng.uniform(0.9, 1.1)), float(rng.uniform(0.85, 1.15))


def generate_dataset(config: GenConfig = GenConfig()) -> list[GestureSequence]:
    """All ``classes x signers x reps`` recordings, ordered by (class, signer, rep)."""
    specs = [class_spec(k, config.num_single) for k in range(config.num_classes)]
    per_rotation = config.reps_per_signer // len(config.rotation_set)
    out = []
    for spec in specs:
        for signer in range(config.num_signers):
            scale, speed = signer_modifiers(signer, config.seed)
            base = canonical_gesture(spec, config.frames_per_gesture, scale, speed)
            for rep in range(config.reps_per_signer):
                rng = np.random.default_rng([config.seed, 2, spec.class_id, signer, rep])
                rotation = config.rotation_set[rep // per_rotation]
                joints = base
                if config.noise_sigma > 0:
                    joints = joints + rng.normal(0.0, config.noise_sigma, size=joints.shape)
                shift = rng.uniform(-config.translation_range, config.translation_range, size=3)
                joints = rotate_joints_about_y(joints, math.radians(rotation)) + shift
                out.append(GestureSequence(joints, spec.class_id, spec.name, signer, rep,
                                           spec.hand_mode, rotation))
    return out


def _resample(joints: np.ndarray, length: int) -> np.ndarray:
    T = joints.shape[0]
    flat = joints.reshape(T, -1)
    src = np.linspace(0.0, 1.0, T)
    dst = np.linspace(0.0, 1.0, length)
    return np.stack([np.interp(dst, src, flat[:, j]) for j in range(flat.shape[1])], axis=1)


def class_separability_check(dataset, length: int = 32) -> float:
    """Mean inter-class over mean intra-class distance of normalized sequences.

    Each sequence is normalized, resampled to ``length`` frames and compared
    by the mean per-frame Euclidean distance of all joint coordinates. Values
    near 1 mean classes are indistinguishable; larger is more separable.
    """
    labels = np.array([seq.class_id for seq in dataset])
    if len(np.unique(labels)) < 2:
        raise InsufficientClasses("separability needs at least two classes")
    vectors = np.stack([_resample(normalize_joints(seq.joints)[0], length) for seq in dataset])
    n = len(dataset)
    # Per-frame distances summed over frames, for all pairs at once.
    dist = np.zeros((n, n))
    for t in range(length):
        x = vectors[:, t]
        sq = (x * x).sum(1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * x @ x.T
        dist += np.sqrt(np.maximum(d2, 0.0))
    dist /= length
    same = labels[:, None] == labels[None, :]
    off_diag = ~np.eye(n, dtype=bool)
    intra = dist[same & off_diag]
    inter = dist[~same]
    if intra.size == 0:
        raise InsufficientClasses("separability needs at least two samples of some class")
    return float(inter.mean() / intra.mean())
