"""Data model for 20-joint skeleton frames and gesture sequences.

Joint ordering follows the Kinect v1 SDK enumeration. Coordinates are
meters in the sensor frame: X right, Y up, Z pointing from the signer
toward the sensor. Everything is stored as read-only float64 arrays so
values can be shared freely between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .exceptions import InvalidValue

NUM_JOINTS = 20
FEATURES_PER_FRAME = 3 * NUM_JOINTS


class JointId(enum.IntEnum):
    HipCenter = 0
    Spine = 1
    ShoulderCenter = 2
    Head = 3
    ShoulderLeft = 4
    ElbowLeft = 5
    WristLeft = 6
    HandLeft = 7
    ShoulderRight = 8
    ElbowRight = 9
    WristRight = 10
    HandRight = 11
    HipLeft = 12
    KneeLeft = 13
    AnkleLeft = 14
    FootLeft = 15
    HipRight = 16
    KneeRight = 17
    AnkleRight = 18
    FootRight = 19


class HandMode(str, enum.Enum):
    Single = "Single"
    Double = "Double"


def _frozen_array(values, shape_tail, what):
    arr = np.array(values, dtype=np.float64)
    if arr.shape[-len(shape_tail):] != shape_tail:
        raise InvalidValue(f"{what}: expected trailing shape {shape_tail}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidValue(f"{what}: coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidValue(f"Vec3.{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, a) -> "Vec3":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def __iter__(self) -> Iterator[float]:
        return iter((self.x, self.y, self.z))


@dataclass(frozen=True, eq=False)
class SkeletonFrame:
    """Positions of the 20 joints at one timestep, shape ``(20, 3)``."""

    joints: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.joints, (NUM_JOINTS, 3), "SkeletonFrame")
        if arr.ndim != 2:
            raise InvalidValue(f"SkeletonFrame: expected shape (20, 3), got {arr.shape}")
        object.__setattr__(self, "joints", arr)

    def __getitem__(self, joint: JointId | int) -> Vec3:
        return Vec3.from_array(self.joints[int(joint)])

    def __eq__(self, other):
        if not isinstance(other, SkeletonFrame):
            return NotImplemented
        return np.array_equal(self.joints, other.joints)

    __hash__ = None

    @classmethod
    def zeros(cls) -> "SkeletonFrame":
        return cls(np.zeros((NUM_JOINTS, 3)))


@dataclass(frozen=True, eq=False)
class GestureSequence:
    """One recorded gesture: frames plus labelling metadata.

    ``joints`` holds all frames as a ``(T, 20, 3)`` array; ``frames`` exposes
    them as :class:`SkeletonFrame` values.
    """

    joints: np.ndarray
    class_id: int
    class_name: str = ""
    signer_id: int = 0
    repetition: int = 0
    hand_mode: HandMode = HandMode.Single
    rotation_deg: float = 0.0
    _frames: tuple = field(default=(), init=False, repr=False)

    def __post_init__(self):
        joints = self.joints
        if isinstance(joints, (list, tuple)) and joints and isinstance(joints[0], SkeletonFrame):
            joints = np.stack([f.joints for f in joints])
        arr = _frozen_array(joints, (NUM_JOINTS, 3), "GestureSequence")
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise InvalidValue(f"GestureSequence needs >= 1 frame of shape (20, 3), got {arr.shape}")
        if int(self.class_id) < 0:
            raise InvalidValue(f"class_id must be >= 0, got {self.class_id}")
        if int(self.signer_id) < 0:
            raise InvalidValue(f"signer_id must be >= 0, got {self.signer_id}")
        object.__setattr__(self, "joints", arr)
        object.__setattr__(self, "class_id", int(self.class_id))
        object.__setattr__(self, "signer_id", int(self.signer_id))
        object.__setattr__(self, "repetition", int(self.repetition))
        object.__setattr__(self, "hand_mode", HandMode(self.hand_mode))
        object.__setattr__(self, "rotation_deg", float(self.rotation_deg))

    @property
    def frames(self) -> tuple[SkeletonFrame, ...]:
        if not self._frames:
            object.__setattr__(self, "_frames", tuple(SkeletonFrame(j) for j in self.joints))
        return self._frames

    def __len__(self) -> int:
        return self.joints.shape[0]

    def metadata(self) -> tuple:
        return (self.class_id, self.class_name, self.signer_id, self.repetition,
                self.hand_mode, self.rotation_deg)

    def with_joints(self, joints) -> "GestureSequence":
        """Copy of this sequence with new coordinates and identical metadata."""
        return replace(self, joints=joints)

    def __eq__(self, other):
        if not isinstance(other, GestureSequence):
            return NotImplemented
        return (self.metadata() == other.metadata()
                and self.joints.shape == other.joints.shape
                and np.array_equal(self.joints.view(np.uint64), other.joints.view(np.uint64)))

    __hash__ = None


def flatten_frame(frame: SkeletonFrame) -> np.ndarray:
    """Encode a frame as 60 reals: ``(x, y, z)`` of joint 0, then joint 1, ..."""
    return frame.joints.reshape(FEATURES_PER_FRAME).copy()


def sequence_to_features(seq: GestureSequence | Sequence[SkeletonFrame]) -> np.ndarray:
    """Stack flattened frames into a ``(T, 60)`` matrix, row ``t`` for frame ``t``."""
    if isinstance(seq, GestureSequence):
        joints = seq.joints
    else:
        joints = np.stack([f.joints for f in seq])
    return joints.reshape(joints.shape[0], FEATURES_PER_FRAME).copy()
