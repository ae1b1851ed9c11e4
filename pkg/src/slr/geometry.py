"""Position and rotation invariant normalization of skeleton frames.

A frame is first translated so the spine joint sits at the origin, then
rotated about the vertical Y axis so the body plane (spine, left shoulder,
right shoulder) faces the sensor, i.e. its normal points along +Z.

The public per-frame functions operate on :class:`SkeletonFrame` values;
the ``*_joints`` variants do the same work on raw ``(..., 20, 3)`` arrays
and are what sequence-level code uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateFrame, DegenerateProjection, InvalidValue
from .skeleton import GestureSequence, JointId, SkeletonFrame, Vec3

C = int(JointId.Spine)
L = int(JointId.ShoulderLeft)
R = int(JointId.ShoulderRight)


@dataclass(frozen=True)
class NormalizationConfig:
    epsilon: float = 1e-9
    strict: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidValue(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class NormalizationReport:
    theta_rad: float
    translation: Vec3
    degenerate: bool = False


DEFAULT_CONFIG = NormalizationConfig()
ANGLE_SNAP = 1e-12


def translate_to_origin(frame: SkeletonFrame) -> tuple[SkeletonFrame, Vec3]:
    """Shift every joint by ``-spine``; returns the frame and the applied vector."""
    shift = -frame.joints[C]
    return SkeletonFrame(frame.joints + shift), Vec3.from_array(shift)


def _normals(joints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized body-plane normals ``CR x CL`` and their norms."""
    c = joints[..., C, :]
    n = np.cross(joints[..., R, :] - c, joints[..., L, :] - c)
    return n, np.linalg.norm(n, axis=-1)


def body_plane_normal(frame: SkeletonFrame, config: NormalizationConfig = DEFAULT_CONFIG) -> Vec3:
    """Unit normal of the spine/shoulder plane, oriented toward the sensor.

    Uses ``CR x CL`` so a signer facing the sensor gets ``(0, 0, 1)``.

    Raises:
        DegenerateFrame: spine and shoulders are collinear.
    """
    n, norm = _normals(frame.joints)
    if norm < config.epsilon:
        raise DegenerateFrame(f"spine and shoulders are collinear (|CR x CL| = {norm:.3g})")
    return Vec3.from_array(n / norm)


def _angles(normals: np.ndarray, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Signed facing angles ``atan2(p.x, p.z)`` and a mask of vanishing projections."""
    px = normals[..., 0]
    pz = normals[..., 2]
    degenerate = np.hypot(px, pz) < epsilon
    theta = np.arctan2(px, pz)
    # atan2 returns -pi for (-0.0, negative); keep the range half-open at -pi.
    theta = np.where(theta <= -np.pi, np.pi, theta)
    return np.where(degenerate, 0.0, theta), degenerate


def rotation_angle(normal: Vec3, config: NormalizationConfig = DEFAULT_CONFIG) -> tuple[float, bool]:
    """Signed angle in ``(-pi, pi]`` between the XZ projection of ``normal`` and +Z.

    Its magnitude equals ``arccos(p.k / |p|)``. Returns ``(theta, degenerate)``;
    in lenient mode a vanishing projection yields ``(0.0, True)``.

    Raises:
        DegenerateProjection: projection norm below epsilon and ``config.strict``.
    """
    theta, degenerate = _angles(np.asarray(tuple(normal), dtype=np.float64), config.epsilon)
    if degenerate and config.strict:
        raise DegenerateProjection("body plane is horizontal; its normal has no XZ component")
    return float(theta), bool(degenerate)


def rotate_joints_about_y(joints: np.ndarray, alpha) -> np.ndarray:
    """Apply ``[[cos a, 0, sin a], [0, 1, 0], [-sin a, 0, cos a]]`` to every point.

    ``alpha`` may be a scalar or broadcast against the leading axes of
    ``joints`` (one angle per frame).
    """
    alpha = np.asarray(alpha, dtype=np.float64)[..., None]
    cos, sin = np.cos(alpha), np.sin(alpha)
    x = joints[..., 0]
    z = joints[..., 2]
    out = np.empty(np.broadcast_shapes(joints.shape, alpha.shape + (1,)), dtype=np.float64)
    out[..., 0] = x * cos + z * sin
    out[..., 1] = joints[..., 1]
    out[..., 2] = -x * sin + z * cos
    return out


def rotate_about_y(frame: SkeletonFrame, alpha: float) -> SkeletonFrame:
    if not np.isfinite(alpha):
        raise InvalidValue(f"rotation angle must be finite, got {alpha}")
    return SkeletonFrame(rotate_joints_about_y(frame.joints, alpha))


def normalize_joints(joints: np.ndarray, config: NormalizationConfig = DEFAULT_CONFIG):
    """Normalize a stack of frames, each independently.

    Args:
        joints: array of shape ``(..., 20, 3)``.

    Returns:
        ``(normalized, theta, translation, degenerate)`` where ``theta`` and
        ``degenerate`` have the leading shape of ``joints`` and
        ``translation`` has shape ``(..., 3)``.

    In lenient mode degenerate frames are translated but not rotated and
    flagged in ``degenerate``.

    Raises:
        DegenerateFrame: collinear spine/shoulders, strict mode only.
        DegenerateProjection: horizontal body plane, strict mode only.
    """
    joints = np.asarray(joints, dtype=np.float64)
    translation = -joints[..., C, :]
    moved = joints + translation[..., None, :]
    n, norm = _normals(moved)
    collinear = norm < config.epsilon
    if config.strict and np.any(collinear):
        first = np.argwhere(np.atleast_1d(collinear))[0]
        raise DegenerateFrame(f"spine and shoulders are collinear in frame {tuple(int(i) for i in first)}")
    safe = np.where(collinear, 1.0, norm)
    theta, flat = _angles(n / safe[..., None], config.epsilon)
    if config.strict and np.any(flat):
        first = np.argwhere(np.atleast_1d(flat))[0]
        raise DegenerateProjection(f"horizontal body plane in frame {tuple(int(i) for i in first)}")
    degenerate = collinear | flat
    # Angles this small are rounding residue of an earlier normalization;
    # zeroing them makes a second pass an exact no-op.
    theta = np.where(degenerate | (np.abs(theta) < ANGLE_SNAP), 0.0, theta)
    # + 0.0 turns negative zeros positive so re-normalizing is bitwise stable.
    return rotate_joints_about_y(moved, -theta) + 0.0, theta, translation, degenerate


def normalize_frame(frame: SkeletonFrame, config: NormalizationConfig = DEFAULT_CONFIG
                    ) -> tuple[SkeletonFrame, NormalizationReport]:
    """Translate the spine to the origin, then rotate the body plane to face +Z."""
    out, theta, shift, degenerate = normalize_joints(frame.joints, config)
    report = NormalizationReport(float(theta), Vec3.from_array(shift), bool(degenerate))
    return SkeletonFrame(out), report


def normalize_sequence(seq: GestureSequence, config: NormalizationConfig = DEFAULT_CONFIG
                       ) -> tuple[GestureSequence, list[NormalizationReport]]:
    """Normalize every frame of ``seq`` with its own spine and shoulders."""
    out, theta, shift, degenerate = normalize_joints(seq.joints, config)
    reports = [NormalizationReport(float(t), Vec3.from_array(s), bool(d))
               for t, s, d in zip(theta, shift, degenerate)]
    return seq.with_joints(out), reports
