"""Camera-frame geometry: quaternion algebra, pinhole projection, and the
one-parameter translate-and-scale family that keeps an object's image-plane
appearance fixed while changing its depth and size.

Conventions:
    - 3-vectors are numpy arrays of shape (3,), float64, meters.
    - Quaternions are Hamilton, scalar-first (w, x, y, z), unit norm,
      sign-canonicalized to w >= 0.
    - The camera frame is right-handed with +z the optical axis pointing
      into the scene; pixel u grows rightward, v downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, DegenerateRayError

# Constructors renormalize; inputs farther than this from unit norm are
# rejected rather than silently rescaled.
UNIT_NORM_TOL = 1e-3


def as_vec3(v) -> np.ndarray:
    """Validate and convert to a float64 3-vector with finite components."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"vector components must be finite, got {arr}")
    return arr


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion (w, x, y, z), Hamilton convention.

    Construction normalizes the components and flips the sign so w >= 0;
    inputs whose norm deviates from 1 by more than UNIT_NORM_TOL are
    rejected.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        q = np.array([self.w, self.x, self.y, self.z], dtype=np.float64)
        if not np.all(np.isfinite(q)):
            raise ValueError(f"quaternion components must be finite, got {q}")
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"quaternion norm {norm:.6g} too far from 1")
        q /= norm
        if q[0] < 0.0:
            q = -q
        object.__setattr__(self, "w", float(q[0]))
        object.__setattr__(self, "x", float(q[1]))
        object.__setattr__(self, "y", float(q[2]))
        object.__setattr__(self, "z", float(q[3]))

    @classmethod
    def identity(cls) -> UnitQuaternion:
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)

    def conjugate(self) -> UnitQuaternion:
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)


def quat_mul(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion:
    """Hamilton product a * b, renormalized and sign-canonicalized."""
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    return UnitQuaternion(w, x, y, z)


def rotate(q: UnitQuaternion, v) -> np.ndarray:
    """Rotate a 3-vector by a unit quaternion (preserves the norm)."""
    vec = as_vec3(v)
    qv = np.array([q.x, q.y, q.z])
    t = 2.0 * np.cross(qv, vec)
    return vec + q.w * t + np.cross(qv, t)


def quat_to_matrix(q: UnitQuaternion) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_z(angle: float) -> UnitQuaternion:
    """Elementary rotation about the z axis."""
    half = 0.5 * angle
    return UnitQuaternion(math.cos(half), 0.0, 0.0, math.sin(half))


def quat_y(angle: float) -> UnitQuaternion:
    """Elementary rotation about the y axis."""
    half = 0.5 * angle
    return UnitQuaternion(math.cos(half), 0.0, math.sin(half), 0.0)


def quat_x(angle: float) -> UnitQuaternion:
    """Elementary rotation about the x axis."""
    half = 0.5 * angle
    return UnitQuaternion(math.cos(half), math.sin(half), 0.0, 0.0)


@dataclass(frozen=True)
class Pose:
    """Rigid pose: position (meters) plus orientation, frame per context."""

    position: np.ndarray
    orientation: UnitQuaternion

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        if not isinstance(self.orientation, UnitQuaternion):
            raise ValueError("orientation must be a UnitQuaternion")


def transform_point(pose: Pose, point) -> np.ndarray:
    """Map a point from the pose's local frame into its parent frame."""
    return rotate(pose.orientation, point) + pose.position


def inverse_transform_point(pose: Pose, point) -> np.ndarray:
    """Map a point from the pose's parent frame into its local frame."""
    return rotate(pose.orientation.conjugate(), as_vec3(point) - pose.position)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        vals = [self.fx, self.fy, self.cx, self.cy]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("intrinsics must be finite")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if not (0 < self.cx < self.width):
            raise ValueError(f"cx={self.cx} outside (0, {self.width})")
        if not (0 < self.cy < self.height):
            raise ValueError(f"cy={self.cy} outside (0, {self.height})")


@dataclass(frozen=True)
class CuboidDims:
    """Edge lengths of an object's enclosing cuboid, meters."""

    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        vals = (self.dx, self.dy, self.dz)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError(f"cuboid dimensions must be positive and finite, got {vals}")

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz], dtype=np.float64)

    def scaled(self, factor: float) -> CuboidDims:
        if not (math.isfinite(factor) and factor > 0):
            raise ValueError(f"scale factor must be positive and finite, got {factor}")
        return CuboidDims(factor * self.dx, factor * self.dy, factor * self.dz)


@dataclass(frozen=True)
class SigmaTransform:
    """Signed displacement sigma (meters) along the camera-to-anchor ray.

    The anchor is the point kept fixed in the image plane; moving it by
    sigma toward the camera and shrinking the object by the induced factor
    mu leaves the projected silhouette unchanged.
    """

    sigma: float
    anchor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "anchor", as_vec3(self.anchor))
        if not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be finite, got {self.sigma}")
        norm = float(np.linalg.norm(self.anchor))
        if norm == 0.0:
            raise DegenerateRayError("anchor at the camera origin defines no ray")
        if abs(self.sigma) >= norm:
            raise ValueError(
                f"|sigma|={abs(self.sigma):.6g} must stay below the anchor distance {norm:.6g}"
            )


def sigma_translate(t: SigmaTransform) -> np.ndarray:
    """Displace the anchor by sigma along its ray toward the camera."""
    norm = float(np.linalg.norm(t.anchor))
    return t.anchor - t.sigma * (t.anchor / norm)


def scale_factor(t: SigmaTransform) -> float:
    """Scale factor mu = 1 - sigma/|anchor| induced by the displacement."""
    return 1.0 - t.sigma / float(np.linalg.norm(t.anchor))


def apply_sigma_to_pose(pose: Pose, sigma: float) -> tuple[Pose, float]:
    """Displace a pose along its camera ray; returns (moved pose, mu).

    Orientation is untouched; only the position slides along the ray. The
    returned mu is the uniform scale that keeps the silhouette fixed.
    """
    t = SigmaTransform(sigma, pose.position)
    return Pose(sigma_translate(t), pose.orientation), scale_factor(t)


def project(intr: CameraIntrinsics, point) -> tuple[float, float, float]:
    """Pinhole projection of a camera-frame point to (u, v, depth)."""
    p = as_vec3(point)
    if p[2] <= 0.0:
        raise BehindCameraError(f"point with z={p[2]:.6g} is behind the camera")
    u = intr.fx * p[0] / p[2] + intr.cx
    v = intr.fy * p[1] / p[2] + intr.cy
    return float(u), float(v), float(p[2])
