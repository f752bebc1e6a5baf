"""Depth-based refinement of a scale-ambiguous pose estimate.

An RGB-only estimator that knows the object only through a fixed-size
reference model confounds object scale with distance: a smaller object is
reported farther away, along the camera ray, with the image unchanged.
This module recovers the true distance and size from one measured depth
map. A single parameter sigma slides the model along the ray while
shrinking it just enough to keep the silhouette fixed (scale factor
mu = 1 - sigma/||p||); the optimizer picks the sigma whose rendered depth
best matches the measurement in mean squared error over a robust inlier
set, then reports the corrected position and the rescaled dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BehindCameraError,
    DegenerateSceneError,
    NoOverlapError,
    NumericalError,
)
from .geometry import (
    CameraIntrinsics,
    CuboidDims,
    Pose,
    apply_sigma_to_pose,
)
from .renderer import DepthMap, TriangleMesh, render_depth

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ResidualSample:
    """Measured and rendered depth at one pixel (row, col)."""

    pixel: tuple[int, int]
    real_depth: float
    virtual_depth: float

    def __post_init__(self):
        if not (math.isfinite(self.real_depth) and self.real_depth > 0.0):
            raise ValueError(f"real_depth must be positive, got {self.real_depth}")
        if not (math.isfinite(self.virtual_depth) and self.virtual_depth > 0.0):
            raise ValueError(f"virtual_depth must be positive, got {self.virtual_depth}")


@dataclass(frozen=True)
class RansacConfig:
    """Robust line fit d = a*d_hat + b separating object pixels from occluders."""

    iterations: int = 256
    inlier_threshold: float = 0.007
    min_inlier_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.inlier_threshold > 0.0:
            raise ValueError("inlier_threshold must be positive")
        if not 0.0 < self.min_inlier_fraction <= 1.0:
            raise ValueError("min_inlier_fraction must be in (0, 1]")


@dataclass(frozen=True)
class RefineConfig:
    bound_fraction: float = 0.8
    sigma_tolerance: float = 1e-4
    grid_size: int = 33
    ransac: RansacConfig = field(default_factory=RansacConfig)

    def __post_init__(self):
        if not 0.0 < self.bound_fraction < 1.0:
            raise ValueError("bound_fraction must be in (0, 1)")
        if not self.sigma_tolerance > 0.0:
            raise ValueError("sigma_tolerance must be positive")
        if self.grid_size < 3:
            raise ValueError("grid_size must be >= 3")


@dataclass(frozen=True)
class RefinementResult:
    sigma_opt: float
    mu_opt: float
    refined_pose: Pose
    estimated_dims: CuboidDims
    inlier_mask: frozenset[tuple[int, int]]
    rms_residual: float
    objective_value: float


def residual_samples(real: DepthMap, virtual: DepthMap) -> list[ResidualSample]:
    """Paired samples at pixels valid in both maps, row-major order."""
    if real.data.shape != virtual.data.shape:
        raise ValueError("depth map shapes differ")
    both = real.valid_mask & virtual.valid_mask
    rows, cols = np.nonzero(both)
    return [
        ResidualSample((int(i), int(j)), float(real.data[i, j]), float(virtual.data[i, j]))
        for i, j in zip(rows, cols)
    ]


def _inlier_array(inliers, shape) -> np.ndarray | None:
    """Normalize an inlier pixel collection to a boolean mask, None = all."""
    if inliers is None:
        return None
    if isinstance(inliers, np.ndarray):
        if inliers.shape != shape or inliers.dtype != bool:
            raise ValueError("inlier mask must be a boolean array of the map shape")
        return inliers
    mask = np.zeros(shape, dtype=bool)
    for i, j in inliers:
        mask[i, j] = True
    return mask


def objective(
    sigma: float,
    mesh: TriangleMesh,
    pose: Pose,
    intr: CameraIntrinsics,
    real: DepthMap,
    inliers=None,
) -> float:
    """Mean squared depth residual at the given sigma.

    Renders the model at the slid-and-scaled pose, intersects the render's
    support with the measurement's valid pixels (and with `inliers` when
    given: a pixel set or boolean mask), and averages the squared
    differences. Empty intersection means the coarse pose is too wrong to
    refine and raises NoOverlapError.
    """
    if (real.height, real.width) != (intr.height, intr.width):
        raise ValueError("real depth map dimensions do not match intrinsics")
    transformed, mu = apply_sigma_to_pose(pose, sigma)
    virtual = render_depth(mesh, transformed, intr, scale=mu)
    mask = virtual.valid_mask & real.valid_mask
    sel = _inlier_array(inliers, mask.shape)
    if sel is not None:
        mask &= sel
    rho = int(np.count_nonzero(mask))
    if rho == 0:
        raise NoOverlapError(
            "rendered and measured depth supports do not intersect"
        )
    diff = real.data[mask].astype(np.float64) - virtual.data[mask].astype(np.float64)
    value = float(np.mean(diff * diff))
    if not np.isfinite(value):
        raise NumericalError(f"objective is not finite at sigma={sigma}")
    return value


def ransac_inliers(
    samples: list[ResidualSample], cfg: RansacConfig
) -> frozenset[tuple[int, int]]:
    """Robustly fit d = a*d_hat + b and return the consenting pixels.

    Two-point hypotheses are scored by |residual| <= inlier_threshold; the
    best consensus set is refit by least squares and the final inliers are
    recomputed against the refit line. Deterministic for a fixed seed.
    """
    n = len(samples)
    if n < 2:
        raise DegenerateSceneError(f"need at least 2 residual samples, got {n}")
    d = np.array([s.real_depth for s in samples], dtype=np.float64)
    v = np.array([s.virtual_depth for s in samples], dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)

    best_count = -1
    best_ab = (0.0, 0.0)
    for _ in range(cfg.iterations):
        i, j = rng.choice(n, size=2, replace=False)
        if v[i] == v[j]:
            # No slope from a vertical pair; a flat line through the mean
            # still covers constant-depth scenes.
            a, b = 0.0, 0.5 * (d[i] + d[j])
        else:
            a = (d[j] - d[i]) / (v[j] - v[i])
            b = d[i] - a * v[i]
        count = int(np.count_nonzero(np.abs(d - (a * v + b)) <= cfg.inlier_threshold))
        if count > best_count:
            best_count = count
            best_ab = (a, b)

    if best_count < math.ceil(cfg.min_inlier_fraction * n):
        raise DegenerateSceneError(
            f"best consensus {best_count}/{n} below the minimum fraction "
            f"{cfg.min_inlier_fraction}"
        )

    a, b = best_ab
    consensus = np.abs(d - (a * v + b)) <= cfg.inlier_threshold
    vv, dd = v[consensus], d[consensus]
    var = float(np.var(vv))
    if var > 0.0:
        a = float(np.cov(vv, dd, bias=True)[0, 1] / var)
        b = float(dd.mean() - a * vv.mean())
    else:
        a, b = 0.0, float(dd.mean())
    final = np.abs(d - (a * v + b)) <= cfg.inlier_threshold
    return frozenset(samples[k].pixel for k in np.nonzero(final)[0])


def _golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Minimize unimodal-ish f on [lo, hi], returning the best point evaluated."""
    a, b = float(lo), float(hi)
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, f(mid)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def refine(
    coarse: Pose,
    mesh: TriangleMesh,
    cad_dims: CuboidDims,
    intr: CameraIntrinsics,
    real: DepthMap,
    cfg: RefineConfig | None = None,
) -> RefinementResult:
    """Correct a scale-ambiguous pose against a measured depth map.

    Stage 1 renders at sigma=0 and freezes a robust inlier set (the
    silhouette is sigma-invariant, so one vote suffices). Stage 2 seeds a
    uniform grid over sigma in [-bound_fraction*pz, +bound_fraction*pz]
    and polishes the bracketing interval by golden-section descent to
    sigma_tolerance. The orientation passes through untouched.
    """
    if cfg is None:
        cfg = RefineConfig()
    pz = float(coarse.position[2])
    if pz <= 0.0:
        raise BehindCameraError(f"coarse position z must be positive, got {pz}")

    virtual0 = render_depth(mesh, coarse, intr)
    samples = residual_samples(real, virtual0)
    if not samples:
        raise NoOverlapError("no pixel is valid in both the render and the measurement")
    inliers = ransac_inliers(samples, cfg.ransac)
    sel = _inlier_array(inliers, real.data.shape)

    def f(sigma: float) -> float:
        return objective(sigma, mesh, coarse, intr, real, sel)

    bound = cfg.bound_fraction * pz
    grid = np.linspace(-bound, bound, cfg.grid_size)
    values = [f(s) for s in grid]
    k = int(np.argmin(values))
    lo = grid[k - 1] if k > 0 else grid[0]
    hi = grid[k + 1] if k < cfg.grid_size - 1 else grid[-1]

    sigma_opt, f_opt = _golden_section(f, float(lo), float(hi), cfg.sigma_tolerance)
    if values[k] < f_opt:
        sigma_opt, f_opt = float(grid[k]), values[k]

    refined_pose, mu_opt = apply_sigma_to_pose(coarse, sigma_opt)
    return RefinementResult(
        sigma_opt=float(sigma_opt),
        mu_opt=float(mu_opt),
        refined_pose=refined_pose,
        estimated_dims=cad_dims.scaled(mu_opt),
        inlier_mask=inliers,
        rms_residual=math.sqrt(f_opt),
        objective_value=float(f_opt),
    )
