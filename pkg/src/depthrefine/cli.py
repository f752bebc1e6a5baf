"""Command-line surface: render, refine, sample-grasps, simulate, eval.

One subcommand per pipeline stage. Exit codes partition the error
classes: 0 success, 1 unexpected failure, 2 invalid input or parse
error, 3 no overlap between rendered and measured depth, 4 degenerate
scene (robust fit found no consensus), 5 no feasible grasp candidate,
6 numerical failure. Every command that touches randomness takes
--seed; identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import EXIT_INVALID_INPUT, EXIT_OK, EXIT_UNEXPECTED, DepthRefineError, exit_code_for
from .fileio import load_depth, load_mesh, load_scene_config, store_depth
from .geometry import UnitQuaternion, transform_point
from .grasp import GraspSamplingConfig, sample_candidates
from .harness import (
    DEFAULT_INTRINSICS,
    DEFAULT_SCALE_LEVELS,
    builtin_model,
    generate_scene,
    run_sweep,
    tabletop_scene,
)
from .refiner import RansacConfig, RefineConfig, refine
from .renderer import DepthMap, render_depth


def _write_json(path: str, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _vec(arr) -> list[float]:
    return [float(x) for x in np.asarray(arr).ravel()]


def _quat(q: UnitQuaternion) -> list[float]:
    return [q.w, q.x, q.y, q.z]


def cmd_render(args) -> int:
    pose, intr, _, _ = load_scene_config(args.scene)
    mesh = load_mesh(args.mesh)
    depth = render_depth(mesh, pose, intr, scale=args.scale)
    store_depth(args.out, depth)
    valid = int(np.count_nonzero(depth.valid_mask))
    print(f"rendered {depth.width}x{depth.height}, {valid} valid pixels -> {args.out}")
    return EXIT_OK


def cmd_refine(args) -> int:
    pose, intr, extrinsics, cad_dims = load_scene_config(args.scene)
    mesh = load_mesh(args.mesh)
    real = load_depth(args.depth)
    if args.depth_scale != 1.0:
        if not args.depth_scale > 0.0:
            raise ValueError("--depth-scale must be positive")
        real = DepthMap(real.width, real.height, real.data * np.float32(args.depth_scale))
    cfg = RefineConfig(
        bound_fraction=args.bound_fraction,
        sigma_tolerance=args.tolerance,
        grid_size=args.grid,
        ransac=RansacConfig(
            iterations=args.ransac_iterations,
            inlier_threshold=args.inlier_threshold,
            min_inlier_fraction=args.min_inlier_fraction,
            seed=args.seed,
        ),
    )
    result = refine(pose, mesh, cad_dims, intr, real, cfg)
    doc = {
        "sigma_opt": result.sigma_opt,
        "mu_opt": result.mu_opt,
        "refined_position": _vec(result.refined_pose.position),
        "refined_orientation": _quat(result.refined_pose.orientation),
        "estimated_dims": _vec(result.estimated_dims.as_array()),
        "inlier_count": len(result.inlier_mask),
        "rms_residual": result.rms_residual,
        "objective_value": result.objective_value,
    }
    if extrinsics is not None:
        doc["refined_position_world"] = _vec(
            transform_point(extrinsics, result.refined_pose.position)
        )
    _write_json(args.out, doc)
    print(
        f"sigma_opt={result.sigma_opt:+.4f} m, mu_opt={result.mu_opt:.4f}, "
        f"{len(result.inlier_mask)} inliers, rms={result.rms_residual:.4f} m -> {args.out}"
    )
    return EXIT_OK


def cmd_sample_grasps(args) -> int:
    cfg = GraspSamplingConfig(
        radius=args.radius,
        alpha_samples=args.alpha_samples,
        theta_samples=args.theta_samples,
        theta_max=args.theta_max,
        approach_alignment=UnitQuaternion(*args.align),
        table_height=args.table_height,
    )
    candidates = sample_candidates(np.array(args.position), cfg)
    doc = [
        {
            "position": _vec(c.position),
            "orientation": _quat(c.orientation),
            "alpha": c.alpha,
            "theta": c.theta,
        }
        for c in candidates
    ]
    _write_json(args.out, doc)
    print(f"{len(candidates)} grasp candidates -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = tabletop_scene(
        scene_id="simulated",
        true_scale=args.scale,
        object_depth=args.object_depth,
        mesh_id=args.mesh_id,
        occluder_fraction=args.occluder_fraction,
        occluder_offset=args.occluder_offset,
        depth_noise=args.depth_noise,
        shape_noise=args.shape_noise,
        seed=args.seed,
    )
    real, coarse = generate_scene(spec, DEFAULT_INTRINSICS)
    store_depth(args.out_depth, real)
    _, cad_dims = builtin_model(args.mesh_id)
    doc = {
        "position": _vec(coarse.position),
        "orientation": _quat(coarse.orientation),
        "fx": DEFAULT_INTRINSICS.fx,
        "fy": DEFAULT_INTRINSICS.fy,
        "cx": DEFAULT_INTRINSICS.cx,
        "cy": DEFAULT_INTRINSICS.cy,
        "width": DEFAULT_INTRINSICS.width,
        "height": DEFAULT_INTRINSICS.height,
        "cad_dims": _vec(cad_dims.as_array()),
        "world_T_camera": {
            "position": _vec(spec.camera_pose.position),
            "orientation": _quat(spec.camera_pose.orientation),
        },
    }
    _write_json(args.out_scene, doc)
    valid = int(np.count_nonzero(real.valid_mask))
    print(
        f"simulated scale={args.scale} scene: {valid} valid pixels -> "
        f"{args.out_depth}, coarse estimate -> {args.out_scene}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    specs = [
        tabletop_scene(
            scene_id=f"scale-{level:.3f}",
            true_scale=level,
            object_depth=args.object_depth,
            mesh_id=args.mesh_id,
            occluder_fraction=args.occluder_fraction,
            occluder_offset=args.occluder_offset,
            depth_noise=args.depth_noise,
            shape_noise=args.shape_noise,
            seed=args.seed + k,
        )
        for k, level in enumerate(args.scales)
    ]
    records, table = run_sweep(specs)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps({
                    "scene_id": r.scene_id,
                    "centroid_error": r.centroid_error,
                    "dimensional_error": r.dimensional_error,
                    "mu_error": r.mu_error,
                    "success": r.success,
                }))
                fh.write("\n")
    print(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthrefine",
        description="Depth-based refinement of scale-ambiguous pose estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a depth map of a posed mesh")
    p.add_argument("--mesh", required=True, help="OBJ mesh path")
    p.add_argument("--scene", required=True, help="scene JSON (pose + intrinsics)")
    p.add_argument("--scale", type=float, default=1.0, help="uniform mesh scale")
    p.add_argument("--out", required=True, help="output PFM path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("refine", help="refine a coarse pose against a measured depth map")
    p.add_argument("--mesh", required=True, help="OBJ mesh path")
    p.add_argument("--scene", required=True, help="scene JSON (coarse pose + intrinsics + cad_dims)")
    p.add_argument("--depth", required=True, help="measured depth map (PFM)")
    p.add_argument("--out", required=True, help="output result JSON path")
    p.add_argument("--depth-scale", type=float, default=1.0,
                   help="multiply loaded depths by this factor (e.g. 0.001 for mm)")
    p.add_argument("--bound-fraction", type=float, default=0.8)
    p.add_argument("--grid", type=int, default=33, help="coarse grid samples")
    p.add_argument("--tolerance", type=float, default=1e-4, help="sigma tolerance [m]")
    p.add_argument("--ransac-iterations", type=int, default=256)
    p.add_argument("--inlier-threshold", type=float, default=0.007)
    p.add_argument("--min-inlier-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("sample-grasps", help="sample pre-grasp poses on a sphere")
    p.add_argument("--position", type=float, nargs=3, required=True,
                   metavar=("X", "Y", "Z"), help="refined object position (world frame)")
    p.add_argument("--radius", type=float, default=0.15, help="sphere radius [m]")
    p.add_argument("--alpha-samples", type=int, default=8)
    p.add_argument("--theta-samples", type=int, default=4)
    p.add_argument("--theta-max", type=float, default=math.pi / 3.0)
    p.add_argument("--align", type=float, nargs=4, default=[1.0, 0.0, 0.0, 0.0],
                   metavar=("W", "X", "Y", "Z"),
                   help="end-effector alignment quaternion")
    p.add_argument("--table-height", type=float, default=-math.inf,
                   help="drop candidates below this world z")
    p.add_argument("--out", required=True, help="output candidates JSON path")
    p.set_defaults(func=cmd_sample_grasps)

    p = sub.add_parser("simulate", help="generate a synthetic scene + coarse estimate")
    p.add_argument("--scale", type=float, required=True, help="true object scale")
    p.add_argument("--mesh-id", default="apple", choices=("apple", "sphere", "cube"))
    p.add_argument("--object-depth", type=float, default=0.5)
    p.add_argument("--occluder-fraction", type=float, default=0.0)
    p.add_argument("--occluder-offset", type=float, default=0.1)
    p.add_argument("--depth-noise", type=float, default=0.0)
    p.add_argument("--shape-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-depth", required=True, help="output PFM path")
    p.add_argument("--out-scene", required=True, help="output scene JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="run the synthetic evaluation sweep")
    p.add_argument("--scales", type=float, nargs="+", default=list(DEFAULT_SCALE_LEVELS))
    p.add_argument("--mesh-id", default="apple", choices=("apple", "sphere", "cube"))
    p.add_argument("--object-depth", type=float, default=0.5)
    p.add_argument("--occluder-fraction", type=float, default=0.0)
    p.add_argument("--occluder-offset", type=float, default=0.1)
    p.add_argument("--depth-noise", type=float, default=0.0)
    p.add_argument("--shape-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="", help="optional line-delimited JSON records path")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DepthRefineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except Exception as exc:  # pragma: no cover - last resort
        print(f"unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_UNEXPECTED


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
