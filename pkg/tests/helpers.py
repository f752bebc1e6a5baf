"""Shared fixtures-as-functions for the test suite."""

import numpy as np

from depthrefine import TriangleMesh, UnitQuaternion, store_mesh


def square_mesh(half: float = 0.1) -> TriangleMesh:
    """Two coplanar triangles forming an axis-aligned square in z=0."""
    verts = np.array(
        [[-half, -half, 0.0], [half, -half, 0.0], [half, half, 0.0], [-half, half, 0.0]]
    )
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(verts, tris)


def random_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    w, x, y, z = rng.normal(size=4)
    n = (w * w + x * x + y * y + z * z) ** 0.5
    return UnitQuaternion(w / n, x / n, y / n, z / n)


def write_obj(path, mesh: TriangleMesh) -> None:
    store_mesh(path, mesh)
