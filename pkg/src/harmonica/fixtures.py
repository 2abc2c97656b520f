"""Procedural test meshes and deformation scenarios.

These stand in for the usual benchmark assets (which cannot be bundled):
an open cylinder, a folded accordion strip, a planar grid, a closed bar
and a tetrahedron.
"""

from __future__ import annotations

import numpy as np

from .guidance import Handle, HandleSet, Transform, make_handle_set, \
    quat_from_axis_angle
from .mesh import Mesh, make_mesh


def tetrahedron() -> Mesh:
    V = np.array([[1.0, 1.0, 1.0],
                  [1.0, -1.0, -1.0],
                  [-1.0, 1.0, -1.0],
                  [-1.0, -1.0, 1.0]])
    T = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return make_mesh(V, T)


def planar_grid(n: int = 20, size: float = 1.0) -> Mesh:
    """n x n vertex grid in the z = 0 plane."""
    xs = np.linspace(0.0, size, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel(), np.zeros(n * n)])
    T = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = i * n + j
            b = a + n
            T.append([a, b, a + 1])
            T.append([a + 1, b, b + 1])
    return make_mesh(V, np.array(T))


def cylinder(n_rings: int = 50, n_seg: int = 40, radius: float = 1.0,
             height: float = 4.0) -> Mesh:
    """Open tube along +z with boundary rings at z = 0 and z = height."""
    V = []
    for r in range(n_rings):
        z = height * r / (n_rings - 1)
        for s in range(n_seg):
            a = 2.0 * np.pi * s / n_seg
            V.append([radius * np.cos(a), radius * np.sin(a), z])
    T = []
    for r in range(n_rings - 1):
        for s in range(n_seg):
            a = r * n_seg + s
            b = r * n_seg + (s + 1) % n_seg
            c = a + n_seg
            d = b + n_seg
            T.append([a, b, c])
            T.append([b, d, c])
    return make_mesh(np.array(V), np.array(T))


def accordion(n_folds: int = 8, n_width: int = 12, fold_len: float = 0.5,
              width: float = 2.0, amplitude: float = 0.4) -> Mesh:
    """Zigzag-folded strip: sharp creases along y, extent along x."""
    n_rows = 2 * n_folds + 1
    V = []
    for i in range(n_rows):
        x = fold_len * i
        z = amplitude if i % 2 else 0.0
        for j in range(n_width):
            V.append([x, width * j / (n_width - 1), z])
    T = []
    for i in range(n_rows - 1):
        for j in range(n_width - 1):
            a = i * n_width + j
            b = a + n_width
            T.append([a, b, a + 1])
            T.append([a + 1, b, b + 1])
    return make_mesh(np.array(V), np.array(T))


def bar(n_len: int = 16, n_side: int = 4, length: float = 4.0,
        side: float = 1.0) -> Mesh:
    """Closed square prism: quad tube plus fan caps."""
    profile = []
    for s in np.linspace(0.0, side, n_side, endpoint=False):
        profile.append([s - side / 2, -side / 2])
    for s in np.linspace(0.0, side, n_side, endpoint=False):
        profile.append([side / 2, s - side / 2])
    for s in np.linspace(0.0, side, n_side, endpoint=False):
        profile.append([side / 2 - s, side / 2])
    for s in np.linspace(0.0, side, n_side, endpoint=False):
        profile.append([-side / 2, side / 2 - s])
    profile = np.array(profile)
    m = len(profile)

    V = []
    for r in range(n_len):
        z = length * r / (n_len - 1)
        for px, py in profile:
            V.append([px, py, z])
    T = []
    for r in range(n_len - 1):
        for s in range(m):
            a = r * m + s
            b = r * m + (s + 1) % m
            c = a + m
            d = b + m
            T.append([a, b, c])
            T.append([b, d, c])
    # caps: fan to a center vertex at each end
    c0 = len(V)
    V.append([0.0, 0.0, 0.0])
    c1 = len(V)
    V.append([0.0, 0.0, length])
    for s in range(m):
        T.append([c0, (s + 1) % m, s])
        base = (n_len - 1) * m
        T.append([c1, base + s, base + (s + 1) % m])
    return make_mesh(np.array(V), np.array(T))


# ------------------------------------------------------------------ scenarios

def _ring_vertices(mesh: Mesh, z: float, tol: float = 1e-9) -> np.ndarray:
    return np.flatnonzero(np.abs(mesh.vertices[:, 2] - z) < tol)


def cylinder_twist(n_rings: int = 30, n_seg: int = 24
                   ) -> tuple[Mesh, HandleSet]:
    """Single-vertex handles: one bottom vertex fixed, one top vertex
    rotated 90 degrees about the cylinder axis."""
    mesh = cylinder(n_rings=n_rings, n_seg=n_seg)
    height = mesh.vertices[:, 2].max()
    bottom = int(_ring_vertices(mesh, 0.0)[0])
    top = int(_ring_vertices(mesh, height)[0])
    q = quat_from_axis_angle([0, 0, 1], np.pi / 2)
    handles = make_handle_set([
        Handle("fixed", np.array([bottom]), Transform()),
        Handle("twist", np.array([top]),
               Transform(rotation=tuple(q), pivot=(0.0, 0.0, height))),
    ], mesh.n_vertices)
    return mesh, handles


def cylinder_rings(n_rings: int = 30, n_seg: int = 24,
                   transform_top: Transform | None = None
                   ) -> tuple[Mesh, HandleSet]:
    """Both full boundary rings as handles (large-handle configuration)."""
    mesh = cylinder(n_rings=n_rings, n_seg=n_seg)
    height = mesh.vertices[:, 2].max()
    handles = make_handle_set([
        Handle("bottom", _ring_vertices(mesh, 0.0), Transform()),
        Handle("top", _ring_vertices(mesh, height),
               transform_top or Transform()),
    ], mesh.n_vertices)
    return mesh, handles


def hand_style(n_rings: int = 30, n_seg: int = 24) -> tuple[Mesh, HandleSet]:
    """Fixed base ring plus two small rotated handles near the top."""
    mesh = cylinder(n_rings=n_rings, n_seg=n_seg)
    height = mesh.vertices[:, 2].max()
    top = _ring_vertices(mesh, height)
    qa = quat_from_axis_angle([1, 0, 0], np.pi / 3)
    qb = quat_from_axis_angle([0, 1, 0], -np.pi / 3)
    handles = make_handle_set([
        Handle("base", _ring_vertices(mesh, 0.0), Transform()),
        Handle("finger_a", top[:1], Transform(rotation=tuple(qa))),
        Handle("finger_b", top[n_seg // 2:n_seg // 2 + 1],
               Transform(rotation=tuple(qb))),
    ], mesh.n_vertices)
    return mesh, handles


def accordion_fold(n_folds: int = 8, n_width: int = 12
                   ) -> tuple[Mesh, HandleSet]:
    """Base row fixed, two vertices on the far row rotated (sharp creases
    exercise the curvature-compensated operator)."""
    mesh = accordion(n_folds=n_folds, n_width=n_width)
    x_max = mesh.vertices[:, 0].max()
    base = np.flatnonzero(mesh.vertices[:, 0] < 1e-9)
    far = np.flatnonzero(np.abs(mesh.vertices[:, 0] - x_max) < 1e-9)
    q = quat_from_axis_angle([0, 1, 0], np.pi / 4)
    handles = make_handle_set([
        Handle("base", base, Transform()),
        Handle("pull", far[:2], Transform(rotation=tuple(q))),
    ], mesh.n_vertices)
    return mesh, handles


def grid_bend(n: int = 20) -> tuple[Mesh, HandleSet]:
    """Planar grid: one edge fixed, two far-edge vertices rotated."""
    mesh = planar_grid(n=n)
    size = mesh.vertices[:, 0].max()
    left = np.flatnonzero(mesh.vertices[:, 0] < 1e-9)
    right = np.flatnonzero(np.abs(mesh.vertices[:, 0] - size) < 1e-9)
    q = quat_from_axis_angle([0, 1, 0], np.pi / 6)
    handles = make_handle_set([
        Handle("left", left, Transform()),
        Handle("right", right[:2], Transform(rotation=tuple(q))),
    ], mesh.n_vertices)
    return mesh, handles


def bar_bend(n_len: int = 16) -> tuple[Mesh, HandleSet]:
    """Closed bar: one cap region fixed, the other rotated."""
    mesh = bar(n_len=n_len)
    length = mesh.vertices[:, 2].max()
    low = np.flatnonzero(mesh.vertices[:, 2] < 1e-9)
    high = np.flatnonzero(np.abs(mesh.vertices[:, 2] - length) < 1e-9)
    q = quat_from_axis_angle([1, 0, 0], np.pi / 4)
    handles = make_handle_set([
        Handle("base", low, Transform()),
        Handle("end", high,
               Transform(rotation=tuple(q), pivot=(0.0, 0.0, length))),
    ], mesh.n_vertices)
    return mesh, handles


# Name -> builder map used by the acceptance suite and CLI tests.
SCENARIOS = {
    "cylinder_twist": cylinder_twist,
    "hand_style": hand_style,
    "accordion_fold": accordion_fold,
    "grid_bend": grid_bend,
    "bar_bend": bar_bend,
}
