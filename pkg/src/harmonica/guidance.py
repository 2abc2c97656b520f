"""Handle sets, harmonic weight fields and quaternion-blended guidance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .mesh import Mesh


class GuidanceError(Exception):
    pass


# ---------------------------------------------------------------- quaternions

def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise GuidanceError("cannot normalize a near-zero quaternion")
    return q / n


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    h = 0.5 * angle
    return np.concatenate([[np.cos(h)], np.sin(h) * axis])


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


# -------------------------------------------------------------------- handles

@dataclass(frozen=True)
class Transform:
    """Rigid-plus-scale handle transform about a pivot."""

    rotation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0
    pivot: tuple[float, float, float] | None = None  # None -> handle centroid

    def matrix(self) -> np.ndarray:
        return self.scale * quat_to_matrix(self.rotation)


@dataclass(frozen=True)
class Handle:
    name: str
    vertices: np.ndarray
    transform: Transform = field(default_factory=Transform)


@dataclass(frozen=True)
class HandleSet:
    handles: tuple[Handle, ...]

    def __len__(self):
        return len(self.handles)

    def all_vertices(self) -> np.ndarray:
        return np.concatenate([h.vertices for h in self.handles])

    def pivot(self, k: int, mesh: Mesh) -> np.ndarray:
        h = self.handles[k]
        if h.transform.pivot is not None:
            return np.asarray(h.transform.pivot, dtype=np.float64)
        return mesh.vertices[h.vertices].mean(axis=0)


def make_handle_set(handles: list[Handle], n_vertices: int) -> HandleSet:
    """Validate disjointness, coverage and quaternion normalization."""
    if not handles:
        raise GuidanceError("at least one handle is required")
    seen: set[int] = set()
    for h in handles:
        ids = np.asarray(h.vertices, dtype=np.int64)
        if ids.size == 0:
            raise GuidanceError(f"handle {h.name!r} has no vertices")
        if ids.min() < 0 or ids.max() >= n_vertices:
            raise GuidanceError(f"handle {h.name!r} references invalid vertex ids")
        s = set(int(i) for i in ids)
        if len(s) != ids.size:
            raise GuidanceError(f"handle {h.name!r} repeats vertex ids")
        if seen & s:
            raise GuidanceError(f"handle {h.name!r} overlaps another handle")
        seen |= s
        q = np.asarray(h.transform.rotation, dtype=np.float64)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise GuidanceError(f"handle {h.name!r} rotation quaternion is not unit")
        if h.transform.scale <= 0:
            raise GuidanceError(f"handle {h.name!r} scale must be positive")
    if len(seen) >= n_vertices:
        raise GuidanceError("handles cover all vertices; no free vertices remain")
    normalized = [
        Handle(h.name, np.sort(np.asarray(h.vertices, dtype=np.int64)), h.transform)
        for h in handles
    ]
    return HandleSet(tuple(normalized))


# ----------------------------------------------------------- harmonic weights

@dataclass(frozen=True)
class HarmonicWeights:
    """Per-vertex handle weights H (V, m) and their per-triangle means."""

    vertex_weights: np.ndarray
    triangle_weights: np.ndarray


def solve_harmonic_weights(mesh: Mesh, L: sp.spmatrix,
                           handles: HandleSet) -> HarmonicWeights:
    """Dirichlet problems L h = 0 with h = 1 on handle k, 0 on the others.

    One factorization of the reduced Laplacian is shared across all
    right-hand sides.
    """
    V = mesh.n_vertices
    m = len(handles)
    constrained = handles.all_vertices()
    free = np.setdiff1d(np.arange(V), constrained)

    L = sp.csr_matrix(L)
    adjacency = sp.csr_matrix((np.ones(len(L.data)), L.indices, L.indptr),
                              shape=L.shape)
    n_comp, labels = connected_components(adjacency, directed=False)
    have = set(labels[constrained])
    missing = [c for c in range(n_comp) if c not in have]
    if missing:
        raise GuidanceError(
            f"connected component {missing[0]} has no constrained vertex; "
            "the harmonic system is singular")

    H = np.zeros((V, m))
    for k, h in enumerate(handles.handles):
        H[h.vertices, k] = 1.0

    if len(free):
        Lff = sp.csc_matrix(L[free][:, free])
        Lfc = sp.csr_matrix(L[free][:, constrained])
        lu = splu(Lff)
        H[free] = lu.solve(-Lfc @ H[constrained])

    tw = H[mesh.triangles].mean(axis=1)
    return HarmonicWeights(H, tw)


# ------------------------------------------------------------------- blending

def blend_all(weights: HarmonicWeights, handles: HandleSet) -> np.ndarray:
    """(T, 3, 3) blended linear parts s_t R(q_t) per triangle.

    Quaternions are blended by a hemisphere-aligned normalized weighted sum;
    scales blend linearly.
    """
    w = weights.triangle_weights  # (T, m)
    quats = np.array([h.transform.rotation for h in handles.handles])  # (m, 4)
    scales = np.array([h.transform.scale for h in handles.handles])

    ref = np.argmax(w, axis=1)  # per-triangle dominant handle
    dots = quats @ quats.T  # (m, m) pairwise alignment
    signs = np.where(dots[ref] >= 0.0, 1.0, -1.0)  # (T, m)
    q = (w * signs) @ quats  # (T, 4)
    norms = np.linalg.norm(q, axis=1)
    if np.any(norms < 1e-9):
        t = int(np.argmin(norms))
        raise GuidanceError(
            f"blended quaternion vanishes on triangle {t} (antipodal handle "
            "rotations); split the motion into smaller handle transforms")
    q /= norms[:, None]
    s = w @ scales

    ww, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    R = np.empty((len(q), 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - ww * z)
    R[:, 0, 2] = 2 * (x * z + ww * y)
    R[:, 1, 0] = 2 * (x * y + ww * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - ww * x)
    R[:, 2, 0] = 2 * (x * z - ww * y)
    R[:, 2, 1] = 2 * (y * z + ww * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return s[:, None, None] * R


def blend_transforms(weights: HarmonicWeights, handles: HandleSet,
                     t: int) -> np.ndarray:
    """Blended 3x3 linear part for a single triangle."""
    return blend_all(weights, handles)[t]


@dataclass(frozen=True)
class GuidanceField:
    """Stacked per-triangle prescribed gradient blocks, shape (3T, 3)."""

    Z: np.ndarray


def build_guidance(mesh0: Mesh, G: sp.spmatrix, weights: HarmonicWeights,
                   handles: HandleSet) -> GuidanceField:
    """Z_t = (G X0)_t M_t^T: rest gradients mapped by the blended linear part."""
    P = np.asarray(G @ mesh0.vertices).reshape(-1, 3, 3)
    M = blend_all(weights, handles)
    Z = np.einsum("tij,tkj->tik", P, M).reshape(-1, 3)
    if not np.all(np.isfinite(Z)):
        raise GuidanceError("guidance field contains non-finite entries")
    return GuidanceField(Z)


def constrained_positions(handles: HandleSet, mesh: Mesh) -> dict[int, np.ndarray]:
    """Target positions of all handle vertices under their transforms."""
    out: dict[int, np.ndarray] = {}
    for k, h in enumerate(handles.handles):
        M = h.transform.matrix()
        pivot = handles.pivot(k, mesh)
        d = np.asarray(h.transform.translation, dtype=np.float64)
        moved = (mesh.vertices[h.vertices] - pivot) @ M.T + pivot + d
        for v, p in zip(h.vertices, moved):
            out[int(v)] = p
    return out
