"""Discrete operator assembly: gradients, masses, Laplacian, energy
differentials (flat and curvature-compensated) and the weighted norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite

from .mesh import Mesh, EdgeTopology

# Entries smaller than this are pruned from assembled sparse matrices.
PRUNE_EPS = 1e-14

# Maps vertex values (u_i, u_j, u_k) to edge differences; the third row
# pins the normal component of the gradient to zero.
_GRAD_RHS = np.array([[-1.0, 1.0, 0.0],
                      [-1.0, 0.0, 1.0],
                      [0.0, 0.0, 0.0]])


def _prune(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.data[np.abs(m.data) < PRUNE_EPS] = 0.0
    m.eliminate_zeros()
    return m


def _symmetrize(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    return _prune((m + m.T) * 0.5)


def local_gradient(mesh: Mesh, t: int) -> np.ndarray:
    """3x3 block G_t: G_t @ (u_i, u_j, u_k) is the in-plane gradient of the
    linear interpolant of vertex values u."""
    i, j, k = mesh.triangles[t]
    F = np.vstack([mesh.vertices[j] - mesh.vertices[i],
                   mesh.vertices[k] - mesh.vertices[i],
                   mesh.normals[t]])
    try:
        return np.linalg.solve(F, _GRAD_RHS)
    except np.linalg.LinAlgError:
        raise ValueError(f"triangle {t} has a singular edge frame") from None


def local_gradients(mesh: Mesh) -> np.ndarray:
    """(T, 3, 3) stack of all local gradient blocks (batched solve)."""
    V, T = mesh.vertices, mesh.triangles
    F = np.stack([V[T[:, 1]] - V[T[:, 0]],
                  V[T[:, 2]] - V[T[:, 0]],
                  mesh.normals], axis=1)
    return np.linalg.solve(F, np.broadcast_to(_GRAD_RHS, (len(T), 3, 3)))


def assemble_gradient(mesh: Mesh) -> sp.csr_matrix:
    """Global gradient operator G, shape (3T, V).

    For X in R^{V x 3} (rows = vertices), rows 3t..3t+2 of G @ X hold the
    3x3 block whose column c is the world-space gradient of coordinate c,
    all in a common coordinate system.
    """
    Gt = local_gradients(mesh)
    T = mesh.n_triangles
    rows = (3 * np.arange(T)[:, None, None] + np.arange(3)[None, :, None])
    rows = np.broadcast_to(rows, (T, 3, 3)).ravel()
    cols = np.broadcast_to(mesh.triangles[:, None, :], (T, 3, 3)).ravel()
    return _prune(sp.coo_matrix((Gt.ravel(), (rows, cols)),
                                shape=(3 * T, mesh.n_vertices)))


def assemble_masses(mesh: Mesh, topo: EdgeTopology, n: int = 3
                    ) -> tuple[sp.dia_matrix, sp.dia_matrix]:
    """Diagonal integration masses.

    A: (3T, 3T) triangle areas replicated 3x.
    B: (n*E_i, n*E_i) internal edge lengths replicated n times
       (n=1 gives the scalar, unreplicated variant).
    """
    if n < 1:
        raise ValueError(f"block dimension must be >= 1, got {n}")
    A = sp.diags(np.repeat(mesh.areas, 3))
    B = sp.diags(np.repeat(topo.lengths, n)) if topo.n_internal else \
        sp.csr_matrix((0, 0))
    return A, B


def assemble_laplacian(G: sp.spmatrix, A: sp.spmatrix) -> sp.csr_matrix:
    """L = G^T A G, the (V, V) Laplace-Beltrami discretization (PSD)."""
    return _symmetrize(G.T @ A @ G)


def assemble_diff_flat(topo: EdgeTopology, n_triangles: int, n: int = 1
                       ) -> sp.csr_matrix:
    """Finite-difference operator D: +1 at l(e), -1 at r(e) per internal
    edge, shape (n*E_i, n*T); lifted component-wise as D kron I_n."""
    if n < 1:
        raise ValueError(f"block dimension must be >= 1, got {n}")
    E = topo.n_internal
    rows = np.concatenate([np.arange(E), np.arange(E)])
    cols = np.concatenate([topo.left, topo.right])
    vals = np.concatenate([np.ones(E), -np.ones(E)])
    D = sp.coo_matrix((vals, (rows, cols)), shape=(E, n_triangles))
    if n == 1:
        return D.tocsr()
    return sp.kron(D, sp.identity(n), format="csr")


def edge_rotation(mesh: Mesh, topo: EdgeTopology, e: int) -> np.ndarray:
    """Minimal rotation R_e with n_r = R_e n_l for internal edge e.

    Falls back to identity for aligned normals and to a pi rotation about
    the shared edge direction for antiparallel normals.
    """
    if not 0 <= e < topo.n_internal:
        raise IndexError(f"edge {e} is not an internal edge")
    nl = mesh.normals[topo.left[e]]
    nr = mesh.normals[topo.right[e]]
    return _align_rotation(nl, nr, mesh.vertices[topo.internal_vpairs[e]])


def _align_rotation(nl, nr, edge_verts) -> np.ndarray:
    v = np.cross(nl, nr)
    s = np.linalg.norm(v)
    c = float(np.dot(nl, nr))
    if s < 1e-9:
        if c > 0.0:
            return np.eye(3)
        axis = edge_verts[1] - edge_verts[0]
        axis = axis / np.linalg.norm(axis)
        # pi rotation about the shared edge: 2 aa^T - I
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    vx = np.array([[0.0, -v[2], v[1]],
                   [v[2], 0.0, -v[0]],
                   [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / (s * s))


def edge_rotations(mesh: Mesh, topo: EdgeTopology) -> np.ndarray:
    """(E_i, 3, 3) stack of all internal-edge alignment rotations."""
    return np.stack([edge_rotation(mesh, topo, e)
                     for e in range(topo.n_internal)]) if topo.n_internal \
        else np.zeros((0, 3, 3))


def assemble_diff_curved(mesh: Mesh, topo: EdgeTopology) -> sp.csr_matrix:
    """Curvature-compensating differential D^R, shape (3*E_i, 3*T).

    Block row e applies R_e to the residual block of l(e) and subtracts
    the block of r(e), so residuals related by the tangent-space alignment
    cancel. Equals D kron I_3 when all normals agree.
    """
    E, T = topo.n_internal, mesh.n_triangles
    if E == 0:
        return sp.csr_matrix((0, 3 * T))
    R = edge_rotations(mesh, topo)
    br = 3 * np.arange(E)
    rows_R = (br[:, None, None] + np.arange(3)[None, :, None])
    rows_R = np.broadcast_to(rows_R, (E, 3, 3)).ravel()
    cols_R = (3 * topo.left[:, None, None] + np.arange(3)[None, None, :])
    cols_R = np.broadcast_to(cols_R, (E, 3, 3)).ravel()
    rows_I = (br[:, None] + np.arange(3)[None, :]).ravel()
    cols_I = (3 * topo.right[:, None] + np.arange(3)[None, :]).ravel()
    rows = np.concatenate([rows_R, rows_I])
    cols = np.concatenate([cols_R, cols_I])
    vals = np.concatenate([R.ravel(), -np.ones(3 * E)])
    return _prune(sp.coo_matrix((vals, (rows, cols)), shape=(3 * E, 3 * T)))


@dataclass(frozen=True)
class WeightedNorm:
    """Symmetric positive definite norm W_beta = (1-beta) A + beta D^T B D."""

    beta: float
    matrix: sp.csr_matrix
    operator_kind: str  # "flat" | "curved"


def assemble_norm(A: sp.spmatrix, Dk: sp.spmatrix, B: sp.spmatrix,
                  beta: float, operator_kind: str = "curved") -> WeightedNorm:
    """Blend area integration with the edge-difference regularizer."""
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must be in [0, 1), got {beta}")
    if operator_kind not in ("flat", "curved"):
        raise ValueError(f"unknown operator kind {operator_kind!r}")
    if beta == 0.0 or Dk.shape[0] == 0:
        W = sp.csr_matrix((1.0 - beta) * A)
    else:
        W = _symmetrize((1.0 - beta) * A + beta * (Dk.T @ B @ Dk))
    return WeightedNorm(float(beta), W, operator_kind)


def dump_matrix_market(op: sp.spmatrix, path) -> None:
    """Debug dump of any operator in MatrixMarket coordinate format."""
    mmwrite(str(path), sp.coo_matrix(op))
