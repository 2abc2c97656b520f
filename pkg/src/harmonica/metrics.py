"""Per-triangle energies, distortion errors, colormap and beta sweeps."""

from __future__ import annotations

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh

SWEEP_CSV_HEADER = "beta,max_iso,max_conf,e_p,e_r,e_total,factorize_ms,solve_ms"

# Beta grid with denser sampling at the low end, where deformations change
# the most; includes the commonly reported 0.003 / 0.1 / 0.2 settings.
DEFAULT_BETAS = (0.0, 0.003, 0.01, 0.03, 0.1, 0.2, 0.4, 0.7, 0.9)

RAMP_MIN = np.array([0, 0, 255], dtype=np.float64)   # blue
RAMP_MAX = np.array([255, 0, 0], dtype=np.float64)   # red


def local_energy(G: sp.spmatrix, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm of the residual block per triangle, (T,)."""
    R = np.asarray(G @ X) - Z
    return (R * R).reshape(-1, 3, 3).sum(axis=(1, 2))


def _frame2d(u1: np.ndarray, u2: np.ndarray) -> np.ndarray | None:
    """Orthonormal in-plane frame (2, 3) from two edge vectors, or None."""
    n1 = np.linalg.norm(u1)
    if n1 < 1e-15:
        return None
    e1 = u1 / n1
    w = u2 - np.dot(u2, e1) * e1
    n2 = np.linalg.norm(w)
    if n2 < 1e-15:
        return None
    return np.vstack([e1, w / n2])


def deformation_gradient_2x2(mesh: Mesh, X: np.ndarray, t: int
                             ) -> tuple[np.ndarray, np.ndarray]:
    """In-plane 2x2 deformation gradient of triangle t and its singular
    values (descending). A degenerate deformed triangle yields sigma2 = 0."""
    i, j, k = mesh.triangles[t]
    u1 = mesh.vertices[j] - mesh.vertices[i]
    u2 = mesh.vertices[k] - mesh.vertices[i]
    F0 = _frame2d(u1, u2)
    if F0 is None:
        raise ValueError(f"rest triangle {t} is degenerate")
    P = F0 @ np.column_stack([u1, u2])  # (2, 2), lower-triangular

    v1 = X[j] - X[i]
    v2 = X[k] - X[i]
    # Map rest-plane coordinates to world edges; singular values equal those
    # of the in-plane 2x2 map since the deformed frame is orthonormal.
    J3 = np.column_stack([v1, v2]) @ np.linalg.inv(P)  # (3, 2)
    sigma = np.linalg.svd(J3, compute_uv=False)

    F1 = _frame2d(v1, v2)
    if F1 is None:
        # Degenerate deformed triangle: report the plane-collapsed map.
        F1 = np.zeros((2, 3))
    J = F1 @ J3
    return J, sigma


def singular_values(mesh: Mesh, X: np.ndarray) -> np.ndarray:
    """(T, 2) singular values of the per-triangle deformation gradient."""
    V, T = mesh.vertices, mesh.triangles
    u1 = V[T[:, 1]] - V[T[:, 0]]
    u2 = V[T[:, 2]] - V[T[:, 0]]
    n1 = np.linalg.norm(u1, axis=1)
    e1 = u1 / n1[:, None]
    w = u2 - np.sum(u2 * e1, axis=1)[:, None] * e1
    n2 = np.linalg.norm(w, axis=1)
    # P = [[|u1|, u2.e1], [0, |w|]]; invert the lower-triangular 2x2 directly
    a = n1
    b = np.sum(u2 * e1, axis=1)
    d = n2
    inv = np.zeros((len(T), 2, 2))
    inv[:, 0, 0] = 1.0 / a
    inv[:, 0, 1] = -b / (a * d)
    inv[:, 1, 1] = 1.0 / d

    v1 = X[T[:, 1]] - X[T[:, 0]]
    v2 = X[T[:, 2]] - X[T[:, 0]]
    Q = np.stack([v1, v2], axis=2)  # (T, 3, 2)
    J3 = Q @ inv
    return np.linalg.svd(J3, compute_uv=False)


def iso_conf_errors(sigma: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Isometric and conformal distortion per triangle and their maxima."""
    s1, s2 = sigma[:, 0], sigma[:, 1]
    e_iso = (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2
    e_conf = 0.5 * (s1 - s2) ** 2
    return e_iso, e_conf, float(e_iso.max()), float(e_conf.max())


def percentile95(values: np.ndarray) -> float:
    """Nearest-rank 95th percentile: element ceil(0.95 n) in sorted order."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    idx = math.ceil(0.95 * len(v)) - 1
    return float(v[idx])


def colormap(field: np.ndarray) -> np.ndarray:
    """Linear blue-to-red ramp over [0, p95]; the top 5% clamps to red."""
    field = np.asarray(field, dtype=np.float64)
    if len(field) == 0:
        return np.zeros((0, 3), dtype=np.uint8)
    p95 = percentile95(field)
    if p95 <= 0.0:
        t = np.zeros(len(field))
    else:
        t = np.clip(field / p95, 0.0, 1.0)
    rgb = RAMP_MIN[None, :] + t[:, None] * (RAMP_MAX - RAMP_MIN)[None, :]
    return np.round(rgb).astype(np.uint8)


def triangle_colors_to_vertex(mesh: Mesh, tri_rgb: np.ndarray) -> np.ndarray:
    """Average incident triangle colors onto vertices (for PLY output)."""
    acc = np.zeros((mesh.n_vertices, 3))
    cnt = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(acc, mesh.triangles[:, c], tri_rgb.astype(np.float64))
        np.add.at(cnt, mesh.triangles[:, c], 1.0)
    cnt[cnt == 0] = 1.0
    return np.round(acc / cnt[:, None]).astype(np.uint8)


# ---------------------------------------------------------------- beta sweeps

@dataclass(frozen=True)
class SweepRow:
    beta: float
    max_iso: float
    max_conf: float
    e_p: float
    e_r: float
    e_total: float
    factorize_ms: float
    solve_ms: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SWEEP_CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(f"{float(r.beta)!r},{float(r.max_iso)!r},"
                      f"{float(r.max_conf)!r},{float(r.e_p)!r},"
                      f"{float(r.e_r)!r},{float(r.e_total)!r},"
                      f"{r.factorize_ms:.3f},{r.solve_ms:.3f}\n")
        return buf.getvalue()


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HARMONICA_THREADS", "1")))
    except ValueError:
        return 1


def beta_sweep(pipeline, handles, betas=DEFAULT_BETAS,
               operator_kind: str = "curved") -> SweepResult:
    """Run the full deform pipeline per beta and collect errors/energies.

    `pipeline` is a harmonica.pipeline.DeformationPipeline; rows come back
    in beta order regardless of the worker count (HARMONICA_THREADS).
    """
    betas = [float(b) for b in betas]
    if betas != sorted(set(betas)):
        raise ValueError("betas must be strictly increasing")
    if any(not 0.0 <= b < 1.0 for b in betas):
        raise ValueError("betas must lie in [0, 1)")

    def run(beta: float) -> SweepRow:
        t0 = time.perf_counter()
        ctx = pipeline.factorize(handles, beta, operator_kind)
        f_ms = (time.perf_counter() - t0) * 1e3
        t1 = time.perf_counter()
        X = pipeline.solve(ctx, handles)
        s_ms = (time.perf_counter() - t1) * 1e3
        en = pipeline.energies(handles, X, beta, operator_kind)
        sig = singular_values(pipeline.mesh, X)
        _, _, max_iso, max_conf = iso_conf_errors(sig)
        return SweepRow(beta, max_iso, max_conf, en.e_p, en.e_r, en.e_beta,
                        f_ms, s_ms)

    workers = _thread_count()
    if workers > 1 and len(betas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, betas))
    else:
        rows = [run(b) for b in betas]
    return SweepResult(tuple(rows))
