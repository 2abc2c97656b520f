"""Regularized normal equations with constraint elimination and
factorization reuse."""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from cvxopt import cholmod
from cvxopt import matrix as cvx_matrix
from cvxopt import spmatrix as cvx_spmatrix

from .mesh import Mesh
from .operators import WeightedNorm, _symmetrize
from .guidance import GuidanceField, HandleSet

RESIDUAL_TOL = 1e-8

# cvxopt's CHOLMOD wrapper keeps factorization options in module-level
# state, so all calls into it are serialized through one lock.
_CHOLMOD_LOCK = threading.Lock()


def _cholmod_factor(K_ff: sp.csc_matrix):
    """Sparse Cholesky of the SPD reduced matrix.

    Supernodal factorization with the best of all available fill-reducing
    orderings: the factor is reused across many solves, so spending a bit
    more on the symbolic analysis pays off.
    """
    coo = sp.tril(K_ff).tocoo()
    K = cvx_spmatrix(coo.data, coo.row.astype(int), coo.col.astype(int),
                     coo.shape)
    with _CHOLMOD_LOCK:
        cholmod.options["supernodal"] = 2
        cholmod.options["nmethods"] = 9
        F = cholmod.symbolic(K)
        cholmod.numeric(K, F)
    return F


def _cholmod_solve(F, rhs: np.ndarray) -> np.ndarray:
    B = cvx_matrix(np.asarray(rhs, dtype=np.float64))
    with _CHOLMOD_LOCK:
        cholmod.solve(F, B)
    return np.array(B).reshape(rhs.shape)


class SolverError(Exception):
    pass


@dataclass
class Counters:
    """Instrumentation shared by CLI / service: factorizations, solves, ms."""

    factorizations: int = 0
    solves: int = 0
    factorize_ms: float = 0.0
    solve_ms: float = 0.0


def _partition_key(mesh: Mesh, constrained: np.ndarray, beta: float,
                   kind: str) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(mesh.vertices).tobytes())
    h.update(np.ascontiguousarray(mesh.triangles).tobytes())
    h.update(np.ascontiguousarray(constrained).tobytes())
    h.update(f"{beta!r}|{kind}".encode())
    return h.hexdigest()


@dataclass
class SolverContext:
    """Factorized reduced system, reusable across guidance fields."""

    free: np.ndarray
    constrained: np.ndarray
    beta: float
    operator_kind: str
    key: str
    _factor: object = field(repr=False)
    _K_ff: sp.csr_matrix = field(repr=False)
    _K_fc: sp.csr_matrix = field(repr=False)
    _GtW_f: sp.csr_matrix = field(repr=False)


def assemble_system(G: sp.spmatrix, W_beta: WeightedNorm
                    ) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Partition-independent pieces of the normal equations: the full
    K = G^T W G and G^T W.  Both depend only on the rest mesh and
    (beta, operator), so callers can cache them across handle changes."""
    WG = W_beta.matrix @ G
    K = sp.csr_matrix(_symmetrize(G.T @ WG))
    GtW = sp.csr_matrix(WG.T)
    return K, GtW


def factorize(mesh: Mesh, G: sp.spmatrix, W_beta: WeightedNorm,
              handles: HandleSet, counters: Counters | None = None,
              system: tuple[sp.csr_matrix, sp.csr_matrix] | None = None
              ) -> SolverContext:
    """Eliminate handle columns and factorize K_ff = G_f^T W G_f (SPD)."""
    t0 = time.perf_counter()
    constrained = np.sort(handles.all_vertices())
    free = np.setdiff1d(np.arange(mesh.n_vertices), constrained)
    if len(free) == 0:
        raise SolverError("no free vertices to solve for")

    K, GtW = system if system is not None else assemble_system(G, W_beta)
    K_ff = sp.csc_matrix(K[free][:, free])
    K_fc = sp.csr_matrix(K[free][:, constrained])
    GtW_f = sp.csr_matrix(GtW[free])

    try:
        factor = _cholmod_factor(K_ff)
    except ArithmeticError as exc:  # not positive definite / singular
        raise SolverError(
            f"reduced system is not positive definite ({exc}); every "
            "connected component needs at least one constrained vertex and "
            "beta must be in [0, 1)") from exc

    # Probe solve: a semidefinite system can slip through the factorization,
    # a huge residual does not.
    probe = np.ones(K_ff.shape[0])
    x = _cholmod_solve(factor, probe)
    rel = np.linalg.norm(K_ff @ x - probe) / np.linalg.norm(probe)
    if not np.isfinite(rel) or rel > 1e-6:
        raise SolverError(
            f"reduced system is numerically singular (probe residual {rel:g})")

    ctx = SolverContext(free=free, constrained=constrained,
                        beta=W_beta.beta, operator_kind=W_beta.operator_kind,
                        key=_partition_key(mesh, constrained, W_beta.beta,
                                           W_beta.operator_kind),
                        _factor=factor, _K_ff=sp.csr_matrix(K_ff), _K_fc=K_fc,
                        _GtW_f=GtW_f)
    if counters is not None:
        counters.factorizations += 1
        counters.factorize_ms = (time.perf_counter() - t0) * 1e3
    return ctx


def solve(ctx: SolverContext, Z: GuidanceField,
          constrained: dict[int, np.ndarray],
          counters: Counters | None = None) -> np.ndarray:
    """Solve for deformed positions X (V, 3); constrained rows are copied
    through exactly."""
    t0 = time.perf_counter()
    if set(constrained) != set(int(v) for v in ctx.constrained):
        raise SolverError("constrained vertex set does not match the context partition")

    X_c = np.array([constrained[int(v)] for v in ctx.constrained], dtype=np.float64)
    rhs = ctx._GtW_f @ Z.Z - ctx._K_fc @ X_c
    X_f = _cholmod_solve(ctx._factor, rhs)

    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm > 0:
        rel = np.linalg.norm(ctx._K_ff @ X_f - rhs) / rhs_norm
        if not rel <= RESIDUAL_TOL:
            raise SolverError(f"solve residual {rel:g} exceeds {RESIDUAL_TOL:g}")

    X = np.empty((len(ctx.free) + len(ctx.constrained), 3))
    X[ctx.free] = X_f
    X[ctx.constrained] = X_c

    if counters is not None:
        counters.solves += 1
        counters.solve_ms = (time.perf_counter() - t0) * 1e3
    return X


@dataclass(frozen=True)
class Energies:
    e_p: float      # area-integrated residual energy
    e_r: float      # edge-integrated residual variation
    e_beta: float   # (1 - beta) e_p + beta e_r


def total_energies(G: sp.spmatrix, W_beta: WeightedNorm, A: sp.spmatrix,
                   D_k: sp.spmatrix, B: sp.spmatrix, X: np.ndarray,
                   Z: GuidanceField) -> Energies:
    """Global energy split for a candidate deformation X."""
    R = np.asarray(G @ X) - Z.Z
    e_p = float(np.sum((A @ R) * R))
    if D_k.shape[0]:
        DR = D_k @ R
        e_r = float(np.sum((B @ DR) * DR))
    else:
        e_r = 0.0
    beta = W_beta.beta
    return Energies(e_p, e_r, (1.0 - beta) * e_p + beta * e_r)
