"""Orchestration: assemble operators once per mesh, reuse weights and
factorizations across deformation requests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .guidance import (GuidanceField, HandleSet, HarmonicWeights,
                       build_guidance, constrained_positions,
                       solve_harmonic_weights)
from .mesh import Mesh, build_topology
from .operators import (assemble_diff_curved, assemble_diff_flat,
                        assemble_gradient, assemble_laplacian,
                        assemble_masses, assemble_norm)
from .solver import Counters, Energies, SolverContext, assemble_system, \
    factorize, solve, total_energies


@dataclass(frozen=True)
class DeformResult:
    positions: np.ndarray      # (V, 3)
    energies: Energies
    local_energy: np.ndarray   # (T,)
    colors: np.ndarray         # (T, 3) uint8
    p95: float
    max_iso: float
    max_conf: float
    factorize_ms: float
    solve_ms: float
    cache_hit: bool


class DeformationPipeline:
    """All operators of one rest mesh plus weight / factorization caches."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.topo = build_topology(mesh)
        self.G = assemble_gradient(mesh)
        self.A, self.B = assemble_masses(mesh, self.topo, n=3)
        self.L = assemble_laplacian(self.G, self.A)
        self.D_flat = assemble_diff_flat(self.topo, mesh.n_triangles, n=3)
        self.D_curved = assemble_diff_curved(mesh, self.topo)
        self.counters = Counters()
        self._weights_cache: dict[tuple, HarmonicWeights] = {}
        self._ctx_cache: dict[tuple, SolverContext] = {}
        self._norm_cache: dict = {}
        self._system_cache: dict = {}

    # -- caches -------------------------------------------------------------

    @staticmethod
    def _partition_key(handles: HandleSet) -> tuple:
        return tuple((h.name, tuple(int(v) for v in h.vertices))
                     for h in handles.handles)

    def weights(self, handles: HandleSet) -> HarmonicWeights:
        key = self._partition_key(handles)
        w = self._weights_cache.get(key)
        if w is None:
            w = solve_harmonic_weights(self.mesh, self.L, handles)
            self._weights_cache[key] = w
        return w

    def diff(self, operator_kind: str):
        if operator_kind == "flat":
            return self.D_flat
        if operator_kind == "curved":
            return self.D_curved
        raise ValueError(f"unknown operator kind {operator_kind!r}")

    def norm(self, beta: float, operator_kind: str):
        key = (float(beta), operator_kind)
        W = self._norm_cache.get(key)
        if W is None:
            W = assemble_norm(self.A, self.diff(operator_kind), self.B,
                              beta, operator_kind)
            self._norm_cache[key] = W
        return W

    def system(self, beta: float, operator_kind: str):
        """Normal-equation pieces independent of the handle partition."""
        key = (float(beta), operator_kind)
        sys = self._system_cache.get(key)
        if sys is None:
            sys = assemble_system(self.G, self.norm(beta, operator_kind))
            self._system_cache[key] = sys
        return sys

    def factorize(self, handles: HandleSet, beta: float,
                  operator_kind: str = "curved",
                  use_cache: bool = False) -> SolverContext:
        key = (self._partition_key(handles), float(beta), operator_kind)
        if use_cache:
            ctx = self._ctx_cache.get(key)
            if ctx is not None:
                return ctx
        ctx = factorize(self.mesh, self.G, self.norm(beta, operator_kind),
                        handles, self.counters,
                        system=self.system(beta, operator_kind))
        if use_cache:
            self._ctx_cache[key] = ctx
        return ctx

    def clear_context_cache(self) -> None:
        self._ctx_cache.clear()

    # -- solves ---------------------------------------------------------------

    def guidance(self, handles: HandleSet) -> GuidanceField:
        return build_guidance(self.mesh, self.G, self.weights(handles), handles)

    def solve(self, ctx: SolverContext, handles: HandleSet) -> np.ndarray:
        Z = self.guidance(handles)
        return solve(ctx, Z, constrained_positions(handles, self.mesh),
                     self.counters)

    def energies(self, handles: HandleSet, X: np.ndarray, beta: float,
                 operator_kind: str = "curved") -> Energies:
        return total_energies(self.G, self.norm(beta, operator_kind), self.A,
                              self.diff(operator_kind), self.B, X,
                              self.guidance(handles))

    def deform(self, handles: HandleSet, beta: float,
               operator_kind: str = "curved",
               use_cache: bool = False) -> DeformResult:
        before = self.counters.factorizations
        ctx = self.factorize(handles, beta, operator_kind, use_cache=use_cache)
        cache_hit = self.counters.factorizations == before
        f_ms = 0.0 if cache_hit else self.counters.factorize_ms
        X = self.solve(ctx, handles)
        en = self.energies(handles, X, beta, operator_kind)
        le = metrics.local_energy(self.G, X, self.guidance(handles).Z)
        colors = metrics.colormap(le)
        p95 = metrics.percentile95(le) if len(le) else 0.0
        sig = metrics.singular_values(self.mesh, X)
        _, _, max_iso, max_conf = metrics.iso_conf_errors(sig)
        return DeformResult(X, en, le, colors, p95, max_iso, max_conf,
                            f_ms, self.counters.solve_ms, cache_hit)
