"""Acceptance suite.

Each test exercises one contract of the deformation toolkit end to end and
prints a single PASS/FAIL line so the suite doubles as a readable report
(run with `pytest -s tests/test_acceptance.py`).  Expected values come from
independent oracles implemented inline, not from the package under test.
"""

import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import pytest

from harmonica import fixtures, metrics
from harmonica.guidance import (Handle, Transform,
                                constrained_positions, make_handle_set,
                                quat_from_axis_angle, quat_to_matrix)
from harmonica.operators import assemble_diff_flat
from harmonica.pipeline import DeformationPipeline


def check(name: str, ok: bool) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


def pipelines_for_all_scenarios():
    for name, builder in fixtures.SCENARIOS.items():
        mesh, handles = builder()
        yield name, DeformationPipeline(mesh), handles


# -- independent unregularized oracle ----------------------------------------

def oracle_gradient(mesh) -> sp.csr_matrix:
    """Per-triangle gradient assembled from explicit 3x3 inverses."""
    rhs = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    rows, cols, vals = [], [], []
    for t, (i, j, k) in enumerate(mesh.triangles):
        e1 = mesh.vertices[j] - mesh.vertices[i]
        e2 = mesh.vertices[k] - mesh.vertices[i]
        n = np.cross(e1, e2)
        n = n / np.linalg.norm(n)
        g = np.linalg.inv(np.vstack([e1, e2, n])) @ rhs
        for r in range(3):
            for c, v in zip((i, j, k), g[r]):
                rows.append(3 * t + r)
                cols.append(c)
                vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)),
                         shape=(3 * mesh.n_triangles, mesh.n_vertices))


def oracle_unregularized_solve(pipeline, handles) -> np.ndarray:
    """Area-weighted least squares fit to the guidance field, assembled
    from scratch and solved with a dense-free spsolve."""
    mesh = pipeline.mesh
    G = oracle_gradient(mesh)
    A = sp.diags(np.repeat(mesh.areas, 3))
    Z = pipeline.guidance(handles).Z
    fixed = constrained_positions(handles, mesh)
    con = np.array(sorted(fixed), dtype=int)
    free = np.setdiff1d(np.arange(mesh.n_vertices), con)
    K = (G.T @ A @ G).tocsc()
    Xc = np.array([fixed[v] for v in con])
    rhs = (G[:, free].T @ A @ Z) - K[free][:, con] @ Xc
    X = np.empty((mesh.n_vertices, 3))
    X[free] = spla.spsolve(K[free][:, free], rhs)
    X[con] = Xc
    return X


def test_beta_zero_equivalence():
    worst = 0.0
    for name, p, hs in pipelines_for_all_scenarios():
        t0 = time.perf_counter()
        X = p.solve(p.factorize(hs, 0.0), hs)
        X_ref = oracle_unregularized_solve(p, hs)
        dt = time.perf_counter() - t0
        err = np.abs(X - X_ref).max() / p.mesh.bbox_diag
        worst = max(worst, err)
        assert dt < 1.0, f"{name} took {dt:.2f}s"
    check(f"beta=0 equivalence (worst rel err {worst:.2e})", worst < 1e-9)


def test_planar_reduction():
    mesh, hs = fixtures.grid_bend(n=20)
    p = DeformationPipeline(mesh)
    D_kron = assemble_diff_flat(p.topo, mesh.n_triangles, n=3)
    entry_err = abs(p.D_curved - D_kron).max()
    X_flat = p.solve(p.factorize(hs, 0.2, "flat"), hs)
    X_curved = p.solve(p.factorize(hs, 0.2, "curved"), hs)
    out_err = np.abs(X_flat - X_curved).max() / mesh.bbox_diag
    check(f"planar reduction (entry err {entry_err:.2e}, "
          f"output rel err {out_err:.2e})",
          entry_err < 1e-12 and out_err < 1e-9)


def test_rigid_reproduction():
    q = quat_from_axis_angle([1.0, 2.0, -0.5], 0.9)
    rigid = Transform(rotation=tuple(q), translation=(0.3, -0.2, 1.1),
                      pivot=(0.0, 0.0, 0.0))
    mesh, hs = fixtures.cylinder_rings(transform_top=rigid)
    hs = make_handle_set([Handle(h.name, h.vertices, rigid)
                          for h in hs.handles], mesh.n_vertices)
    X_ref = mesh.vertices @ quat_to_matrix(q).T + np.array(rigid.translation)
    p = DeformationPipeline(mesh)
    worst = 0.0
    for beta in (0.0, 0.2, 0.7):
        X = p.solve(p.factorize(hs, beta), hs)
        worst = max(worst, np.abs(X - X_ref).max() / mesh.bbox_diag)
    check(f"rigid reproduction, beta in {{0, 0.2, 0.7}} "
          f"(worst rel err {worst:.2e})", worst < 1e-6)


def test_partition_of_unity_and_harmonic_residual():
    tetra = fixtures.tetrahedron()
    cyl = fixtures.cylinder(n_rings=50, n_seg=40)
    strip = fixtures.accordion()
    assert cyl.n_vertices == 2000
    cases = [
        ("tetrahedron", tetra, make_handle_set(
            [Handle("a", np.array([0])), Handle("b", np.array([2]))], 4)),
        ("cylinder-2k", cyl, make_handle_set(
            [Handle("bottom", np.flatnonzero(cyl.vertices[:, 2] < 1e-9)),
             Handle("top", np.flatnonzero(
                 np.abs(cyl.vertices[:, 2] - cyl.vertices[:, 2].max())
                 < 1e-9))], cyl.n_vertices)),
        ("folded-strip", strip, fixtures.accordion_fold()[1]),
    ]
    worst_pu, worst_res = 0.0, 0.0
    for name, mesh, hs in cases:
        p = DeformationPipeline(mesh)
        H = p.weights(hs).vertex_weights
        pu = np.abs(H.sum(axis=1) - 1.0).max()
        free = np.setdiff1d(np.arange(mesh.n_vertices), hs.all_vertices())
        res = np.abs((p.L @ H)[free]).max() / abs(p.L).sum(axis=1).max()
        worst_pu, worst_res = max(worst_pu, pu), max(worst_res, res)
    check(f"partition of unity ({worst_pu:.2e}) and harmonic residual "
          f"({worst_res:.2e})", worst_pu < 1e-8 and worst_res < 1e-8)


def test_pareto_property():
    mesh, hs = fixtures.cylinder_twist()
    p = DeformationPipeline(mesh)
    betas = (0.0, 0.003, 0.01, 0.1, 0.2, 0.4)
    ep, er = [], []
    for beta in betas:
        X = p.solve(p.factorize(hs, beta), hs)
        en = p.energies(hs, X, beta)
        ep.append(en.e_p)
        er.append(en.e_r)
    scale_p = max(ep) or 1.0
    scale_r = max(er) or 1.0
    ok = all(ep[i + 1] >= ep[i] - 1e-9 * scale_p for i in range(len(ep) - 1))
    ok = ok and all(er[i + 1] <= er[i] + 1e-9 * scale_r
                    for i in range(len(er) - 1))
    check("Pareto property along beta grid (E_P up, E_R down)", ok)


def test_artifact_suppression_direction():
    t0 = time.perf_counter()
    mesh, hs = fixtures.cylinder_twist()
    p = DeformationPipeline(mesh)
    r0 = p.deform(hs, 0.0)
    r2 = p.deform(hs, 0.2)
    dt = time.perf_counter() - t0
    assert dt < 5.0, f"took {dt:.2f}s"
    check(f"artifact suppression: max_iso {r0.max_iso:.3f} -> "
          f"{r2.max_iso:.3f}, max_conf {r0.max_conf:.3f} -> "
          f"{r2.max_conf:.3f} at beta=0.2",
          r2.max_iso < r0.max_iso and r2.max_conf < r0.max_conf)


def test_energy_magnitude_bound():
    worst = 0.0
    for name, p, hs in pipelines_for_all_scenarios():
        e0 = p.energies(hs, p.solve(p.factorize(hs, 0.0), hs), 0.0).e_p
        e2 = p.energies(hs, p.solve(p.factorize(hs, 0.2), hs), 0.0).e_p
        if e0 > 0:
            worst = max(worst, e2 / e0)
        else:
            assert e2 < 1e-18
    check(f"energy magnitude bound (worst ratio {worst:.2f})", worst <= 10.0)


def test_error_measure_oracle():
    rest = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    from harmonica.mesh import make_mesh
    mesh = make_mesh(rest, np.array([[0, 1, 2]]))
    errs = []
    for s1, s2 in ((2.0, 2.0), (3.0, 1.0)):
        X = rest * np.array([s1, s2, 1.0])
        sigma = metrics.singular_values(mesh, X)
        e_iso, e_conf, _, _ = metrics.iso_conf_errors(sigma)
        errs.append((e_iso[0], e_conf[0]))
    ok = (abs(errs[0][0] - 2.0) < 1e-12 and abs(errs[0][1]) < 1e-12
          and abs(errs[1][0] - 4.0) < 1e-12 and abs(errs[1][1] - 2.0) < 1e-12)
    check("error-measure oracle: sigma (2,2) -> (2,0), (3,1) -> (4,2)", ok)


def test_factorization_reuse():
    mesh, hs = fixtures.cylinder_twist(n_rings=14, n_seg=12)
    p = DeformationPipeline(mesh)
    angles = np.linspace(0.1, 1.5, 10)
    variants = []
    for a in angles:
        q = quat_from_axis_angle([0, 0, 1], float(a))
        variants.append(make_handle_set([
            hs.handles[0],
            Handle("twist", hs.handles[1].vertices,
                   Transform(rotation=tuple(q),
                             pivot=hs.handles[1].transform.pivot)),
        ], mesh.n_vertices))
    before = p.counters.factorizations
    cached = [p.deform(v, 0.2, use_cache=True).positions for v in variants]
    n_fact = p.counters.factorizations - before
    fresh_ok = all(
        np.array_equal(c, DeformationPipeline(mesh).deform(v, 0.2).positions)
        for c, v in zip(cached, variants))
    check(f"factorization reuse: 10 deforms, {n_fact} factorization(s), "
          f"bitwise identical to fresh", n_fact == 1 and fresh_ok)


def test_performance_sanity():
    mesh = fixtures.cylinder(n_rings=100, n_seg=100)
    assert mesh.n_vertices == 10000
    height = mesh.vertices[:, 2].max()
    hs = make_handle_set([
        Handle("bottom", np.flatnonzero(mesh.vertices[:, 2] < 1e-9)),
        Handle("top", np.flatnonzero(
            np.abs(mesh.vertices[:, 2] - height) < 1e-9),
            Transform(rotation=tuple(quat_from_axis_angle([0, 0, 1], 0.8)),
                      pivot=(0.0, 0.0, height))),
    ], mesh.n_vertices)
    p = DeformationPipeline(mesh)
    p.weights(hs)

    def time_factorize(beta):
        ctx = p.factorize(hs, beta)  # warm operator and system caches
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            ctx = p.factorize(hs, beta)
            best = min(best, time.perf_counter() - t0)
        return best, ctx

    t_f0, _ = time_factorize(0.0)
    t_f2, ctx = time_factorize(0.2)
    t0 = time.perf_counter()
    p.solve(ctx, hs)
    t_solve = time.perf_counter() - t0
    check(f"performance: 10k vertices, factorize {t_f2:.3f}s (<2s), "
          f"solve {t_solve:.3f}s (<0.2s), beta>0/beta=0 ratio "
          f"{t_f2 / t_f0:.2f} (<3)",
          t_f2 < 2.0 and t_solve < 0.2 and t_f2 <= 3.0 * t_f0)
