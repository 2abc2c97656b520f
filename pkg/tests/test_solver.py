import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from harmonica import fixtures
from harmonica.guidance import (Handle, Transform, constrained_positions,
                                make_handle_set, quat_from_axis_angle,
                                quat_to_matrix)
from harmonica.pipeline import DeformationPipeline
from harmonica.solver import Counters, SolverError, factorize, solve, \
    total_energies


@pytest.fixture(scope="module")
def twist():
    mesh, handles = fixtures.cylinder_twist(n_rings=14, n_seg=12)
    return DeformationPipeline(mesh), handles


def test_identity_reproduces_rest_pose():
    mesh, hs = fixtures.cylinder_rings(n_rings=8, n_seg=8)
    p = DeformationPipeline(mesh)
    for beta in (0.0, 0.2):
        X = p.solve(p.factorize(hs, beta), hs)
        assert np.abs(X - mesh.vertices).max() < 1e-6 * mesh.bbox_diag


def test_rigid_reproduction_all_betas():
    q = quat_from_axis_angle([1, 2, 0.5], 1.1)
    R = quat_to_matrix(q)
    pivot = (0.3, -0.2, 1.0)
    d = np.array([0.5, 1.5, -0.25])
    tr = Transform(rotation=tuple(q), translation=tuple(d), pivot=pivot)
    mesh = fixtures.cylinder(n_rings=8, n_seg=8)
    height = mesh.vertices[:, 2].max()
    hs = make_handle_set([
        Handle("b", np.flatnonzero(mesh.vertices[:, 2] < 1e-9), tr),
        Handle("t", np.flatnonzero(np.abs(mesh.vertices[:, 2] - height) < 1e-9), tr),
    ], mesh.n_vertices)
    p = DeformationPipeline(mesh)
    expect = (mesh.vertices - pivot) @ R.T + pivot + d
    for beta in (0.0, 0.2, 0.7):
        for kind in ("flat", "curved"):
            X = p.solve(p.factorize(hs, beta, kind), hs)
            assert np.abs(X - expect).max() < 1e-6 * mesh.bbox_diag


def test_beta_zero_matches_unregularized_normal_equations(twist):
    p, hs = twist
    X = p.solve(p.factorize(hs, 0.0), hs)
    # independent assembly of the plain area-weighted normal equations
    K = (p.G.T @ p.A @ p.G).tocsr()
    Z = p.guidance(hs).Z
    pos = constrained_positions(hs, p.mesh)
    constrained = np.sort(hs.all_vertices())
    free = np.setdiff1d(np.arange(p.mesh.n_vertices), constrained)
    X_c = np.array([pos[int(v)] for v in constrained])
    rhs = (p.A @ p.G[:, free]).T @ Z - K[free][:, constrained] @ X_c
    X_f = spsolve(sp.csc_matrix(K[free][:, free]), rhs)
    assert np.abs(X[free] - X_f).max() < 1e-9 * p.mesh.bbox_diag


def test_repeated_solve_is_bitwise_deterministic(twist):
    p, hs = twist
    ctx = p.factorize(hs, 0.2)
    X1 = p.solve(ctx, hs)
    X2 = p.solve(ctx, hs)
    ctx_fresh = p.factorize(hs, 0.2)
    X3 = p.solve(ctx_fresh, hs)
    assert np.array_equal(X1, X2)
    assert np.array_equal(X1, X3)


def test_constrained_rows_exact(twist):
    p, hs = twist
    ctx = p.factorize(hs, 0.3)
    pos = constrained_positions(hs, p.mesh)
    X = p.solve(ctx, hs)
    for v, target in pos.items():
        assert np.array_equal(X[v], target)


def test_partition_mismatch_rejected(twist):
    p, hs = twist
    ctx = p.factorize(hs, 0.1)
    Z = p.guidance(hs)
    with pytest.raises(SolverError, match="partition"):
        solve(ctx, Z, {0: np.zeros(3)})


def test_unconstrained_component_fails():
    m1 = fixtures.tetrahedron()
    V = np.vstack([m1.vertices, m1.vertices + np.array([10.0, 0, 0])])
    T = np.vstack([m1.triangles, m1.triangles + 4])
    from harmonica.mesh import make_mesh
    mesh = make_mesh(V, T)
    p = DeformationPipeline(mesh)
    hs = make_handle_set([Handle("a", np.array([0, 1]))], mesh.n_vertices)
    with pytest.raises(SolverError):
        p.factorize(hs, 0.2)


def test_minimal_free_set():
    mesh = fixtures.tetrahedron()
    hs = make_handle_set([Handle("a", np.array([0, 1, 2]))], mesh.n_vertices)
    p = DeformationPipeline(mesh)
    X = p.solve(p.factorize(hs, 0.2), hs)
    assert np.abs(X - mesh.vertices).max() < 1e-9


def test_factorization_counter(twist):
    p, hs = twist
    c = Counters()
    W = p.norm(0.2, "curved")
    ctx = factorize(p.mesh, p.G, W, hs, c)
    Z = p.guidance(hs)
    pos = constrained_positions(hs, p.mesh)
    for _ in range(3):
        solve(ctx, Z, pos, c)
    assert c.factorizations == 1
    assert c.solves == 3


# ---------------------------------------------------------------- energies

def test_energies_zero_at_rest():
    mesh, hs = fixtures.cylinder_rings(n_rings=6, n_seg=6)
    p = DeformationPipeline(mesh)
    en = p.energies(hs, np.asarray(mesh.vertices), 0.2)
    assert en.e_p == pytest.approx(0.0, abs=1e-18)
    assert en.e_r == pytest.approx(0.0, abs=1e-18)


def test_energies_nonnegative_and_combined(twist):
    p, hs = twist
    beta = 0.3
    X = p.solve(p.factorize(hs, beta), hs)
    en = p.energies(hs, X, beta)
    assert en.e_p >= 0 and en.e_r >= 0
    assert en.e_beta == pytest.approx((1 - beta) * en.e_p + beta * en.e_r)


def test_pareto_family(twist):
    p, hs = twist
    betas = [0.0, 0.1, 0.2, 0.4]
    rows = []
    for b in betas:
        X = p.solve(p.factorize(hs, b), hs)
        rows.append(p.energies(hs, X, b))
    for prev, cur in zip(rows, rows[1:]):
        scale = max(prev.e_r, cur.e_r, 1.0)
        assert cur.e_r <= prev.e_r + 1e-9 * scale
        scale = max(prev.e_p, cur.e_p, 1.0)
        assert cur.e_p >= prev.e_p - 1e-9 * scale


def test_first_order_stationarity(twist):
    p, hs = twist
    beta = 0.25
    ctx = p.factorize(hs, beta)
    X = p.solve(ctx, hs)
    base = p.energies(hs, X, beta).e_beta
    rng = np.random.default_rng(9)
    free = ctx.free
    for _ in range(5):
        delta = np.zeros_like(X)
        delta[free] = rng.standard_normal((len(free), 3))
        delta /= np.linalg.norm(delta)
        perturbed = p.energies(hs, X + 1e-4 * delta, beta).e_beta
        assert perturbed >= base - 1e-9


def test_energy_magnitude_stays_bounded(twist):
    p, hs = twist
    X0 = p.solve(p.factorize(hs, 0.0), hs)
    X2 = p.solve(p.factorize(hs, 0.2), hs)
    e0 = p.energies(hs, X0, 0.0).e_p
    e2 = p.energies(hs, X2, 0.0).e_p
    assert e2 <= 10.0 * e0
