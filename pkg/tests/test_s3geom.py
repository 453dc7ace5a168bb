import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cmctori import (
    DegenerateImmersion,
    DegenerateMesh,
    PoleOnSurface,
    SpherePoint,
    SurfaceMesh,
    generate_clifford,
    interior_ball_curvature,
    principal_curvatures,
    stereographic_project,
    z_value,
)
from cmctori.s3geom import cross4, grid_curvatures, grid_faces, z_values

from conftest import geodesic_sphere_mesh


def unit_pair(a, b):
    p = a / np.linalg.norm(a)
    n = b - (b @ p) * p
    assume(np.linalg.norm(n) > 1e-3)
    return p, n / np.linalg.norm(n)


vec4 = arrays(np.float64, 4, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1)


def sphere_surface(rho, n_theta=24, n_phi=48):
    T, P, F, nu = geodesic_sphere_mesh(rho, n_theta, n_phi)
    k = np.full(T.shape, 1.0 / math.tan(rho))
    return SurfaceMesh(F, nu, k, k.copy(), T[:, 0], P[0], math.pi, 2 * math.pi, False, True)


def sphere_map(rho):
    def F(t, p):
        t, p = np.broadcast_arrays(np.asarray(t, float), np.asarray(p, float))
        w = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
        return np.concatenate([math.sin(rho) * w, np.full(t.shape + (1,), math.cos(rho))], axis=-1)

    return F


def test_spherepoint_validation():
    SpherePoint([1, 0, 0, 0], [0, 1, 0, 0])
    with pytest.raises(ValueError):
        SpherePoint([1, 0, 0, 1e-5], [0, 1, 0, 0])
    with pytest.raises(ValueError):
        SpherePoint([1, 0, 0, 0], [1e-6, 1, 0, 0] / np.linalg.norm([1e-6, 1, 0, 0]))
    with pytest.raises(ValueError):
        SpherePoint([1, 0, 0], [0, 1, 0])


@given(vec4, vec4, st.floats(0.01, 100.0))
@settings(max_examples=100)
def test_z_vanishes_on_the_diagonal(a, b, phi):
    p, n = unit_pair(a, b)
    x = SpherePoint(p, n)
    assert abs(z_value(phi, x, x)) <= 8 * np.finfo(float).eps * (1 + phi)


@given(vec4, vec4, st.floats(0.01, 100.0))
@settings(max_examples=50)
def test_z_antipodal(a, b, phi):
    p, n = unit_pair(a, b)
    x, y = SpherePoint(p, n), SpherePoint(-p, n)
    assert z_value(phi, x, y) == pytest.approx(2 * phi, rel=1e-14)


def test_z_is_not_symmetric():
    x = SpherePoint([1, 0, 0, 0], [0, 1, 0, 0])
    y = SpherePoint([0, 1, 0, 0], [0, 0, 1, 0])
    assert z_value(1.0, x, y) != z_value(1.0, y, x)


@pytest.mark.parametrize("rho", [0.3, 1.0, 1.4])
def test_z_vanishes_on_geodesic_sphere(rho):
    _, _, F, nu = geodesic_sphere_mesh(rho, 20, 30)
    F, nu = F.reshape(-1, 4), nu.reshape(-1, 4)
    phi = 1.0 / math.tan(rho)
    Z = z_values(phi, F[:, None, :], nu[:, None, :], F[None, :, :])
    assert np.abs(Z).max() < 1e-10
    x, y = SpherePoint(F[0], nu[0]), SpherePoint(F[17], nu[17])
    assert z_value(phi, x, y) == pytest.approx(Z[0, 17], abs=1e-15)


@pytest.mark.parametrize("rho", [0.4, 1.0])
def test_ball_curvature_on_geodesic_sphere(rho):
    mesh = sphere_surface(rho)
    for k in (0, 57, 300, mesh.size - 1):
        assert interior_ball_curvature(mesh, k) == pytest.approx(1 / math.tan(rho), abs=1e-9)


def test_ball_curvature_minimal_clifford():
    mesh = generate_clifford(1 / math.sqrt(2), 64, 64)
    vals = [interior_ball_curvature(mesh, k) for k in range(0, mesh.size, 397)]
    np.testing.assert_allclose(vals, 1.0, atol=1e-12)


def test_ball_curvature_at_least_lambda1(small_torus, rng):
    for k in rng.choice(small_torus.size, 20, replace=False):
        i, j = small_torus.flat_index(k)
        assert interior_ball_curvature(small_torus, (i, j)) >= small_torus.lambda1[i, j]


def test_ball_curvature_detects_a_dent():
    mesh = generate_clifford(1 / math.sqrt(2), 64, 64)
    # push one node into the enclosed region (against the normal): balls
    # touching nearby nodes must shrink
    P = mesh.positions.copy()
    target = P[32, 32] - 0.2 * mesh.normals[32, 32]
    P[32, 32] = target / np.linalg.norm(target)
    dented = SurfaceMesh(P, mesh.normals, mesh.lambda1, mesh.lambda2, mesh.u, mesh.v,
                         mesh.u_extent, mesh.v_extent, True, True)
    assert max(interior_ball_curvature(dented, (i, 32)) for i in range(20, 45)) > 1.1


def test_ball_curvature_degenerate_mesh():
    mesh = generate_clifford(1 / math.sqrt(2), 8, 8)
    with pytest.raises(DegenerateMesh):
        interior_ball_curvature(mesh, 0, gap_min=10.0)


@pytest.mark.parametrize(
    "r, expected",
    [(0.5, (math.sqrt(3), -1 / math.sqrt(3), 1 / math.sqrt(3))), (1 / math.sqrt(2), (1.0, -1.0, 0.0))],
)
def test_principal_curvatures_clifford(r, expected):
    mesh = generate_clifford(r, 16, 16)
    res = principal_curvatures(mesh.parametrization, 0.37, 1.9)
    assert (res.lambda1, res.lambda2, res.H) == pytest.approx(expected, abs=1e-6)
    fine = principal_curvatures(mesh.parametrization, 0.37, 1.9, step=1e-3, richardson=True)
    assert (fine.lambda1, fine.lambda2, fine.H) == pytest.approx(expected, abs=1e-8)


def test_principal_curvatures_great_sphere():
    res = principal_curvatures(sphere_map(math.pi / 2), 1.1, 0.4)
    assert (res.lambda1, res.lambda2, res.H) == pytest.approx((0, 0, 0), abs=1e-7)


@pytest.mark.parametrize("rho", [0.3, 0.9])
def test_principal_curvatures_geodesic_sphere(rho):
    F = sphere_map(rho)
    ref = np.array([math.cos(rho) * math.sin(1.0), 0, math.cos(rho) * math.cos(1.0), -math.sin(rho)])
    res = principal_curvatures(F, 1.0, 0.0, orientation=ref)
    assert (res.lambda1, res.lambda2) == pytest.approx((1 / math.tan(rho),) * 2, abs=1e-6)


def test_second_order_convergence():
    F = generate_clifford(0.5, 16, 16).parametrization
    exact = math.sqrt(3)
    errs = [abs(principal_curvatures(F, 0.3, 0.8, step=h).lambda1 - exact) for h in (2e-2, 1e-2, 5e-3)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.5 < q < 4.5 for q in ratios)


def test_vectorised_matches_scalar():
    F = generate_clifford(0.4, 16, 16).parametrization
    u = np.array([0.1, 1.2, 3.3])
    v = np.array([2.0, 0.5, 4.1])
    res = principal_curvatures(F, u, v)
    for k in range(3):
        s = principal_curvatures(F, u[k], v[k])
        assert s.H == pytest.approx(res.H[k], abs=1e-12)


def test_degenerate_immersion():
    def F(u, v):
        u = np.asarray(u, float) + 0 * np.asarray(v, float)
        return np.stack([np.cos(u), np.sin(u), 0 * u, 0 * u], axis=-1)

    with pytest.raises(DegenerateImmersion):
        principal_curvatures(F, 0.2, 0.3)


def test_cross4_is_orthogonal(rng):
    a, b, c = rng.standard_normal((3, 5, 4))
    n = cross4(a, b, c)
    for w in (a, b, c):
        np.testing.assert_allclose(np.sum(n * w, -1), 0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(np.stack([n, a, b, c], -2)), np.sum(n * n, -1), rtol=1e-10)


def test_grid_curvatures_on_clifford():
    mesh = generate_clifford(0.5, 32, 32)
    res = grid_curvatures(mesh)
    np.testing.assert_allclose(res.H, 1 / math.sqrt(3), atol=1e-11)
    np.testing.assert_allclose(res.lambda1, math.sqrt(3), atol=1e-10)


def test_projection_of_clifford_is_finite():
    mesh = generate_clifford(1 / math.sqrt(2), 32, 32)
    proj = stereographic_project(mesh, [0, 0, 0, 1])
    assert proj.vertices.shape == (32 * 32, 3)
    assert np.all(np.isfinite(proj.vertices))
    assert proj.faces.shape == (2 * 32 * 32, 3)


def test_pole_on_surface():
    mesh = generate_clifford(0.5, 16, 16)
    with pytest.raises(PoleOnSurface):
        stereographic_project(mesh, mesh.positions[3, 5])


def fit_sphere(X):
    A = np.column_stack([2 * X, np.ones(len(X))])
    sol, *_ = np.linalg.lstsq(A, np.sum(X * X, axis=1), rcond=None)
    center = sol[:3]
    radius = math.sqrt(sol[3] + center @ center)
    return center, radius


def test_projection_maps_great_sphere_to_round_sphere():
    n = np.array([0.0, 0.0, 0.6, 0.8])
    basis = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0.8, -0.6]], dtype=float)
    T, P, _, _ = geodesic_sphere_mesh(math.pi / 2, 20, 40)
    w = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    F = w @ basis
    nrm = np.broadcast_to(n, F.shape).copy()
    zero = np.zeros(T.shape)
    mesh = SurfaceMesh(F, nrm, zero, zero, T[:, 0], P[0], math.pi, 2 * math.pi, False, True)
    X = stereographic_project(mesh, [0, 0, 0, 1]).vertices
    center, radius = fit_sphere(X)
    assert np.abs(np.linalg.norm(X - center, axis=1) - radius).max() < 1e-9


def test_grid_faces_counts():
    assert grid_faces(4, 5, True, True).shape == (40, 3)
    assert grid_faces(4, 5, False, True).shape == (30, 3)
    assert grid_faces(4, 5, False, False).shape == (24, 3)
    assert grid_faces(4, 5, True, True).max() == 19
