"""Geometry of surfaces in the unit 3-sphere S^3 in R^4.

Conventions: the unit normal nu is tangent to S^3 and the second fundamental
form is h_ij = -<d_i d_j F, nu>, so a small geodesic sphere has positive
curvature with respect to its outward normal.  Mean curvature is the average
of the principal curvatures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateImmersion, DegenerateMesh, PoleOnSurface

#: tolerance for the unit-vector invariants of SpherePoint
UNIT_TOL = 1e-12
DEFAULT_STEP = 1e-4


@dataclass(frozen=True)
class SpherePoint:
    """A point F(x) of a surface in S^3 together with its unit normal nu(x)."""

    position: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        if p.shape != (4,) or n.shape != (4,):
            raise ValueError("position and normal must be 4-vectors")
        if abs(np.linalg.norm(p) - 1.0) > UNIT_TOL or abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ValueError("position and normal must be unit vectors")
        if abs(p @ n) > UNIT_TOL:
            raise ValueError("normal must be orthogonal to position")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "normal", n)


@dataclass
class SurfaceMesh:
    """Grid samples F(u_i, v_j) of a parametrised surface in S^3.

    ``positions`` and ``normals`` have shape (nu, nv, 4); ``lambda1`` and
    ``lambda2`` hold the principal curvatures (lambda1 >= lambda2) at each
    node.  Grid parameters are ``u = u_extent * i / nu`` (likewise for v)
    when the direction is closed.  ``parametrization`` optionally keeps the
    smooth map (u, v) -> F the nodes were sampled from, and ``profile`` the
    rotational profile of a generated CMC torus.
    """

    positions: np.ndarray
    normals: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    u: np.ndarray
    v: np.ndarray
    u_extent: float
    v_extent: float
    closed_u: bool
    closed_v: bool
    parametrization: Optional[Callable[[Any, Any], np.ndarray]] = None
    profile: Any = None
    meta: dict = field(default_factory=dict)

    @property
    def nu(self) -> int:
        return self.positions.shape[0]

    @property
    def nv(self) -> int:
        return self.positions.shape[1]

    @property
    def curvatures(self) -> np.ndarray:
        return np.stack([self.lambda1, self.lambda2], axis=-1)

    @property
    def size(self) -> int:
        return self.nu * self.nv

    def point(self, i: int, j: int) -> SpherePoint:
        return SpherePoint(self.positions[i, j], self.normals[i, j])

    def flat_index(self, index) -> tuple[int, int]:
        if np.ndim(index) == 0:
            return divmod(int(index), self.nv)
        i, j = index
        return int(i), int(j)

    def spacing(self) -> float:
        """Largest chord between grid neighbours (wrap-around included if closed)."""
        P = self.positions
        du = np.linalg.norm(np.diff(P, axis=0), axis=-1)
        dv = np.linalg.norm(np.diff(P, axis=1), axis=-1)
        parts = [du.max() if du.size else 0.0, dv.max() if dv.size else 0.0]
        if self.closed_u:
            parts.append(np.linalg.norm(P[0] - P[-1], axis=-1).max())
        if self.closed_v:
            parts.append(np.linalg.norm(P[:, 0] - P[:, -1], axis=-1).max())
        return float(max(parts))


# ---------------------------------------------------------------------------
# Z function and interior ball curvature


def z_value(phi: float, x: SpherePoint, y: SpherePoint) -> float:
    """Z(phi, x, y) = phi (1 - F(x).F(y)) + F(y).nu(x).

    Non-negative for all y exactly when a geodesic ball of boundary
    curvature phi inside the enclosed region touches the surface at x.
    """
    return float(phi * (1.0 - x.position @ y.position) + y.position @ x.normal)


def z_values(phi, Fx, nux, Fy):
    """Vectorised Z with 1 - F(x).F(y) evaluated as |F(x) - F(y)|^2 / 2."""
    Fx, nux, Fy = np.asarray(Fx), np.asarray(nux), np.asarray(Fy)
    gap = 0.5 * np.sum((Fx - Fy) ** 2, axis=-1)
    return phi * gap + np.sum(Fy * nux, axis=-1)


def exclusion_gap(mesh: SurfaceMesh) -> float:
    """Threshold on 1 - F(x).F(y) below which y counts as a neighbour of x."""
    return (2.0 * mesh.spacing()) ** 2


def interior_ball_curvature(mesh: SurfaceMesh, index, gap_min: Optional[float] = None) -> float:
    """Sampled interior ball curvature at node ``index``.

    max(lambda1(x), sup_y -F(y).nu(x) / (1 - F(x).F(y))) over all mesh nodes
    y outside the neighbourhood 1 - F(x).F(y) < (2 * spacing)^2 of x.
    """
    i, j = mesh.flat_index(index)
    Fx = mesh.positions[i, j]
    nx = mesh.normals[i, j]
    P = mesh.positions.reshape(-1, 4)
    gap = 0.5 * np.sum((P - Fx) ** 2, axis=-1)
    if gap_min is None:
        gap_min = exclusion_gap(mesh)
    far = gap >= gap_min
    if not far.any():
        raise DegenerateMesh("every mesh node lies inside the exclusion neighbourhood")
    quotient = -(P[far] @ nx) / gap[far]
    return float(max(mesh.lambda1[i, j], quotient.max()))


# ---------------------------------------------------------------------------
# Curvature from first and second derivatives


class Curvatures(NamedTuple):
    lambda1: np.ndarray
    lambda2: np.ndarray
    H: np.ndarray
    normal: np.ndarray


def cross4(a, b, c):
    """Vector n orthogonal to a, b, c in R^4 with det[n, a, b, c] = |n|^2."""
    M = np.stack(np.broadcast_arrays(a, b, c), axis=-2)  # (..., 3, 4)
    cols = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
    comps = [(-1) ** k * np.linalg.det(M[..., cols[k]]) for k in range(4)]
    return np.stack(comps, axis=-1)


def shape_from_derivatives(F, Fu, Fv, Fuu, Fuv, Fvv, orientation=None, singular_tol=1e-12) -> Curvatures:
    """Principal curvatures from first and second partials of F.

    ``orientation`` selects the normal: None flips it so that H >= 0;
    otherwise an array of reference normals the result is aligned with.
    """
    n = cross4(F, Fu, Fv)
    nn = np.linalg.norm(n, axis=-1, keepdims=True)
    E = np.sum(Fu * Fu, axis=-1)
    Fm = np.sum(Fu * Fv, axis=-1)
    G = np.sum(Fv * Fv, axis=-1)
    det_g = E * G - Fm * Fm
    if np.any(det_g <= singular_tol * E * G) or np.any(nn == 0):
        raise DegenerateImmersion("first fundamental form is singular")
    n = n / nn
    if orientation is not None:
        sign = np.where(np.sum(n * np.asarray(orientation), axis=-1) < 0, -1.0, 1.0)
        n = n * sign[..., None]
    L = -np.sum(Fuu * n, axis=-1)
    M = -np.sum(Fuv * n, axis=-1)
    N = -np.sum(Fvv * n, axis=-1)
    Hm = (G * L - 2.0 * Fm * M + E * N) / (2.0 * det_g)
    Kx = (L * N - M * M) / det_g
    if orientation is None:
        flip = Hm < 0
        Hm = np.where(flip, -Hm, Hm)
        n = np.where(flip[..., None], -n, n)
    root = np.sqrt(np.maximum(Hm * Hm - Kx, 0.0))
    return Curvatures(Hm + root, Hm - root, Hm, n)


def _offsets(x, h):
    xp, xm = x + h, x - h
    return xp, xm, xp - x, x - xm


def principal_curvatures(
    parametrization, u, v, step: float = DEFAULT_STEP, orientation=None, richardson: bool = False
) -> Curvatures:
    """Principal curvatures of ``parametrization`` at (u, v) by central differences.

    The stencil uses the exactly representable offsets (u + h) - u and
    u - (u - h), so round-off in the grid points does not leak into the
    second differences.  Accepts scalar or array (u, v); returns
    ``Curvatures(lambda1, lambda2, H, normal)`` with lambda1 >= lambda2.

    The scheme is second order.  At step 1e-4 round-off in F limits the
    curvature error to a few 1e-8; ``richardson=True`` combines steps h and
    2h into a fourth-order estimate, which at step ~1e-3 reaches ~1e-9.
    """
    if richardson:
        fine = principal_curvatures(parametrization, u, v, step, orientation)
        coarse = principal_curvatures(parametrization, u, v, 2.0 * step, fine.normal)
        l1, l2 = ((4.0 * np.asarray(a) - np.asarray(b)) / 3.0 for a, b in zip(fine[:2], coarse[:2]))
        res = Curvatures(l1, l2, 0.5 * (l1 + l2), fine.normal)
        if np.ndim(l1) == 0:
            return Curvatures(float(l1), float(l2), float(res.H), fine.normal)
        return res
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    up, um, hup, hum = _offsets(u, step)
    vp, vm, hvp, hvm = _offsets(v, step)
    f = parametrization
    F0 = f(u, v)
    Fup, Fum = f(up, v), f(um, v)
    Fvp, Fvm = f(u, vp), f(u, vm)
    Fpp, Fpm = f(up, vp), f(up, vm)
    Fmp, Fmm = f(um, vp), f(um, vm)
    hup, hum, hvp, hvm = (x[..., None] for x in (hup, hum, hvp, hvm))
    Fu = (Fup - Fum) / (hup + hum)
    Fv = (Fvp - Fvm) / (hvp + hvm)
    Fuu = 2.0 * ((Fup - F0) / hup - (F0 - Fum) / hum) / (hup + hum)
    Fvv = 2.0 * ((Fvp - F0) / hvp - (F0 - Fvm) / hvm) / (hvp + hvm)
    Fuv = (Fpp - Fpm - Fmp + Fmm) / ((hup + hum) * (hvp + hvm))
    res = shape_from_derivatives(F0, Fu, Fv, Fuu, Fuv, Fvv, orientation=orientation)
    if res.H.ndim == 0:
        return Curvatures(float(res.lambda1), float(res.lambda2), float(res.H), res.normal)
    return res


# ---------------------------------------------------------------------------
# Derivatives of sampled grid data


def _spectral(values, axis, length, order):
    n = values.shape[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0 and order % 2 == 1:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    mult = ((1j * k) ** order).reshape(shape)
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * mult, axis=axis))


def grid_derivative(values, mesh: SurfaceMesh, axis: int, order: int = 1):
    """d^order/du^order (axis 0) or d/dv (axis 1) of node data.

    Spectral differentiation along closed directions, second-order finite
    differences (one-sided at the ends) along open ones.
    """
    closed = mesh.closed_u if axis == 0 else mesh.closed_v
    if closed:
        length = mesh.u_extent if axis == 0 else mesh.v_extent
        return _spectral(np.asarray(values, dtype=float), axis, length, order)
    coords = mesh.u if axis == 0 else mesh.v
    out = np.asarray(values, dtype=float)
    for _ in range(order):
        out = np.gradient(out, coords, axis=axis, edge_order=2)
    return out


def grid_curvatures(mesh: SurfaceMesh, positions=None) -> Curvatures:
    """Principal curvatures computed from the node positions alone."""
    P = mesh.positions if positions is None else positions
    Fu = grid_derivative(P, mesh, 0)
    Fv = grid_derivative(P, mesh, 1)
    Fuu = grid_derivative(P, mesh, 0, 2)
    Fvv = grid_derivative(P, mesh, 1, 2)
    Fuv = grid_derivative(Fu, mesh, 1)
    return shape_from_derivatives(P, Fu, Fv, Fuu, Fuv, Fvv, orientation=mesh.normals)


# ---------------------------------------------------------------------------
# Stereographic projection


@dataclass
class ProjectedMesh:
    vertices: np.ndarray  # (nu * nv, 3)
    faces: np.ndarray  # (nfaces, 3), zero-based


def complement_basis(pole) -> np.ndarray:
    """Orthonormal basis (4, 3) of the complement of ``pole``.

    Gram-Schmidt on the standard basis with the vector most aligned with the
    pole dropped, so pole e4 gives (e1, e2, e3).
    """
    p = np.asarray(pole, dtype=float)
    drop = int(np.argmax(np.abs(p)))
    basis = []
    for k in range(4):
        if k == drop:
            continue
        e = np.zeros(4)
        e[k] = 1.0
        e -= (e @ p) * p
        for b in basis:
            e -= (e @ b) * b
        basis.append(e / np.linalg.norm(e))
    return np.stack(basis, axis=1)


def grid_faces(nu: int, nv: int, closed_u: bool, closed_v: bool) -> np.ndarray:
    """Triangles (two per quad) of a structured nu x nv grid."""
    iu = np.arange(nu if closed_u else nu - 1)
    iv = np.arange(nv if closed_v else nv - 1)
    I, J = np.meshgrid(iu, iv, indexing="ij")
    I2, J2 = (I + 1) % nu, (J + 1) % nv
    a = I * nv + J
    b = I2 * nv + J
    c = I2 * nv + J2
    d = I * nv + J2
    tris = np.stack([np.stack([a, b, c], -1), np.stack([a, c, d], -1)], axis=-2)
    return tris.reshape(-1, 3)


def stereographic_project(mesh: SurfaceMesh, pole, min_angle: float = 1e-3) -> ProjectedMesh:
    """Project the mesh to R^3 from ``pole`` onto the hyperplane orthogonal to it.

    y = B^T x / (1 - x.p) with B an orthonormal basis of p's complement.
    Raises :class:`PoleOnSurface` if a node is within ``min_angle`` radians
    of the pole.
    """
    p = np.asarray(pole, dtype=float)
    p = p / np.linalg.norm(p)
    X = mesh.positions.reshape(-1, 4)
    chord = np.linalg.norm(X - p, axis=-1)
    angle = 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    if angle.min() < min_angle:
        raise PoleOnSurface(f"pole is {angle.min():.3g} rad from a mesh node (minimum {min_angle})")
    B = complement_basis(p)
    # 1 - x.p = |x - p|^2 / 2 on the unit sphere
    verts = (X @ B) / (0.5 * chord**2)[:, None]
    return ProjectedMesh(verts, grid_faces(mesh.nu, mesh.nv, mesh.closed_u, mesh.closed_v))
