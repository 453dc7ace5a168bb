"""Mesh synthesis, verification and file formats for CMC tori in S^3.

A rotational torus with profile (r(u), theta(u)) is

    F(u, v) = (r cos v, r sin v, rho cos theta, rho sin theta),  rho = sqrt(1 - r^2),

with u the unit-speed profile parameter.  Writing e_r = (cos v, sin v, 0, 0),
e_rho = (0, 0, cos theta, sin theta) and e_theta = (0, 0, -sin theta, cos theta),
the unit normal is

    nu = lambda1 r e_r - (lambda1 r^2 / rho) e_rho - (r' / rho) e_theta,

orthogonal to F and F_u by theta' = r lambda1 / rho^2, unit by
(r')^2 + r^2 (1 + lambda1^2) = 1, and oriented so the mean curvature is +H.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .config import Config
from .errors import ClosureFailure
from .profile import ProfileSolution, TorusParams, solve_profile
from .s3geom import (
    SurfaceMesh,
    exclusion_gap,
    grid_curvatures,
    grid_derivative,
    principal_curvatures,
    stereographic_project,
    z_values,
)

CSV_HEADER = "u,v,x1,x2,x3,x4,n1,n2,n3,n4,lambda1,lambda2"
PROFILE_HEADER = "u,g,r,rprime,mu,lambda1,lambda2,theta"
MIN_GRID = 8
# a direction counts as closed on import when the wrap-around chord is within
# this relative margin of the largest neighbour chord
CLOSURE_MARGIN = 0.01


# ---------------------------------------------------------------------------
# Generators


def _check_grid(nu, nv):
    if int(nu) < MIN_GRID or int(nv) < MIN_GRID:
        raise ValueError(f"grid must be at least {MIN_GRID} x {MIN_GRID}, got {nu} x {nv}")
    return int(nu), int(nv)


def torus_map(sol: ProfileSolution):
    """The parametrization (u, v) -> F(u, v) of the rotational torus of ``sol``."""

    def F(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        r = sol.r(u)
        rho = np.sqrt(sol.one_minus_x(u))
        th = sol.theta(u)
        return np.stack([r * np.cos(v), r * np.sin(v), rho * np.cos(th), rho * np.sin(th)], axis=-1)

    return F


def torus_normal(sol: ProfileSolution, u, v):
    """Unit normal of the rotational torus at (u, v); mean curvature +H."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    x = sol.x(u)
    r = np.sqrt(x)
    rho = np.sqrt(sol.one_minus_x(u))
    lam = sol.lambda1(u)
    rp = sol.rprime(u)
    th = sol.theta(u)
    c, s = np.cos(th), np.sin(th)
    a = -lam * x / rho
    b = -rp / rho
    return np.stack(
        [lam * r * np.cos(v), lam * r * np.sin(v), a * c - b * s, a * s + b * c], axis=-1
    )


def generate_torus(
    H: float,
    C: float,
    m: int,
    nu: Optional[int] = None,
    nv: Optional[int] = None,
    closure_tol: float = 1e-8,
) -> SurfaceMesh:
    """Sample the rotational CMC torus (H, C) over m profile periods.

    The grid is u_i = i m T / nu, v_j = 2 pi j / nv (both endpoints excluded).
    Raises :class:`ClosureFailure` when |theta(m T) - 2 pi| > ``closure_tol``;
    the open mesh (``closed_u`` False) is attached to the exception.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    nu = 128 * m if nu is None else nu
    nv = 256 if nv is None else nv
    nu, nv = _check_grid(nu, nv)
    sol = solve_profile(TorusParams(H, C))
    extent = m * sol.T
    u = extent * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    F = torus_map(sol)
    positions = F(U, V)
    normals = torus_normal(sol, U, V)
    mu = sol.mu(U)
    residual = abs(m * sol.theta_period - 2.0 * np.pi)
    closed = residual <= closure_tol
    mesh = SurfaceMesh(
        positions=positions,
        normals=normals,
        lambda1=sol.params.H + mu,
        lambda2=sol.params.H - mu,
        u=u,
        v=v,
        u_extent=extent,
        v_extent=2.0 * np.pi,
        closed_u=bool(closed),
        closed_v=True,
        parametrization=F,
        profile=sol,
        meta={"kind": "torus", "H": sol.params.H, "C": sol.params.C, "m": m, "closure_residual": residual},
    )
    if not closed:
        raise ClosureFailure(
            f"theta(m T) - 2 pi = {m * sol.theta_period - 2.0 * np.pi:.3e} for m={m}, C={C!r}",
            mesh=mesh,
            residual=residual,
        )
    return mesh


def clifford_map(r: float):
    """(u, v) -> (r cos v, r sin v, rho cos u, rho sin u)."""
    rho = math.sqrt(1.0 - r * r)

    def F(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return np.stack([r * np.cos(v), r * np.sin(v), rho * np.cos(u), rho * np.sin(u)], axis=-1)

    return F


def generate_clifford(r: float, nu: int = 256, nv: int = 256) -> SurfaceMesh:
    """Clifford torus x1^2 + x2^2 = r^2 sampled on a closed nu x nv grid.

    The normal is chosen so the mean curvature (1 - 2 r^2) / (2 r rho) is
    reported with non-negative sign; for r > 1/sqrt(2) it points the other way.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r!r}")
    nu, nv = _check_grid(nu, nv)
    rho = math.sqrt(1.0 - r * r)
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    F = clifford_map(r)
    positions = F(U, V)
    sign = 1.0 if r * r <= 0.5 else -1.0
    zero = np.zeros_like(U)
    normals = sign * np.stack([rho * np.cos(V), rho * np.sin(V), -r * np.cos(U), -r * np.sin(U)], axis=-1)
    k1, k2 = sign * rho / r, -sign * r / rho
    l1, l2 = max(k1, k2), min(k1, k2)
    return SurfaceMesh(
        positions=positions,
        normals=normals,
        lambda1=zero + l1,
        lambda2=zero + l2,
        u=u,
        v=v,
        u_extent=2.0 * np.pi,
        v_extent=2.0 * np.pi,
        closed_u=True,
        closed_v=True,
        parametrization=F,
        meta={"kind": "clifford", "r": r, "H": 0.5 * (l1 + l2)},
    )


def perturb_along_normals(mesh: SurfaceMesh, amplitude: float, seed: Optional[int] = None) -> SurfaceMesh:
    """Copy of ``mesh`` with nodes moved to F + eps nu.

    eps is ``amplitude`` everywhere, or uniform in [-amplitude, amplitude] per
    node when ``seed`` is given.  The smooth parametrization and profile are
    dropped since they no longer describe the nodes.
    """
    if seed is None:
        eps = np.full(mesh.lambda1.shape, float(amplitude))
    else:
        eps = np.random.default_rng(seed).uniform(-amplitude, amplitude, mesh.lambda1.shape)
    return SurfaceMesh(
        positions=mesh.positions + eps[..., None] * mesh.normals,
        normals=mesh.normals.copy(),
        lambda1=mesh.lambda1.copy(),
        lambda2=mesh.lambda2.copy(),
        u=mesh.u.copy(),
        v=mesh.v.copy(),
        u_extent=mesh.u_extent,
        v_extent=mesh.v_extent,
        closed_u=mesh.closed_u,
        closed_v=mesh.closed_v,
        meta=dict(mesh.meta, perturbed=float(amplitude)),
    )


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerificationReport:
    """Residuals of every invariant checked by :func:`verify_mesh`.

    ``min_pair_distance`` is a sampled embeddedness indicator (nearest
    non-adjacent nodes), not a proof of embeddedness.
    """

    max_unit_norm_residual: float
    max_meanH_residual: float
    min_mu: float
    max_first_integral_residual: float
    max_simons_residual: float
    theta_closure_residual: float
    min_Z: float
    min_pair_distance: float
    passed: bool
    checks: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    def failures(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]


def unit_residuals(mesh: SurfaceMesh) -> float:
    """max of ||F| - 1|, ||nu| - 1| and |F . nu| over the nodes."""
    P, N = mesh.positions, mesh.normals
    return float(
        max(
            np.abs(np.linalg.norm(P, axis=-1) - 1.0).max(),
            np.abs(np.linalg.norm(N, axis=-1) - 1.0).max(),
            np.abs(np.sum(P * N, axis=-1)).max(),
        )
    )


def sample_nodes(mesh: SurfaceMesh, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """``count`` distinct random (i, j) node indices."""
    flat = rng.choice(mesh.size, size=min(count, mesh.size), replace=False)
    return np.divmod(flat, mesh.nv)


def fd_mean_curvature(mesh: SurfaceMesh, i, j, step: float = 1e-4) -> np.ndarray:
    """Mean curvature at nodes (i, j) by central differences of the parametrization."""
    res = principal_curvatures(
        mesh.parametrization, mesh.u[i], mesh.v[j], step=step, orientation=mesh.normals[i, j]
    )
    return np.asarray(res.H)


def _arclength_derivatives(values, speed, mesh, axis):
    d1 = grid_derivative(values, mesh, axis) / speed
    d2 = grid_derivative(d1, mesh, axis) / speed
    return d1, d2


def profile_residuals_from_grid(mesh: SurfaceMesh, H: float, axis: int = 0):
    """First-integral and second-order residuals from node data alone.

    Treats the mesh as a rotational surface whose profile runs along grid
    ``axis``: for axis 0 the rotation circles lie in the (x1, x2)-plane and
    r = |(x1, x2)|, for axis 1 the roles of the two planes are exchanged.
    Uses mu = (lambda1 - lambda2) / 2, g = mu^(-1/2), C = 1 / (mu r^2) and
    derivatives in arclength along the profile.
    """
    P = mesh.positions
    speed = np.linalg.norm(grid_derivative(P, mesh, axis), axis=-1)
    r = np.hypot(P[..., 0], P[..., 1]) if axis == 0 else np.hypot(P[..., 2], P[..., 3])
    mu = 0.5 * (mesh.lambda1 - mesh.lambda2)
    g = mu**-0.5
    w2 = 1.0 + H * H
    C_node = 1.0 / (mu * r * r)
    rp, _ = _arclength_derivatives(r, speed, mesh, axis)
    gp, gpp = _arclength_derivatives(g, speed, mesh, axis)
    first_integral = gp**2 + g**-2 + w2 * g**2 + 2.0 * H - C_node
    unit_speed = rp**2 + r**2 * (1.0 + mesh.lambda1**2) - 1.0
    second_order = gpp / g - g**-4 + w2
    return first_integral, unit_speed, second_order


def min_z_sampled(mesh: SurfaceMesh, pair_budget: int, rng, chunk: int = 4096) -> float:
    """Minimum of Z(lambda1(x), x, y) over sampled pairs.

    Every node x (or a random subset if the budget is smaller than the node
    count) is paired with k = budget // N partners y, one drawn uniformly from
    each of k equal strata of the flattened node index.  Partners inside the
    exclusion neighbourhood of x are skipped.
    """
    P = mesh.positions.reshape(-1, 4)
    Nrm = mesh.normals.reshape(-1, 4)
    lam = mesh.lambda1.ravel()
    n = P.shape[0]
    if pair_budget >= n:
        xs = np.arange(n)
        k = pair_budget // n
    else:
        xs = np.sort(rng.choice(n, size=max(1, pair_budget), replace=False))
        k = 1
    edges = np.linspace(0, n, k + 1).astype(int)
    lo, width = edges[:-1], np.diff(edges)
    gap_min = exclusion_gap(mesh)
    best = np.inf
    for start in range(0, xs.size, chunk):
        x = xs[start:start + chunk]
        y = lo[None, :] + (rng.random((x.size, k)) * width[None, :]).astype(int)
        Fx, nx = P[x][:, None, :], Nrm[x][:, None, :]
        Fy = P[y]
        gap = 0.5 * np.sum((Fx - Fy) ** 2, axis=-1)
        z = z_values(lam[x][:, None], Fx, nx, Fy)
        z = np.where(gap >= gap_min, z, np.inf)
        best = min(best, float(z.min()))
    return best


def min_pair_distance(mesh: SurfaceMesh, neighbours: int = 10) -> float:
    """Smallest chord between nodes that are not grid neighbours.

    Nodes whose cyclic index offsets are both at most 1 are adjacent and
    skipped; only the ``neighbours`` nearest nodes of each node are examined.
    """
    P = mesh.positions.reshape(-1, 4)
    tree = cKDTree(P)
    k = min(neighbours, P.shape[0])
    dist, idx = tree.query(P, k=k)
    i0, j0 = np.divmod(np.arange(P.shape[0]), mesh.nv)
    i1, j1 = np.divmod(idx, mesh.nv)
    di = np.abs(i1 - i0[:, None])
    dj = np.abs(j1 - j0[:, None])
    if mesh.closed_u:
        di = np.minimum(di, mesh.nu - di)
    if mesh.closed_v:
        dj = np.minimum(dj, mesh.nv - dj)
    far = (di > 1) | (dj > 1)
    if not far.any():
        return math.inf
    return float(dist[far].min())


def verify_mesh(
    mesh: SurfaceMesh,
    expected_H: float,
    pair_budget: Optional[int] = None,
    config: Optional[Config] = None,
    fd_samples: int = 100,
) -> VerificationReport:
    """Check every invariant of an embedded CMC torus on ``mesh``.

    Mean curvature comes from central differences of the parametrization at
    ``fd_samples`` random nodes when the mesh carries one, otherwise from
    spectral/finite differences of the node positions at every node.  The
    profile residuals and the closure come from the closed-form profile when
    the mesh carries one, otherwise from node data.
    """
    cfg = config or Config()
    budget = cfg.pair_budget if pair_budget is None else int(pair_budget)
    rng = np.random.default_rng(cfg.seed)
    H = float(expected_H)
    notes = []

    unit = unit_residuals(mesh)
    stored_H = np.abs(0.5 * (mesh.lambda1 + mesh.lambda2) - H).max()
    if mesh.parametrization is not None:
        i, j = sample_nodes(mesh, fd_samples, rng)
        meanH = np.abs(fd_mean_curvature(mesh, i, j, cfg.fd_step) - H).max()
        sample_gap = np.abs(mesh.parametrization(mesh.u[i], mesh.v[j]) - mesh.positions[i, j]).max()
        unit = max(unit, float(sample_gap))
        notes.append(f"mean curvature by central differences at {i.size} nodes")
    else:
        meanH = np.abs(grid_curvatures(mesh).H - H).max()
        notes.append("mean curvature from node positions at every node")
    meanH = float(max(meanH, stored_H))

    min_mu = float((0.5 * (mesh.lambda1 - mesh.lambda2)).min())
    sol = mesh.profile
    if isinstance(sol, ProfileSolution) and abs(sol.params.H - H) <= cfg.geometric:
        res = sol.residuals(mesh.u)
        first = float(max(np.abs(res.first_integral).max(), np.abs(res.unit_speed).max()))
        simons = float(np.abs(res.second_order).max())
        m = int(mesh.meta.get("m", round(mesh.u_extent / sol.T)))
        closure = float(abs(m * sol.theta_period - 2.0 * np.pi))
        tol_first, tol_simons = cfg.first_integral, cfg.simons
    else:
        if min_mu > 0:
            # either grid direction may be the profile; keep the better fit
            best = None
            for axis in (0, 1):
                r_first, r_speed, r_second = profile_residuals_from_grid(mesh, H, axis)
                fit = (float(max(np.abs(r_first).max(), np.abs(r_speed).max())), float(np.abs(r_second).max()), axis)
                if best is None or max(fit[:2]) < max(best[:2]):
                    best = fit
            first, simons, axis = best
            notes.append(f"profile taken along grid axis {axis}")
        else:
            first = simons = math.inf
        closure = 0.0 if mesh.closed_u else math.inf
        tol_first = tol_simons = cfg.finite_difference
        notes.append("profile residuals from node data (finite-difference tolerance)")

    min_Z = min_z_sampled(mesh, budget, rng)
    pair = min_pair_distance(mesh)
    notes.append("embeddedness sampled by nearest non-adjacent nodes (heuristic)")

    checks = {
        "unit_norm": unit <= cfg.geometric,
        "mean_curvature": meanH <= cfg.finite_difference,
        "mu_positive": min_mu > 0,
        "first_integral": first <= tol_first,
        "simons": simons <= tol_simons,
        "closure": closure <= cfg.closure,
        "z_scan": min_Z >= cfg.z_scan,
        "pair_distance": pair > 0,
    }
    tolerances = {
        "geometric": cfg.geometric,
        "finite_difference": cfg.finite_difference,
        "first_integral": tol_first,
        "simons": tol_simons,
        "closure": cfg.closure,
        "z_scan": cfg.z_scan,
    }
    return VerificationReport(
        max_unit_norm_residual=float(unit),
        max_meanH_residual=meanH,
        min_mu=min_mu,
        max_first_integral_residual=first,
        max_simons_residual=simons,
        theta_closure_residual=closure,
        min_Z=min_Z,
        min_pair_distance=pair,
        passed=all(checks.values()),
        checks=checks,
        tolerances=tolerances,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# File formats


def export_csv(mesh: SurfaceMesh, path) -> None:
    """Write one row per node, row-major in (i_u, i_v), 17 significant digits."""
    U, V = np.meshgrid(mesh.u, mesh.v, indexing="ij")
    table = np.column_stack([
        U.ravel(),
        V.ravel(),
        mesh.positions.reshape(-1, 4),
        mesh.normals.reshape(-1, 4),
        mesh.lambda1.ravel(),
        mesh.lambda2.ravel(),
    ])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")


def _infer_closed(P, axis) -> bool:
    if P.shape[axis] < 3:
        return False
    steps = np.linalg.norm(np.diff(P, axis=axis), axis=-1).max()
    first = np.take(P, 0, axis=axis)
    last = np.take(P, -1, axis=axis)
    wrap = np.linalg.norm(first - last, axis=-1).max()
    return bool(wrap <= steps * (1.0 + CLOSURE_MARGIN))


def _extent(coords, closed):
    if coords.size < 2:
        return 0.0
    step = (coords[-1] - coords[0]) / (coords.size - 1)
    return float(step * coords.size if closed else coords[-1] - coords[0])


def import_csv(path) -> SurfaceMesh:
    """Read a mesh written by :func:`export_csv`.

    The grid shape is recovered from the run length of the leading u value;
    each direction is taken as closed when its wrap-around chord is no longer
    than the largest neighbour chord (plus a 1% margin).
    """
    with open(path) as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 12:
        raise ValueError(f"expected 12 columns, got {data.shape[1]}")
    u_col = data[:, 0]
    nv = int(np.argmax(u_col != u_col[0])) if np.any(u_col != u_col[0]) else u_col.size
    if data.shape[0] % nv:
        raise ValueError(f"{data.shape[0]} rows do not form a grid with {nv} columns")
    nu = data.shape[0] // nv
    grid = data.reshape(nu, nv, 12)
    P = grid[..., 2:6]
    closed_u, closed_v = _infer_closed(P, 0), _infer_closed(P, 1)
    u, v = grid[:, 0, 0].copy(), grid[0, :, 1].copy()
    return SurfaceMesh(
        positions=P.copy(),
        normals=grid[..., 6:10].copy(),
        lambda1=grid[..., 10].copy(),
        lambda2=grid[..., 11].copy(),
        u=u,
        v=v,
        u_extent=_extent(u, closed_u),
        v_extent=_extent(v, closed_v),
        closed_u=closed_u,
        closed_v=closed_v,
        meta={"source": str(path)},
    )


def auto_pole(mesh: SurfaceMesh, candidates: int = 64, seed: int = 0) -> np.ndarray:
    """Unit 4-vector, among +-e_k and seeded random candidates, farthest from every node."""
    eye = np.eye(4)
    cand = [eye[3], -eye[3], eye[2], -eye[2], eye[0], -eye[0], eye[1], -eye[1]]
    rnd = np.random.default_rng(seed).standard_normal((candidates, 4))
    cand = np.vstack([np.array(cand), rnd / np.linalg.norm(rnd, axis=1, keepdims=True)])
    dist, _ = cKDTree(mesh.positions.reshape(-1, 4)).query(cand)
    return cand[int(np.argmax(dist))]


def export_obj(mesh: SurfaceMesh, path, pole=None) -> np.ndarray:
    """Write the stereographic image of ``mesh`` as OBJ; returns the pole used."""
    pole = auto_pole(mesh) if pole is None else np.asarray(pole, dtype=float)
    proj = stereographic_project(mesh, pole)
    with open(path, "w") as fh:
        for x, y, z in proj.vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in proj.faces + 1:
            fh.write(f"f {a} {b} {c}\n")
    return pole


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    """Vertices (n, 3) and zero-based triangle faces of an OBJ file."""
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int)


def export_mesh(mesh: SurfaceMesh, fmt: str, path, pole=None) -> None:
    if fmt == "csv":
        export_csv(mesh, path)
    elif fmt in ("obj", "obj-stereographic"):
        export_obj(mesh, path, pole)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def profile_table(params: TorusParams, u) -> np.ndarray:
    """Columns u, g, r, r', mu, lambda1, lambda2, theta at the given u."""
    sol = solve_profile(params)
    u = np.asarray(u, dtype=float)
    vals = sol.evaluate(u)
    return np.column_stack([u, vals.g, vals.r, vals.rprime, vals.mu, vals.lambda1, vals.lambda2, sol.theta(u)])


def export_profile(params: TorusParams, u, path) -> None:
    np.savetxt(path, profile_table(params, u), fmt="%.17g", delimiter=",", header=PROFILE_HEADER, comments="")
