"""Acceptance suite: each criterion is a function returning a :class:`CriterionResult`.

Shared by ``tests/test_acceptance.py`` and the ``cmct selftest`` command.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classify import classify, solve_C_for_m, window
from .config import Config
from .errors import DegenerateParams, NotAdmissible
from .period import (
    limit_K_at_infinity,
    limit_K_at_lower,
    lower_bound_C,
    monotonicity_witness,
    period_K,
)
from .profile import TorusParams, first_integral_residuals, solve_profile
from .s3geom import interior_ball_curvature
from .surface_io import (
    fd_mean_curvature,
    generate_clifford,
    generate_torus,
    min_z_sampled,
    perturb_along_normals,
    sample_nodes,
    verify_mesh,
)

SQRT2PI = math.sqrt(2.0) * math.pi
H_RIGID = 1.0 / math.sqrt(3.0)


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.key} {self.title} ({self.seconds:.2f}s / {self.limit:g}s): {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _timed(key, title, limit):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, details = fn()
            dt = time.perf_counter() - t0
            return CriterionResult(key, title, bool(ok) and dt < limit, dt, limit, details)

        run.__name__ = fn.__name__
        run.key = key
        return run

    return wrap


def _offset_grid(H, n, lo, hi):
    a = lower_bound_C(H)
    return a * (1.0 + np.geomspace(lo, hi, n))


@_timed("AC1", "period limits at H=0", 5.0)
def limits_at_zero():
    k_inf = period_K(0.0, 1e8).value
    k_low = period_K(0.0, 2.0 * (1.0 + 1e-8)).value
    grid = _offset_grid(0.0, 200, 1e-8, 1e8)
    ks = np.array([period_K(0.0, c).value for c in grid])
    inside = int(np.sum((ks > math.pi) & (ks < SQRT2PI)))
    ok = abs(k_inf - math.pi) < 1e-3 and abs(k_low - SQRT2PI) < 1e-3 and inside == grid.size
    return ok, {
        "K(1e8)-pi": k_inf - math.pi,
        "K(2+)-sqrt2pi": k_low - SQRT2PI,
        "inside": f"{inside}/{grid.size}",
    }


@_timed("AC2", "rigidity at H=0 and H=1/sqrt3", 5.0)
def rigidity():
    grid = _offset_grid(H_RIGID, 200, 1e-8, 1e8)
    ks = np.array([period_K(H_RIGID, c).value for c in grid])
    inside = int(np.sum((ks > 2.0 * math.pi / 3.0) & (ks < math.pi)))
    r1 = classify(H_RIGID).rigid
    r0 = classify(0.0).rigid
    return inside == grid.size and r1 and r0, {
        "inside": f"{inside}/{grid.size}",
        "rigid(1/sqrt3)": r1,
        "rigid(0)": r0,
    }


def _fd_derivative_in_a(H, a, h):
    return (period_K(H, 1.0 / (a + h)).value - period_K(H, 1.0 / (a - h)).value) / (2.0 * h)


@_timed("AC3", "monotone decreasing period", 30.0)
def monotonicity(h=1e-5):
    violations = 0
    nonpositive = 0
    worst_fd = 0.0
    fd_points = 0
    for H in (0.0, 0.3, H_RIGID, 1.0, 2.0):
        grid = _offset_grid(H, 100, 1e-6, 1e6)
        ks = np.array([period_K(H, c).value for c in grid])
        violations += int(np.sum(np.diff(ks) >= 0))
        a_max = 1.0 / lower_bound_C(H)
        for c in grid:
            w = monotonicity_witness(H, c)
            nonpositive += int(not w > 0)
            a = 1.0 / c
            # the stencil must stay inside the domain a < 1/a(H)
            if a + 2.0 * h < a_max and a > 1e3 * h:
                rel = abs(_fd_derivative_in_a(H, a, h) - w) / w
                worst_fd = max(worst_fd, rel)
                fd_points += 1
    ok = violations == 0 and nonpositive == 0 and worst_fd < 1e-4 and fd_points > 0
    return ok, {
        "violations": violations,
        "nonpositive_witness": nonpositive,
        "fd_rel_err": worst_fd,
        "fd_points": fd_points,
    }


@_timed("AC4", "existence and uniqueness for m=2..6", 30.0)
def existence_uniqueness():
    worst_k = 0.0
    worst_c = 0.0
    missing = []
    for m in range(2, 7):
        lo, hi = window(m)
        H = 0.5 * (lo + hi)
        report = classify(H)
        if m not in report.ms():
            missing.append(m)
            continue
        spec = next(s for s in report.specs if s.m == m)
        target = 2.0 * math.pi / m
        worst_k = max(worst_k, abs(period_K(H, spec.C).value - target))
        a = lower_bound_C(H)
        other = solve_C_for_m(H, m, bracket=(a + 0.37 * (spec.C - a), 3.1 * spec.C))
        worst_c = max(worst_c, abs(other.C - spec.C))
    ok = not missing and worst_k <= 1e-9 and worst_c <= 1e-9
    return ok, {"missing": missing, "max|K-2pi/m|": worst_k, "max|dC|": worst_c}


@_timed("AC5", "theta(T) equals K on a 5x10 grid", 10.0)
def oracle_equivalence():
    worst = 0.0
    for H in (0.0, 0.3, H_RIGID, 1.0, 2.0):
        for c in _offset_grid(H, 10, 1e-3, 1e2):
            sol = solve_profile(TorusParams(H, c))
            worst = max(worst, abs(sol.theta(sol.T) - period_K(H, c).value))
    return worst <= 1e-8, {"max|theta(T)-K|": worst}


def _flagship_mesh():
    spec = solve_C_for_m(1.0, 3)
    return generate_torus(1.0, spec.C, 3, 384, 256)


@_timed("AC6", "surface fidelity of the H=1, m=3 torus", 60.0)
def surface_fidelity():
    mesh = _flagship_mesh()
    sol = mesh.profile
    norm = float(np.abs(np.linalg.norm(mesh.positions, axis=-1) - 1.0).max())
    i, j = sample_nodes(mesh, 100, np.random.default_rng(6))
    meanH = float(np.abs(fd_mean_curvature(mesh, i, j, 1e-4) - 1.0).max())
    res = first_integral_residuals(sol.params, mesh.u)
    first = float(max(np.abs(res.first_integral).max(), np.abs(res.unit_speed).max()))
    simons = float(np.abs(res.second_order).max())
    closure = float(abs(sol.theta(3.0 * sol.T) - 2.0 * math.pi))
    ok = norm <= 1e-12 and meanH <= 1e-5 and first < 1e-10 and simons < 1e-9 and closure < 1e-8
    return ok, {"||F|-1|": norm, "|H_fd-1|": meanH, "first_integral": first, "simons": simons, "closure": closure}


@_timed("AC7", "interior ball curvature equals lambda1", 60.0)
def ball_curvature(pairs=1_000_000):
    rng = np.random.default_rng(7)
    meshes = {
        "torus": _flagship_mesh(),
        "clifford(1/sqrt2)": generate_clifford(1.0 / math.sqrt(2.0), 256, 256),
        "clifford(1/2)": generate_clifford(0.5, 256, 256),
    }
    details = {}
    ok = True
    for name, mesh in meshes.items():
        min_z = min_z_sampled(mesh, pairs, rng)
        nodes = rng.choice(mesh.size, size=50, replace=False)
        excess = max(interior_ball_curvature(mesh, k) - mesh.lambda1.ravel()[k] for k in nodes)
        ok &= min_z >= -1e-6 and excess <= 5e-3
        details[f"minZ[{name}]"] = min_z
        details[f"excess[{name}]"] = float(excess)
    return ok, details


@_timed("AC8", "negative controls", 60.0)
def negative_controls():
    clifford = generate_clifford(1.0 / math.sqrt(2.0), 128, 128)
    report = verify_mesh(perturb_along_normals(clifford, 1e-3), 0.0, config=Config())
    try:
        solve_C_for_m(0.0, 2)
        not_admissible = False
    except NotAdmissible:
        not_admissible = True
    degenerate = True
    for H in (0.0, H_RIGID, 1.0):
        try:
            TorusParams(H, lower_bound_C(H))
            degenerate = False
        except DegenerateParams:
            pass
    ok = (not report.passed) and report.max_meanH_residual > 1e-3 and not_admissible and degenerate
    return ok, {
        "perturbed.passed": report.passed,
        "perturbed.meanH": report.max_meanH_residual,
        "NotAdmissible(0,2)": not_admissible,
        "DegenerateParams(C=a)": degenerate,
    }


CRITERIA = [
    limits_at_zero,
    rigidity,
    monotonicity,
    existence_uniqueness,
    oracle_equivalence,
    surface_fidelity,
    ball_curvature,
    negative_controls,
]


def run_all(echo=print) -> list[CriterionResult]:
    results = []
    for criterion in CRITERIA:
        result = criterion()
        if echo is not None:
            echo(result.line())
        results.append(result)
    return results
