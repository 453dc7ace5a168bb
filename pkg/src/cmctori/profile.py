"""Closed-form rotational profile of a CMC torus in S^3.

A rotational CMC torus with mean curvature H >= 0 is determined by a constant
C > 2(H + sqrt(1 + H^2)) of the first integral

    (g')^2 + g^-2 + (1 + H^2) g^2 + 2H = C,

where g = mu^(-1/2) is measured along the unit-speed curvature line u of the
small principal curvature.  The profile solves in closed form,

    g(u)^2 = (C - 2H + sqrt(C^2 - 4HC - 4) sin(2 w u)) / (2 w^2),  w^2 = 1 + H^2,

with period T = pi / w, and the surface is swept out by rotating the curve
(r(u), theta(u)) with r = g / sqrt(C).

Internally everything is expressed through x(u) = r(u)^2 = g(u)^2 / C:

    x(u)     = x1 + (x2 - x1) sin^2(w u + pi/4)
    1 - x(u) = (1 - x2) + (x2 - x1) cos^2(w u + pi/4)

with x1, x2, 1 - x2 and x2 - x1 obtained from cancellation-free formulas, so
the evaluators stay accurate both near the Clifford limit and for huge C.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DegenerateParams
from .quadrature import gauss_kronrod_many

# anchor segments per profile period for the cumulative angle table
THETA_ANCHORS = 64
THETA_EPSABS = 1e-15
THETA_EPSREL = 1e-14


def _omega(H: float) -> float:
    return math.hypot(1.0, H)


def profile_period(H: float) -> float:
    """Period T = pi / sqrt(1 + H^2) of the profile function g."""
    return math.pi / _omega(H)


@dataclass(frozen=True)
class TorusParams:
    """Mean curvature ``H`` and first-integral constant ``C`` of a rotational torus."""

    H: float
    C: float

    def __post_init__(self):
        H, C = float(self.H), float(self.C)
        if not (math.isfinite(H) and math.isfinite(C)):
            raise ValueError(f"non-finite parameters H={H!r}, C={C!r}")
        if H < 0:
            raise ValueError(f"H must be non-negative (flip the normal for H < 0), got {H!r}")
        bound = 2.0 * (H + _omega(H))
        if not C > bound:
            raise DegenerateParams(
                f"C={C!r} must exceed 2(H + sqrt(1 + H^2)) = {bound!r} for H={H!r}"
            )
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "C", C)


class ProfileValues(NamedTuple):
    g: np.ndarray
    r: np.ndarray
    rprime: np.ndarray
    mu: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray


class Residuals(NamedTuple):
    first_integral: np.ndarray
    unit_speed: np.ndarray
    second_order: np.ndarray


@dataclass(frozen=True)
class ProfileSolution:
    """Roots, period and evaluators of the profile for one ``TorusParams``.

    Instances are cheap to create; the cumulative angle table is built on
    first use of :meth:`theta`.  Use :func:`solve_profile` to get a cached
    instance.
    """

    params: TorusParams

    # -- scalar data -----------------------------------------------------
    @cached_property
    def omega(self) -> float:
        return _omega(self.params.H)

    @cached_property
    def T(self) -> float:
        return math.pi / self.omega

    @cached_property
    def _disc(self) -> float:
        # sqrt(C^2 - 4HC - 4), factored through the two roots in C
        H, C = self.params.H, self.params.C
        w = self.omega
        return math.sqrt((C - 2.0 * (H + w)) * (C - 2.0 * H + 2.0 * w))

    @cached_property
    def x2(self) -> float:
        H, C = self.params.H, self.params.C
        return (C - 2.0 * H + self._disc) / (2.0 * self.omega**2 * C)

    @cached_property
    def x1(self) -> float:
        H, C = self.params.H, self.params.C
        return 2.0 / (C * (C - 2.0 * H + self._disc))

    @cached_property
    def delta(self) -> float:
        """x2 - x1."""
        return self._disc / (self.omega**2 * self.params.C)

    @cached_property
    def one_minus_x2(self) -> float:
        H, C = self.params.H, self.params.C
        return 2.0 * (H * C + 1.0) ** 2 / (C * (C * (1.0 + 2.0 * H * H) + 2.0 * H + self._disc))

    @property
    def t1(self) -> float:
        H, C = self.params.H, self.params.C
        return math.sqrt(2.0 / (C - 2.0 * H + self._disc))

    @property
    def t2(self) -> float:
        H, C = self.params.H, self.params.C
        return math.sqrt((C - 2.0 * H + self._disc) / (2.0 * self.omega**2))

    @property
    def u_min(self) -> float:
        """A parameter value where g attains its minimum t1 (sin = -1)."""
        return -0.25 * self.T

    # -- pointwise evaluators -------------------------------------------
    def _phase(self, u):
        return self.omega * np.asarray(u, dtype=float) + 0.25 * np.pi

    def x(self, u):
        """r(u)^2 = g(u)^2 / C."""
        return self.x1 + self.delta * np.sin(self._phase(u)) ** 2

    def one_minus_x(self, u):
        """1 - r(u)^2, evaluated without cancellation."""
        return self.one_minus_x2 + self.delta * np.cos(self._phase(u)) ** 2

    def dx(self, u):
        return self.delta * self.omega * np.cos(2.0 * self.omega * np.asarray(u, dtype=float))

    def d2x(self, u):
        w = self.omega
        return -2.0 * self.delta * w * w * np.sin(2.0 * w * np.asarray(u, dtype=float))

    def g(self, u):
        return np.sqrt(self.params.C * self.x(u))

    def gprime(self, u):
        return math.sqrt(self.params.C) * self.dx(u) / (2.0 * np.sqrt(self.x(u)))

    def gsecond(self, u):
        x = self.x(u)
        sq = np.sqrt(x)
        return math.sqrt(self.params.C) * (self.d2x(u) / (2.0 * sq) - self.dx(u) ** 2 / (4.0 * x * sq))

    def r(self, u):
        return np.sqrt(self.x(u))

    def rprime(self, u):
        return self.dx(u) / (2.0 * np.sqrt(self.x(u)))

    def mu(self, u):
        return 1.0 / (self.params.C * self.x(u))

    def lambda1(self, u):
        return self.params.H + self.mu(u)

    def lambda2(self, u):
        return self.params.H - self.mu(u)

    def evaluate(self, u) -> ProfileValues:
        x = self.x(u)
        sq = np.sqrt(x)
        mu = 1.0 / (self.params.C * x)
        H = self.params.H
        return ProfileValues(
            g=np.sqrt(self.params.C * x),
            r=sq,
            rprime=self.dx(u) / (2.0 * sq),
            mu=mu,
            lambda1=H + mu,
            lambda2=H - mu,
        )

    # -- angle -----------------------------------------------------------
    def theta_integrand(self, u):
        """r lambda1 / (1 - r^2) = (H x + 1/C) / (sqrt(x) (1 - x))."""
        x = self.x(u)
        return (self.params.H * x + 1.0 / self.params.C) / (np.sqrt(x) * self.one_minus_x(u))

    @cached_property
    def _theta_table(self):
        edges = np.linspace(0.0, self.T, THETA_ANCHORS + 1)
        seg, err = gauss_kronrod_many(
            self.theta_integrand, edges[:-1], edges[1:], epsabs=THETA_EPSABS, epsrel=THETA_EPSREL
        )
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        return edges, cum, float(err.sum())

    @property
    def theta_period(self) -> float:
        """theta(T): angular advance per profile period."""
        return float(self._theta_table[1][-1])

    @property
    def theta_error(self) -> float:
        """Error estimate of ``theta_period``."""
        return self._theta_table[2]

    def theta(self, u):
        """theta(u) = integral_0^u r lambda1 / (1 - r^2) d tau (vectorised)."""
        u = np.asarray(u, dtype=float)
        flat, inverse = np.unique(u.ravel(), return_inverse=True)
        edges, cum, _ = self._theta_table
        T = self.T
        n = np.floor(flat / T)
        s = flat - n * T
        k = np.clip(np.floor(s / (T / THETA_ANCHORS)).astype(int), 0, THETA_ANCHORS - 1)
        part, _ = gauss_kronrod_many(
            self.theta_integrand, edges[k], s, epsabs=THETA_EPSABS, epsrel=THETA_EPSREL
        )
        out = n * cum[-1] + cum[k] + part
        return out[inverse].reshape(u.shape)

    def residuals(self, u) -> Residuals:
        H, C = self.params.H, self.params.C
        w2 = self.omega**2
        g = self.g(u)
        gp = self.gprime(u)
        gpp = self.gsecond(u)
        r = self.r(u)
        rp = self.rprime(u)
        lam = self.lambda1(u)
        return Residuals(
            first_integral=gp**2 + g**-2 + w2 * g**2 + 2.0 * H - C,
            unit_speed=rp**2 + r**2 * (1.0 + lam**2) - 1.0,
            second_order=gpp / g - g**-4 + w2,
        )


@lru_cache(maxsize=256)
def solve_profile(params: TorusParams) -> ProfileSolution:
    """Cached :class:`ProfileSolution` for ``params``."""
    return ProfileSolution(params)


def _as_params(params, C=None) -> TorusParams:
    if isinstance(params, TorusParams):
        return params
    if C is None:
        H, C = params
    else:
        H = params
    return TorusParams(H, C)


def coefficient_roots(params: TorusParams) -> tuple[float, float]:
    """Positive roots t1 < t2 of xi(s) = C s^2 - 1 - (1 + H^2) s^4 - 2H s^2.

    Raises :class:`DegenerateParams` if C <= 2(H + sqrt(1 + H^2)).
    """
    sol = solve_profile(_as_params(params))
    return sol.t1, sol.t2


def profile_eval(params: TorusParams, u) -> ProfileValues:
    """(g, r, r', mu, lambda1, lambda2) at ``u``."""
    return solve_profile(_as_params(params)).evaluate(u)


def theta(params: TorusParams, u):
    """Rotation angle theta(u) of the profile curve, theta(0) = 0."""
    out = solve_profile(_as_params(params)).theta(u)
    return float(out) if np.ndim(out) == 0 else out


def first_integral_residuals(params: TorusParams, u) -> Residuals:
    """Signed residuals of the first integral, of (r')^2 + r^2(1 + lambda1^2) = 1,
    and of the second order equation g''/g - g^-4 + H^2 + 1 = 0."""
    return solve_profile(_as_params(params)).residuals(u)
