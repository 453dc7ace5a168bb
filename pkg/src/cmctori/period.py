"""The period integral K(H, C), its limits and the sign of dK/d(1/C).

    K(H, C) = int_{x1}^{x2} (H u + 1/C) du
              / ( sqrt(u) (1 - u) sqrt((1 + H^2)(u - x1)(x2 - u)) )

with x1 = t1^2 / C and x2 = t2^2 / C.  The sine substitution
u = x1 + (x2 - x1)(1 + sin phi) / 2 cancels both square-root endpoint
singularities, leaving

    K = (1 / sqrt(1 + H^2)) int_{-pi/2}^{pi/2} (H u + 1/C) / (sqrt(u) (1 - u)) dphi,

which is integrated by adaptive composite Gauss-Legendre.  For large C the
transformed integrand develops narrow peaks of width ~1/C at both ends
(u ~ 1/C^2 and 1 - u ~ 1/C^2).  The two halves of [-pi/2, pi/2] are folded
onto the distance psi from the nearer end, so the peaks sit at psi = 0 and
are resolved by the adaptive panels to full precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParams
from .profile import TorusParams, solve_profile
from .quadrature import gauss_kronrod, gauss_legendre_adaptive

K_EPSABS = 1e-13
K_EPSREL = 1e-13
WITNESS_EPSREL = 1e-11
GL_ORDER = 10


@dataclass(frozen=True)
class PeriodEval:
    """Value of K(H, C) together with its integration data."""

    H: float
    C: float
    x1: float
    x2: float
    value: float
    error_estimate: float

    def __float__(self):
        return self.value


def lower_bound_C(H: float) -> float:
    """a(H) = 2(H + sqrt(1 + H^2)), the Clifford-torus boundary of admissible C."""
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    return 2.0 * (H + math.hypot(1.0, H))


def limit_K_at_lower(H: float) -> float:
    """Limit of K(H, C) as C decreases to a(H)."""
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    w = math.hypot(1.0, H)
    return math.sqrt(2.0) * math.pi / ((w * w) ** 0.25 * math.sqrt(H + w))


def arccot(H: float) -> float:
    """arccot on H >= 0 with range (0, pi/2]; arccot(0) = pi/2."""
    return 0.5 * math.pi - math.atan(H)


def limit_K_at_infinity(H: float) -> float:
    """Limit 2 arccot(H) of K(H, C) as C -> infinity."""
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    return 2.0 * arccot(H)


def _params(H, C) -> TorusParams:
    return TorusParams(H, C)


def period_K(H: float, C: float, epsabs: float = K_EPSABS, epsrel: float = K_EPSREL) -> PeriodEval:
    """Evaluate K(H, C) by sine-substituted adaptive Gauss-Legendre.

    Raises :class:`DegenerateParams` for C <= a(H) and
    :class:`~cmctori.errors.QuadratureFailure` if the tolerance is unreachable.
    """
    sol = solve_profile(_params(H, C))
    H, C = sol.params.H, sol.params.C
    x1, delta, gap = sol.x1, sol.delta, sol.one_minus_x2
    a = 1.0 / C

    def f(u, one_minus_u):
        return (H * u + a) / (np.sqrt(u) * one_minus_u)

    def integrand(psi):
        # The two halves phi = -pi/2 + psi and phi = pi/2 - psi, folded onto
        # psi in [0, pi/2] so the end peaks sit at psi = 0 where the float
        # grid is fine.  (1 -+ cos psi)/2 = sin^2(psi/2), cos^2(psi/2).
        s2 = np.sin(0.5 * psi) ** 2
        c2 = np.cos(0.5 * psi) ** 2
        left = f(x1 + delta * s2, gap + delta * c2)
        right = f(x1 + delta * c2, gap + delta * s2)
        return left + right

    value, err = gauss_legendre_adaptive(
        integrand, 0.0, 0.5 * np.pi, order=GL_ORDER, epsabs=epsabs, epsrel=epsrel
    )
    w = sol.omega
    return PeriodEval(H=H, C=C, x1=sol.x1, x2=sol.x2, value=value / w, error_estimate=err / w)


def monotonicity_witness(H: float, C: float, epsrel: float = WITNESS_EPSREL) -> float:
    """d/da K(H, 1/a) at a = 1/C, as the positive real integral

        int_0^inf t^2 / ((1 + H^2) t (x1 + t)(x2 + t))^(3/2) dt.

    The range is split at t = 1; t = s^2 on [0, 1] and t = 1/s^2 on
    [1, inf) turn both pieces into smooth integrands on [0, 1].
    """
    sol = solve_profile(_params(H, C))
    x1, x2 = sol.x1, sol.x2
    w3 = sol.omega**3

    def head(s):
        s2 = s * s
        return 2.0 * s2 / (w3 * ((x1 + s2) * (x2 + s2)) ** 1.5)

    def tail(s):
        s2 = s * s
        return 2.0 * s2 / (w3 * ((1.0 + x1 * s2) * (1.0 + x2 * s2)) ** 1.5)

    v1, _ = gauss_kronrod(head, 0.0, 1.0, epsabs=0.0, epsrel=epsrel)
    v2, _ = gauss_kronrod(tail, 0.0, 1.0, epsabs=0.0, epsrel=epsrel)
    return v1 + v2


def K_of_a(H: float, a: float) -> float:
    """T(H, a) = K(H, 1/a)."""
    if not a > 0:
        raise DegenerateParams(f"a = 1/C must be positive, got {a!r}")
    return period_K(H, 1.0 / a).value
