"""Classification of embedded CMC tori in S^3 for a given mean curvature H.

For H >= 0 every embedded CMC torus is either a Clifford torus or a rotational
torus whose period satisfies K(H, C) = 2 pi / m for an integer m >= 2.  Since
K(H, .) decreases strictly from its limit at C = a(H) to 2 arccot(H) as
C -> infinity, such a torus exists exactly when

    cot(pi / m) < H < (m^2 - 2) / (2 sqrt(m^2 - 1)),

and it is unique.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BracketFailure, NotAdmissible
from .period import arccot, limit_K_at_infinity, limit_K_at_lower, lower_bound_C, period_K

K_TOL = 1e-9
LOWER_EPS = 1e-10
C_CEILING = 1e12
# H within this relative distance of a window endpoint counts as on it
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class TorusSpec:
    """An embedded rotational CMC torus with maximal symmetry order ``m``."""

    H: float
    m: int
    C: float
    K: float

    def as_dict(self) -> dict:
        return {"m": self.m, "C": self.C, "K": self.K}


@dataclass(frozen=True)
class ClassificationReport:
    H: float
    clifford_radius: float
    specs: list = field(default_factory=list)

    @property
    def rigid(self) -> bool:
        """True when the Clifford torus is the only embedded CMC torus."""
        return not self.specs

    def ms(self) -> list[int]:
        return [s.m for s in self.specs]

    def as_dict(self) -> dict:
        return {
            "H": self.H,
            "cliffordRadius": self.clifford_radius,
            "rigid": self.rigid,
            "tori": [s.as_dict() for s in self.specs],
        }


def window(m: int) -> tuple[float, float]:
    """Open interval of H admitting an embedded torus with symmetry order m."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    lo = 0.0 if m == 2 else 1.0 / math.tan(math.pi / m)
    hi = (m * m - 2) / (2.0 * math.sqrt(m * m - 1))
    return lo, hi


def _inside(H: float, m: int) -> bool:
    lo, hi = window(m)
    slack = BOUNDARY_RTOL * max(1.0, H)
    return lo + slack < H < hi - slack


def admissible_m(H: float) -> list[int]:
    """All m >= 2 for which an embedded non-Clifford torus with mean curvature H exists."""
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    cap = arccot(H)
    if cap <= 0:
        return []
    # the lower bound cot(pi/m) < H forces m < pi / arccot(H)
    m_max = int(math.floor(math.pi / cap)) + 1
    return [m for m in range(2, m_max + 1) if _inside(H, m)]


def _bisect(H, target, lo, hi, k_tol, max_iter=400):
    # K is decreasing in C: K(lo) > target > K(hi).  Bisect on log(C - a)
    # while the bracket is wide, then in C until it is a few ulps wide.
    a = lower_bound_C(H)
    k_mid = None
    for _ in range(max_iter):
        if hi - lo <= 4.0 * math.ulp(hi):
            break
        if (hi - a) > 4.0 * (lo - a):
            mid = a + math.sqrt((lo - a) * (hi - a))
        else:
            mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        k_mid = period_K(H, mid).value
        if k_mid > target:
            lo = mid
        else:
            hi = mid
    C = 0.5 * (lo + hi)
    K = period_K(H, C).value
    if abs(K - target) > k_tol:
        raise BracketFailure(f"bisection stalled at C={C!r} with |K - 2pi/m| = {abs(K - target):.3g}")
    return C, K


def solve_C_for_m(H: float, m: int, bracket=None, k_tol: float = K_TOL) -> TorusSpec:
    """The unique C with K(H, C) = 2 pi / m.

    ``bracket`` overrides the default starting bracket
    [a(H)(1 + 1e-10), C_hi], C_hi doubled from a(H) + 1 until K(C_hi) < 2 pi / m.
    """
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    if m not in admissible_m(H):
        lo, hi = window(m) if m >= 2 else (math.nan, math.nan)
        raise NotAdmissible(f"no embedded torus with m={m} at H={H!r} (window ({lo:.6g}, {hi:.6g}))")
    target = 2.0 * math.pi / m
    a = lower_bound_C(H)
    if bracket is None:
        lo = a * (1.0 + LOWER_EPS)
        hi = a + 1.0
        while period_K(H, hi).value >= target:
            lo = hi
            hi *= 2.0
            if hi > C_CEILING:
                raise BracketFailure(f"K(H={H!r}, C) stays above 2pi/{m} up to C={C_CEILING:g}")
    else:
        lo, hi = (float(c) for c in bracket)
        if not a < lo < hi:
            raise BracketFailure(f"bracket {bracket!r} is not inside (a(H), inf) = ({a!r}, inf)")
    if not period_K(H, lo).value > target:
        raise BracketFailure(f"K(H, {lo!r}) does not exceed 2pi/{m}")
    if not period_K(H, hi).value < target:
        raise BracketFailure(f"K(H, {hi!r}) is not below 2pi/{m}")
    C, K = _bisect(H, target, lo, hi, k_tol)
    return TorusSpec(H=float(H), m=int(m), C=C, K=K)


def clifford_radius(H: float) -> float:
    """Radius r in (0, 1/sqrt(2)] of the Clifford torus with mean curvature H >= 0.

    Smaller root of 4(1 + H^2) r^4 - 4(1 + H^2) r^2 + 1 = 0, written as
    r^2 = 1 / (2 w (w + H)) with w = sqrt(1 + H^2).
    """
    if H < 0:
        raise ValueError(f"H must be non-negative, got {H!r}")
    w = math.hypot(1.0, H)
    return math.sqrt(1.0 / (2.0 * w * (w + H)))


def classify(H: float) -> ClassificationReport:
    """All embedded CMC tori with mean curvature H >= 0, up to congruence."""
    if H < 0:
        raise ValueError(f"H must be non-negative (reverse the normal), got {H!r}")
    specs = [solve_C_for_m(H, m) for m in admissible_m(H)]
    return ClassificationReport(H=float(H), clifford_radius=clifford_radius(H), specs=specs)


def window_from_limits(H: float, m: int) -> bool:
    """2 arccot(H) < 2 pi / m < lim_{C -> a(H)} K(H, C), evaluated directly."""
    k = 2.0 * math.pi / m
    return limit_K_at_infinity(H) < k < limit_K_at_lower(H)
