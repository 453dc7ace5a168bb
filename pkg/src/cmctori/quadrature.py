"""Vectorised adaptive quadrature on finite intervals.

Two embedded-pair rules share one adaptive driver:

* Gauss-Kronrod G7/K15 (the QUADPACK ``qk15`` pair), used by the profile
  module for the angle integral;
* Gauss-Legendre of order n against order 2n, used by the period module on
  the sine-substituted period integrand.

The driver works on many independent integrals at once.  Every integral keeps
its own set of leaves; an integral is finished when the summed error estimate
of its leaves is below ``max(epsabs, epsrel * |I|)``.  Otherwise every leaf
whose error exceeds ``tol / (2 * nleaves)`` is bisected, so leaves that stay
unsplit contribute at most half the tolerance.  Integrands must accept numpy
arrays of any shape and evaluate elementwise.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure

# QUADPACK qk15 abscissae (positive half, descending) and weights.
_XGK15 = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK15 = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _kronrod_rule():
    nodes = np.concatenate([-_XGK15[:-1], _XGK15[::-1]])
    wk = np.concatenate([_WGK15[:-1], _WGK15[::-1]])
    wg = np.zeros(15)
    # Gauss nodes are the odd-indexed Kronrod nodes of the positive half.
    gauss_pos = {1: 0, 3: 1, 5: 2, 7: 3}
    for k, gi in gauss_pos.items():
        wg[7 + (7 - k)] = _WG7[gi]
        wg[7 - (7 - k)] = _WG7[gi]
    return nodes, wk, wg


_GK_NODES, _GK_WHI, _GK_WLO = _kronrod_rule()


@lru_cache(maxsize=8)
def _legendre_pair(order: int):
    x_lo, w_lo = np.polynomial.legendre.leggauss(order)
    x_hi, w_hi = np.polynomial.legendre.leggauss(2 * order)
    nodes = np.concatenate([x_hi, x_lo])
    whi = np.concatenate([w_hi, np.zeros(order)])
    wlo = np.concatenate([np.zeros(2 * order), w_lo])
    return nodes, whi, wlo


def _adaptive(f, a, b, rule, epsabs, epsrel, limit):
    nodes, whi, wlo = rule
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    nroot = a.size
    a = a.ravel()
    b = b.ravel()

    lo, hi = a.copy(), b.copy()
    owner = np.arange(nroot)
    est = np.empty(0)
    err = np.empty(0)
    # leaves carried over from previous sweeps
    keep_lo = np.empty(0)
    keep_hi = np.empty(0)
    keep_owner = np.empty(0, dtype=int)
    keep_est = np.empty(0)
    keep_err = np.empty(0)
    done = np.zeros(nroot, dtype=bool)
    value = np.zeros(nroot)
    error = np.zeros(nroot)
    nevals = 0

    while True:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * nodes[None, :]
        fx = np.asarray(f(x), dtype=float)
        if fx.shape != x.shape:
            fx = np.broadcast_to(fx, x.shape)
        nevals += lo.size
        new_est = half * (fx @ whi)
        new_err = np.abs(new_est - half * (fx @ wlo))
        if not np.all(np.isfinite(new_est)):
            raise QuadratureFailure("integrand returned non-finite values")

        lo = np.concatenate([keep_lo, lo])
        hi = np.concatenate([keep_hi, hi])
        owner = np.concatenate([keep_owner, owner])
        est = np.concatenate([keep_est, new_est])
        err = np.concatenate([keep_err, new_err])

        tot = np.bincount(owner, weights=est, minlength=nroot)
        tot_err = np.bincount(owner, weights=err, minlength=nroot)
        count = np.bincount(owner, minlength=nroot)
        tol = np.maximum(epsabs, epsrel * np.abs(tot))
        finished = (tot_err <= tol) & ~done
        value[finished] = tot[finished]
        error[finished] = tot_err[finished]
        done |= finished
        if done.all():
            break

        active = ~done[owner]
        threshold = tol[owner] / (2.0 * np.maximum(count[owner], 1))
        width_ok = (hi - lo) > 16.0 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))
        split = active & (err > threshold) & width_ok
        stuck = ~done & (np.bincount(owner, weights=split, minlength=nroot) == 0)
        if stuck.any() or nevals > limit:
            worst = int(np.argmax(np.where(done, -np.inf, tot_err - tol)))
            raise QuadratureFailure(
                f"tolerance {tol[worst]:.3g} not reached on [{a[worst]:.17g}, {b[worst]:.17g}] "
                f"(error estimate {tot_err[worst]:.3g}, {nevals} panels)"
            )
        keep = active & ~split
        keep_lo, keep_hi, keep_owner = lo[keep], hi[keep], owner[keep]
        keep_est, keep_err = est[keep], err[keep]
        s_lo, s_hi, s_owner = lo[split], hi[split], owner[split]
        s_mid = 0.5 * (s_lo + s_hi)
        lo = np.concatenate([s_lo, s_mid])
        hi = np.concatenate([s_mid, s_hi])
        owner = np.concatenate([s_owner, s_owner])

    return value, error


def gauss_kronrod_many(f, a, b, epsabs=1e-12, epsrel=1e-12, limit=200_000):
    """Integrate ``f`` over each interval ``[a[k], b[k]]`` independently.

    Returns arrays ``(values, errors)`` shaped like the broadcast of ``a`` and
    ``b``.  Raises :class:`QuadratureFailure` when any interval cannot reach
    its tolerance within ``limit`` panel evaluations.
    """
    shape = np.broadcast(np.asarray(a), np.asarray(b)).shape
    v, e = _adaptive(f, a, b, (_GK_NODES, _GK_WHI, _GK_WLO), epsabs, epsrel, limit)
    return v.reshape(shape), e.reshape(shape)


def gauss_kronrod(f, a, b, epsabs=1e-12, epsrel=1e-12, limit=200_000):
    """Adaptive G7/K15 quadrature of ``f`` on ``[a, b]``.

    >>> v, e = gauss_kronrod(lambda x: x**2, 0.0, 2.0)
    >>> round(v, 12)
    2.666666666667
    """
    v, e = _adaptive(f, a, b, (_GK_NODES, _GK_WHI, _GK_WLO), epsabs, epsrel, limit)
    return float(v[0]), float(e[0])


def gauss_legendre_adaptive(f, a, b, order=10, epsabs=1e-12, epsrel=1e-12, limit=200_000):
    """Adaptive composite Gauss-Legendre quadrature.

    Each panel is integrated with ``order`` and ``2 * order`` points; their
    difference is the panel error estimate, and panels are bisected until the
    summed estimate meets the tolerance.
    """
    v, e = _adaptive(f, a, b, _legendre_pair(int(order)), epsabs, epsrel, limit)
    return float(v[0]), float(e[0])
