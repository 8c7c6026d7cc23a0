"""Small numerical kernels: panel-adaptive Gauss-Kronrod quadrature and golden-section search."""
from __future__ import annotations

import math

import numpy as np

__all__ = ["QuadratureError", "integrate_panels", "golden_section"]

# Kronrod 15-point abscissae on [0, 1]; the Gauss 7-point rule uses the odd-indexed ones.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS = np.zeros(15)
GAUSS[[1, 3, 5, 13, 11, 9]] = np.concatenate([_WG[:3], _WG[:3]])
GAUSS[7] = _WG[3]


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""

    def __init__(self, message, value, error):
        super().__init__(message)
        self.value = value
        self.error = error


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float)
    y = y.reshape(y.shape[:-1] + x.shape)  # (..., panels, 15)
    k = (y @ KRONROD) * half
    g = (y @ GAUSS) * half
    a = (np.abs(y) @ KRONROD) * half
    return k, np.abs(k - g), a


def integrate_panels(f, edges, rtol=1e-9, atol=0.0, max_rounds=40, max_panels=4_000_000):
    """Integrate ``f`` over consecutive panels ``edges[0] .. edges[-1]``.

    ``f`` maps a 1-D array of abscissae to an array whose last axis matches it,
    so vector-valued integrands are integrated together. Panels are bisected
    until the summed error of every component is below
    ``max(atol, rtol * int |f|)``.

    Returns ``(value, error, scale)`` where ``scale`` is ``int |f|``.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    width_total = edges[-1] - edges[0]

    done_val = done_err = done_abs = 0.0
    for _ in range(max_rounds):
        k, err, a = _gk15(f, lo, hi)
        val = done_val + k.sum(axis=-1)
        scale = done_abs + a.sum(axis=-1)
        target = np.maximum(atol, rtol * scale)
        total_err = done_err + err.sum(axis=-1)
        if np.all(total_err <= target):
            return val, total_err, scale
        share = (hi - lo) / width_total
        ok = np.all(err <= 0.5 * np.asarray(target)[..., None] * share, axis=tuple(range(err.ndim - 1)))
        done_val = done_val + k[..., ok].sum(axis=-1)
        done_err = done_err + err[..., ok].sum(axis=-1)
        done_abs = done_abs + a[..., ok].sum(axis=-1)
        lo, hi = lo[~ok], hi[~ok]
        if 2 * lo.size > max_panels:
            break
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        order = np.argsort(lo)
        lo, hi = lo[order], hi[order]
    raise QuadratureError(
        f"quadrature did not converge (error {total_err} > target {target})", val, total_err
    )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, xtol=1e-10, max_iter=200):
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Infinite values are allowed and compare above every finite one.
    """
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)
