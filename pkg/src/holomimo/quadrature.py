"""Adaptive Gauss-Kronrod quadrature for vector/matrix-valued smooth integrands.

Both routines subdivide the panel with the worst G7-vs-K15 discrepancy until
the summed error estimate falls below an absolute tolerance.  Integrands are
evaluated vectorized: ``f`` receives node arrays of shape (n,) and must return
an array whose leading axis has length n.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np

__all__ = ["QuadratureError", "adaptive_quad", "adaptive_quad_2d"]

# G7/K15 nodes and weights on [-1, 1] (QUADPACK constants); the first 7 nodes
# are the embedded Gauss points.
_KRONROD_NODES = np.array([
    0.000000000000000, -0.405845151377397, 0.405845151377397,
    -0.741531185599394, 0.741531185599394, -0.949107912342759,
    0.949107912342759, -0.207784955007898, 0.207784955007898,
    -0.586087235467691, 0.586087235467691, -0.864864423359769,
    0.864864423359769, -0.991455371120813, 0.991455371120813,
])
_GAUSS_WEIGHTS = np.array([
    0.417959183673469, 0.381830050505119, 0.381830050505119,
    0.279705391489277, 0.279705391489277, 0.129484966168870,
    0.129484966168870, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
])
_KRONROD_WEIGHTS = np.array([
    0.209482141084728, 0.190350578064785, 0.190350578064785,
    0.140653259715525, 0.140653259715525, 0.063092092629979,
    0.063092092629979, 0.204432940075298, 0.204432940075298,
    0.169004726639267, 0.169004726639267, 0.104790010322250,
    0.104790010322250, 0.022935322010529, 0.022935322010529,
])


class QuadratureError(RuntimeError):
    "Raised when the panel subdivision budget is exhausted before convergence."


def _panel_1d(f, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _KRONROD_NODES
    fx = np.asarray(f(x))
    k15 = half * np.tensordot(_KRONROD_WEIGHTS, fx, axes=(0, 0))
    g7 = half * np.tensordot(_GAUSS_WEIGHTS, fx, axes=(0, 0))
    err = float(np.max(np.abs(k15 - g7)))
    return k15, err


def adaptive_quad(f, a: float, b: float, abs_tol: float = 1e-12,
                  max_panels: int = 4096):
    """Integrate a vector-valued ``f`` over [a, b] to absolute tolerance.

    Returns (integral, error_estimate).  The error estimate is the summed
    K15-G7 discrepancy over the final panels.
    """
    if not b > a:
        raise ValueError("integration interval must have b > a")
    counter = itertools.count()
    val, err = _panel_1d(f, a, b)
    heap = [(-err, next(counter), a, b, val, err)]
    total_err = err
    while total_err > abs_tol:
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"1-D quadrature did not reach abs_tol={abs_tol:g} within "
                f"{max_panels} panels (err={total_err:g})")
        neg_err, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        lval, lerr = _panel_1d(f, pa, mid)
        rval, rerr = _panel_1d(f, mid, pb)
        total_err += lerr + rerr - perr
        heapq.heappush(heap, (-lerr, next(counter), pa, mid, lval, lerr))
        heapq.heappush(heap, (-rerr, next(counter), mid, pb, rval, rerr))
    total = sum(item[4] for item in heap)
    return total, total_err


def _panel_2d(f, ax, bx, ay, by):
    hx, hy = 0.5 * (bx - ax), 0.5 * (by - ay)
    x = 0.5 * (ax + bx) + hx * _KRONROD_NODES
    y = 0.5 * (ay + by) + hy * _KRONROD_NODES
    xx, yy = np.meshgrid(x, y, indexing="ij")
    fx = np.asarray(f(xx.ravel(), yy.ravel()))
    fx = fx.reshape((15, 15) + fx.shape[1:])
    k = hx * hy * np.einsum("i,j,ij...->...", _KRONROD_WEIGHTS, _KRONROD_WEIGHTS, fx)
    g = hx * hy * np.einsum("i,j,ij...->...", _GAUSS_WEIGHTS, _GAUSS_WEIGHTS, fx)
    err = float(np.max(np.abs(k - g)))
    return k, err


def adaptive_quad_2d(f, ax: float, bx: float, ay: float, by: float,
                     abs_tol: float = 1e-11, max_panels: int = 8192):
    """Integrate ``f(x, y)`` over the rectangle [ax,bx] x [ay,by].

    Rectangles are split along their longer side; the split order always
    follows the largest current error estimate, so results are deterministic.
    """
    if not (bx > ax and by > ay):
        raise ValueError("integration rectangle must be nondegenerate")
    counter = itertools.count()
    val, err = _panel_2d(f, ax, bx, ay, by)
    heap = [(-err, next(counter), ax, bx, ay, by, val, err)]
    total_err = err
    while total_err > abs_tol:
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"2-D quadrature did not reach abs_tol={abs_tol:g} within "
                f"{max_panels} panels (err={total_err:g})")
        _, _, pax, pbx, pay, pby, pval, perr = heapq.heappop(heap)
        total_err -= perr
        if (pbx - pax) >= (pby - pay):
            mid = 0.5 * (pax + pbx)
            parts = [(pax, mid, pay, pby), (mid, pbx, pay, pby)]
        else:
            mid = 0.5 * (pay + pby)
            parts = [(pax, pbx, pay, mid), (pax, pbx, mid, pby)]
        for rect in parts:
            v, e = _panel_2d(f, *rect)
            total_err += e
            heapq.heappush(heap, (-e, next(counter)) + rect + (v, e))
    total = sum(item[6] for item in heap)
    return total, total_err
