"""Adaptive composite Gauss-Legendre quadrature.

All spectral integrals in this package go through :func:`adaptive_quad`.
Panels are split where the error estimate (difference between a 20-point
and a 10-point rule) is too large, which resolves narrow Lorentzian peaks
provided their centers are passed as breakpoints.
"""

from __future__ import annotations

import heapq
from typing import Callable, Sequence

import numpy as np

_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(10)
_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(20)


def _panel(f, a: float, b: float) -> tuple[complex, float]:
    """Integral estimate on [a, b] and its error estimate."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    hi = half * np.sum(_WEIGHTS_HI * f(mid + half * _NODES_HI))
    lo = half * np.sum(_WEIGHTS_LO * f(mid + half * _NODES_LO))
    return hi, abs(hi - lo)


def adaptive_quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    breakpoints: Sequence[float] = (),
    max_panels: int = 4096,
) -> complex:
    """Integrate a vectorized function over [a, b].

    Breakpoints inside (a, b) seed initial panel edges; panels with the
    largest error estimates are bisected until the summed error estimate
    meets ``rel_tol * |integral| + abs_tol``.
    """
    if b <= a:
        return 0.0
    edges = sorted({a, b, *(x for x in breakpoints if a < x < b)})
    heap = []  # (-err, a, b, value)
    total = 0.0 + 0.0j
    total_err = 0.0
    for lo_e, hi_e in zip(edges[:-1], edges[1:]):
        val, err = _panel(f, lo_e, hi_e)
        heapq.heappush(heap, (-err, lo_e, hi_e, val))
        total += val
        total_err += err

    n_panels = len(heap)
    while n_panels < max_panels:
        if total_err <= rel_tol * abs(total) + abs_tol:
            break
        neg_err, lo_e, hi_e, val = heapq.heappop(heap)
        mid = 0.5 * (lo_e + hi_e)
        v1, e1 = _panel(f, lo_e, mid)
        v2, e2 = _panel(f, mid, hi_e)
        total += v1 + v2 - val
        total_err += e1 + e2 - (-neg_err)
        heapq.heappush(heap, (-e1, lo_e, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi_e, v2))
        n_panels += 1

    result = complex(total)
    if abs(result.imag) <= 1e-13 * (abs(result.real) + 1.0):
        return result.real
    return result


def adaptive_quad_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    breakpoints: Sequence[float] = (),
) -> complex:
    """Integrate over the whole real line via the tangent substitution.

    The integrand must decay at least like 1/omega^2 for the transformed
    integrand to stay bounded.
    """

    def g(u):
        w = np.tan(u)
        return f(w) / np.cos(u) ** 2

    mapped = [float(np.arctan(x)) for x in breakpoints]
    eps = 1e-12
    return adaptive_quad(
        g, -np.pi / 2 + eps, np.pi / 2 - eps,
        rel_tol=rel_tol, abs_tol=abs_tol, breakpoints=mapped,
    )


def composite_gauss_rule(
    a: float, b: float, n_points: int, breakpoints: Sequence[float] = ()
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed composite Gauss-Legendre rule with at least ``n_points`` nodes.

    Panel edges include the given breakpoints, so peaked weight functions
    are sampled adequately when their peaks are listed.
    """
    edges = sorted({a, b, *(x for x in breakpoints if a < x < b)})
    n_panels = max(len(edges) - 1, int(np.ceil(n_points / 20)))
    # Refine the widest panels until the panel count is reached.
    widths = [(-(hi - lo), lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    heapq.heapify(widths)
    while len(widths) < n_panels:
        _, lo, hi = heapq.heappop(widths)
        mid = 0.5 * (lo + hi)
        heapq.heappush(widths, (-(mid - lo), lo, mid))
        heapq.heappush(widths, (-(hi - mid), mid, hi))
    nodes, weights = [], []
    for _, lo, hi in sorted(widths, key=lambda t: t[1]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (lo + hi)
        nodes.append(mid + half * _NODES_HI)
        weights.append(half * _WEIGHTS_HI)
    return np.concatenate(nodes), np.concatenate(weights)
