"""Vectorized panel quadrature (Gauss-Legendre with node doubling, Gauss-Jacobi).

Gauss-Legendre with doubling-on-disagreement is used for analytic
integrands; Gauss-Jacobi rules absorb the |.|^s endpoint behaviour of
fractional-power lobes (sin^s, cos^s), where plain Legendre only
converges at an algebraic rate.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

_CHUNK_POINTS = 2_000_000


@lru_cache(maxsize=64)
def gl_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(m)
    return x, w


@lru_cache(maxsize=512)
def jacobi_rule(m: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_jacobi(m, alpha, beta)
    return x, w


def _gl_batch(f, lo: np.ndarray, hi: np.ndarray, m: int) -> np.ndarray:
    """Gauss-Legendre values of f on each [lo_i, hi_i], chunked for memory."""
    x, w = gl_rule(m)
    out = np.empty(lo.size)
    block = max(1, _CHUNK_POINTS // m)
    for start in range(0, lo.size, block):
        sl = slice(start, min(start + block, lo.size))
        a = lo[sl][:, None]
        h = (hi[sl] - lo[sl])[:, None]
        pts = a + h * (x[None, :] + 1.0) / 2.0
        out[sl] = (f(pts) @ w) * (h[:, 0] / 2.0)
    return out


def gl_panels(
    f,
    edges,
    abs_tol: float,
    start_nodes: int = 16,
    max_nodes: int = 1024,
) -> tuple[float, float]:
    """Integrate f over the consecutive panels given by ``edges``.

    Per panel, node counts double until consecutive estimates agree to
    the per-panel budget; the summed final disagreement is returned as
    the quadrature error estimate.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0, 0.0
    lo, hi = edges[:-1], edges[1:]
    n = lo.size
    per_budget = abs_tol / n
    vals = _gl_batch(f, lo, hi, start_nodes)
    errs = np.full(n, np.inf)
    active = np.arange(n)
    m = start_nodes
    while active.size and m < max_nodes:
        m *= 2
        new = _gl_batch(f, lo[active], hi[active], m)
        diff = np.abs(new - vals[active])
        vals[active] = new
        errs[active] = diff
        active = active[diff > per_budget]
    total = math.fsum(vals.tolist())
    err = math.fsum(errs.tolist())
    return total, err


def sin_power_lobe_batch(s: float, centers: np.ndarray, g, m: int = 48) -> np.ndarray:
    """Integrals of (cos w)^s * g(c + w) over w in [-pi/2, pi/2], per center c.

    Handles the fractional-power zeros at both lobe ends via a
    Gauss-Jacobi rule with matching weight; g must be analytic across
    each lobe and vectorized.
    """
    x, wj = jacobi_rule(m, s, s)
    # (cos(pi x / 2))^s = (1-x)^s (1+x)^s rho(x)^s with analytic rho
    rho = np.sin(np.pi * (1.0 - np.abs(x)) / 2.0) / ((1.0 - np.abs(x)) * (1.0 + np.abs(x)))
    base = wj * rho**s
    w_pts = (np.pi / 2.0) * x
    vals = g(centers[:, None] + w_pts[None, :])
    return (np.pi / 2.0) * (vals @ base)


def one_sided_jacobi(s: float, a: float, b: float, h, m: int = 64) -> float:
    """Integral over [a, b] of (b-u)^s * h(u) with h analytic."""
    x, wj = jacobi_rule(m, s, 0.0)
    half = (b - a) / 2.0
    u = a + half * (x + 1.0)
    scale = half ** (s + 1.0)
    return float(scale * np.dot(wj, h(u)))
