"""Hyperplane sections of the unit cube, by three independent routes.

sigma(a, t) is the (n-1)-volume of the slice of [-1/2, 1/2]^n by the
hyperplane <x, a> = t, equivalently the density at t of sum_j a_j U_j
for independent U_j uniform on [-1/2, 1/2].  The three evaluators are

* an oscillatory-integral route, 2 int_0^inf cos(2 pi u t) prod_j
  sinc(pi a_j u) du, integrated lobe by lobe with an analytic tail bound
  built from the three largest coordinates;
* an exact inclusion-exclusion over cube vertices (piecewise polynomial
  in t), with compensated summation and a cancellation monitor;
* a slab-volume Monte Carlo estimator with a reported standard error.

sigma(a, t) <= sqrt(2) always, with equality only for t = 0 and two
coordinates of size 1/sqrt(2); the quantitative report certifies how
close near-maximizers must be to that configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import gl_panels
from .ball_integral import ball_integral, sinc_power_integral
from .core import (
    DEFAULT_TOL,
    Direction,
    IntegralResult,
    StabilityReport,
    ToleranceConfig,
    canonicalize,
    two_largest_indices,
)
from .errors import (
    AgreementError,
    DimensionTooLarge,
    DomainError,
    EpsilonOutOfRange,
    IllConditioned,
    NonConvergent,
    TailNotBounded,
)

SQRT2 = math.sqrt(2.0)
GEOMETRIC_MAX_N = 12
_CANCELLATION_LIMIT = 1e8
_MIN_COORD = 1e-8

SLICE_EPS_MAX = 1.0 / 75.0
SLICE_LOWER_WINDOW = 37.5
SLICE_UPPER_WINDOW = 2.0
SLICE_TAIL_WINDOW = 50.0


@dataclass(frozen=True)
class SectionQuery:
    """A direction and a hyperplane offset (in units of the cube side)."""

    a: Direction
    t: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise ValueError("offset t must be finite")


def _geometric_raw(weights: np.ndarray, t: float) -> float:
    """Inclusion-exclusion section volume for positive weights.

    Evaluates the alternating vertex sum with exact (fsum) accumulation
    and raises IllConditioned when the cancellation ratio passes 1e8.
    """
    w = np.sort(np.asarray(weights, dtype=float))[::-1]
    n = w.size
    if n == 1:
        return 1.0 if abs(t) <= 0.5 else 0.0
    if n > GEOMETRIC_MAX_N:
        raise DimensionTooLarge(
            f"inclusion-exclusion needs 2^n terms; n={n} > {GEOMETRIC_MAX_N}"
        )
    if w[-1] < _MIN_COORD:
        raise IllConditioned(
            f"smallest coordinate {w[-1]:.2e} below {_MIN_COORD}; reduce dimension first"
        )
    total = float(w.sum())
    y = t + total / 2.0
    if y <= 0.0 or y >= total:
        return 0.0
    idx = np.arange(1 << n, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & 1
    subset_sums = bits.astype(float) @ w
    signs = 1.0 - 2.0 * (bits.sum(axis=1) % 2).astype(float)
    rel = y - subset_sums
    np.maximum(rel, 0.0, out=rel)
    terms = signs * rel ** (n - 1)
    denom = math.factorial(n - 1) * float(np.prod(w))
    num = math.fsum(terms.tolist())
    value = num / denom
    mag = math.fsum(np.abs(terms).tolist()) / denom
    if value <= 0.0:
        return 0.0
    if mag / value > _CANCELLATION_LIMIT:
        raise IllConditioned(
            f"cancellation ratio {mag / value:.2e} exceeds {_CANCELLATION_LIMIT:.0e}"
        )
    return value


def section_volume_geometric(q: SectionQuery) -> float:
    """Exact sigma(a, t) via the alternating vertex sum (n <= 12)."""
    can = canonicalize(q.a)
    return _geometric_raw(np.array(can.coords), q.t)


def section_volume_fourier(
    q: SectionQuery, cfg: ToleranceConfig = DEFAULT_TOL
) -> IntegralResult:
    """sigma(a, t) by the oscillatory cosine integral with a certified tail.

    The integrand is folded to the cosine-only form (the imaginary part
    vanishes by symmetry) and integrated lobe by lobe between zeros of
    the fastest oscillating factor.  Beyond the cutoff, |prod sinc| is
    bounded by the product of the three largest 1/(pi a_j u) factors;
    if that forces more panels than cfg.tail_cutoff the evaluator
    refuses, and the geometric oracle should be used instead.
    """
    can = canonicalize(q.a)
    if can.n == 1:
        return IntegralResult(
            1.0 if abs(q.t) <= 0.5 else 0.0, 0.0, "closed_form", "indicator, n=1"
        )
    w = np.array(can.coords)
    t = abs(float(q.t))
    m = min(3, can.n)
    tail_tol = cfg.quad_abs_tol / 2.0
    prod_top = float(np.prod(np.pi * w[:m]))
    cutoff = (2.0 / ((m - 1) * tail_tol * prod_top)) ** (1.0 / (m - 1))
    lobe = 1.0 / w[0] if t == 0.0 else min(1.0 / w[0], 1.0 / (2.0 * t))
    n_panels = int(math.ceil(cutoff / lobe))
    if n_panels > cfg.tail_cutoff:
        raise TailNotBounded(
            f"certifying the tail needs {n_panels} panels (> {cfg.tail_cutoff}); "
            "fall back to section_volume_geometric"
        )
    cutoff = n_panels * lobe
    tail = 2.0 / ((m - 1) * prod_top * cutoff ** (m - 1))

    def integrand(u: np.ndarray) -> np.ndarray:
        out = np.cos(2.0 * math.pi * t * u) if t != 0.0 else np.ones_like(u)
        for wj in w:
            out = out * np.sinc(wj * u)
        return out

    edges = np.linspace(0.0, cutoff, n_panels + 1)
    val, qerr = gl_panels(integrand, edges, cfg.quad_abs_tol / 2.0, start_nodes=16)
    value = 2.0 * val
    err = 2.0 * qerr + tail
    if err > cfg.quad_abs_tol:
        raise NonConvergent(
            f"certified bound {err:.3e} exceeds tolerance {cfg.quad_abs_tol:.3e}"
        )
    return IntegralResult(value, err, "quadrature", f"panels={n_panels}, cutoff={cutoff:.4g}")


def section_volume_mc(
    q: SectionQuery, slab_halfwidth: float, samples: int, seed: int
) -> IntegralResult:
    """Monte Carlo slab estimator: P(|<x,a> - t| <= h) / (2h) on the cube.

    Deterministic for a fixed seed; the reported bound is one standard
    error of the fraction estimate, not a certificate.
    """
    if slab_halfwidth <= 0.0:
        raise DomainError("slab_halfwidth must be positive")
    if samples < 10_000:
        raise DomainError("need at least 1e4 samples")
    a = np.array(q.a.coords)
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    block = 1 << 19
    while remaining > 0:
        k = min(block, remaining)
        x = rng.random((k, a.size)) - 0.5
        proj = x @ a
        hits += int(np.count_nonzero(np.abs(proj - q.t) <= slab_halfwidth))
        remaining -= k
    frac = hits / samples
    value = frac / (2.0 * slab_halfwidth)
    se = math.sqrt(max(frac * (1.0 - frac), 1.0 / samples) / samples) / (
        2.0 * slab_halfwidth
    )
    return IntegralResult(value, se, "monte_carlo", f"samples={samples}, seed={seed}")


def projection_bound(a: Direction) -> float:
    """1 / max_j |a_j|: every section volume is at most this."""
    return 1.0 / max(abs(c) for c in a.coords)


def coordinate_factor(c: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The Hoelder factor I(c) = int |sin(pi c u)/(pi c u)|^(1/c^2) du.

    Equal to sqrt(s) B(s) with s = 1/c^2.  For c <= 1/sqrt(2) (s >= 2)
    the value is at most sqrt(2), which is asserted; for c in
    (1/sqrt(2), 1) the integral still converges (1 < s < 2) but exceeds
    sqrt(2), and is evaluated at a relaxed certified tolerance.
    """
    if not (0.0 < c <= 1.0):
        raise DomainError(f"c must lie in (0, 1] (got {c})")
    if c > 0.999:
        raise DomainError("integral diverges as c -> 1 (exponent s -> 1)")
    s = 1.0 / (c * c)
    if s >= 1.5:
        value = math.sqrt(s) * ball_integral(s, cfg).value
    else:
        value = math.sqrt(s) * sinc_power_integral(s, 1e-5, cfg.tail_cutoff).value
    if s >= 2.0 and value > SQRT2 + 1e-9:
        raise AgreementError(
            f"I({c}) = {value} exceeds sqrt(2) although s = {s} >= 2"
        )
    return value


def _geometric_conditioned(weights: np.ndarray, t: float) -> float:
    """Geometric evaluator with automatic dimension reduction.

    When the alternating sum is too ill-conditioned to trust (several
    near-zero coordinates at once), the smallest coordinate is dropped
    and the rest renormalized until the cancellation monitor accepts;
    each drop of a coordinate of size d perturbs the value by O(d).
    """
    w = np.sort(np.asarray(weights, dtype=float))[::-1]
    while True:
        try:
            return _geometric_raw(w, t)
        except IllConditioned:
            if w.size <= 2:
                raise
            w = w[:-1]
            w = w / math.sqrt(math.fsum((w * w).tolist()))


def section_volume(a: Direction, t: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """sigma(a, t) through the preferred route for the dimension at hand.

    Uses the exact geometric evaluator up to n = 12 (reducing dimension
    when conditioning demands it), and the certified oscillatory
    integral beyond.
    """
    can = canonicalize(a)
    if can.n <= GEOMETRIC_MAX_N:
        return _geometric_conditioned(np.array(can.coords), t)
    return section_volume_fourier(SectionQuery(a, t), cfg).value


def quantitative_slice_report(
    a: Direction, t: float, eps: float, cfg: ToleranceConfig = DEFAULT_TOL
) -> StabilityReport:
    """Certify the near-maximizer structure forced by sigma(a,t) >= (1-eps) sqrt(2).

    When the hypothesis holds, the two largest coordinates must lie in
    [(1 - 37.5 eps)/sqrt(2), (1 + 2 eps)/sqrt(2)] and the remaining
    squared mass is at most 50 eps; deviations are reported in units of
    eps/sqrt(2).  Valid for eps < 1/75.
    """
    if not (0.0 < eps < SLICE_EPS_MAX):
        raise EpsilonOutOfRange(f"eps must lie in (0, 1/75) (got {eps})")
    sigma = section_volume(a, t, cfg)
    hypothesis = sigma >= (1.0 - eps) * SQRT2
    if not hypothesis or a.n < 2:
        return StabilityReport(False, eps, None, 0.0, 0.0, 0.0, False)
    j0, j1 = two_largest_indices(a)
    c0, c1 = abs(a.coords[j0]), abs(a.coords[j1])
    inv = 1.0 / SQRT2
    unit = eps * inv
    lower_dev = max(inv - c0, inv - c1) / unit
    upper_dev = max(c0 - inv, c1 - inv) / unit
    tail = math.fsum(
        a.coords[j] ** 2 for j in range(a.n) if j not in (j0, j1)
    )
    certified = (
        lower_dev <= SLICE_LOWER_WINDOW + 1e-9
        and upper_dev <= SLICE_UPPER_WINDOW + 1e-9
        and tail <= SLICE_TAIL_WINDOW * eps + 1e-9
    )
    return StabilityReport(True, eps, (j0, j1), lower_dev, upper_dev, tail, certified)
