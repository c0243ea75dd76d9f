"""Ball's integral B(s) = int |sin(pi u)/(pi u)|^s du and its series machinery.

B(2) = 1 is an identity and B(s) < sqrt(2/s) for s > 2 (Ball's integral
inequality).  The reverse direction is quantified through the expansions

    B(s)      = 1 - sum_n |sigma(sigma-1)...(sigma-n+1)|/n! * beta_n
    sqrt(2/s) = 1 - sum_n |sigma(sigma-1)...(sigma-n+1)|/n! * alpha_n

with sigma = s/2 - 1, whose coefficients alpha_n < beta_n are computed
here both in closed form and by certified quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import erfc, gammaln, sici, zeta

from ._quad import gl_panels, one_sided_jacobi, sin_power_lobe_batch
from .core import DEFAULT_TOL, IntegralResult, ToleranceConfig
from .errors import BracketFailure, CoefficientOverflow, DomainError, NonConvergent

ALPHA_CLOSED_FORM_MAX_N = 60
_SQRT2 = math.sqrt(2.0)


def _sin_power_unit_integral(s: float) -> float:
    """c(s) = int_0^1 (sin pi v)^s dv, by the Wallis/Gamma closed form."""
    return math.sqrt(math.pi) / math.pi * math.exp(gammaln((s + 1) / 2) - gammaln(s / 2 + 1))


def _tail_bracket(s: float, K: int) -> tuple[float, float]:
    """Enclosure of sum_{k>=K} int_k^{k+1} |sin pi u|^s (pi u)^-s du.

    The lobe weight (sin pi v)^s is symmetric about v = 1/2 and u^-s is
    convex, so Jensen gives the midpoint lower bound and the endpoint
    average the upper bound; both sums are Hurwitz zeta values.
    """
    c = _sin_power_unit_integral(s)
    pref = c * math.pi ** (-s)
    lo = pref * float(zeta(s, K + 0.5))
    hi = pref * (float(zeta(s, K)) + float(zeta(s, K + 1))) / 2.0
    return lo, hi


def sinc_power_integral(s: float, tol: float, max_lobes: int = 200_000) -> IntegralResult:
    """B(s) for any s > 1, lobe quadrature plus a bracketed analytic tail.

    Lobes use Gauss-Jacobi rules matching the |sin|^s endpoint zeros;
    the tail beyond the cutoff is enclosed between two Hurwitz-zeta
    sums and its midpoint added to the value.
    """
    if s <= 1.0:
        raise DomainError(f"integral diverges for s <= 1 (got s={s})")
    K = 64
    while True:
        lo, hi = _tail_bracket(s, K)
        if hi - lo <= tol / 2 or K >= max_lobes:
            break
        K = min(2 * K, max_lobes)

    def head(m: int) -> float:
        p0 = one_sided_jacobi(s, 0.0, 1.0, lambda u: (np.sinc(u) / (1.0 - u)) ** s, m=m)
        ks = np.arange(1, K, dtype=float)
        lobes = sin_power_lobe_batch(
            s, math.pi * (ks + 0.5), lambda y: y ** (-s), m=m
        ) / math.pi
        return p0 + math.fsum(lobes.tolist())

    h1, h2 = head(48), head(64)
    quad_err = abs(h2 - h1) + 5e-16 * K
    value = 2.0 * (h2 + (lo + hi) / 2.0)
    err = 2.0 * (quad_err + (hi - lo) / 2.0)
    if err > tol:
        raise NonConvergent(
            f"certified bound {err:.3e} exceeds tolerance {tol:.3e} for s={s}"
        )
    return IntegralResult(value, err, "quadrature", f"lobes={K}, jacobi tail bracket")


def ball_integral(s: float, cfg: ToleranceConfig = DEFAULT_TOL) -> IntegralResult:
    """Evaluate B(s) = int_R |sin(pi u)/(pi u)|^s du with a certified bound."""
    if s < 1.5:
        raise DomainError(f"s must be >= 1.5 (tail too heavy below; got {s})")
    return sinc_power_integral(s, min(cfg.quad_abs_tol, 1e-10), cfg.tail_cutoff)


def gaussian_comparison(s: float) -> float:
    """The Gaussian side sqrt(2/s) of Ball's inequality."""
    if s <= 0:
        raise DomainError("s must be positive")
    return math.sqrt(2.0 / s)


def gaussian_identity_quad(s: float, cfg: ToleranceConfig = DEFAULT_TOL) -> IntegralResult:
    """Quadrature self-check of sqrt(2/s) = (1/pi) int (e^{-t^2/pi})^{s/2} dt."""
    if s <= 0:
        raise DomainError("s must be positive")
    q = s / (2.0 * math.pi)
    L = math.sqrt(46.0 / q)
    edges = np.linspace(0.0, L, max(8, int(L)) + 1)
    val, err = gl_panels(lambda t: np.exp(-q * t * t), edges, cfg.quad_abs_tol / 4)
    tail = math.exp(-q * L * L) / (2.0 * q * L)
    return IntegralResult(2.0 / math.pi * val, 2.0 / math.pi * (err + tail), "quadrature")


def alpha_coeff(n: int) -> float:
    """alpha_n = (1/pi) int e^{-t^2/pi} (1 - e^{-t^2/pi})^n dt, in closed form.

    Expanding the power binomially gives sum_j (-1)^j C(n,j)/sqrt(j+1),
    an alternating sum with severe cancellation, so it is evaluated in
    50-digit arithmetic before rounding to float.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > ALPHA_CLOSED_FORM_MAX_N:
        raise CoefficientOverflow(
            f"binomial cancellation unsafe for n={n} > {ALPHA_CLOSED_FORM_MAX_N}; "
            "use alpha_coeff_quad"
        )
    return _alpha_closed(n)


@lru_cache(maxsize=256)
def _alpha_closed(n: int) -> float:
    with mpmath.workdps(50):
        total = mpmath.fsum(
            (-1) ** j * mpmath.binomial(n, j) / mpmath.sqrt(j + 1) for j in range(n + 1)
        )
        return float(total)


def alpha_coeff_quad(n: int, cfg: ToleranceConfig = DEFAULT_TOL) -> IntegralResult:
    """alpha_n by direct quadrature with a certified Gaussian tail."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    L = 14.0

    def f(t):
        g = np.exp(-t * t / math.pi)
        return g * (1.0 - g) ** n

    edges = np.linspace(0.0, L, 29)
    val, err = gl_panels(f, edges, cfg.quad_abs_tol / 4)
    tail = math.pi / 2.0 * float(erfc(L / math.sqrt(math.pi)))
    return IntegralResult(2.0 / math.pi * val, 2.0 / math.pi * err + tail, "quadrature")


@lru_cache(maxsize=256)
def _beta_cached(n: int, tol: float) -> tuple[float, float, int]:
    target = tol / 4.0
    M = max(16, math.ceil((n / (6.0 * max(target, 1e-14))) ** (1.0 / 3.0) / math.pi) + 1)

    def f(t):
        s2 = np.sinc(t / math.pi) ** 2
        return s2 * (1.0 - s2) ** n

    T = M * math.pi
    edges = np.arange(M + 1) * math.pi
    val, qerr = gl_panels(f, edges, tol / 4.0, start_nodes=24)
    # tail: 0 <= sin^2/t^2 - integrand <= n sin^4/t^4 <= n/t^4 beyond T
    si_2T = float(sici(2.0 * T)[0])
    upper = math.pi / 2.0 - si_2T + math.sin(T) ** 2 / T
    slack = n / (3.0 * T**3)
    tail_mid = upper - slack / 2.0
    value = 2.0 / math.pi * (val + tail_mid)
    err = 2.0 / math.pi * (qerr + slack / 2.0) + 1e-15
    return value, err, M


def beta_coeff(n: int, cfg: ToleranceConfig = DEFAULT_TOL) -> IntegralResult:
    """beta_n = (1/pi) int (sin^2 t/t^2)(1 - sin^2 t/t^2)^n dt by quadrature.

    The integrand is entire; beyond the cutoff it is enclosed between
    sin^2 t/t^2 (computed exactly through the sine integral) and the
    same minus n sin^4 t/t^4.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    value, err, M = _beta_cached(n, cfg.quad_abs_tol)
    if err > cfg.quad_abs_tol:
        raise NonConvergent(f"beta_{n} bound {err:.2e} exceeds {cfg.quad_abs_tol:.2e}")
    return IntegralResult(value, err, "quadrature", f"panels={M}")


@dataclass(frozen=True)
class SeriesCoefficients:
    """alpha_n / beta_n for n = 1..count, with the ordering verified."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    count: int

    def __post_init__(self) -> None:
        if len(self.alphas) != self.count or len(self.betas) != self.count:
            raise ValueError("coefficient count mismatch")
        for i, (a, b) in enumerate(zip(self.alphas, self.betas), start=1):
            if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
                raise ValueError(f"coefficients at n={i} outside (0,1): {a}, {b}")
            if not a < b:
                raise ValueError(f"alpha_{i} = {a} is not below beta_{i} = {b}")


def build_series_coefficients(
    count: int, cfg: ToleranceConfig = DEFAULT_TOL
) -> SeriesCoefficients:
    alphas = []
    for n in range(1, count + 1):
        if n <= ALPHA_CLOSED_FORM_MAX_N:
            alphas.append(alpha_coeff(n))
        else:
            alphas.append(alpha_coeff_quad(n, cfg).value)
    betas = [beta_coeff(n, cfg).value for n in range(1, count + 1)]
    return SeriesCoefficients(tuple(alphas), tuple(betas), count)


def _product_coeffs(sigma: float, N: int) -> list[float]:
    """|sigma(sigma-1)...(sigma-n+1)|/n! for n = 1..N, by recurrence."""
    out = []
    c = sigma
    for n in range(1, N + 1):
        if n > 1:
            c = c * abs(sigma - (n - 1)) / n
        out.append(c)
    return out


def series_partial(
    s: float, N: int | None = None, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[float, float]:
    """N-term partial sums of the expansions of B(s) and sqrt(2/s).

    Returns (beta_series, alpha_series).  Their difference is a sum of
    positive terms since alpha_n < beta_n, so the beta series sits
    below the alpha series and decreases with N on (2, 4).
    """
    if not (2.0 <= s <= 4.0):
        raise DomainError(f"series form requires s in [2, 4] (got {s})")
    if N is None:
        N = cfg.series_terms
    if N < 1:
        raise DomainError("N must be >= 1")
    sigma = s / 2.0 - 1.0
    coeffs = _product_coeffs(sigma, N)
    sc = build_series_coefficients(N, cfg)
    beta_part = 1.0 - math.fsum(c * b for c, b in zip(coeffs, sc.betas))
    alpha_part = 1.0 - math.fsum(c * a for c, a in zip(coeffs, sc.alphas))
    return beta_part, alpha_part


def first_term_bound(delta: float) -> float:
    """2 + delta * 6 sqrt(2)/(3 - 2 sqrt(2)), the one-term threshold cap."""
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    return 2.0 + delta * 6.0 * _SQRT2 / (3.0 - 2.0 * _SQRT2)


def reverse_bound_threshold(delta: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest s >= 2 with B(s) >= (1 - delta) sqrt(2/s), by bisection.

    The threshold must land in [2, 2 + 50 delta] and below
    first_term_bound(delta); violation of either raises, since it would
    contradict the reverse-bound lemma.
    """
    if not (0.0 < delta <= 0.02):
        raise DomainError(f"delta must lie in (0, 0.02] (got {delta})")
    tol = min(cfg.quad_abs_tol, 1e-10)

    def g(s: float) -> float:
        return sinc_power_integral(s, tol, cfg.tail_cutoff).value * math.sqrt(s / 2.0) - (
            1.0 - delta
        )

    lo, hi = 2.0, 3.0
    if g(hi) >= 0.0:
        warnings.warn(
            "reverse-bound bracket extended to [2, 6]; expected g(3) < 0",
            stacklevel=2,
        )
        hi = 6.0
        if g(hi) >= 0.0:
            raise BracketFailure("no sign change of B(s) sqrt(s/2) - (1-delta) on [2, 6]")
    if g(lo) < 0.0:
        raise BracketFailure(f"g(2) = {g(lo):.3e} < 0; expected ~ +delta")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    cap = min(2.0 + 50.0 * delta, first_term_bound(delta))
    if not (2.0 <= s_star <= cap + 1e-8):
        raise BracketFailure(
            f"threshold {s_star} violates the certified cap {cap} at delta={delta}"
        )
    return s_star
