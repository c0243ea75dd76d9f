"""Min-entropy power of independent sums via exact polynomial convolution.

N_inf(X) = M(X)^-2 where M(X) is the essential supremum of the density
(infinite for a point mass, making N_inf = 0).  Distributions are
restricted to compactly supported piecewise polynomials plus symbolic
point masses: that class is closed under convolution, sups are found
exactly through per-piece root finding, and the equality cases of

    N_inf(X_1 + ... + X_n) >= 1/2 sum_i N_inf(X_i)

(two uniforms on reflected sets plus point masses) come out with zero
slack instead of quadrature noise.

Pieces store coefficients in the local variable (x - lo), which keeps
magnitudes tame when degrees grow along convolution chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .core import DEFAULT_TOL, ToleranceConfig, normalize
from .errors import (
    AgreementError,
    DegreeOverflow,
    DomainError,
    EmptySet,
    EpsilonOutOfRange,
    ZeroScale,
)

MAX_DEGREE = 16
EPI_EPS_MAX = 1.0 / 75.0

_INTEGRAL_TOL = 1e-10
_NONNEG_TOL = -1e-9


# ---------------------------------------------------------------------------
# local-basis polynomial helpers (coefficient arrays, ascending powers)

def _peval(coeffs: np.ndarray, x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c in coeffs[::-1]:
        out = out * x + c
    return out


def _taylor_shift(coeffs: np.ndarray, s: float) -> np.ndarray:
    """Coefficients of p(y + s) given those of p(y)."""
    d = coeffs.size
    out = np.zeros(d)
    for k in range(d):
        ck = coeffs[k]
        if ck == 0.0:
            continue
        powers = s ** np.arange(k + 1)[::-1]
        binom = np.array([math.comb(k, j) for j in range(k + 1)], dtype=float)
        out[: k + 1] += ck * binom * powers
    return out


def _reflect_coeffs(coeffs: np.ndarray, w: float) -> np.ndarray:
    """Coefficients of q(tau) = p(w - tau)."""
    d = coeffs.size
    out = np.zeros(d)
    for m in range(d):
        cm = coeffs[m]
        if cm == 0.0:
            continue
        for r in range(m + 1):
            out[r] += cm * math.comb(m, r) * w ** (m - r) * (-1.0) ** r
    return out


def _piece_integral(coeffs: np.ndarray, w: float) -> float:
    return math.fsum(c * w ** (m + 1) / (m + 1) for m, c in enumerate(coeffs))


def _piece_extrema(coeffs: np.ndarray, w: float) -> tuple[float, float]:
    """(min, max) of the local polynomial over [0, w]."""
    cands = [0.0, w]
    if coeffs.size > 2:
        deriv = coeffs[1:] * np.arange(1, coeffs.size)
        scale = float(np.max(np.abs(deriv))) if deriv.size else 0.0
        if scale > 0.0:
            trimmed = np.trim_zeros(np.where(np.abs(deriv) > 1e-14 * scale, deriv, 0.0), "b")
            if trimmed.size > 1:
                roots = np.roots(trimmed[::-1])
                for r in roots:
                    if abs(r.imag) < 1e-9 and -1e-12 <= r.real <= w + 1e-12:
                        cands.append(min(max(r.real, 0.0), w))
    vals = [float(_peval(coeffs, np.array(c))) for c in cands]
    return min(vals), max(vals)


# ---------------------------------------------------------------------------
# distribution types

@dataclass(frozen=True)
class PointMass:
    """A deterministic value; M is infinite and N_inf is zero."""

    location: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.location):
            raise DomainError("point mass location must be finite")


@dataclass(frozen=True)
class PolyPiece:
    lo: float
    hi: float
    coeffs: tuple[float, ...]

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


class PiecewisePolyDensity:
    """A probability density made of local polynomial pieces.

    Pieces are sorted and non-overlapping (gaps mean the density is
    zero there); the total integral must be 1 and the density
    nonnegative, both checked at construction via exact per-piece
    integration and extrema.
    """

    def __init__(self, pieces: Sequence[PolyPiece]):
        ps = sorted(pieces, key=lambda p: p.lo)
        if not ps:
            raise EmptySet("density needs at least one piece")
        for p in ps:
            if not (math.isfinite(p.lo) and math.isfinite(p.hi) and p.width > 0):
                raise DomainError(f"bad piece interval [{p.lo}, {p.hi}]")
            if p.degree > MAX_DEGREE:
                raise DegreeOverflow(
                    f"piece degree {p.degree} exceeds cap {MAX_DEGREE}"
                )
        for a, b in zip(ps, ps[1:]):
            if a.hi > b.lo + 1e-12:
                raise DomainError("pieces overlap")
        total = math.fsum(_piece_integral(np.array(p.coeffs), p.width) for p in ps)
        if abs(total - 1.0) > _INTEGRAL_TOL:
            raise DomainError(f"density integrates to {total!r}, not 1")
        for p in ps:
            mn, _ = _piece_extrema(np.array(p.coeffs), p.width)
            if mn < _NONNEG_TOL:
                raise DomainError(f"density dips to {mn} on [{p.lo}, {p.hi}]")
        self.pieces: tuple[PolyPiece, ...] = tuple(ps)

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.pieces)

    @property
    def support(self) -> tuple[float, float]:
        return self.pieces[0].lo, self.pieces[-1].hi

    def integral(self) -> float:
        return math.fsum(
            _piece_integral(np.array(p.coeffs), p.width) for p in self.pieces
        )

    def __call__(self, x: float) -> float:
        for p in self.pieces:
            if p.lo <= x <= p.hi:
                return float(_peval(np.array(p.coeffs), np.array(x - p.lo)))
        return 0.0

    def sup(self) -> float:
        return max(_piece_extrema(np.array(p.coeffs), p.width)[1] for p in self.pieces)

    def __repr__(self) -> str:
        lo, hi = self.support
        return (
            f"PiecewisePolyDensity({len(self.pieces)} pieces on "
            f"[{lo:.6g}, {hi:.6g}], degree {self.degree})"
        )


Distribution = Union[PointMass, PiecewisePolyDensity]


# ---------------------------------------------------------------------------
# factories

def uniform(lo: float, hi: float) -> PiecewisePolyDensity:
    if not hi > lo:
        raise EmptySet(f"empty interval [{lo}, {hi}]")
    return PiecewisePolyDensity([PolyPiece(lo, hi, (1.0 / (hi - lo),))])


def uniform_on(intervals: Iterable[tuple[float, float]]) -> PiecewisePolyDensity:
    """Uniform distribution on a finite union of disjoint intervals."""
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    if not ivs:
        raise EmptySet("no intervals given")
    for a, b in ivs:
        if not b > a:
            raise EmptySet(f"degenerate interval [{a}, {b}]")
    for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
        if b1 > a2:
            raise DomainError("intervals must be disjoint")
    measure = math.fsum(b - a for a, b in ivs)
    h = 1.0 / measure
    return PiecewisePolyDensity([PolyPiece(a, b, (h,)) for a, b in ivs])


def step_density(edges: Sequence[float], heights: Sequence[float]) -> PiecewisePolyDensity:
    """Piecewise constant density on consecutive intervals between edges."""
    if len(edges) != len(heights) + 1:
        raise DomainError("need one more edge than height")
    pieces = [
        PolyPiece(float(a), float(b), (float(h),))
        for a, b, h in zip(edges, edges[1:], heights)
        if h != 0.0
    ]
    return PiecewisePolyDensity(pieces)


# ---------------------------------------------------------------------------
# exact convolution

def _conv_equal_limits(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Coefficients in xi of int_0^xi p(eta) q(xi - eta) d eta."""
    out = np.zeros(p.size + q.size)
    for i, pi in enumerate(p):
        if pi == 0.0:
            continue
        for j, qj in enumerate(q):
            if qj == 0.0:
                continue
            out[i + j + 1] += pi * qj * math.factorial(i) * math.factorial(j) / math.factorial(i + j + 1)
    return out


def _antideriv_at_const(p: np.ndarray, q: np.ndarray, e: float) -> np.ndarray:
    """Coefficients in xi of A(xi, e) = int^e p(eta) q(xi - eta) d eta at eta = e."""
    out = np.zeros(q.size)
    for i, pi in enumerate(p):
        if pi == 0.0:
            continue
        for j, qj in enumerate(q):
            if qj == 0.0:
                continue
            for k in range(j + 1):
                coef = pi * qj * math.comb(j, k) * (-1.0) ** k * e ** (i + k + 1) / (i + k + 1)
                out[j - k] += coef
    return out


def _antideriv_at_linear(p: np.ndarray, q: np.ndarray, v: float) -> np.ndarray:
    """Coefficients in xi of A(xi, xi - v)."""
    out = np.zeros(p.size + q.size)
    for i, pi in enumerate(p):
        if pi == 0.0:
            continue
        for j, qj in enumerate(q):
            if qj == 0.0:
                continue
            for k in range(j + 1):
                pref = pi * qj * math.comb(j, k) * (-1.0) ** k / (i + k + 1)
                n_pow = i + k + 1
                # (xi - v)^n_pow expanded, times xi^(j-k)
                for r in range(n_pow + 1):
                    out[j - k + r] += (
                        pref * math.comb(n_pow, r) * (-v) ** (n_pow - r)
                    )
    return out


def _pair_regions(
    pf: PolyPiece, pg: PolyPiece
) -> list[tuple[float, float, np.ndarray]]:
    """Convolution of two pieces as xi-polynomials per region.

    Region boundaries are returned as the absolute pairwise endpoint
    sums (the very same float operations that build the global
    breakpoint grid, so searchsorted lookups are exact); the
    coefficient arrays are in xi = x - (lo_f + lo_g).
    """
    p = np.array(pf.coeffs)
    q = np.array(pg.coeffs)
    u, v = pf.width, pg.width
    e0 = pf.lo + pg.lo
    e_a = pf.lo + pg.hi
    e_b = pf.hi + pg.lo
    e3 = pf.hi + pg.hi
    e1, e2 = (e_b, e_a) if e_b <= e_a else (e_a, e_b)
    both = _conv_equal_limits(p, q)
    at_u = _antideriv_at_const(p, q, u)
    at_lin = _antideriv_at_linear(p, q, v)
    regions = []
    if e1 > e0:
        regions.append((e0, e1, both))
    if e2 > e1:
        if u <= v:
            mid = at_u.copy()
        else:
            mid = both.copy()
            mid[: at_lin.size] -= at_lin
        regions.append((e1, e2, mid))
    if e3 > e2:
        full = np.zeros(max(at_u.size, at_lin.size))
        full[: at_u.size] += at_u
        full[: at_lin.size] -= at_lin
        regions.append((e2, e3, full))
    return regions


def convolve(f: Distribution, g: Distribution) -> Distribution:
    """Exact distribution of the sum of two independent variables.

    Point masses translate; two densities convolve piece-pair by
    piece-pair, with output breakpoints the pairwise sums of input
    breakpoints and the polynomial on each output interval assembled by
    Taylor shifts into its local basis.
    """
    if isinstance(f, PointMass) and isinstance(g, PointMass):
        return PointMass(f.location + g.location)
    if isinstance(f, PointMass):
        f, g = g, f
    if isinstance(g, PointMass):
        assert isinstance(f, PiecewisePolyDensity)
        return PiecewisePolyDensity(
            [PolyPiece(p.lo + g.location, p.hi + g.location, p.coeffs) for p in f.pieces]
        )
    assert isinstance(f, PiecewisePolyDensity) and isinstance(g, PiecewisePolyDensity)
    new_deg = f.degree + g.degree + 1
    if new_deg > MAX_DEGREE:
        raise DegreeOverflow(
            f"convolution degree {new_deg} would exceed cap {MAX_DEGREE}; coarsen first"
        )
    f_edges = sorted({p.lo for p in f.pieces} | {p.hi for p in f.pieces})
    g_edges = sorted({p.lo for p in g.pieces} | {p.hi for p in g.pieces})
    z = np.unique(np.array([x + y for x in f_edges for y in g_edges]))
    acc = [np.zeros(new_deg + 1) for _ in range(z.size - 1)]
    touched = np.zeros(z.size - 1, dtype=bool)
    for pf in f.pieces:
        for pg in g.pieces:
            base = pf.lo + pg.lo
            for glo, ghi, cxi in _pair_regions(pf, pg):
                start = int(np.searchsorted(z, glo))
                end = int(np.searchsorted(z, ghi))
                for i in range(start, end):
                    shifted = _taylor_shift(cxi, z[i] - base)
                    acc[i][: shifted.size] += shifted
                    touched[i] = True
    pieces = []
    for i in range(z.size - 1):
        if not touched[i]:
            continue
        c = acc[i]
        scale = float(np.max(np.abs(c)))
        if scale <= 1e-14:
            continue
        trimmed = np.trim_zeros(np.where(np.abs(c) > 1e-15 * scale, c, 0.0), "b")
        if trimmed.size == 0:
            continue
        pieces.append(PolyPiece(float(z[i]), float(z[i + 1]), tuple(trimmed.tolist())))
    return PiecewisePolyDensity(pieces)


# ---------------------------------------------------------------------------
# functionals

def m_functional(X: Distribution) -> float:
    """Essential supremum of the density; infinite for a point mass."""
    if isinstance(X, PointMass):
        return math.inf
    return X.sup()


def n_infinity(X: Distribution) -> float:
    """Min-entropy power M(X)^-2, zero when M is infinite."""
    m = m_functional(X)
    if math.isinf(m):
        return 0.0
    return m**-2


def scale(X: Distribution, lam: float) -> Distribution:
    """Distribution of lam * X; N_inf scales by lam^2 exactly."""
    if lam == 0.0:
        raise ZeroScale("scaling by zero collapses the distribution")
    if isinstance(X, PointMass):
        return PointMass(lam * X.location)
    pieces = X.pieces
    if lam < 0.0:
        pieces = tuple(
            PolyPiece(-p.hi, -p.lo, tuple(_reflect_coeffs(np.array(p.coeffs), p.width).tolist()))
            for p in pieces
        )
        lam = -lam
    out = []
    for p in pieces:
        coeffs = tuple(
            c / lam ** (m + 1) for m, c in enumerate(p.coeffs)
        )
        out.append(PolyPiece(lam * p.lo, lam * p.hi, coeffs))
    return PiecewisePolyDensity(out)


@dataclass(frozen=True)
class EpiReport:
    """Both sides of the min-entropy power inequality for one collection.

    ``slack = lhs - rhs`` is nonnegative up to rounding for every valid
    input; the index/tail fields are filled in by the quantitative
    report when its hypothesis applies.
    """

    lhs: float
    rhs: float
    slack: float
    epsilon: float | None = None
    hypothesis_holds: bool | None = None
    indices: tuple[int, int] | None = None
    tail: float | None = None
    certified: bool | None = None


def _sum_density(Xs: Sequence[Distribution]) -> Distribution:
    total: Distribution | None = None
    for X in Xs:
        total = X if total is None else convolve(total, X)
    assert total is not None
    return total


def sum_min_entropy(Xs: Sequence[Distribution]) -> EpiReport:
    """N_inf of the sum against half the sum of the N_inf values."""
    if len(Xs) < 2:
        raise DomainError("need at least two distributions")
    ns = [n_infinity(X) for X in Xs]
    rhs = math.fsum(ns) / 2.0
    lhs = n_infinity(_sum_density(Xs))
    return EpiReport(lhs=lhs, rhs=rhs, slack=lhs - rhs)


def rogozin_compare(
    Xs: Sequence[Distribution], cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[float, float]:
    """(N_inf(sum X_i), N_inf(sum Z_i)) for the symmetric uniform surrogates.

    Z_i is uniform on an origin-symmetric interval with the same
    min-entropy power as X_i (a point mass at zero when that power is
    zero); the first component always dominates the second.  The
    surrogate sum is evaluated twice, by exact convolution and through
    the cube-section identity N_inf = sigma(theta, 0)^-2, and the two
    routes must agree to 1e-7.
    """
    from .cube_section import _geometric_raw

    if len(Xs) < 2:
        raise DomainError("need at least two distributions")
    first = n_infinity(_sum_density(Xs))
    widths = []
    Zs: list[Distribution] = []
    for X in Xs:
        nv = n_infinity(X)
        if nv == 0.0:
            Zs.append(PointMass(0.0))
        else:
            w = math.sqrt(nv)
            widths.append(w)
            Zs.append(uniform(-w / 2.0, w / 2.0))
    second = n_infinity(_sum_density(Zs))
    if widths:
        norm_sq = math.fsum(w * w for w in widths)
        theta = np.array(widths) / math.sqrt(norm_sq)
        sigma = _geometric_raw(theta, 0.0)
        second_alt = norm_sq / (sigma * sigma)
        if abs(second - second_alt) > 1e-7 * max(1.0, abs(second)):
            raise AgreementError(
                f"surrogate power {second} vs section identity {second_alt}"
            )
    if first < second - 1e-9:
        raise AgreementError(
            f"sum power {first} fell below its uniform surrogate {second}"
        )
    return first, second


def equality_case_construct(
    intervals: Iterable[tuple[float, float]],
    x: float,
    extra_point_masses: Iterable[float] = (),
) -> list[Distribution]:
    """[uniform on A, uniform on x - A, point masses ...].

    This is exactly the equality configuration of the min-entropy power
    inequality: the sum has N_inf = |A|^2 and the slack vanishes.
    """
    ivs = [(float(a), float(b)) for a, b in intervals]
    if not ivs:
        raise EmptySet("need a nonempty interval union")
    first = uniform_on(ivs)
    reflected = uniform_on([(x - b, x - a) for a, b in ivs])
    out: list[Distribution] = [first, reflected]
    out.extend(PointMass(float(p)) for p in extra_point_masses)
    return out


def quantitative_epi_report(
    Xs: Sequence[Distribution], eps: float
) -> EpiReport:
    """Certify near-equality structure in the min-entropy power inequality.

    The hypothesis N_inf((1-eps) sum X_i) <= 1/2 sum N_inf(X_i) is
    evaluated through 2-homogeneity as (1-eps)^2 N_inf(sum).  When it
    holds, the two largest powers must sit within
    [(1-37.5 eps)^2, (1+2 eps)^2] times half the total and the others
    carry at most 50 eps of the total power.  Valid for eps < 1/75.
    """
    if not (0.0 < eps < EPI_EPS_MAX):
        raise EpsilonOutOfRange(f"eps must lie in (0, 1/75) (got {eps})")
    if len(Xs) < 2:
        raise DomainError("need at least two distributions")
    ns = [n_infinity(X) for X in Xs]
    total = math.fsum(ns)
    rhs = total / 2.0
    lhs = n_infinity(_sum_density(Xs))
    hypothesis = (1.0 - eps) ** 2 * lhs <= rhs + 1e-12 * max(1.0, rhs)
    if not hypothesis:
        return EpiReport(lhs, rhs, lhs - rhs, eps, False, None, None, False)
    order = sorted(range(len(ns)), key=lambda i: (-ns[i], i))
    i0, i1 = order[0], order[1]
    tail = total - ns[i0] - ns[i1]
    slack9 = 1e-9 * max(1.0, total)
    certified = (
        (1.0 - 37.5 * eps) ** 2 * rhs <= ns[i0] + slack9
        and (1.0 - 37.5 * eps) ** 2 * rhs <= ns[i1] + slack9
        and ns[i0] <= (1.0 + 2.0 * eps) ** 2 * rhs + slack9
        and ns[i1] <= (1.0 + 2.0 * eps) ** 2 * rhs + slack9
        and tail <= 50.0 * eps * total + slack9
    )
    return EpiReport(lhs, rhs, lhs - rhs, eps, True, (i0, i1), tail, certified)


# ---------------------------------------------------------------------------
# text form: one distribution per blank-line-separated block; a block is
# either a single "point <x>" line or lines "lo hi c0 [c1 ...]" giving
# polynomial coefficients in (x - lo)

def parse_distributions(text: str) -> list[Distribution]:
    blocks: list[list[str]] = [[]]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append(line)
    if blocks and not blocks[-1]:
        blocks.pop()
    out: list[Distribution] = []
    for block in blocks:
        if block[0].startswith("point"):
            if len(block) != 1:
                raise DomainError("a point-mass block must be a single line")
            _, val = block[0].split()
            out.append(PointMass(float(val)))
            continue
        pieces = []
        for line in block:
            parts = [float(tok) for tok in line.split()]
            if len(parts) < 3:
                raise DomainError(f"density line needs 'lo hi c0 ...': {line!r}")
            lo, hi, *coeffs = parts
            pieces.append(PolyPiece(lo, hi, tuple(coeffs)))
        out.append(PiecewisePolyDensity(pieces))
    return out


def format_distributions(Xs: Sequence[Distribution]) -> str:
    blocks = []
    for X in Xs:
        if isinstance(X, PointMass):
            blocks.append(f"point {X.location!r}")
        else:
            blocks.append(
                "\n".join(
                    " ".join([repr(p.lo), repr(p.hi)] + [repr(c) for c in p.coeffs])
                    for p in X.pieces
                )
            )
    return "\n\n".join(blocks) + "\n"
