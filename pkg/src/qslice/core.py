"""Shared domain types: directions, canonicalization, tolerances, reports.

All types are immutable after construction and all operations are pure,
so everything here is safe for concurrent use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .errors import AllZero, NonFinite, ZeroVector

UNIT_NORM_TOL = 1e-12

Method = Literal["quadrature", "series", "closed_form", "monte_carlo"]


@dataclass(frozen=True)
class Direction:
    """A unit vector of section / Khintchine coefficients.

    The squared coordinates must sum to 1 within 1e-12; use
    :func:`normalize` to build one from raw data.
    """

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise ValueError("Direction needs at least one coordinate")
        if not all(math.isfinite(c) for c in self.coords):
            raise NonFinite(f"non-finite coordinates: {self.coords!r}")
        sq = math.fsum(c * c for c in self.coords)
        if abs(sq - 1.0) > UNIT_NORM_TOL:
            raise ValueError(
                f"coordinates are not unit-norm (sum of squares {sq!r}); "
                "construct via normalize()"
            )

    @property
    def n(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class CanonicalDirection:
    """Direction reduced to strictly positive, nonincreasing coordinates.

    ``source_index[i]`` / ``source_sign[i]`` record where canonical
    coordinate ``i`` came from in the original vector, so reports can map
    indices back to the caller's indexing and the original direction can
    be reconstructed (zeros excepted).
    """

    coords: tuple[float, ...]
    dropped_zeros: int
    source_index: tuple[int, ...]
    source_sign: tuple[int, ...]
    original_n: int

    def __post_init__(self) -> None:
        if not self.coords:
            raise AllZero("all coordinates are zero")
        if any(c <= 0.0 for c in self.coords):
            raise ValueError("canonical coordinates must be strictly positive")
        if any(a < b for a, b in zip(self.coords, self.coords[1:])):
            raise ValueError("canonical coordinates must be nonincreasing")
        sq = math.fsum(c * c for c in self.coords)
        if abs(sq - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"canonical coordinates not unit-norm: {sq!r}")

    @property
    def n(self) -> int:
        return len(self.coords)

    def to_direction(self) -> Direction:
        """Reconstruct the original direction (dropped zeros restored)."""
        out = [0.0] * self.original_n
        for c, idx, sgn in zip(self.coords, self.source_index, self.source_sign):
            out[idx] = sgn * c
        return Direction(tuple(out))


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy shared by the quadrature-backed operations.

    quad_abs_tol   absolute tolerance a certified error bound must meet
    series_terms   default number of series terms where one is not given
    tail_cutoff    cap on the number of quadrature panels before a tail
                   bound takes over
    agreement_tol  tolerance for cross-evaluator agreement checks
    """

    quad_abs_tol: float = 1e-9
    series_terms: int = 32
    tail_cutoff: int = 200_000
    agreement_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not (self.quad_abs_tol > 0 and self.agreement_tol > 0):
            raise ValueError("tolerances must be strictly positive")
        if not (self.series_terms > 0 and self.tail_cutoff > 0):
            raise ValueError("series_terms and tail_cutoff must be positive")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class IntegralResult:
    """A numerical value with a certified error bound and method tag.

    For ``monte_carlo`` the bound is a reported standard error, not a
    certificate.
    """

    value: float
    err_bound: float
    method: Method
    detail: str = ""

    def __post_init__(self) -> None:
        if self.err_bound < 0:
            raise ValueError("err_bound must be nonnegative")


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a near-extremizer certification.

    ``lower_dev``/``upper_dev`` measure how far the two selected
    coordinates sit below/above the extremal value 1/sqrt(2), in units
    of epsilon/sqrt(2); the certification windows are then
    ``lower_dev <= 37.5`` and ``upper_dev <= 2`` for sections, and
    ``lower_dev <= 30`` and ``upper_dev <= 1`` for first-moment reports.
    """

    hypothesis_holds: bool
    epsilon: float
    indices: tuple[int, int] | None
    lower_dev: float
    upper_dev: float
    tail_mass: float
    certified: bool

    def __post_init__(self) -> None:
        if self.indices is not None:
            i, j = self.indices
            if i == j:
                raise ValueError("report indices must be distinct")
        if self.tail_mass < -1e-15:
            raise ValueError("tail mass must be nonnegative")


@dataclass(frozen=True)
class ResultTable:
    """Rectangular table with a provenance note, for CLI / sweep output."""

    columns: tuple[str, ...]
    rows: tuple[tuple[object, ...], ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("table rows must match the column count")

    @staticmethod
    def _fmt(cell: object) -> str:
        if isinstance(cell, bool):
            return "true" if cell else "false"
        if isinstance(cell, float):
            return format(cell, ".12g")
        return str(cell)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(self._fmt(c) for c in r))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "columns": list(self.columns),
            "rows": [[self._fmt(c) for c in r] for r in self.rows],
            "provenance": self.provenance,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def normalize(v: Sequence[float]) -> Direction:
    """Scale ``v`` to unit Euclidean norm.

    Raises ZeroVector for the zero vector and NonFinite for NaN/inf
    entries.
    """
    vals = [float(x) for x in v]
    if not vals:
        raise ZeroVector("empty vector")
    if not all(math.isfinite(x) for x in vals):
        raise NonFinite(f"non-finite entries: {v!r}")
    nrm = math.sqrt(math.fsum(x * x for x in vals))
    if nrm == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    out = [x / nrm for x in vals]
    # one Newton polish keeps the squared sum within 1e-15 of 1
    s = math.fsum(x * x for x in out)
    corr = math.sqrt(s)
    return Direction(tuple(x / corr for x in out))


def canonicalize(a: Direction) -> CanonicalDirection:
    """Drop zero coordinates, take absolute values, sort nonincreasing.

    Ties are broken by the lower original index so the result is
    deterministic.
    """
    entries = [
        (abs(c), j, 1 if c > 0 else -1)
        for j, c in enumerate(a.coords)
        if c != 0.0
    ]
    if not entries:
        raise AllZero("direction has no nonzero coordinate")
    entries.sort(key=lambda e: (-e[0], e[1]))
    return CanonicalDirection(
        coords=tuple(e[0] for e in entries),
        dropped_zeros=a.n - len(entries),
        source_index=tuple(e[1] for e in entries),
        source_sign=tuple(e[2] for e in entries),
        original_n=a.n,
    )


def two_largest_indices(a: Direction) -> tuple[int, int]:
    """Original indices of the two largest |coordinates|, ties by lowest index."""
    order = sorted(range(a.n), key=lambda j: (-abs(a.coords[j]), j))
    if len(order) < 2:
        raise ValueError("need at least two coordinates")
    return order[0], order[1]
