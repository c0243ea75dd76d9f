"""Sphere-constrained derivative-free search for extremizers, plus fuzz samplers.

Both objectives (central section volume, first absolute moment of a
Rademacher sum) are piecewise polynomial in the direction with kinks at
the extremizers, so the search uses a projected Nelder-Mead simplex
with multistart rather than anything gradient-based.  By symmetry the
search lives on the positive orthant of the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, Direction, ToleranceConfig, normalize
from .cube_section import GEOMETRIC_MAX_N, SQRT2, _geometric_conditioned, section_volume
from .errors import (
    AgreementError,
    DomainError,
    EpsilonOutOfRange,
    NoConvergence,
    SamplerStarved,
)
from .khintchine import ENUMERATION_MAX_N, _r1_raw

_STAGNATION_WINDOW = 50
_COORD_FLOOR = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Multistart policy for the projected simplex search."""

    restarts: int = 12
    max_iters: int = 600
    step_init: float = 0.3
    shrink: float = 0.5
    seed: int = 0
    objective_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not (0.0 < self.shrink < 1.0):
            raise ValueError("shrink must lie in (0, 1)")
        if self.max_iters < 1 or self.step_init <= 0 or self.objective_tol <= 0:
            raise ValueError("bad search configuration")


def _project(v: np.ndarray) -> np.ndarray:
    w = np.abs(v)
    nrm = float(np.linalg.norm(w))
    if nrm == 0.0:
        w = np.ones_like(w)
        nrm = math.sqrt(w.size)
    return w / nrm


def _nelder_mead_sphere(
    f, x0: np.ndarray, cfg: SearchConfig
) -> tuple[np.ndarray, float, bool]:
    """Minimize f over the positive-orthant sphere from x0.

    Every trial point is folded to |.| and renormalized.  Convergence
    means the best value stopped improving by more than objective_tol
    over a 50-iteration window.
    """
    n = x0.size
    simplex = [_project(x0)]
    for i in range(n):
        e = x0.copy()
        e[i] += cfg.step_init
        simplex.append(_project(e))
    values = [f(p) for p in simplex]
    history = [min(values)]
    converged = False
    for _ in range(cfg.max_iters):
        order = sorted(range(n + 1), key=lambda i: values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        centroid = _project(np.mean(simplex[:-1], axis=0))
        worst = simplex[-1]
        reflected = _project(centroid + (centroid - worst))
        fr = f(reflected)
        if fr < values[0]:
            expanded = _project(centroid + 2.0 * (centroid - worst))
            fe = f(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        else:
            if fr < values[-1]:
                contracted = _project(centroid + 0.5 * (reflected - centroid))
            else:
                contracted = _project(centroid + 0.5 * (worst - centroid))
            fc = f(contracted)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = contracted, fc
            else:
                best = simplex[0]
                simplex = [best] + [
                    _project(best + cfg.shrink * (p - best)) for p in simplex[1:]
                ]
                values = [values[0]] + [f(p) for p in simplex[1:]]
        history.append(min(values))
        if (
            len(history) > _STAGNATION_WINDOW
            and history[-_STAGNATION_WINDOW - 1] - history[-1] < cfg.objective_tol
        ):
            converged = True
            break
    i_best = min(range(n + 1), key=lambda i: values[i])
    return simplex[i_best], values[i_best], converged


def _restart_points(n: int, cfg: SearchConfig):
    """Half uniform on the positive orthant, half concentrated near sparse supports."""
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        if r % 2 == 0:
            yield _project(rng.standard_normal(n)), rng
        else:
            k = int(rng.integers(2, min(3, n) + 1))
            support = rng.choice(n, size=k, replace=False)
            x = np.full(n, 1e-3)
            x[support] = np.sqrt(rng.dirichlet(np.full(k, 0.5)))
            yield _project(x), rng


def _run_multistart(f, n: int, cfg: SearchConfig) -> tuple[np.ndarray, float]:
    results = []
    any_converged = False
    for x0, _ in _restart_points(n, cfg):
        x, val, conv = _nelder_mead_sphere(f, x0, cfg)
        any_converged = any_converged or conv
        results.append((val, tuple(x.tolist()), x))
    if not any_converged:
        raise NoConvergence("no restart reached the stagnation criterion")
    results.sort(key=lambda t: (t[0], t[1]))
    return results[0][2], results[0][0]


def _section_objective(v: np.ndarray) -> float:
    w = _project(v)
    keep = w[w >= 1e-7]
    keep = keep / math.sqrt(math.fsum((keep * keep).tolist()))
    return float(_geometric_conditioned(keep, 0.0))


def maximize_section(n: int, cfg: SearchConfig = SearchConfig()) -> tuple[Direction, float]:
    """Maximize the central section volume sigma(a, 0) over unit a.

    The maximum is sqrt(2), attained at two coordinates of size
    1/sqrt(2); the returned value is checked against that ceiling.
    """
    if not (2 <= n <= 8):
        raise DomainError(f"n must lie in [2, 8] (got {n})")
    x, neg_val = _run_multistart(lambda v: -_section_objective(v), n, cfg)
    value = -neg_val
    if value > SQRT2 + 1e-6:
        raise AgreementError(f"search value {value} exceeds sqrt(2)")
    return normalize(x), value


def minimize_r1(n: int, cfg: SearchConfig = SearchConfig()) -> tuple[Direction, float]:
    """Minimize R_1(a) = E|sum a_k B_k| over unit a.

    The minimum is 1/sqrt(2), attained at two coordinates of size
    1/sqrt(2); the returned value is checked against that floor.
    """
    if not (2 <= n <= 16):
        raise DomainError(f"n must lie in [2, 16] (got {n})")

    def obj(v: np.ndarray) -> float:
        w = _project(v)
        w = w[w >= _COORD_FLOOR]
        w = w / math.sqrt(math.fsum((w * w).tolist()))
        return _r1_raw(w)

    x, value = _run_multistart(obj, n, cfg)
    if value < 1.0 / SQRT2 - 1e-9:
        raise AgreementError(f"search value {value} fell below 1/sqrt(2)")
    return normalize(x), value


def near_extremal_sampler(
    n: int,
    eps: float,
    count: int,
    seed: int,
    kind: str,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> list[Direction]:
    """Directions provably satisfying a stability-theorem hypothesis.

    Samples perturb the two-coordinate extremizer (asymmetry of order
    eps, squared tail mass of order eps^2, random signs and coordinate
    order) and are kept only if the relevant oracle confirms the
    hypothesis: sigma(a, 0) >= (1 - eps) sqrt(2) for ``section``,
    R_1(a) <= (1 + eps)/sqrt(2) for ``khintchine``.
    """
    if kind not in ("section", "khintchine"):
        raise DomainError(f"unknown sampler kind {kind!r}")
    if kind == "section":
        if not (0.0 < eps < 1.0 / 75.0):
            raise EpsilonOutOfRange(f"eps must lie in (0, 1/75) (got {eps})")
        if not (2 <= n <= GEOMETRIC_MAX_N):
            raise DomainError(f"section sampler needs 2 <= n <= {GEOMETRIC_MAX_N}")
    else:
        if not (0.0 < eps < 1.0 / 100.0):
            raise EpsilonOutOfRange(f"eps must lie in (0, 1/100) (got {eps})")
        if not (2 <= n <= ENUMERATION_MAX_N):
            raise DomainError(f"khintchine sampler needs 2 <= n <= {ENUMERATION_MAX_N}")
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng([seed, 17 if kind == "section" else 23])
    out: list[Direction] = []
    max_attempts = 100 * count
    attempts = 0
    while len(out) < count and attempts < max_attempts:
        attempts += 1
        tail_mass = 0.0 if (n == 2 or rng.random() < 0.25) else float(
            rng.uniform(0.0, 6.0 * eps * eps)
        )
        asym = float(rng.uniform(-0.6, 0.6)) * eps / SQRT2
        b = math.sqrt(max(1.0 - tail_mass, 0.0) / 2.0)
        coords = [b + asym, b - asym]
        if n > 2 and tail_mass > 0.0:
            props = rng.dirichlet(np.full(n - 2, 0.8))
            tail = np.sqrt(tail_mass * props)
            tail[tail < 1e-7] = 0.0
            coords.extend(tail.tolist())
        else:
            coords.extend([0.0] * (n - 2))
        v = np.array(coords) * rng.choice([-1.0, 1.0], size=n)
        v = v[rng.permutation(n)]
        a = normalize(v)
        if kind == "section":
            ok = section_volume(a, 0.0, cfg) >= (1.0 - eps) * SQRT2
        else:
            w = np.abs(np.array(a.coords))
            ok = _r1_raw(np.sort(w[w > 0.0])[::-1]) <= (1.0 + eps) / SQRT2
        if ok:
            out.append(a)
    if len(out) < count:
        raise SamplerStarved(
            f"accepted {len(out)}/{count} after {attempts} attempts (kind={kind})"
        )
    return out
