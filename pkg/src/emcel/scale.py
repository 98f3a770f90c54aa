"""Step-size maps for coin-tossing chains.

The chain moves from y to y ± a(y) with equal probability, where a(y) is
chosen so that the expected time the underlying diffusion needs to leave
(y - a, y + a) equals the time step h.  This module computes that map:
a general bisection solver driven by the exit-time functional, closed
forms for the constant-elasticity and sticky examples, a dedicated solver
for measures with a Cantor-type singular part, and a tilted square-root
map for comparison runs.  `build_scale_factor` turns a measure plus a
strategy into a reusable, clamped, optionally memoised `ScaleFactor`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import cantor
from .errors import NumericError
from .measures import Boundary, SpeedMeasure, StateSpace, exit_time_functional

__all__ = [
    "Emcel",
    "WeakEuler",
    "StickyClosedForm",
    "GbmClosedForm",
    "CantorLevel",
    "ScaleFactor",
    "build_scale_factor",
    "solve_emcel",
    "solve_cantor",
    "closed_form_sticky",
    "closed_form_gbm",
]

#: Bisection stops once the bracket is narrower than DEFAULT_TOL_FACTOR * sqrt(h).
DEFAULT_TOL_FACTOR = 1e-10

#: Solver-backed maps memoise per-state results up to this many entries.
_MEMO_CAP = 1 << 20


def _check_h(h: float) -> float:
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"h: must be a positive finite number, got {h}")
    return h


def _check_tol(tol: Optional[float], h: float, allow_zero: bool = False) -> float:
    if tol is None:
        return DEFAULT_TOL_FACTOR * math.sqrt(h)
    tol = float(tol)
    floor = 0.0 if allow_zero else math.ulp(0.0)
    if math.isnan(tol) or tol < floor:
        raise ValueError(f"tol: must be {'non-negative' if allow_zero else 'positive'}, got {tol}")
    return tol


def _bisect_admissible(f: Callable[[float], float], h: float, lo: float, hi: float, tol: float) -> float:
    """Largest admissible point of {a : f(a) <= h} inside [lo, hi].

    Requires f(lo) <= h < f(hi).  Returns the lower bracket end, so the
    result always satisfies f(result) <= h.
    """
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        if f(mid) <= h:
            lo = mid
        else:
            hi = mid
    return lo


def solve_emcel(m: SpeedMeasure, h: float, y: float, tol: Optional[float] = None) -> float:
    """Bisection solve of the step-size equation at state y.

    Finds the largest a with exit_time_functional(m, y, a) <= h.  When the
    functional stays below h all the way to the nearer boundary, the step
    is truncated to the boundary distance (the chain can then land on the
    boundary and absorb there).
    """
    a, _ = _solve_emcel(m, h, y, tol)
    return a


def _solve_emcel(m: SpeedMeasure, h: float, y: float, tol: Optional[float]) -> tuple[float, bool]:
    h = _check_h(h)
    tol = _check_tol(tol, h, allow_zero=True)
    space = m.space
    y = float(y)
    if not space.in_interior(y):
        raise ValueError(f"y: must lie in the interior of {space}, got {y}")

    def f(a: float) -> float:
        return exit_time_functional(m, y, a)

    dist = space.boundary_distance(y)
    if math.isfinite(dist):
        try:
            f_dist = f(dist)
        except (ZeroDivisionError, OverflowError, FloatingPointError):
            f_dist = math.inf
        if f_dist <= h:
            if f_dist == 0.0:
                raise NumericError(
                    f"step-size equation has no root at y={y}: the measure carries no mass "
                    "between the boundaries around this state"
                )
            return dist, True
        lo, hi = 0.0, dist
    else:
        rho = m.density(y) if m.density is not None else 0.0
        hi = math.sqrt(h / max(float(rho), 1.0))
        lo = 0.0
        for _ in range(64):
            if f(hi) > h:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise NumericError(
                f"no bracket for the step-size equation after 64 doublings at y={y}; "
                "the measure may vanish on a neighbourhood of this state"
            )
    return _bisect_admissible(f, h, lo, hi, tol), False


def closed_form_sticky(h: float, y: float, sigma: float = 1.0, theta: float = 1.0) -> float:
    """Exact step size for the sticky model (volatility sigma, atom 2/theta at 0).

    Away from the origin (|y| >= sigma * sqrt(h)) the tent never touches the
    atom and the step is the flat-measure value sigma * sqrt(h); closer in,
    the atom absorbs part of the budget and the step solves a quadratic.
    """
    h = _check_h(h)
    _check_positive(sigma, "sigma")
    _check_positive(theta, "theta")
    y = float(y)
    if not math.isfinite(y):
        raise ValueError(f"y: must be finite, got {y}")
    root = sigma * math.sqrt(h)
    ay = abs(y)
    if ay >= root:
        return root
    half = sigma / (2.0 * theta)
    return sigma * (math.sqrt(h + ay / theta + half * half) - half)


def _sticky_step_array(h: float, ys: np.ndarray, sigma: float, theta: float) -> np.ndarray:
    root = sigma * math.sqrt(h)
    ay = np.abs(ys)
    half = sigma / (2.0 * theta)
    inner = sigma * (np.sqrt(h + ay / theta + half * half) - half)
    return np.where(ay >= root, root, inner)


def closed_form_gbm(h: float, y: float, sigma: float = 1.0) -> float:
    """Exact step size for the constant-elasticity model on (0, inf).

    The speed density 2 / (sigma * u)**2 gives a multiplicative step:
    a(y) = y * sqrt(1 - exp(-sigma**2 * h)), strictly less than y, so the
    chain stays positive forever.
    """
    h = _check_h(h)
    _check_positive(sigma, "sigma")
    y = float(y)
    if not (y > 0.0 and math.isfinite(y)):
        raise ValueError(f"y: must be a positive finite number, got {y}")
    return y * math.sqrt(-math.expm1(-sigma * sigma * h))


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name}: must be a positive finite number, got {value}")
    return value


def _tent_overlap(y: float, a: float, lo: float, hi: float) -> float:
    """Integral of the tent u -> (a - |u - y|)+ over [lo, hi], in closed form."""
    lo = max(lo, y - a)
    hi = min(hi, y + a)
    if hi <= lo:
        return 0.0
    total = 0.0
    mid = min(hi, y)
    if mid > lo:
        total += (mid - lo) * (a - y + 0.5 * (lo + mid))
    mid = max(lo, y)
    if hi > mid:
        total += (hi - mid) * (a + y - 0.5 * (mid + hi))
    return total


def solve_cantor(h: float, n: int, y: float, tol: Optional[float] = None) -> float:
    """Step size for the level-n Cantor measure: density 2 plus (3/2)**n on the
    level-n intervals.

    The flat background alone forces a <= sqrt(h), so the root is bisected
    on [0, sqrt(h)] with exact tent-interval overlap integrals; only the
    intervals meeting (y - sqrt(h), y + sqrt(h)) are ever enumerated.  When
    the tent misses all of them the result is exactly sqrt(h).
    """
    h = _check_h(h)
    tol = _check_tol(tol, h, allow_zero=True)
    y = float(y)
    if not math.isfinite(y):
        raise ValueError(f"y: must be finite, got {y}")
    rh = math.sqrt(h)
    segs = cantor.intervals_in_window(n, y - rh, y + rh)
    if not segs:
        return rh
    weight = 0.5 * 1.5**n

    def extra(a: float) -> float:
        return weight * sum(_tent_overlap(y, a, lo, hi) for lo, hi in segs)

    if extra(rh) == 0.0:
        return rh

    def f(a: float) -> float:
        return a * a + extra(a)

    return _bisect_admissible(f, h, 0.0, rh, tol)


def _check_opt_tol(tol: Optional[float]) -> None:
    if tol is None:
        return
    tol = float(tol)
    if math.isnan(tol) or tol < 0.0:
        raise ValueError(f"tol: must be non-negative, got {tol}")


@dataclass(frozen=True)
class Emcel:
    """Solve the step-size equation by bisection on the given measure."""

    tol: Optional[float] = None

    def __post_init__(self) -> None:
        _check_opt_tol(self.tol)


@dataclass(frozen=True)
class WeakEuler:
    """Square-root step a(y) = sqrt(h) * eta(y) for a state-dependent tilt eta.

    Only valid for measures with a density part: the map ignores atoms and
    singular mass, so it is rejected for measures that carry any.
    """

    eta: Callable

    def __post_init__(self) -> None:
        if not callable(self.eta):
            raise ValueError("eta: must be callable")


@dataclass(frozen=True)
class StickyClosedForm:
    """Closed-form steps for the sticky model; bypasses the solver entirely."""

    sigma: float = 1.0
    theta: float = 1.0

    def __post_init__(self) -> None:
        _check_positive(self.sigma, "sigma")
        _check_positive(self.theta, "theta")


@dataclass(frozen=True)
class GbmClosedForm:
    """Closed-form steps for the constant-elasticity model on (0, inf)."""

    sigma: float = 1.0

    def __post_init__(self) -> None:
        _check_positive(self.sigma, "sigma")


@dataclass(frozen=True)
class CantorLevel:
    """Dedicated solver for the level-n Cantor measure (exact overlaps)."""

    n: int
    tol: Optional[float] = None

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and 0 <= self.n <= cantor.MAX_LEVEL):
            raise ValueError(
                f"n: must be an integer level between 0 and {cantor.MAX_LEVEL}, got {self.n}"
            )
        _check_opt_tol(self.tol)


class ScaleFactor:
    """Clamped step-size map for one (measure, h, strategy) triple.

    Calling it at a state returns the step length, truncated so that both
    candidate moves stay inside the closed state interval; at an accessible
    finite endpoint the step is 0, which makes the chain absorb there.
    `eval_array` evaluates whole numpy arrays at once — vectorised for
    closed forms, memoised per unique state when a solver backs the map.
    `boundary_short(y)` tells whether the step at y was truncated by a
    boundary rather than solved from the time budget alone.
    """

    def __init__(
        self,
        h: float,
        space: StateSpace,
        scalar: Callable[[float], tuple[float, bool]],
        vector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        memoize: bool = False,
        kind: str = "custom",
    ) -> None:
        self.h = _check_h(h)
        self.space = space
        self.kind = kind
        self._scalar = scalar
        self._vector = vector
        self._memo: Optional[dict[float, tuple[float, bool]]] = {} if memoize else None
        self._lock = threading.Lock()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ScaleFactor(kind={self.kind!r}, h={self.h!r})"

    def _resolve(self, y: float) -> tuple[float, bool]:
        y = float(y)
        space = self.space
        if not space.in_state_set(y):
            raise ValueError(f"state {y} lies outside the chain's state set for {space}")
        if y == space.left or y == space.right:
            return 0.0, True
        if self._memo is not None:
            with self._lock:
                hit = self._memo.get(y)
            if hit is not None:
                return hit
        raw, short = self._scalar(y)
        dist = space.boundary_distance(y)
        a = float(raw)
        if a > dist:
            a, short = dist, True
        if a < 0.0:
            a = 0.0
        # at extreme budgets a closed-form or clamped step can round onto an
        # endpoint the chain must never reach; back off by ulps until both
        # candidate moves stay strictly inside
        if space.left_boundary is Boundary.INACCESSIBLE:
            while a > 0.0 and y - a <= space.left:
                a = math.nextafter(a, 0.0)
        if space.right_boundary is Boundary.INACCESSIBLE:
            while a > 0.0 and y + a >= space.right:
                a = math.nextafter(a, 0.0)
        if self._memo is not None:
            with self._lock:
                if len(self._memo) < _MEMO_CAP:
                    self._memo[y] = (a, short)
        return a, short

    def __call__(self, y: float) -> float:
        return self._resolve(y)[0]

    def boundary_short(self, y: float) -> bool:
        return self._resolve(y)[1]

    def eval_array(self, ys: np.ndarray) -> np.ndarray:
        arr = np.asarray(ys, dtype=float)
        if self._vector is not None:
            left = self.space.left
            right = self.space.right
            inside = (arr > left) & (arr < right)
            if self.space.in_state_set(left):
                inside |= arr == left
            if self.space.in_state_set(right):
                inside |= arr == right
            if not inside.all():
                bad = float(np.atleast_1d(arr)[~np.atleast_1d(inside)][0])
                raise ValueError(f"state {bad} lies outside the chain's state set for {self.space}")
            raw = np.asarray(self._vector(arr), dtype=float)
            clipped = np.minimum(raw, np.minimum(arr - left, right - arr))
            clipped = np.maximum(clipped, 0.0)
            # same endpoint backoff as the scalar path (see _resolve)
            if self.space.left_boundary is Boundary.INACCESSIBLE and math.isfinite(left):
                bad = (clipped > 0.0) & (arr - clipped <= left)
                while bad.any():
                    clipped = np.where(bad, np.nextafter(clipped, 0.0), clipped)
                    bad = (clipped > 0.0) & (arr - clipped <= left)
            if self.space.right_boundary is Boundary.INACCESSIBLE and math.isfinite(right):
                bad = (clipped > 0.0) & (arr + clipped >= right)
                while bad.any():
                    clipped = np.where(bad, np.nextafter(clipped, 0.0), clipped)
                    bad = (clipped > 0.0) & (arr + clipped >= right)
            return clipped
        flat = arr.ravel()
        uniq, inverse = np.unique(flat, return_inverse=True)
        vals = np.array([self(u) for u in uniq])
        return vals[inverse].reshape(arr.shape)


def build_scale_factor(m: SpeedMeasure, h: float, strategy) -> ScaleFactor:
    """Assemble the step-size map for a measure, time step, and strategy."""
    h = _check_h(h)
    space = m.space
    if isinstance(strategy, Emcel):
        return ScaleFactor(
            h,
            space,
            scalar=lambda y: _solve_emcel(m, h, y, strategy.tol),
            memoize=True,
            kind="emcel",
        )
    if isinstance(strategy, WeakEuler):
        if m.atoms or m.singular_cdf is not None:
            raise ValueError(
                "strategy: the square-root map only applies to measures with a density "
                "part; this measure carries atoms or a singular component"
            )
        eta = strategy.eta
        rh = math.sqrt(h)

        def scalar(y: float) -> tuple[float, bool]:
            return rh * float(eta(y)), False

        def vector(arr: np.ndarray) -> np.ndarray:
            return rh * np.asarray(eta(arr), dtype=float)

        return ScaleFactor(h, space, scalar=scalar, vector=vector, kind="weak-euler")
    if isinstance(strategy, StickyClosedForm):
        sig, th = strategy.sigma, strategy.theta
        return ScaleFactor(
            h,
            space,
            scalar=lambda y: (closed_form_sticky(h, y, sig, th), False),
            vector=lambda arr: _sticky_step_array(h, arr, sig, th),
            kind="sticky-closed-form",
        )
    if isinstance(strategy, GbmClosedForm):
        factor = math.sqrt(-math.expm1(-strategy.sigma**2 * h))
        return ScaleFactor(
            h,
            space,
            scalar=lambda y: (float(y) * factor, False),
            vector=lambda arr: arr * factor,
            kind="gbm-closed-form",
        )
    if isinstance(strategy, CantorLevel):
        return ScaleFactor(
            h,
            space,
            scalar=lambda y: (solve_cantor(h, strategy.n, y, strategy.tol), False),
            memoize=True,
            kind=f"cantor-level-{strategy.n}",
        )
    raise ValueError(f"strategy: unknown strategy object {strategy!r}")
