"""Speed measures and the exit-time integrals behind step-size construction.

A one-dimensional diffusion in natural scale is determined by its state
interval and its speed measure.  This module represents such measures as a
sum of three parts, an absolutely continuous part given through a density,
finitely many atoms, and an optional singular continuous part given through
its distribution function, and implements the integrals against them that
the step-size solvers and diagnostics need:

* the mass of an open interval,
* the triangular-weight exit-time integral over a symmetric interval,
  which equals the diffusion's expected exit time from that interval,
* the one-sided accessibility integral ``q_function`` whose finiteness
  decides whether a finite boundary can be reached,
* the expected exit time from an arbitrary bounded interval, written
  against the exit-distribution kernel of the interval.

Densities declared as constant, piecewise constant, or inverse-square are
integrated in closed form; plain callables fall back to adaptive Simpson
quadrature.  Singular parts are integrated by parts so that only values of
the distribution function (and, when available, of its antiderivative) are
needed.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .quadrature import adaptive_simpson

__all__ = [
    "Boundary",
    "StateSpace",
    "Density",
    "ConstantDensity",
    "PiecewiseConstantDensity",
    "InverseSquareDensity",
    "FunctionDensity",
    "MirroredDensity",
    "TiledDensity",
    "SpeedMeasure",
    "TiledSpeedMeasure",
    "as_density",
    "measure_of_open_interval",
    "exit_time_functional",
    "q_function",
    "green_exit_expectation",
    "condition_a_diagnostic",
    "space_from_config",
    "measure_from_config",
]


class Boundary(Enum):
    """Behaviour of a state-interval endpoint."""

    INACCESSIBLE = "inaccessible"
    ABSORBING = "absorbing"
    REFLECTING = "reflecting"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name}: expected a finite number, got {value}")
    return value


@dataclass(frozen=True)
class StateSpace:
    """State interval with a behaviour tag per endpoint.

    Endpoints may be infinite, in which case the corresponding behaviour
    must be inaccessible.  Accessible endpoints (absorbing or reflecting)
    belong to the state interval, inaccessible ones do not.
    """

    left: float
    right: float
    left_boundary: Boundary = Boundary.INACCESSIBLE
    right_boundary: Boundary = Boundary.INACCESSIBLE

    def __post_init__(self) -> None:
        for name, end in (("left", self.left), ("right", self.right)):
            if math.isnan(end):
                raise ValueError(f"space.{name}: endpoint must not be NaN")
        if not self.left < self.right:
            raise ValueError(
                f"space: left endpoint {self.left} must lie below right endpoint {self.right}"
            )
        for name, end, beh in (
            ("left_boundary", self.left, self.left_boundary),
            ("right_boundary", self.right, self.right_boundary),
        ):
            if not isinstance(beh, Boundary):
                raise ValueError(f"space.{name}: expected a Boundary, got {beh!r}")
            if math.isinf(end) and beh is not Boundary.INACCESSIBLE:
                raise ValueError(
                    f"space.{name}: a {beh.value} boundary requires a finite endpoint"
                )

    @classmethod
    def real_line(cls) -> "StateSpace":
        return cls(-math.inf, math.inf)

    @classmethod
    def half_line(
        cls, left: float = 0.0, left_boundary: Boundary = Boundary.INACCESSIBLE
    ) -> "StateSpace":
        return cls(left, math.inf, left_boundary, Boundary.INACCESSIBLE)

    def in_interior(self, y: float) -> bool:
        return self.left < y < self.right

    def in_state_set(self, y: float) -> bool:
        """True when ``y`` is interior or an accessible endpoint."""
        if self.in_interior(y):
            return True
        if y == self.left and self.left_boundary is not Boundary.INACCESSIBLE:
            return True
        if y == self.right and self.right_boundary is not Boundary.INACCESSIBLE:
            return True
        return False

    def in_closure(self, x: float) -> bool:
        return self.left <= x <= self.right

    def boundary_distance(self, y: float) -> float:
        """Distance from ``y`` to the nearest endpoint (``inf`` if none is finite)."""
        return min(y - self.left, self.right - y)


# ---------------------------------------------------------------------------
# densities


class Density:
    """Absolutely continuous part of a speed measure.

    Subclasses provide pointwise evaluation and the affine moment

        integrate_affine(lo, hi, c0, c1) = int_lo^hi (c0 + c1 u) rho(u) du,

    the only integral shape the exit-time formulas need.  The base
    implementation falls back to adaptive Simpson quadrature; subclasses
    with closed-form antiderivatives override it exactly.
    """

    def __call__(self, u: float) -> float:
        raise NotImplementedError

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        return adaptive_simpson(lambda u: (c0 + c1 * u) * self(u), lo, hi)


def _affine_moment(lo: float, hi: float, c0: float, c1: float) -> float:
    """int_lo^hi (c0 + c1 u) du for finite bounds."""
    return c0 * (hi - lo) + 0.5 * c1 * (hi * hi - lo * lo)


@dataclass(frozen=True)
class ConstantDensity(Density):
    value: float

    def __post_init__(self) -> None:
        v = _require_finite("density.value", self.value)
        if v < 0:
            raise ValueError(f"density.value: must be nonnegative, got {v}")

    def __call__(self, u: float) -> float:
        return self.value

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi or self.value == 0.0:
            return 0.0
        if math.isinf(lo) or math.isinf(hi):
            # Only reached for interval-mass queries where the weight is
            # nonnegative; the mass of an unbounded interval is infinite.
            return math.inf
        return self.value * _affine_moment(lo, hi, c0, c1)


class PiecewiseConstantDensity(Density):
    """Piecewise constant density: ``value`` on each piece, ``background`` elsewhere."""

    def __init__(
        self,
        pieces: Iterable[Sequence[float]],
        background: float = 0.0,
    ) -> None:
        cleaned = []
        prev_hi = -math.inf
        for i, piece in enumerate(pieces):
            if len(piece) != 3:
                raise ValueError(f"density.pieces[{i}]: expected (lo, hi, value)")
            lo, hi, val = (float(p) for p in piece)
            _require_finite(f"density.pieces[{i}].lo", lo)
            _require_finite(f"density.pieces[{i}].hi", hi)
            _require_finite(f"density.pieces[{i}].value", val)
            if not lo < hi:
                raise ValueError(f"density.pieces[{i}]: lo {lo} must lie below hi {hi}")
            if val < 0:
                raise ValueError(f"density.pieces[{i}].value: must be nonnegative")
            if lo < prev_hi:
                raise ValueError(f"density.pieces[{i}]: pieces must be sorted and disjoint")
            prev_hi = hi
            cleaned.append((lo, hi, val))
        bg = _require_finite("density.background", background)
        if bg < 0:
            raise ValueError("density.background: must be nonnegative")
        self.pieces = tuple(cleaned)
        self.background = bg

    def __call__(self, u: float) -> float:
        for lo, hi, val in self.pieces:
            if lo <= u < hi:
                return val
            if u < lo:
                break
        return self.background

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        if math.isinf(lo) or math.isinf(hi):
            if self.background > 0.0:
                return math.inf
            total = 0.0
            for p_lo, p_hi, val in self.pieces:
                a, b = max(lo, p_lo), min(hi, p_hi)
                if a < b:
                    total += val * _affine_moment(a, b, c0, c1)
            return total
        total = self.background * _affine_moment(lo, hi, c0, c1)
        for p_lo, p_hi, val in self.pieces:
            a, b = max(lo, p_lo), min(hi, p_hi)
            if a < b:
                total += (val - self.background) * _affine_moment(a, b, c0, c1)
        return total


@dataclass(frozen=True)
class InverseSquareDensity(Density):
    """Density ``coefficient / u**2`` on the positive half line."""

    coefficient: float

    def __post_init__(self) -> None:
        c = _require_finite("density.coefficient", self.coefficient)
        if c <= 0:
            raise ValueError(f"density.coefficient: must be positive, got {c}")

    def __call__(self, u: float) -> float:
        if u <= 0.0:
            raise ValueError("inverse-square density is defined for u > 0 only")
        return self.coefficient / (u * u)

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        if lo < 0.0:
            raise ValueError("inverse-square density: integration bound below 0")
        if lo == 0.0:
            # The integral against any weight that is positive near 0 diverges.
            return math.inf
        total = 0.0
        if c0 != 0.0:
            total += c0 * self.coefficient * (1.0 / lo - (0.0 if math.isinf(hi) else 1.0 / hi))
        if c1 != 0.0:
            total += c1 * self.coefficient * math.log(hi / lo)
        return total


class FunctionDensity(Density):
    """Density given as a plain callable; integrated by adaptive quadrature."""

    def __init__(self, fn: Callable[[float], float], tol: float = 1e-12) -> None:
        if not callable(fn):
            raise ValueError("density: expected a callable")
        self.fn = fn
        self.tol = float(tol)

    def __call__(self, u: float) -> float:
        return float(self.fn(u))

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        if math.isinf(lo) or math.isinf(hi):
            raise ValueError("quadrature-backed densities need finite integration bounds")
        return adaptive_simpson(lambda u: (c0 + c1 * u) * self.fn(u), lo, hi, tol=self.tol)


def _fold_half_line(x: float, pivot: float, keep_upper: bool) -> float:
    if keep_upper:
        return pivot + abs(x - pivot)
    return pivot - abs(x - pivot)


def _fold_two_sided(x, left: float, right: float):
    """Fold the real line onto [left, right] by repeated reflection.

    Works elementwise on numpy arrays as well as on scalars.
    """
    width = right - left
    s = (x - left) / width
    s = s % 2.0
    tri = 1.0 - abs(1.0 - s)
    return left + width * tri


class MirroredDensity(Density):
    """Density mirrored across a pivot: ``rho(pivot + |u - pivot|)``."""

    def __init__(self, base: Density, pivot: float, keep_upper: bool = True) -> None:
        self.base = base
        self.pivot = _require_finite("pivot", pivot)
        self.keep_upper = bool(keep_upper)

    def __call__(self, u: float) -> float:
        return self.base(_fold_half_line(u, self.pivot, self.keep_upper))

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        p = self.pivot
        total = 0.0
        if self.keep_upper:
            if hi > p:
                total += self.base.integrate_affine(max(lo, p), hi, c0, c1)
            if lo < p:
                # substitute v = 2 p - u on the mirrored side
                m = min(hi, p)
                total += self.base.integrate_affine(2 * p - m, 2 * p - lo, c0 + 2 * p * c1, -c1)
        else:
            if lo < p:
                total += self.base.integrate_affine(lo, min(hi, p), c0, c1)
            if hi > p:
                m = max(lo, p)
                total += self.base.integrate_affine(2 * p - hi, 2 * p - m, c0 + 2 * p * c1, -c1)
        return total


class TiledDensity(Density):
    """Density tiled over the real line by reflecting a base density on [left, right]."""

    def __init__(self, base: Density, left: float, right: float) -> None:
        self.base = base
        self.left = _require_finite("left", left)
        self.right = _require_finite("right", right)
        if not left < right:
            raise ValueError("tiled density: left must lie below right")

    def __call__(self, u: float) -> float:
        return self.base(_fold_two_sided(u, self.left, self.right))

    def integrate_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if lo == hi:
            return 0.0
        w = self.right - self.left
        if math.isinf(lo) or math.isinf(hi):
            per_period = self.base.integrate_affine(self.left, self.right, 1.0, 0.0)
            return math.inf if per_period > 0.0 else 0.0
        total = 0.0
        k = math.floor((lo - self.left) / w)
        while self.left + k * w < hi:
            cell_lo = self.left + k * w
            cell_hi = cell_lo + w
            a, b = max(lo, cell_lo), min(hi, cell_hi)
            if a < b:
                if k % 2 == 0:
                    # ascending cell: u = v + k w
                    shift = k * w
                    total += self.base.integrate_affine(
                        a - shift, b - shift, c0 + c1 * shift, c1
                    )
                else:
                    # descending cell: u = 2 left + (k + 1) w - v
                    ref = 2 * self.left + (k + 1) * w
                    total += self.base.integrate_affine(ref - b, ref - a, c0 + c1 * ref, -c1)
            k += 1
        return total


def as_density(obj) -> Density | None:
    if obj is None or isinstance(obj, Density):
        return obj
    if isinstance(obj, numbers.Real):
        return ConstantDensity(float(obj))
    if callable(obj):
        return FunctionDensity(obj)
    raise ValueError(f"density: expected a number, callable, or Density, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# speed measures


class SpeedMeasure:
    """Speed measure on a state space.

    Parameters
    ----------
    space : StateSpace
    density : Density, float, callable, or None
        Absolutely continuous part.  Numbers become constant densities,
        callables are integrated by adaptive quadrature.
    atoms : iterable of (position, mass)
        Finitely many point masses.  Positions must be distinct, finite,
        and lie in the state set (interior or accessible endpoint); masses
        must be positive and finite.
    singular_cdf : callable, optional
        Distribution function of a singular continuous part (nondecreasing
        and continuous); only increments of it enter any computation.
    singular_cdf_integral : callable, optional
        Antiderivative ``x -> int_c^x singular_cdf(u) du`` for an arbitrary
        fixed base point c.  When given, singular-part integrals are exact;
        otherwise they fall back to adaptive quadrature on the CDF.
    """

    def __init__(
        self,
        space: StateSpace,
        density=None,
        atoms: Iterable[Sequence[float]] = (),
        singular_cdf: Callable[[float], float] | None = None,
        singular_cdf_integral: Callable[[float], float] | None = None,
    ) -> None:
        if not isinstance(space, StateSpace):
            raise ValueError("space: expected a StateSpace")
        self.space = space
        self.density = as_density(density)

        cleaned = []
        for i, atom in enumerate(atoms):
            if len(atom) != 2:
                raise ValueError(f"atoms[{i}]: expected a (position, mass) pair")
            pos, mass = float(atom[0]), float(atom[1])
            _require_finite(f"atoms[{i}].position", pos)
            _require_finite(f"atoms[{i}].mass", mass)
            if mass <= 0:
                raise ValueError(f"atoms[{i}].mass: must be positive, got {mass}")
            if not space.in_state_set(pos):
                raise ValueError(f"atoms[{i}].position: {pos} lies outside the state set")
            cleaned.append((pos, mass))
        cleaned.sort()
        for (p1, _), (p2, _) in zip(cleaned, cleaned[1:]):
            if p1 == p2:
                raise ValueError(f"atoms: duplicate position {p1}")
        self.atoms = tuple(cleaned)

        if singular_cdf is not None and not callable(singular_cdf):
            raise ValueError("singular_cdf: expected a callable")
        if singular_cdf_integral is not None and singular_cdf is None:
            raise ValueError("singular_cdf_integral: requires singular_cdf")
        self.singular_cdf = singular_cdf
        self.singular_cdf_integral = singular_cdf_integral

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = [f"space=({self.space.left}, {self.space.right})"]
        if self.density is not None:
            parts.append(f"density={type(self.density).__name__}")
        if self.atoms:
            parts.append(f"atoms={list(self.atoms)}")
        if self.singular_cdf is not None:
            parts.append("singular=yes")
        return f"SpeedMeasure({', '.join(parts)})"

    # -- atoms ------------------------------------------------------------

    def atom_mass_at(self, y: float) -> float:
        for pos, mass in self.atoms:
            if pos == y:
                return mass
            if pos > y:
                break
        return 0.0

    def atoms_in(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Atoms with positions strictly inside the open interval (lo, hi)."""
        return [(p, m) for p, m in self.atoms if lo < p < hi]

    # -- integral plumbing --------------------------------------------------

    def _density_affine(self, lo: float, hi: float, c0: float, c1: float) -> float:
        if self.density is None or lo == hi:
            return 0.0
        return self.density.integrate_affine(lo, hi, c0, c1)

    def _singular_increment(self, a: float, b: float) -> float:
        if self.singular_cdf is None:
            return 0.0
        return float(self.singular_cdf(b)) - float(self.singular_cdf(a))

    def _singular_shifted_integral(self, p: float, q: float, y: float) -> float:
        """int_p^q (S(u) - S(y)) du for the singular CDF S."""
        if self.singular_cdf is None or p == q:
            return 0.0
        s_y = float(self.singular_cdf(y))
        if self.singular_cdf_integral is not None:
            anti = self.singular_cdf_integral
            return (float(anti(q)) - float(anti(p))) - s_y * (q - p)
        cdf = self.singular_cdf
        return adaptive_simpson(lambda u: float(cdf(u)) - s_y, p, q)


class TiledSpeedMeasure(SpeedMeasure):
    """Speed measure tiled over the real line by two-sided reflection.

    Produced by ``extend_measure`` for a doubly reflecting interval; the
    atom list is generated lazily for any bounded query window, so only
    bounded-interval queries are supported.
    """

    def __init__(
        self,
        base: SpeedMeasure,
        left: float,
        right: float,
    ) -> None:
        density = None
        if base.density is not None:
            density = TiledDensity(base.density, left, right)
        super().__init__(StateSpace.real_line(), density=density, atoms=())
        self._base = base
        self._left = left
        self._right = right

    def _tiled_atoms(self, lo: float, hi: float, strict: bool) -> list[tuple[float, float]]:
        if math.isinf(lo) or math.isinf(hi):
            raise ValueError("tiled measure: atom queries need a bounded window")
        left, right = self._left, self._right
        w = right - left
        out = []
        k_lo = math.floor((lo - left) / w) - 1
        k_hi = math.ceil((hi - left) / w) + 1
        for pos, mass in self._base.atoms:
            if pos == left or pos == right:
                # boundary atoms sit at fold points and pick up both mirror images
                period = 2.0 * w
                first = pos if pos == left else left + w
                k = math.floor((lo - first) / period)
                for j in range(k, k + int((hi - lo) / period) + 3):
                    x = first + j * period
                    if lo < x < hi or (not strict and (x == lo or x == hi)):
                        out.append((x, 2.0 * mass))
            else:
                for k in range(k_lo, k_hi + 1):
                    for x in (left + 2 * k * w + (pos - left), left + 2 * k * w - (pos - left)):
                        if lo < x < hi or (not strict and (x == lo or x == hi)):
                            out.append((x, mass))
        out.sort()
        return out

    def atom_mass_at(self, y: float) -> float:
        hits = self._tiled_atoms(y - 1.0, y + 1.0, strict=False)
        for pos, mass in hits:
            if pos == y:
                return mass
        return 0.0

    def atoms_in(self, lo: float, hi: float) -> list[tuple[float, float]]:
        return self._tiled_atoms(lo, hi, strict=True)


# ---------------------------------------------------------------------------
# integral operations


def measure_of_open_interval(m: SpeedMeasure, a: float, b: float) -> float:
    """Mass assigned by ``m`` to the open interval (a, b).

    Endpoints may be infinite on an unbounded state space; atoms at the
    endpoints are excluded.
    """
    if math.isnan(a) or math.isnan(b):
        raise ValueError("interval: endpoints must not be NaN")
    if a > b:
        raise ValueError(f"interval: left endpoint {a} exceeds right endpoint {b}")
    if not (m.space.in_closure(a) and m.space.in_closure(b)):
        raise ValueError(f"interval: ({a}, {b}) is not contained in the state interval closure")
    if a == b:
        return 0.0
    total = m._density_affine(a, b, 1.0, 0.0)
    if math.isinf(total):
        return math.inf
    total += sum(mass for _, mass in m.atoms_in(a, b))
    total += m._singular_increment(a, b)
    return total


def exit_time_functional(m: SpeedMeasure, y: float, a: float) -> float:
    """Triangular-weight integral ``(1/2) int (a - |u - y|)+ m(du)``.

    Equals the expected time the diffusion started at ``y`` needs to leave
    the interval ``(y - a, y + a)``.  Requires ``y`` interior, ``a >= 0``
    finite, and ``[y - a, y + a]`` inside the closure of the state interval.
    """
    _require_finite("y", y)
    _require_finite("a", a)
    if a < 0:
        raise ValueError(f"a: must be nonnegative, got {a}")
    if not m.space.in_interior(y):
        raise ValueError(f"y: {y} is not interior to the state interval")
    if not (m.space.in_closure(y - a) and m.space.in_closure(y + a)):
        raise ValueError(f"a: the interval ({y - a}, {y + a}) leaves the state interval")
    if a == 0.0:
        return 0.0
    # density part: weight (a - (y - u)) on the left, (a - (u - y)) on the right
    total = 0.5 * (
        m._density_affine(y - a, y, a - y, 1.0)
        + m._density_affine(y, y + a, a + y, -1.0)
    )
    if math.isinf(total):
        return math.inf
    for pos, mass in m.atoms_in(y - a, y + a):
        total += 0.5 * mass * (a - abs(pos - y))
    total += 0.5 * (
        m._singular_shifted_integral(y, y + a, y)
        - m._singular_shifted_integral(y - a, y, y)
    )
    return total


def _one_sided_accessibility(m: SpeedMeasure, y: float, x: float) -> float:
    """int over the signed range from y to x of m((y, u)) du, plus atom term."""
    if x > y:
        val = m._density_affine(y, x, x, -1.0)
        if math.isinf(val):
            return math.inf
        for pos, mass in m.atoms_in(y, x):
            val += mass * (x - pos)
        val += m._singular_shifted_integral(y, x, y)
    else:
        val = m._density_affine(x, y, -x, 1.0)
        if math.isinf(val):
            return math.inf
        for pos, mass in m.atoms_in(x, y):
            val += mass * (pos - x)
        val -= m._singular_shifted_integral(x, y, y)
    return val


def q_function(m: SpeedMeasure, y: float, x: float) -> float:
    """One-sided accessibility integral of ``m`` from interior ``y`` to ``x``.

    Returns ``(1/2) m({y}) |x - y|`` plus the integral of the interval
    masses ``m((y, u))`` for ``u`` between ``y`` and ``x``.  The value is
    finite for interior ``x``; at a finite boundary it is finite exactly
    when the boundary is reachable by the diffusion, and at an infinite
    boundary it is infinite.
    """
    _require_finite("y", y)
    if math.isnan(x):
        raise ValueError("x: must not be NaN")
    if not m.space.in_interior(y):
        raise ValueError(f"y: {y} is not interior to the state interval")
    if not m.space.in_closure(x):
        raise ValueError(f"x: {x} lies outside the state interval closure")
    if x == y:
        return 0.0
    if math.isinf(x):
        return math.inf
    base = 0.5 * m.atom_mass_at(y) * abs(x - y)

    boundary_probe = (
        isinstance(m.density, FunctionDensity)
        and (x == m.space.left or x == m.space.right)
    )
    if not boundary_probe:
        return base + _one_sided_accessibility(m, y, x)

    # A callable density can diverge at the boundary itself, so approach it
    # along a geometric sequence: the probe values increase monotonically,
    # and they either settle (accessible boundary) or keep growing.  The
    # probe point is written as an offset from x so it never rounds onto
    # the boundary itself.  A slowly divergent integral (logarithmic, say)
    # never settles, so exhausting the probes also means inaccessible.
    span = x - y
    prev = 0.0
    for k in range(1, 40):
        xk = x - span * 0.25**k
        if xk == x:
            # the offset rounded away entirely; no closer probe exists,
            # and the values have not settled, so treat as divergent
            break
        val = _one_sided_accessibility(m, y, xk)
        if not math.isfinite(val) or val > 1e12:
            return math.inf
        if k > 1 and abs(val - prev) <= 1e-10 * max(1.0, abs(val)):
            return base + val
        prev = val
    return math.inf


def green_exit_expectation(m: SpeedMeasure, y: float, alpha: float, beta: float) -> float:
    """Expected exit time of the diffusion from (alpha, beta) started at y.

    Integrates the exit-distribution kernel of the bounded interval
    (alpha, beta) against the measure.  Requires alpha < y < beta finite
    with [alpha, beta] inside the closure of the state interval.
    """
    _require_finite("y", y)
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("interval: exit expectations need finite endpoints")
    if not alpha < y < beta:
        raise ValueError(f"y: {y} must lie strictly inside ({alpha}, {beta})")
    if not (m.space.in_closure(alpha) and m.space.in_closure(beta)):
        raise ValueError(f"interval: [{alpha}, {beta}] leaves the state interval closure")
    width = beta - alpha
    w_left = (beta - y) / width  # kernel slope left of y
    w_right = (y - alpha) / width  # kernel slope right of y (negated)
    total = m._density_affine(alpha, y, -alpha * w_left, w_left)
    total += m._density_affine(y, beta, beta * w_right, -w_right)
    if math.isinf(total):
        return math.inf
    for pos, mass in m.atoms_in(alpha, beta):
        if pos <= y:
            total += mass * w_left * (pos - alpha)
        else:
            total += mass * w_right * (beta - pos)
    total += w_right * m._singular_shifted_integral(y, beta, y)
    total -= w_left * m._singular_shifted_integral(alpha, y, y)
    return total


def condition_a_diagnostic(
    m: SpeedMeasure,
    family: Callable[[float], Callable[[float], float]],
    window: tuple[float, float],
    h_values: Sequence[float],
    grid_points: int = 201,
) -> list[tuple[float, float]]:
    """Uniform accuracy of a step-size family on a compact window.

    For each step budget ``h``, evaluates the step sizes ``a = family(h)(y)``
    on a grid over ``window`` and reports the largest relative deviation
    ``|exit_time_functional(m, y, a) - h| / h``.  A family that emulates
    ``h`` time units per step exactly reports zeros; vanishing deviations
    as ``h`` decreases indicate a consistent family.
    """
    import numpy as np

    lo, hi = float(window[0]), float(window[1])
    if not (m.space.in_interior(lo) and m.space.in_interior(hi) and lo < hi):
        raise ValueError(f"window: [{lo}, {hi}] must be a compact interval interior to the states")
    if grid_points < 2:
        raise ValueError("grid_points: need at least 2")
    ys = np.linspace(lo, hi, int(grid_points))
    out = []
    for h in h_values:
        h = float(h)
        if not (h > 0 and math.isfinite(h)):
            raise ValueError(f"h_values: step budgets must be positive, got {h}")
        g = family(h)
        worst = 0.0
        for y in ys:
            a = float(g(float(y)))
            dev = abs(exit_time_functional(m, float(y), a) - h) / h
            if dev > worst:
                worst = dev
        out.append((h, worst))
    return out


# ---------------------------------------------------------------------------
# config document support


_BOUNDARY_NAMES = {b.value: b for b in Boundary}


def space_from_config(cfg: dict) -> StateSpace:
    """Build a StateSpace from a config table with keys left/right and behaviours."""
    if not isinstance(cfg, dict):
        raise ValueError("space: expected a table")
    unknown = set(cfg) - {"left", "right", "left_boundary", "right_boundary"}
    if unknown:
        raise ValueError(f"space: unknown keys {sorted(unknown)}")
    left = float(cfg.get("left", -math.inf))
    right = float(cfg.get("right", math.inf))
    sides = {}
    for key in ("left_boundary", "right_boundary"):
        name = cfg.get(key, "inaccessible")
        if name not in _BOUNDARY_NAMES:
            raise ValueError(
                f"space.{key}: unknown behaviour {name!r}, expected one of {sorted(_BOUNDARY_NAMES)}"
            )
        sides[key] = _BOUNDARY_NAMES[name]
    return StateSpace(left, right, sides["left_boundary"], sides["right_boundary"])


def _density_from_config(cfg) -> Density | None:
    if cfg is None:
        return None
    if isinstance(cfg, numbers.Real):
        return ConstantDensity(float(cfg))
    if not isinstance(cfg, dict):
        raise ValueError("measure.density: expected a number or a table with a 'kind' key")
    kind = cfg.get("kind")
    if kind == "constant":
        unknown = set(cfg) - {"kind", "value"}
        if unknown:
            raise ValueError(f"measure.density: unknown keys {sorted(unknown)}")
        return ConstantDensity(float(cfg.get("value", 0.0)))
    if kind == "piecewise":
        unknown = set(cfg) - {"kind", "pieces", "background"}
        if unknown:
            raise ValueError(f"measure.density: unknown keys {sorted(unknown)}")
        return PiecewiseConstantDensity(cfg.get("pieces", ()), float(cfg.get("background", 0.0)))
    if kind == "inverse-square":
        unknown = set(cfg) - {"kind", "coefficient"}
        if unknown:
            raise ValueError(f"measure.density: unknown keys {sorted(unknown)}")
        return InverseSquareDensity(float(cfg.get("coefficient", 1.0)))
    raise ValueError(
        f"measure.density.kind: unknown kind {kind!r}, expected constant, piecewise, or inverse-square"
    )


def measure_from_config(space: StateSpace, cfg: dict) -> SpeedMeasure:
    """Build a SpeedMeasure from a config table.

    Recognised keys: ``density`` (number or table), ``atoms`` (list of
    [position, mass] pairs), and ``singular`` (the name ``cantor_exact`` or
    ``cantor_level_<n>``).
    """
    if not isinstance(cfg, dict):
        raise ValueError("measure: expected a table")
    unknown = set(cfg) - {"density", "atoms", "singular"}
    if unknown:
        raise ValueError(f"measure: unknown keys {sorted(unknown)}")
    density = _density_from_config(cfg.get("density"))
    atoms = cfg.get("atoms", ())
    singular_cdf = None
    singular_int = None
    name = cfg.get("singular")
    if name is not None:
        from . import cantor

        if name == "cantor_exact":
            singular_cdf = cantor.cdf
            singular_int = cantor.cdf_integral
        elif isinstance(name, str) and name.startswith("cantor_level_"):
            try:
                n = int(name.rsplit("_", 1)[1])
            except ValueError:
                raise ValueError(f"measure.singular: malformed level in {name!r}") from None
            level = cantor.LevelCdf(n)
            singular_cdf = level
            singular_int = level.integral
        else:
            raise ValueError(
                f"measure.singular: unknown singular part {name!r}, "
                "expected 'cantor_exact' or 'cantor_level_<n>'"
            )
    return SpeedMeasure(
        space,
        density=density,
        atoms=atoms,
        singular_cdf=singular_cdf,
        singular_cdf_integral=singular_int,
    )
