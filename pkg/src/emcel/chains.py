"""Coin-tossing chains: path simulation, interpolation, and reflection folding.

A chain starts at y0 and at every step moves by the state-dependent step
size, up or down with probability 1/2 each.  Between grid times the path
is linearly interpolated.  Models with reflecting boundaries are simulated
on an extended, boundary-free measure and folded back into the original
interval afterwards; `extend_measure` builds that extension and the
matching fold map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measures import (
    Boundary,
    MirroredDensity,
    SpeedMeasure,
    StateSpace,
    TiledSpeedMeasure,
    _fold_half_line,
    _fold_two_sided,
)
from .scale import ScaleFactor

__all__ = [
    "ChainPath",
    "FoldingMap",
    "simulate_path",
    "interpolate",
    "fold_path",
    "extend_measure",
    "sign_stream",
]


def _rng(seed: int, path_index: int) -> np.random.Generator:
    """Independent counter-based stream for one path of one experiment.

    Streams are keyed by (seed, path_index), so any subset of paths can be
    regenerated bit for bit regardless of batching or thread count.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path_index,))))


def sign_stream(seed: int, path_index: int, n_steps: int) -> np.ndarray:
    """The ±1 coin tosses that drive path `path_index` under this seed."""
    draws = _rng(seed, path_index).integers(0, 2, size=n_steps)
    return 2 * draws.astype(np.int8) - 1


@dataclass(frozen=True)
class ChainPath:
    """One realised chain: states at times 0, h, 2h, ..., n_steps * h."""

    h: float
    states: np.ndarray
    seed: Optional[int] = None
    path_index: int = 0
    folded: bool = False

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    @property
    def t_max(self) -> float:
        return self.n_steps * self.h

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.h

    def __call__(self, t: float) -> float:
        return interpolate(self, t)


def interpolate(path: ChainPath, t: float) -> float:
    """Linearly interpolated state at time t in [0, t_max]."""
    t = float(t)
    if not (0.0 <= t <= path.t_max):
        raise ValueError(f"t: must lie in [0, {path.t_max}], got {t}")
    return float(np.interp(t, path.times, path.states))


def simulate_path(
    scale: ScaleFactor,
    y0: float,
    n_steps: Optional[int] = None,
    seed: int = 0,
    path_index: int = 0,
    signs=None,
) -> ChainPath:
    """Run one chain from y0 for n_steps coin tosses.

    Tosses come from the (seed, path_index) stream unless an explicit ±1
    array is supplied, in which case n_steps may be omitted and defaults
    to its length.
    """
    y0 = float(y0)
    if not scale.space.in_state_set(y0):
        raise ValueError(f"y0: state {y0} lies outside the chain's state set for {scale.space}")
    if signs is not None:
        signs = np.asarray(signs)
        if signs.ndim != 1:
            raise ValueError("signs: expected a one-dimensional array of ±1 values")
        if not np.isin(signs, (-1, 1)).all():
            raise ValueError("signs: entries must be +1 or -1")
        if n_steps is None:
            n_steps = len(signs)
        elif n_steps > len(signs):
            raise ValueError(f"n_steps: only {len(signs)} signs supplied, need {n_steps}")
        used_seed = None
    else:
        if n_steps is None:
            raise ValueError("n_steps: required when no explicit signs are given")
        signs = sign_stream(seed, path_index, int(n_steps))
        used_seed = seed
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValueError(f"n_steps: must be non-negative, got {n_steps}")
    states = np.empty(n_steps + 1)
    states[0] = y0
    x = y0
    for k in range(n_steps):
        x = x + scale(x) * float(signs[k])
        states[k + 1] = x
    return ChainPath(h=scale.h, states=states, seed=used_seed, path_index=path_index)


@dataclass(frozen=True)
class FoldingMap:
    """Map that folds extended-chain states back into the original interval.

    kind "half-line": reflect about a pivot, keeping the upper or lower
    half-line.  kind "two-sided": the period-2(right-left) triangle map
    onto [left, right].
    """

    kind: str
    left: float
    right: float = math.nan
    keep_upper: bool = True

    @classmethod
    def half_line(cls, pivot: float, keep_upper: bool = True) -> "FoldingMap":
        return cls(kind="half-line", left=float(pivot), keep_upper=keep_upper)

    @classmethod
    def two_sided(cls, left: float, right: float) -> "FoldingMap":
        if not left < right:
            raise ValueError(f"fold interval: need left < right, got [{left}, {right}]")
        return cls(kind="two-sided", left=float(left), right=float(right))

    def __call__(self, x):
        if self.kind == "half-line":
            return _fold_half_line(x, self.left, self.keep_upper)
        return _fold_two_sided(x, self.left, self.right)


def fold_path(path: ChainPath, fold: FoldingMap) -> ChainPath:
    """Apply the fold to every state of a path; linear interpolation between
    grid times remains valid because folds are piecewise isometries."""
    return ChainPath(
        h=path.h,
        states=np.asarray(fold(path.states), dtype=float),
        seed=path.seed,
        path_index=path.path_index,
        folded=True,
    )


def extend_measure(m: SpeedMeasure) -> tuple[SpeedMeasure, FoldingMap]:
    """Remove reflecting boundaries by unfolding the measure.

    One reflecting endpoint: the measure is mirrored across it onto the
    other half-line (the endpoint atom, if any, doubles).  Two reflecting
    endpoints: the measure is tiled periodically over the whole line by
    repeated reflection; measures with a singular-continuous part are not
    supported in that case.  Chains are then simulated on the extension
    and folded back with the returned map.
    """
    space = m.space
    refl_left = space.left_boundary is Boundary.REFLECTING
    refl_right = space.right_boundary is Boundary.REFLECTING
    if not (refl_left or refl_right):
        raise ValueError("extend_measure: the state space has no reflecting boundary")
    if refl_left and refl_right:
        if m.singular_cdf is not None:
            raise ValueError(
                "extend_measure: tiling a measure with a singular-continuous part "
                "is not supported; only densities and atoms can be unfolded two-sidedly"
            )
        ext = TiledSpeedMeasure(m, space.left, space.right)
        return ext, FoldingMap.two_sided(space.left, space.right)

    keep_upper = refl_left
    pivot = space.left if refl_left else space.right
    far = space.right if refl_left else space.left
    far_behavior = space.right_boundary if refl_left else space.left_boundary
    if refl_left:
        new_space = StateSpace(2.0 * pivot - far, far, far_behavior, far_behavior)
    else:
        new_space = StateSpace(far, 2.0 * pivot - far, far_behavior, far_behavior)

    density = MirroredDensity(m.density, pivot, keep_upper) if m.density is not None else None

    atoms = []
    for pos, mass in m.atoms:
        if pos == pivot:
            atoms.append((pos, 2.0 * mass))
        else:
            atoms.append((pos, mass))
            atoms.append((2.0 * pivot - pos, mass))

    singular_cdf = None
    singular_integral = None
    if m.singular_cdf is not None:
        singular_cdf = _MirroredCdf(m.singular_cdf, pivot, keep_upper)
        if m.singular_cdf_integral is not None:
            singular_integral = _MirroredCdfIntegral(
                m.singular_cdf, m.singular_cdf_integral, pivot, keep_upper
            )

    ext = SpeedMeasure(
        new_space,
        density=density,
        atoms=atoms,
        singular_cdf=singular_cdf,
        singular_cdf_integral=singular_integral,
    )
    return ext, FoldingMap.half_line(pivot, keep_upper)


@dataclass(frozen=True)
class _MirroredCdf:
    """Distribution function of a half-line measure mirrored across a pivot."""

    base: callable = field(repr=False)
    pivot: float = 0.0
    keep_upper: bool = True

    def __call__(self, x: float) -> float:
        p = self.pivot
        if self.keep_upper:
            if x >= p:
                return float(self.base(x))
            return 2.0 * float(self.base(p)) - float(self.base(2.0 * p - x))
        if x <= p:
            return float(self.base(x))
        return 2.0 * float(self.base(p)) - float(self.base(2.0 * p - x))


@dataclass(frozen=True)
class _MirroredCdfIntegral:
    """Antiderivative of a mirrored distribution function.

    For keep_upper, with T the base antiderivative and S the base cdf:
    the mirrored antiderivative at x < pivot is T(2p - x) - 2 S(p) (p - x),
    which matches T at the pivot; the keep-lower case is symmetric.
    """

    base_cdf: callable = field(repr=False)
    base_integral: callable = field(repr=False)
    pivot: float = 0.0
    keep_upper: bool = True

    def __call__(self, x: float) -> float:
        p = self.pivot
        t = self.base_integral
        if self.keep_upper:
            if x >= p:
                return float(t(x))
            return float(t(2.0 * p - x)) - 2.0 * float(self.base_cdf(p)) * (p - x)
        if x <= p:
            return float(t(x))
        return float(t(2.0 * p - x)) + 2.0 * float(self.base_cdf(p)) * (x - p)
