"""Model catalog: ready-made spaces, speed measures, and reference laws.

Each model bundles a state space, a speed measure, a starting state, a
default step-size strategy, and (where available) closed-form reference
laws used to measure approximation error: the terminal distribution
function and the terminal absolute-value mean.  Reference laws are only
attached for parameter choices where they are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import erfcx, ndtr

from . import cantor
from .measures import (
    Boundary,
    ConstantDensity,
    InverseSquareDensity,
    PiecewiseConstantDensity,
    SpeedMeasure,
    StateSpace,
)
from .scale import CantorLevel, Emcel, GbmClosedForm, StickyClosedForm, WeakEuler

__all__ = [
    "ModelSpec",
    "make_model",
    "model_names",
    "default_cantor_level",
    "cantor_set_intervals",
    "cantor_cdf",
    "cantor_level_cdf",
    "cantor_cdf_deviation",
    "cantor_cdf_bound_check",
    "normal_cdf",
    "folded_normal_mean",
    "reflected_sticky_cdf",
    "reflected_sticky_mean",
    "sticky_cdf",
    "gbm_cdf",
]


# ---------------------------------------------------------------------------
# reference laws


def normal_cdf(x, mean: float = 0.0, std: float = 1.0):
    """Gaussian distribution function; accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    out = ndtr((arr - mean) / std)
    return float(out) if arr.ndim == 0 else out


def folded_normal_mean(mean: float, std: float) -> float:
    """E|N(mean, std**2)| in closed form."""
    if not (std > 0.0 and math.isfinite(std)):
        raise ValueError(f"std: must be a positive finite number, got {std}")
    return std * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * (mean / std) ** 2) + mean * (
        2.0 * float(ndtr(mean / std)) - 1.0
    )


def gbm_cdf(x, t: float = 1.0, sigma: float = 1.0, y0: float = 1.0):
    """Terminal distribution function of the constant-elasticity model.

    The terminal state is y0 * exp(sigma * W_t - sigma**2 t / 2), i.e.
    lognormal; mass below or at 0 is zero.
    """
    _check_time(t)
    arr = np.asarray(x, dtype=float)
    s = sigma * math.sqrt(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (np.log(arr / y0) + 0.5 * sigma * sigma * t) / s
        out = np.where(arr > 0.0, ndtr(z), 0.0)
    return float(out) if arr.ndim == 0 else out


def reflected_sticky_cdf(z, t: float = 1.0, theta: float = 1.0):
    """Terminal distribution function of sticky reflecting Brownian motion.

    Start at 0, unit volatility, stickiness theta (the boundary atom has
    mass 1/theta).  Written with the scaled complementary error function,
    so it stays finite for any argument size:

        F(z) = 2 ndtr(z / sqrt(t)) - 1
               + erfcx((2 theta sqrt(t) + z / sqrt(t)) / sqrt(2)) * exp(-z^2 / (2t))

    for z >= 0, and 0 below.  The value at z = 0 is the sticky-time mass.
    """
    _check_time(t)
    _check_stickiness(theta)
    arr = np.asarray(z, dtype=float)
    rt = math.sqrt(t)
    scaled = arr / rt
    body = 2.0 * ndtr(scaled) - 1.0 + erfcx((2.0 * theta * rt + scaled) / math.sqrt(2.0)) * np.exp(
        -0.5 * scaled * scaled
    )
    out = np.where(arr < 0.0, 0.0, body)
    return float(out) if arr.ndim == 0 else out


def reflected_sticky_mean(t: float = 1.0, theta: float = 1.0) -> float:
    """E of the reflected sticky state at time t, started at 0, unit volatility."""
    _check_time(t)
    _check_stickiness(theta)
    rt = math.sqrt(t)
    return (
        rt * math.sqrt(2.0 / math.pi)
        - 1.0 / (2.0 * theta)
        + float(erfcx(theta * rt * math.sqrt(2.0))) / (2.0 * theta)
    )


def sticky_cdf(x, t: float = 1.0, theta: float = 1.0):
    """Terminal distribution function of two-sided sticky Brownian motion.

    Start at 0, unit volatility, atom 2/theta at 0.  The law is symmetric
    and its absolute value is the reflected sticky law with the same theta,
    so F(x) = (1 + F_refl(x)) / 2 for x >= 0 and (1 - F_refl(-x)) / 2 below.
    """
    arr = np.asarray(x, dtype=float)
    refl = reflected_sticky_cdf(np.abs(arr), t=t, theta=theta)
    out = np.where(arr >= 0.0, 0.5 * (1.0 + refl), 0.5 * (1.0 - refl))
    return float(out) if arr.ndim == 0 else out


def _check_time(t: float) -> None:
    if not (float(t) > 0.0 and math.isfinite(float(t))):
        raise ValueError(f"t: must be a positive finite number, got {t}")


def _check_stickiness(theta: float) -> None:
    if not (float(theta) > 0.0 and math.isfinite(float(theta))):
        raise ValueError(f"theta: must be a positive finite number, got {theta}")


# ---------------------------------------------------------------------------
# Cantor helpers

cantor_set_intervals = cantor.intervals
cantor_cdf = cantor.cdf


def cantor_level_cdf(n: int) -> cantor.LevelCdf:
    """Distribution function of the level-n density approximation."""
    return cantor.LevelCdf(n)


def cantor_cdf_deviation(n: int, grid_points: int = 20001) -> float:
    """Sup-norm distance between the level-n distribution function and the
    singular one, estimated on a uniform grid over [0, 1]."""
    if grid_points < 2:
        raise ValueError(f"grid_points: need at least 2, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    level = cantor.LevelCdf(n)
    return float(np.max(np.abs(level(grid) - cantor.cdf(grid))))


def cantor_cdf_bound_check(n: int, grid_points: int = 20001) -> tuple[float, float, bool]:
    """Grid-estimated deviation, the bound 2**-(n-1), and whether it holds."""
    deviation = cantor_cdf_deviation(n, grid_points)
    bound = 2.0 ** -(n - 1)
    return deviation, bound, deviation <= bound


def default_cantor_level(h: float) -> int:
    """Approximation level used when none is given: ceil(log2(1/h)).

    Keeps 2**n * sqrt(h) >= 1, so the level outgrows the step budget and
    the chains feel the fine structure of the set as h shrinks.
    """
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"h: must be a positive finite number, got {h}")
    return max(0, math.ceil(math.log2(1.0 / h)))


# ---------------------------------------------------------------------------
# the catalog


@dataclass(frozen=True)
class ModelSpec:
    """A simulation-ready model: space, measure, start, and strategies."""

    name: str
    space: StateSpace
    measure: SpeedMeasure
    y0: float
    default_strategy: object
    params: dict = field(default_factory=dict)
    reference_cdf: Optional[Callable] = None  # (x, t) -> F_t(x)
    reference_mean_abs: Optional[Callable] = None  # t -> E|X_t|
    weak_euler_eta: Optional[Callable] = None
    closed_form: Optional[object] = None
    level: Optional[int] = None

    @property
    def reflecting(self) -> bool:
        return (
            self.space.left_boundary is Boundary.REFLECTING
            or self.space.right_boundary is Boundary.REFLECTING
        )


def _brownian(sigma: float, theta: float, level, y0: Optional[float]) -> ModelSpec:
    y0 = 0.0 if y0 is None else float(y0)
    space = StateSpace.real_line()
    measure = SpeedMeasure(space, density=ConstantDensity(2.0 / (sigma * sigma)))
    eta = lambda y: sigma * np.ones_like(np.asarray(y, dtype=float))
    strategy = WeakEuler(eta)
    return ModelSpec(
        name="brownian",
        space=space,
        measure=measure,
        y0=y0,
        default_strategy=strategy,
        params={"sigma": sigma, "y0": y0},
        reference_cdf=lambda x, t: normal_cdf(x, mean=y0, std=sigma * math.sqrt(t)),
        reference_mean_abs=lambda t: folded_normal_mean(y0, sigma * math.sqrt(t)),
        weak_euler_eta=eta,
        closed_form=strategy,
    )


def _gbm(sigma: float, theta: float, level, y0: Optional[float]) -> ModelSpec:
    y0 = 1.0 if y0 is None else float(y0)
    if not y0 > 0.0:
        raise ValueError(f"y0: the constant-elasticity model needs y0 > 0, got {y0}")
    space = StateSpace.half_line(0.0, Boundary.INACCESSIBLE)
    measure = SpeedMeasure(space, density=InverseSquareDensity(2.0 / (sigma * sigma)))
    eta = lambda y: sigma * np.asarray(y, dtype=float)
    return ModelSpec(
        name="gbm",
        space=space,
        measure=measure,
        y0=y0,
        default_strategy=GbmClosedForm(sigma),
        params={"sigma": sigma, "y0": y0},
        reference_cdf=lambda x, t: gbm_cdf(x, t=t, sigma=sigma, y0=y0),
        reference_mean_abs=lambda t: y0,
        weak_euler_eta=eta,
        closed_form=GbmClosedForm(sigma),
    )


def _sticky(sigma: float, theta: float, level, y0: Optional[float]) -> ModelSpec:
    y0 = 0.0 if y0 is None else float(y0)
    space = StateSpace.real_line()
    measure = SpeedMeasure(
        space,
        density=ConstantDensity(2.0 / (sigma * sigma)),
        atoms=[(0.0, 2.0 / theta)],
    )
    standard = sigma == 1.0 and y0 == 0.0
    return ModelSpec(
        name="sticky",
        space=space,
        measure=measure,
        y0=y0,
        default_strategy=StickyClosedForm(sigma, theta),
        params={"sigma": sigma, "theta": theta, "y0": y0},
        reference_cdf=(lambda x, t: sticky_cdf(x, t=t, theta=theta)) if standard else None,
        reference_mean_abs=(lambda t: reflected_sticky_mean(t, theta=theta)) if standard else None,
        closed_form=StickyClosedForm(sigma, theta),
    )


def _reflected_sticky(sigma: float, theta: float, level, y0: Optional[float]) -> ModelSpec:
    y0 = 0.0 if y0 is None else float(y0)
    space = StateSpace.half_line(0.0, Boundary.REFLECTING)
    measure = SpeedMeasure(
        space,
        density=ConstantDensity(2.0 / (sigma * sigma)),
        atoms=[(0.0, 1.0 / theta)],
    )
    standard = sigma == 1.0 and y0 == 0.0
    return ModelSpec(
        name="reflected-sticky",
        space=space,
        measure=measure,
        y0=y0,
        default_strategy=StickyClosedForm(sigma, theta),
        params={"sigma": sigma, "theta": theta, "y0": y0},
        reference_cdf=(lambda x, t: reflected_sticky_cdf(x, t=t, theta=theta)) if standard else None,
        reference_mean_abs=(lambda t: reflected_sticky_mean(t, theta=theta)) if standard else None,
        closed_form=StickyClosedForm(sigma, theta),
    )


def _cantor(sigma: float, theta: float, level: Optional[int], y0: Optional[float]) -> ModelSpec:
    y0 = 0.5 if y0 is None else float(y0)
    space = StateSpace.real_line()
    if level is None:
        # exact singular measure: flat density 2 plus the Cantor distribution
        measure = SpeedMeasure(
            space,
            density=ConstantDensity(2.0),
            singular_cdf=cantor.cdf,
            singular_cdf_integral=cantor.cdf_integral,
        )
        strategy = Emcel()
    else:
        segs = cantor.intervals(level)
        bump = 1.5**level
        measure = SpeedMeasure(
            space,
            density=PiecewiseConstantDensity(
                [(lo, hi, 2.0 + bump) for lo, hi in segs], background=2.0
            ),
        )
        strategy = CantorLevel(level)
    return ModelSpec(
        name="cantor",
        space=space,
        measure=measure,
        y0=y0,
        default_strategy=strategy,
        params={"level": level, "y0": y0},
        level=level,
    )


_BUILDERS = {
    "brownian": _brownian,
    "gbm": _gbm,
    "sticky": _sticky,
    "reflected-sticky": _reflected_sticky,
    "cantor": _cantor,
}

_ALIASES = {
    "bm": "brownian",
    "brownian-motion": "brownian",
    "geometric": "gbm",
    "geometric-brownian": "gbm",
    "sticky-brownian": "sticky",
    "reflected": "reflected-sticky",
}


def model_names() -> list[str]:
    return sorted(_BUILDERS)


def make_model(
    name: str,
    sigma: float = 1.0,
    theta: float = 1.0,
    level: Optional[int] = None,
    y0: Optional[float] = None,
) -> ModelSpec:
    """Build a catalog model by name.

    sigma is the volatility scale, theta the stickiness (sticky models),
    level the Cantor approximation level (None selects the exact singular
    measure), and y0 overrides the model's default starting state.
    """
    key = str(name).strip().lower().replace("_", "-")
    key = _ALIASES.get(key, key)
    if key not in _BUILDERS:
        raise ValueError(f"model: unknown name {name!r}; choose from {', '.join(model_names())}")
    if not (float(sigma) > 0.0 and math.isfinite(float(sigma))):
        raise ValueError(f"sigma: must be a positive finite number, got {sigma}")
    _check_stickiness(theta)
    if level is not None and key != "cantor":
        raise ValueError(f"level: only the cantor model takes an approximation level, got model {name!r}")
    return _BUILDERS[key](float(sigma), float(theta), level, y0)
