"""Middle-thirds Cantor set machinery.

Provides the closed intervals of the level-n construction, the singular
distribution function supported on the limit set, its exact antiderivative,
and the piecewise linear distribution functions of the level-n density
approximations.  The distribution function is evaluated digit by digit in
base 3, so no quadrature or table lookup is involved; the antiderivative
follows the self-similar structure of the function and is exact as well.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "intervals",
    "intervals_in_window",
    "cdf",
    "cdf_integral",
    "LevelCdf",
]

#: Interval counts double per level; beyond this the construction is refused.
MAX_LEVEL = 40


def _check_level(n: int) -> int:
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"level: expected an integer, got {n!r}")
    n = int(n)
    if n < 0 or n > MAX_LEVEL:
        raise ValueError(f"level: must lie in [0, {MAX_LEVEL}], got {n}")
    return n


def intervals(n: int) -> list[tuple[float, float]]:
    """Closed intervals of the level-n construction, sorted left to right.

    Level 0 is [0, 1]; each level replaces every interval by its outer
    thirds, so level n consists of 2**n intervals of length 3**-n.
    Endpoints are built from integer arithmetic before the final division.
    """
    n = _check_level(n)
    starts = [0]
    for _ in range(n):
        nxt = []
        for s in starts:
            nxt.append(3 * s)
            nxt.append(3 * s + 2)
        starts = nxt
    scale = 3**n
    return [(s / scale, (s + 1) / scale) for s in starts]


def intervals_in_window(n: int, lo: float, hi: float) -> list[tuple[float, float]]:
    """Level-n intervals that intersect the open window (lo, hi).

    Prunes the construction tree instead of materialising all 2**n
    intervals, so large levels stay cheap for narrow windows.  Endpoint
    floats agree exactly with those from :func:`intervals`.
    """
    n = _check_level(n)
    if not lo < hi:
        return []
    out = []
    # stack of (start, depth): the interval [start, start + 1] / 3**depth
    stack = [(0, 0)]
    while stack:
        start, depth = stack.pop()
        scale = 3**depth
        left = start / scale
        right = (start + 1) / scale
        if left >= hi or right <= lo:
            continue
        if depth == n:
            out.append((left, right))
            continue
        # push the right child first so the output comes out sorted
        stack.append((3 * start + 2, depth + 1))
        stack.append((3 * start, depth + 1))
    return out


def cdf(x):
    """Distribution function of the singular measure on the Cantor set.

    Reads base-3 digits of the argument: digits equal to 2 contribute
    binary digits equal to 1, and the expansion stops at the first digit
    equal to 1, which contributes the final binary 1.  Accepts scalars or
    numpy arrays; values below 0 map to 0 and above 1 to 1.
    """
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("cdf: input must not be NaN")
    scalar = arr.ndim == 0
    r = np.clip(arr, 0.0, 1.0)
    out = np.where(r >= 1.0, 1.0, 0.0)
    active = (r > 0.0) & (r < 1.0)
    r = np.where(active, r, 0.0)
    scale = 1.0
    for _ in range(54):
        if not active.any():
            break
        scale *= 0.5
        r = r * 3.0
        d = np.clip(np.floor(r), 0.0, 2.0)
        r = r - d
        hit_two = active & (d == 2.0)
        hit_one = active & (d == 1.0)
        out = out + scale * (hit_two | hit_one)
        active = active & ~hit_one
    return float(out) if scalar else out


def cdf_integral(x: float) -> float:
    """Exact antiderivative of :func:`cdf` with base point 0.

    Follows the self-similar splitting of the distribution function: on
    the left third the integral rescales by 1/6, the middle third is flat
    at 1/2, and the right third repeats the pattern shifted.  Outside
    [0, 1] the function continues with slope 0 on the left and 1 on the
    right.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("cdf_integral: input must not be NaN")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 0.5 + (x - 1.0)
    acc = 0.0
    weight = 1.0
    third = 1.0 / 3.0
    for _ in range(80):
        if x <= 0.0:
            break
        if x >= 1.0:
            acc += weight * (0.5 + (x - 1.0))
            break
        if x < third:
            weight /= 6.0
            x *= 3.0
        elif x <= 2.0 * third:
            acc += weight * (1.0 / 12.0 + 0.5 * (x - third))
            break
        else:
            acc += weight * (0.25 + 0.5 * (x - 2.0 * third))
            weight /= 6.0
            x = 3.0 * x - 2.0
        if weight < 1e-19:
            break
    return acc


class LevelCdf:
    """Distribution function of the level-n density approximation.

    The density is (3/2)**n on the level-n intervals and 0 elsewhere, so
    the distribution function is piecewise linear with slope (3/2)**n on
    the intervals and flats in between; each interval carries mass 2**-n.
    Evaluation uses linear interpolation on the knot table and the
    antiderivative is piecewise quadratic, both exact.
    """

    def __init__(self, n: int) -> None:
        self.n = _check_level(n)
        segs = intervals(self.n)
        step = 0.5**self.n
        knots = []
        values = []
        for i, (lo, hi) in enumerate(segs):
            knots += [lo, hi]
            values += [i * step, (i + 1) * step]
        self.knots = np.asarray(knots)
        self.values = np.asarray(values)
        # trapezoid accumulation is exact for a piecewise linear function
        gaps = np.diff(self.knots)
        mids = 0.5 * (self.values[1:] + self.values[:-1])
        self.cumulative = np.concatenate(([0.0], np.cumsum(gaps * mids)))

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.interp(arr, self.knots, self.values, left=0.0, right=1.0)
        return float(out) if arr.ndim == 0 else out

    def integral(self, x):
        """Antiderivative with base point 0, continued linearly beyond [0, 1]."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        idx = np.clip(np.searchsorted(self.knots, arr, side="right") - 1, 0, len(self.knots) - 2)
        x0 = self.knots[idx]
        f0 = self.values[idx]
        slope = (self.values[idx + 1] - f0) / (self.knots[idx + 1] - x0)
        dx = arr - x0
        out = self.cumulative[idx] + f0 * dx + 0.5 * slope * dx * dx
        out = np.where(arr <= self.knots[0], 0.0, out)
        beyond = arr >= self.knots[-1]
        out = np.where(beyond, self.cumulative[-1] + (arr - self.knots[-1]), out)
        return float(out[0]) if scalar else out
