"""Monte Carlo estimation for coin-tossing chains.

Terminal states are simulated in vectorised chunks; every path draws its
coin tosses from an independent counter-based stream keyed by (seed, path
index), and chunk results are concatenated in fixed order, so estimates
are bit-for-bit reproducible for any chunking or thread count.  Reflecting
models are simulated on their boundary-free extension and folded back.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .chains import extend_measure, sign_stream
from .models import ModelSpec
from .scale import ScaleFactor, build_scale_factor

__all__ = [
    "McSummary",
    "RateFit",
    "prepare_chain",
    "resolve_steps",
    "simulate_terminal",
    "estimate_functional",
    "empirical_cdf",
    "rate_fit",
    "PAYOFFS",
]

#: Paths are simulated in blocks of this many to bound the signs buffer.
CHUNK = 4096

#: Built-in payoff names accepted by `estimate_functional`.
PAYOFFS = ("mean", "mean-abs", "indicator", "zone")


@dataclass(frozen=True)
class McSummary:
    """One Monte Carlo estimate with its sampling error."""

    value: float
    std_error: float
    n_paths: int
    h: float
    t: float
    payoff: str
    z: Optional[float] = None


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log2(error) against log2(1/h).

    With error ~ C * h^r the slope comes out as -r: halving h moves
    log2(1/h) up by one and log2(error) down by r.
    """

    h_values: tuple
    errors: tuple
    slope: float
    intercept: float

    def predicted(self) -> np.ndarray:
        x = np.log2(1.0 / np.asarray(self.h_values))
        return 2.0 ** (self.intercept + self.slope * x)


def _resolve_workers(workers: Optional[int]) -> int:
    """EMCEL_THREADS, when set, is both the default and a hard cap."""
    cap = None
    env = os.environ.get("EMCEL_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ValueError(f"EMCEL_THREADS: not an integer: {env!r}") from exc
        if cap < 1:
            raise ValueError(f"EMCEL_THREADS: must be at least 1, got {cap}")
    if workers is None:
        workers = cap if cap is not None else 1
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"workers: must be at least 1, got {workers}")
    if cap is not None:
        workers = min(workers, cap)
    return workers


def resolve_steps(t: float, h: float) -> tuple[int, float]:
    """Number of steps for horizon t, and the grid time actually reached.

    t should be an integer multiple of h; if it is not (up to rounding
    slack), the horizon is truncated to the nearest grid time below and a
    warning is issued.
    """
    t = float(t)
    h = float(h)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError(f"t: must be a positive finite number, got {t}")
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"h: must be a positive finite number, got {h}")
    ratio = t / h
    n = int(round(ratio))
    if n >= 1 and abs(ratio - n) <= 1e-9 * max(1.0, ratio):
        return n, n * h
    n = max(1, int(math.floor(ratio)))
    warnings.warn(
        f"t={t} is not an integer multiple of h={h}; evaluating at the grid time {n * h}",
        RuntimeWarning,
        stacklevel=2,
    )
    return n, n * h


def prepare_chain(model: ModelSpec, h: float, strategy=None):
    """Step-size map and fold map for simulating this model at step h.

    Reflecting models are extended across their reflecting boundaries and
    the returned fold maps extended states back; for everything else the
    fold is None.
    """
    strategy = model.default_strategy if strategy is None else strategy
    if model.reflecting:
        measure, fold = extend_measure(model.measure)
    else:
        measure, fold = model.measure, None
    return build_scale_factor(measure, h, strategy), fold


def _chunk_terminal(sf: ScaleFactor, y0: float, n_steps: int, seed: int, start: int, count: int) -> np.ndarray:
    signs = np.empty((count, n_steps), dtype=np.int8)
    for i in range(count):
        signs[i] = sign_stream(seed, start + i, n_steps)
    x = np.full(count, y0, dtype=float)
    for k in range(n_steps):
        x += sf.eval_array(x) * signs[:, k]
    return x


def simulate_terminal(
    model: ModelSpec,
    h: float,
    t: float,
    n_paths: int,
    seed: int = 0,
    strategy=None,
    workers: Optional[int] = None,
    fold: bool = True,
) -> np.ndarray:
    """Terminal states of n_paths chains at horizon t (grid-rounded).

    Returns folded (model-space) states for reflecting models unless
    fold=False asks for the raw extended states.
    """
    n_paths = int(n_paths)
    if n_paths < 1:
        raise ValueError(f"n_paths: must be at least 1, got {n_paths}")
    n_steps, _ = resolve_steps(t, h)
    sf, fold_map = prepare_chain(model, h, strategy)
    workers = _resolve_workers(workers)

    chunks = [(s, min(CHUNK, n_paths - s)) for s in range(0, n_paths, CHUNK)]
    if workers == 1 or len(chunks) == 1:
        parts = [_chunk_terminal(sf, model.y0, n_steps, seed, s, c) for s, c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_chunk_terminal, sf, model.y0, n_steps, seed, s, c) for s, c in chunks]
            parts = [f.result() for f in futures]
    out = np.concatenate(parts)
    if fold and fold_map is not None:
        out = np.asarray(fold_map(out), dtype=float)
    return out


def _apply_payoff(samples: np.ndarray, payoff: Union[str, Callable], z: Optional[float]) -> np.ndarray:
    if callable(payoff):
        return np.asarray(payoff(samples), dtype=float)
    name = str(payoff).strip().lower().replace("_", "-")
    if name == "mean":
        return samples
    if name == "mean-abs":
        return np.abs(samples)
    if name in ("indicator", "zone"):
        if z is None:
            raise ValueError(f"z: the {name!r} payoff needs a threshold")
        if name == "indicator":
            return (samples <= float(z)).astype(float)
        return (np.abs(samples) < float(z)).astype(float)
    raise ValueError(f"payoff: unknown payoff {payoff!r}; choose from {', '.join(PAYOFFS)} or pass a callable")


def estimate_functional(
    model: ModelSpec,
    h: float,
    t: float,
    payoff: Union[str, Callable],
    n_paths: int,
    seed: int = 0,
    z: Optional[float] = None,
    strategy=None,
    workers: Optional[int] = None,
) -> McSummary:
    """Monte Carlo estimate of E[payoff(X_t)] for the chain.

    Built-in payoffs: "mean" (the state itself), "mean-abs" (absolute
    value), "indicator" (state <= z), "zone" (|state| < z); a callable is
    applied to the sample array directly.
    """
    samples = simulate_terminal(model, h, t, n_paths, seed=seed, strategy=strategy, workers=workers)
    vals = _apply_payoff(samples, payoff, z)
    n = len(vals)
    value = float(np.mean(vals))
    std_error = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    n_steps, t_eff = resolve_steps(t, h)
    return McSummary(
        value=value,
        std_error=std_error,
        n_paths=n,
        h=float(h),
        t=t_eff,
        payoff=payoff if isinstance(payoff, str) else getattr(payoff, "__name__", "custom"),
        z=z,
    )


def empirical_cdf(samples: np.ndarray, xs):
    """Right-continuous empirical distribution function of the samples."""
    samples = np.sort(np.asarray(samples, dtype=float))
    if len(samples) == 0:
        raise ValueError("samples: need at least one sample")
    arr = np.asarray(xs, dtype=float)
    out = np.searchsorted(samples, arr, side="right") / len(samples)
    return float(out) if arr.ndim == 0 else out


def rate_fit(h_values: Sequence[float], errors: Sequence[float]) -> RateFit:
    """Fit error ~ C * h^slope by least squares in log2-log2 coordinates.

    Zero errors are replaced by machine epsilon (with a warning) so the
    logarithm stays finite.
    """
    h_arr = np.asarray(h_values, dtype=float)
    e_arr = np.asarray(errors, dtype=float)
    if h_arr.ndim != 1 or h_arr.shape != e_arr.shape or len(h_arr) < 2:
        raise ValueError("rate_fit: need matching one-dimensional h and error arrays of length >= 2")
    if not ((h_arr > 0.0) & np.isfinite(h_arr)).all():
        raise ValueError("h_values: must be positive finite numbers")
    if not (np.isfinite(e_arr) & (e_arr >= 0.0)).all():
        raise ValueError("errors: must be non-negative finite numbers")
    if (e_arr == 0.0).any():
        warnings.warn(
            "rate_fit: zero error replaced by machine epsilon for the log fit",
            RuntimeWarning,
            stacklevel=2,
        )
        e_arr = np.where(e_arr == 0.0, np.finfo(float).eps, e_arr)
    x = np.log2(1.0 / h_arr)
    y = np.log2(e_arr)
    slope, intercept = np.polyfit(x, y, 1)
    return RateFit(
        h_values=tuple(float(v) for v in h_arr),
        errors=tuple(float(v) for v in e_arr),
        slope=float(slope),
        intercept=float(intercept),
    )
