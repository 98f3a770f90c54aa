"""Adaptive Simpson quadrature against closed-form integrals."""

import math

import pytest

from emcel.quadrature import adaptive_simpson


def test_sine_over_half_period():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_cubic_is_integrated_exactly():
    # Simpson's rule is exact on cubics, so the top-level estimate already wins
    assert adaptive_simpson(lambda u: u**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-14)


def test_gaussian_bell():
    got = adaptive_simpson(lambda u: math.exp(-u * u), -8.0, 8.0)
    assert got == pytest.approx(math.sqrt(math.pi), rel=1e-11)


def test_reversed_bounds_flip_the_sign():
    fwd = adaptive_simpson(math.exp, 0.0, 1.0)
    rev = adaptive_simpson(math.exp, 1.0, 0.0)
    assert rev == -fwd
    assert fwd == pytest.approx(math.e - 1.0, rel=1e-12)


def test_zero_width_interval_is_zero():
    assert adaptive_simpson(lambda u: 1.0 / u, 2.0, 2.0) == 0.0


def test_tolerance_parameter_loosens_the_refinement():
    exact = 2.0
    loose = adaptive_simpson(math.sin, 0.0, math.pi, tol=1e-3)
    assert loose == pytest.approx(exact, abs=1e-3)


@pytest.mark.parametrize("k", [8, 10, 12, 14])
def test_boundary_layer_spike_is_not_dropped(k):
    # (u - x) * 2/u^2 concentrates near the left endpoint as x -> 0; the
    # refinement cascade must chase the layer down ~2k levels without
    # stalling on rounding noise
    x = 4.0**-k
    got = adaptive_simpson(lambda u: (u - x) * 2.0 / u**2, x, 1.0)
    exact = 2.0 * math.log(1.0 / x) + 2.0 * x - 2.0
    assert got == pytest.approx(exact, rel=1e-12)


def test_narrow_spike_at_a_sampled_point_is_resolved():
    # adaptive refinement can only chase features its samples see; a bump
    # centred on the first midpoint is visible from the start and must be
    # integrated accurately however narrow it is
    c, w = 0.5, 1e-4
    f = lambda u: math.exp(-((u - c) / w) ** 2)
    got = adaptive_simpson(f, 0.0, 1.0)
    assert got == pytest.approx(w * math.sqrt(math.pi), rel=1e-9)
