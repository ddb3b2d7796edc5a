"""Half-cylinder extension: energies, traces, conormal derivative, gaps."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractorus.errors import DomainError, ZeroModeNoDecay
from fractorus.extension import (
    as_cylinder,
    conormal_derivative,
    cylinder_energy,
    cylinder_from_profiles,
    extend,
    ground_gap,
    sharp_trace_gap,
    trace,
)
from fractorus.grids import (
    FracParams,
    Spectrum,
    apply_bessel_operator,
    field_from_function,
    forward_transform,
    hs_norm,
    project_zero_mean,
    random_spectrum,
)
from fractorus.theta import kappa


def _cos_spec(grid):
    return forward_transform(field_from_function(grid, np.cos))


def test_extension_energy_cos_closed_form(grid64):
    # s = 1/2, m = 0: Ext(cos x) = e^{-y} cos x, energy = pi
    p0 = FracParams(0.5, 0.0)
    v = extend(_cos_spec(grid64), p0)
    assert abs(cylinder_energy(v) - np.pi) < 1e-10


def test_extension_energy_reduction_random(grid64, params_half, rng):
    # ||Ext u||^2 = kappa(s) |u|_{H^s}^2 for every trace
    for s in (0.25, 0.5):
        p = FracParams(s, 1.0)
        u = random_spectrum(grid64, rng, decay=0.4)
        v = extend(u, p)
        target = kappa(s) * hs_norm(u, p) ** 2
        assert abs(cylinder_energy(v) - target) < 1e-8 * target


def test_extend_zero_mode_no_decay(grid64):
    p0 = FracParams(0.5, 0.0)
    c = np.zeros(grid64.shape, complex)
    c[0] = 1.0
    with pytest.raises(ZeroModeNoDecay):
        extend(Spectrum(grid64, c), p0)


def test_trace_identity(grid64, params_half, rng):
    u = random_spectrum(grid64, rng, decay=0.4)
    v = extend(u, params_half)
    assert np.max(np.abs(trace(v).coeffs - u.coeffs)) == 0.0
    cyl = as_cylinder(v)
    assert np.max(np.abs(trace(cyl).coeffs - u.coeffs)) < 1e-6


def test_conormal_derivative_recovers_operator(grid64, params_half, rng):
    # -lim y^{1-2s} dv/dy = kappa(s) (-Lap+m^2)^s u
    u = random_spectrum(grid64, rng, decay=0.6)
    v = extend(u, params_half)
    got = conormal_derivative(v, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    want = apply_bessel_operator(u, params_half)
    scale = np.max(np.abs(want.coeffs))
    assert np.max(np.abs(got.coeffs - kappa(0.5) * want.coeffs)) < 1e-6 * scale


def test_conormal_derivative_cos_half(grid64):
    p0 = FracParams(0.5, 0.0)
    u = _cos_spec(grid64)
    v = extend(u, p0)
    got = conormal_derivative(v, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    # (-Lap)^{1/2} cos = cos on T = 2pi, and kappa(1/2) = 1
    assert np.max(np.abs(got.coeffs - u.coeffs)) < 1e-8


def test_interior_residual_small(grid64, params_half, rng):
    u = random_spectrum(grid64, rng, decay=0.5)
    v = extend(u, params_half)
    assert v.interior_residual([0.1, 1.0, 5.0]) < 1e-6


def test_sharp_gap_zero_on_extensions(grid64, params_half, rng):
    u = random_spectrum(grid64, rng, decay=0.4)
    v = as_cylinder(extend(u, params_half))
    e = cylinder_energy(v)
    assert abs(sharp_trace_gap(v, params_half)) < 1e-6 * max(e, 1.0)


def test_sharp_gap_positive_on_wrong_profile(grid64, params_half):
    # e^{-2 rate y} decays too fast: strictly positive excess energy
    u = project_zero_mean(_cos_spec(grid64))

    def g(rate, y):
        return np.exp(-2.0 * rate * y)

    def gp(rate, y):
        return -2.0 * rate * np.exp(-2.0 * rate * y)

    v = cylinder_from_profiles(u, params_half, g, gp)
    assert sharp_trace_gap(v, params_half) > 1e-3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), rate_fudge=st.floats(1.05, 3.0))
def test_sharp_gap_nonnegative_random(seed, rate_fudge):
    from fractorus.grids import TorusGrid

    g = TorusGrid(1, 2 * np.pi, 16)
    p = FracParams(0.5, 1.0)
    u = random_spectrum(g, np.random.default_rng(seed), decay=0.5)

    def prof(rate, y):
        return np.exp(-rate_fudge * rate * y)

    def dprof(rate, y):
        return -rate_fudge * rate * np.exp(-rate_fudge * rate * y)

    v = cylinder_from_profiles(u, p, prof, dprof)
    assert sharp_trace_gap(v, p) >= -1e-8


def test_ground_gap_zero_on_theta_multiple(grid64, params_half):
    c = np.zeros(grid64.shape, complex)
    c[0] = 5.0
    v = as_cylinder(extend(Spectrum(grid64, c), params_half))
    assert abs(ground_gap(v, params_half)) < 1e-6


def test_ground_gap_positive_on_zero_mean(grid64, params_half):
    v = as_cylinder(extend(project_zero_mean(_cos_spec(grid64)), params_half))
    assert ground_gap(v, params_half) > 1e-4


def test_ground_gap_requires_mass(grid64):
    p0 = FracParams(0.5, 0.0)
    v = as_cylinder(extend(project_zero_mean(_cos_spec(grid64)), p0))
    with pytest.raises(DomainError):
        ground_gap(v, p0)


def test_slice_at_decays(grid64, params_half):
    v = extend(_cos_spec(grid64), params_half)
    a0 = np.max(np.abs(v.slice_at(0.0).values))
    a1 = np.max(np.abs(v.slice_at(1.0).values))
    a2 = np.max(np.abs(v.slice_at(3.0).values))
    assert a0 > a1 > a2
    with pytest.raises(DomainError):
        v.slice_at(-1.0)
