"""Envelope families: shapes, analytic derivatives, drag transform, sampling."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pulseforge.envelopes import (
    DEFAULT_SAMPLE_RATE,
    DRAG_L,
    DRAG_P,
    NO_DRAG_CONFIG,
    DragConfig,
    EnvelopeSpec,
    ac_stark_shift,
    apply_drag,
    cosine,
    envelope_derivative,
    eval_envelope,
    fast_series,
    gaussian,
    hd_series,
    sample_count,
    sample_waveform,
    square_cosine_rise,
)
from pulseforge.errors import ConfigurationError

T_P = 6.25e-9


def _families():
    return [
        cosine(T_P, amplitude=4.8e8),
        gaussian(T_P, amplitude=5.1e8),
        fast_series((1.2e8, 0.4e8, -0.1e8), T_P),
        hd_series((4.0 / 3.0, -1.0 / 3.0), (1.0, 2.2e-19), T_P, 5.0e8),
        square_cosine_rise(20e-9, 3.0e8, np.pi / 2, 6.25e-9),
    ]


@pytest.mark.parametrize("spec", _families(), ids=lambda s: s.kind)
def test_endpoints_and_support(spec):
    """Envelopes vanish at the pulse edges and outside the support."""
    if spec.kind == "square_cosine_rise":
        edge = eval_envelope(spec, np.array([0.0, spec.t_p]))
        assert_allclose(edge, 0.0, atol=1e-9 * abs(spec.amplitude))
    outside = eval_envelope(spec, np.array([-1e-9, spec.t_p + 1e-9]))
    assert_allclose(outside, 0.0, atol=0.0)
    assert envelope_derivative(spec, -1e-12) == 0.0
    assert envelope_derivative(spec, spec.t_p + 1e-12) == 0.0


@pytest.mark.parametrize("spec", _families(), ids=lambda s: s.kind)
def test_analytic_derivative_matches_finite_difference(spec):
    t = np.linspace(0.02 * spec.t_p, 0.98 * spec.t_p, 4001)
    numeric = np.gradient(eval_envelope(spec, t), t)[1:-1]
    analytic = envelope_derivative(spec, t)[1:-1]
    tt = t[1:-1]
    # keep clear of the rise/flat junctions where curvature jumps
    h = 3 * (t[1] - t[0])
    keep = np.ones(tt.shape, dtype=bool)
    if spec.kind == "square_cosine_rise":
        for corner in (spec.rise_time, spec.t_p - spec.rise_time):
            keep &= np.abs(tt - corner) > h
    scale = np.max(np.abs(analytic)) + 1e-300
    # central differences on this grid are good to ~(dt)^2
    assert np.max(np.abs(numeric[keep] - analytic[keep])) / scale < 5e-5


def test_cosine_shape_and_area():
    spec = cosine(T_P, amplitude=2.0e8)
    t = np.linspace(0, T_P, 20001)
    vals = eval_envelope(spec, t)
    assert_allclose(vals[10000], 2.0e8, rtol=1e-12)  # peak = amplitude at t_p/2
    assert_allclose(np.trapezoid(vals, t), 2.0e8 * T_P / 2, rtol=1e-8)


def test_gaussian_offset_subtraction():
    with_offset = gaussian(T_P, amplitude=1.0, subtract_offset=True)
    without = gaussian(T_P, amplitude=1.0, subtract_offset=False)
    assert abs(eval_envelope(with_offset, 0.0)) < 1e-15
    assert eval_envelope(without, 0.0) > 0.0
    # subtraction only shifts the shape down
    t = np.linspace(0, T_P, 101)
    diff = eval_envelope(without, t) - eval_envelope(with_offset, t)
    assert_allclose(diff, diff[0], rtol=0, atol=1e-12)


def test_fast_series_angle_consistency():
    coeffs = (1.0e8, -2.0e7)
    spec = fast_series(coeffs, T_P)
    assert_allclose(spec.rotation_angle, sum(coeffs) * T_P, rtol=1e-12)
    with pytest.raises(ConfigurationError):
        EnvelopeSpec("fast_series", T_P, 1.0, 0.7, coeffs=coeffs)


def test_fast_series_is_cosine_series():
    coeffs = (1.1e8, 3.0e7, -5.0e6)
    spec = fast_series(coeffs, T_P)
    t = np.linspace(0, T_P, 57)
    expect = sum(c * (1 - np.cos(2 * np.pi * (n + 1) * t / T_P)) for n, c in enumerate(coeffs))
    assert_allclose(eval_envelope(spec, t), expect, rtol=1e-12, atol=1e-3)


def test_square_cosine_rise_flat_top():
    spec = square_cosine_rise(20e-9, 3.0e8, np.pi / 2, 5e-9)
    t_flat = np.linspace(5e-9, 15e-9, 11)
    assert_allclose(eval_envelope(spec, t_flat), 3.0e8, rtol=1e-12)
    assert_allclose(eval_envelope(spec, 2.5e-9), 1.5e8, rtol=1e-12)  # half way up
    with pytest.raises(ConfigurationError):
        square_cosine_rise(10e-9, 1.0, np.pi / 2, 6e-9)  # rise > t_p/2


def test_drag_quadrature_is_scaled_derivative():
    spec = cosine(T_P, amplitude=5.0e8)
    alpha = -2 * np.pi * 212e6
    t = np.linspace(0, T_P, 301)
    for variant, beta in ((DRAG_P, 0.7), (DRAG_L, 1.1)):
        drag = DragConfig(beta, alpha, variant)
        omega_i, omega_q = apply_drag(spec, drag, t)
        assert_allclose(omega_i, eval_envelope(spec, t), rtol=1e-15)
        assert_allclose(omega_q, -beta / alpha * envelope_derivative(spec, t), rtol=1e-13)


def test_no_drag_quadrature_vanishes():
    spec = cosine(T_P)
    t = np.linspace(0, T_P, 11)
    _, q0 = apply_drag(spec, NO_DRAG_CONFIG, t)
    assert_allclose(q0, 0.0, atol=0.0)
    _, q1 = apply_drag(spec, DragConfig(0.0, -1.3e9, DRAG_L), t)
    assert_allclose(q1, 0.0, atol=0.0)


def test_drag_config_validation():
    with pytest.raises(ConfigurationError):
        DragConfig(1.0, -1.3e9, "sideband")
    with pytest.raises(ConfigurationError):
        DragConfig(1.0, 0.0, DRAG_P)


def test_ac_stark_shift_sign_and_scale():
    alpha = -2 * np.pi * 212e6
    omega = 4.0e8
    shift = ac_stark_shift(omega, alpha)
    assert shift > 0  # negative anharmonicity pushes the qubit up
    assert_allclose(shift, -2.0 * omega**2 / (4.0 * alpha), rtol=1e-15)
    assert_allclose(ac_stark_shift(2 * omega, alpha), 4 * shift, rtol=1e-15)
    with pytest.raises(ConfigurationError):
        ac_stark_shift(omega, 0.0)


def test_scalar_and_array_evaluation():
    spec = cosine(T_P)
    assert isinstance(eval_envelope(spec, T_P / 2), float)
    out = eval_envelope(spec, np.array([T_P / 4, T_P / 2]))
    assert out.shape == (2,)


def test_sample_waveform_grid_and_padding():
    spec = cosine(T_P, amplitude=3.3e8)
    dt = 1.0 / DEFAULT_SAMPLE_RATE
    wf = sample_waveform(spec, pad_samples=4)
    n = sample_count(T_P, dt)
    assert n == 16  # 6.25 ns at 2.4 GS/s: samples 0..15 inclusive
    assert wf.i_samples.shape == (n + 4,)
    assert_allclose(wf.i_samples[-4:], 0.0, atol=0.0)
    assert_allclose(wf.i_samples[:n], eval_envelope(spec, dt * np.arange(n)), rtol=1e-15)
    with pytest.raises(ConfigurationError):
        sample_waveform(spec, dt=0.0)
    with pytest.raises(ConfigurationError):
        sample_waveform(spec, dt=2 * T_P)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        EnvelopeSpec("triangle", T_P, 1.0, np.pi / 2)
    with pytest.raises(ConfigurationError):
        cosine(-1e-9)
    with pytest.raises(ConfigurationError):
        gaussian(T_P, sigma_ratio=0.0)
    with pytest.raises(ConfigurationError):
        EnvelopeSpec("hd_series", T_P, 1.0, np.pi / 2, d_coeffs=(1.0,))
