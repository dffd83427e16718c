"""Engineered spectral zeros: beta systems, endpoint-flat basis, and the
product-form spectrum factorization."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pulseforge.envelopes import DRAG_P, DragConfig, eval_envelope
from pulseforge.errors import ConfigurationError
from pulseforge.fast_synth import SuppressionProblem, basis_ft, solve_fast
from pulseforge.hd_drag import (
    HdProblem,
    beta_polynomial,
    hd_envelope_spec,
    hd_problem,
    solve_basis_coeffs,
    solve_betas,
    solve_hd,
)
from pulseforge.spectrum import analytic_iq_spectrum

ALPHA = -2 * np.pi * 212e6
F_EF = 212e6
T_P = 6.25e-9


def test_beta_single_zero_exact():
    """First-order system: beta_2 = 1/alpha^2, checked to rounding."""
    betas = solve_betas(hd_problem(ALPHA, T_P, 1))
    assert betas[0] == 1.0
    assert abs(betas[1] - 1.0 / ALPHA**2) <= 1e-14 * abs(1.0 / ALPHA**2)


def test_beta_confluent_double_zero_exact():
    """Repeated frequency: beta_2 = 2/alpha^2, beta_4 = 1/alpha^4 exactly."""
    betas = solve_betas(hd_problem(ALPHA, T_P, 2))
    assert abs(betas[1] - 2.0 / ALPHA**2) <= 1e-14 * abs(2.0 / ALPHA**2)
    assert abs(betas[2] - 1.0 / ALPHA**4) <= 1e-14 * abs(1.0 / ALPHA**4)


def test_beta_polynomial_zeros_via_roots():
    """Polynomial companion-matrix roots land on the requested frequencies."""
    freqs = (1.9e8, 2.66e8, 3.4e8)
    betas = solve_betas(HdProblem(3, freqs, T_P))
    # P as a polynomial in v = (2 pi f)^2 with coefficients beta_2n (-1)^n
    poly = [b * (-1.0) ** n for n, b in enumerate(betas)][::-1]
    roots_v = np.roots(poly)
    recovered = np.sort(np.sqrt(roots_v.real) / (2 * np.pi))
    assert_allclose(recovered, np.sort(freqs), rtol=1e-9)


def test_beta_polynomial_confluent_flatness():
    """An m-fold zero kills P and its derivative at the suppressed point."""
    betas = solve_betas(hd_problem(ALPHA, T_P, 2))
    assert abs(beta_polynomial(betas, F_EF)) < 1e-12
    df = 1e3
    slope = (beta_polynomial(betas, F_EF + df) - beta_polynomial(betas, F_EF - df)) / (2 * df)
    curvature = beta_polynomial(betas, 2 * F_EF)  # O(1) scale reference
    assert abs(slope * F_EF) < 1e-5 * abs(curvature)
    single = solve_betas(hd_problem(ALPHA, T_P, 1))
    assert abs(beta_polynomial(single, F_EF)) < 1e-12


def test_basis_coeffs_first_order():
    assert_allclose(solve_basis_coeffs(1), (4.0 / 3.0, -1.0 / 3.0), rtol=1e-14)
    assert_allclose(solve_basis_coeffs(0), (1.0,), rtol=0)


@pytest.mark.parametrize("order", [0, 1, 2, 3, 4])
def test_basis_coeffs_moment_conditions(order):
    """sum d_k = 1 and sum d_k k^(2n) = 0 for n = 1..K."""
    d = solve_basis_coeffs(order)
    k = np.arange(1, order + 2, dtype=float)
    assert_allclose(np.sum(d), 1.0, rtol=1e-12)
    for n in range(1, order + 1):
        assert abs(np.sum(d * k ** (2 * n))) < 1e-9 * np.max(np.abs(d * k ** (2 * n)))


def test_envelope_vanishes_smoothly_at_edges():
    """The assembled envelope and its early derivatives are flat at the ends."""
    sol = solve_hd(hd_problem(ALPHA, T_P, 2))
    spec = hd_envelope_spec(sol, 1.0, T_P)
    peak = np.max(np.abs(eval_envelope(spec, np.linspace(0, T_P, 400))))
    assert eval_envelope(spec, 0.0) == 0.0
    assert eval_envelope(spec, T_P) == pytest.approx(0.0, abs=1e-12 * peak)
    # the top derivative term g^(2K) leaves a quadratic approach to zero
    for eps_frac in (1e-3, 1e-4):
        eps = eps_frac * T_P
        near = max(abs(eval_envelope(spec, eps)), abs(eval_envelope(spec, T_P - eps)))
        assert near < 300.0 * eps_frac**2 * peak


def test_double_zero_in_iq_spectrum():
    """K=1 with unit drag weight: I and Q zeros coincide at alpha/2pi."""
    sol = solve_hd(hd_problem(ALPHA, T_P, 1))
    spec = hd_envelope_spec(sol, 5.0e8, T_P)
    drag = DragConfig(1.0, ALPHA, DRAG_P)
    grid = np.linspace(-1e9, 1e9, 4001)
    peak = np.max(np.abs(analytic_iq_spectrum(spec, drag, grid)))
    at_ef = abs(analytic_iq_spectrum(spec, drag, ALPHA / (2 * np.pi)))
    assert at_ef < 1e-12 * peak


def test_product_form_factorization():
    """IQ spectrum equals A * P(f) * (1 - 2 pi f beta/alpha) * g_hat(f)."""
    sol = solve_hd(hd_problem(ALPHA, T_P, 2))
    amplitude, beta = 4.2e8, 0.8
    spec = hd_envelope_spec(sol, amplitude, T_P)
    drag = DragConfig(beta, ALPHA, DRAG_P)
    f = np.linspace(-9.9e8, 9.9e8, 512)
    lhs = analytic_iq_spectrum(spec, drag, f)
    g_hat = sum(d * basis_ft(k + 1, T_P, f) for k, d in enumerate(sol.d_coeffs))
    rhs = amplitude * beta_polynomial(sol.beta_even, f) * (1 - 2 * np.pi * f * beta / ALPHA) * g_hat
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * np.max(np.abs(lhs))


def test_first_order_matches_two_term_band_solver():
    """A vanishing-width suppression interval at the ef frequency drives the
    two-term band solver onto the same coefficient ratio as the derivative
    construction."""
    t_p = 10e-9
    width = 1e3
    problem = SuppressionProblem(
        2, ((F_EF - width / 2, F_EF + width / 2, 1.0),), np.pi / 2, t_p
    )
    fast = solve_fast(problem)
    ratio_fast = fast.coeffs[1] / fast.coeffs[0]

    beta2 = 1.0 / ALPHA**2
    d = solve_basis_coeffs(1)
    # absorbing the even-derivative term back into the cosine basis scales
    # each term by (1 - beta2 * (2 pi k / t_p)^2)
    c = [d_k * (1.0 - beta2 * (2 * np.pi * k / t_p) ** 2) for k, d_k in enumerate(d, start=1)]
    ratio_hd = c[1] / c[0]
    assert abs(ratio_fast - ratio_hd) < 1e-3 * abs(ratio_hd)


def test_problem_validation():
    with pytest.raises(ConfigurationError):
        HdProblem(5, (1e8,) * 5, T_P)
    with pytest.raises(ConfigurationError):
        HdProblem(2, (1e8,), T_P)
    with pytest.raises(ConfigurationError):
        HdProblem(1, (-1e8,), T_P)
    with pytest.raises(ConfigurationError):
        HdProblem(1, (1e8,), 0.0)
    with pytest.raises(ConfigurationError):
        hd_problem(0.0, T_P, 1)
    with pytest.raises(ConfigurationError):
        solve_basis_coeffs(-1)
    with pytest.raises(ConfigurationError):
        solve_basis_coeffs(9)


def test_order_zero_reduces_to_plain_cosine_series():
    sol = solve_hd(HdProblem(0, (), T_P))
    assert sol.beta_even == (1.0,)
    assert sol.d_coeffs == (1.0,)
    spec = hd_envelope_spec(sol, 2.0e8, T_P)
    t = np.linspace(0, T_P, 33)
    expect = 2.0e8 * (1 - np.cos(2 * np.pi * t / T_P))
    assert_allclose(eval_envelope(spec, t), expect, rtol=1e-12, atol=1e-4)
