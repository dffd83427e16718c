"""Spectral analysis of IQ envelopes.

Baseband convention: the complex drive Omega_IQ(t) = Omega_I(t) - i*Omega_Q(t)
is transformed as Omega_hat(f) = integral Omega(t) exp(-i*2*pi*f*t) dt over the
pulse support, so f is the offset from the drive frequency.  For every family
with a closed-form transform the IQ spectrum factors into the I-spectrum times
the first-order two-quadrature factor [1 - 2*pi*beta*f/alpha].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import wofz

from .envelopes import (
    COSINE,
    FAST_SERIES,
    GAUSSIAN,
    HD_SERIES,
    NO_DRAG,
    DragConfig,
    EnvelopeSpec,
    SampledWaveform,
    cosine,
    eval_envelope,
    sample_waveform,
)
from .errors import ConfigurationError, FallbackWarning
from .fast_synth import basis_ft
from .hd_drag import beta_polynomial

ANALYTIC_FAMILIES = (COSINE, FAST_SERIES, HD_SERIES, GAUSSIAN)

_FALLBACK_SAMPLES = 4096
_FALLBACK_PAD_FACTOR = 256


@dataclass(frozen=True)
class SpectrumReport:
    """Tabulated spectrum plus optional per-band energies and suppression depths.

    ``band_energies`` maps (f_l, f_h) to the integral of the squared IQ
    amplitude over the band; ``suppression_db`` maps the same keys to
    10*log10(E_reference/E) against a raised-cosine pulse of equal duration
    and equal area (positive values mean deeper suppression).
    """

    freqs: np.ndarray
    amplitude_i: np.ndarray
    amplitude_iq: np.ndarray
    band_energies: dict = field(default_factory=dict)
    suppression_db: dict = field(default_factory=dict)


def _gaussian_i_ft(spec: EnvelopeSpec, f: np.ndarray) -> np.ndarray:
    """Closed-form transform of the truncated (optionally offset) Gaussian.

    Uses the Faddeeva function to keep exp(-b^2)*erf(a+i*b) bounded at large
    frequency, where a = T/(2*sqrt(2)*sigma) and b = sqrt(2)*pi*sigma*f.
    """
    sigma = spec.sigma_ratio * spec.t_p
    t_p = spec.t_p
    a = t_p / (2.0 * np.sqrt(2.0) * sigma)
    b = np.sqrt(2.0) * np.pi * sigma * f
    damped_erf = np.exp(-b * b) - np.exp(-a * a) * np.exp(-2j * a * b) * wofz(-b + 1j * a)
    core = sigma * np.sqrt(2.0 * np.pi) * damped_erf.real
    out = np.exp(-1j * np.pi * f * t_p) * core.astype(complex)
    if spec.subtract_offset:
        offset = np.exp(-(t_p**2) / (8.0 * sigma**2))
        out -= offset * t_p * np.exp(-1j * np.pi * f * t_p) * np.sinc(f * t_p)
    return spec.amplitude * out


def _fft_fallback_i_ft(spec: EnvelopeSpec, f: np.ndarray) -> np.ndarray:
    """Dense-FFT approximation of the I transform for families without one."""
    dt = spec.t_p / _FALLBACK_SAMPLES
    n_pad = _FALLBACK_PAD_FACTOR * _FALLBACK_SAMPLES
    t = dt * np.arange(_FALLBACK_SAMPLES + 1)
    x = np.fft.fft(eval_envelope(spec, t), n=n_pad) * dt
    bins = np.fft.fftfreq(n_pad, dt)
    order = np.argsort(bins)
    re = np.interp(f, bins[order], x.real[order])
    im = np.interp(f, bins[order], x.imag[order])
    return re + 1j * im


def analytic_i_spectrum(spec: EnvelopeSpec, f):
    """Fourier transform of the in-phase envelope at frequency f (Hz)."""
    f_arr = np.asarray(f, dtype=float)
    if spec.kind == COSINE:
        out = 0.5 * spec.amplitude * basis_ft(1, spec.t_p, f_arr)
    elif spec.kind == FAST_SERIES:
        out = np.zeros(f_arr.shape, dtype=complex)
        for n, c_n in enumerate(spec.coeffs, start=1):
            out += c_n * basis_ft(n, spec.t_p, f_arr)
        out *= spec.amplitude
    elif spec.kind == HD_SERIES:
        g_hat = np.zeros(f_arr.shape, dtype=complex)
        for k, d_k in enumerate(spec.d_coeffs, start=1):
            g_hat += d_k * basis_ft(k, spec.t_p, f_arr)
        out = spec.amplitude * beta_polynomial(spec.beta_even, f_arr) * g_hat
    elif spec.kind == GAUSSIAN:
        out = _gaussian_i_ft(spec, f_arr)
    else:
        warnings.warn(
            f"no closed-form transform for {spec.kind!r}; using FFT fallback",
            FallbackWarning,
            stacklevel=2,
        )
        out = _fft_fallback_i_ft(spec, f_arr)
    if np.ndim(f) == 0:
        return complex(out)
    return out


def analytic_iq_spectrum(spec: EnvelopeSpec, drag: DragConfig, f):
    """Transform of Omega_I - i*Omega_Q, including endpoint terms when the
    envelope does not vanish at the pulse edges."""
    f_arr = np.asarray(f, dtype=float)
    i_hat = np.asarray(analytic_i_spectrum(spec, f_arr), dtype=complex)
    if drag.variant == NO_DRAG or drag.beta == 0.0:
        out = i_hat
    else:
        ratio = drag.beta / drag.alpha
        out = (1.0 - 2.0 * np.pi * f_arr * ratio) * i_hat
        edge_start = float(eval_envelope(spec, 0.0))
        edge_end = float(eval_envelope(spec, spec.t_p))
        if edge_start != 0.0 or edge_end != 0.0:
            boundary = edge_end * np.exp(-2j * np.pi * f_arr * spec.t_p) - edge_start
            out += 1j * ratio * boundary
    if np.ndim(f) == 0:
        return complex(out)
    return out


def band_energy(spec: EnvelopeSpec, drag: DragConfig, f_l: float, f_h: float,
                component: str = "iq") -> float:
    """Integral of the squared spectral amplitude over [f_l, f_h]."""
    component = component.lower()
    if component not in ("i", "iq"):
        raise ConfigurationError(f"component must be 'i' or 'iq', got {component!r}")
    if f_l > f_h:
        raise ConfigurationError(f"band must satisfy f_l <= f_h, got [{f_l}, {f_h}]")
    if f_l == f_h:
        return 0.0
    if component == "i":
        def integrand(f):
            return abs(analytic_i_spectrum(spec, f)) ** 2
    else:
        def integrand(f):
            return abs(analytic_iq_spectrum(spec, drag, f)) ** 2
    value, _ = quad(integrand, f_l, f_h, epsabs=0.0, epsrel=1e-10, limit=300)
    return float(value)


def reference_cosine(spec: EnvelopeSpec) -> EnvelopeSpec:
    """Raised-cosine pulse with the same duration and the same envelope area."""
    area = complex(analytic_i_spectrum(spec, 0.0)).real
    return cosine(spec.t_p, amplitude=2.0 * area / spec.t_p, rotation_angle=area)


def spectrum_report(
    spec: EnvelopeSpec,
    drag: DragConfig,
    freqs=None,
    bands=(),
    component: str = "iq",
) -> SpectrumReport:
    """Evaluate the spectrum on a grid and summarize the requested bands."""
    if freqs is None:
        freqs = np.linspace(0.0, 1.0e9, 2001)
    freqs = np.asarray(freqs, dtype=float)
    amplitude_i = np.abs(analytic_i_spectrum(spec, freqs))
    amplitude_iq = np.abs(analytic_iq_spectrum(spec, drag, freqs))
    energies = {}
    suppression = {}
    if bands:
        ref = reference_cosine(spec)
        for f_l, f_h in bands:
            key = (float(f_l), float(f_h))
            energy = band_energy(spec, drag, *key, component=component)
            ref_energy = band_energy(ref, drag, *key, component=component)
            energies[key] = energy
            if energy > 0.0 and ref_energy > 0.0:
                suppression[key] = 10.0 * np.log10(ref_energy / energy)
            else:
                suppression[key] = np.inf if energy == 0.0 else -np.inf
    return SpectrumReport(freqs, amplitude_i, amplitude_iq, energies, suppression)


def fft_spectrum(waveform: SampledWaveform, zero_pad_to: int | None = None) -> SpectrumReport:
    """Discrete transform of I - i*Q scaled by dt so it approximates the
    continuous transform; bin spacing is 1/(zero_pad_to*dt).

    The report covers the full FFT band in ascending frequency order
    (negative offsets included), which keeps Parseval sums exact.
    """
    n = len(waveform.i_samples)
    if n == 0:
        raise ConfigurationError("waveform must be non-empty")
    if zero_pad_to is None:
        zero_pad_to = 1 << int(4 * n - 1).bit_length()
    if zero_pad_to < n:
        raise ConfigurationError(
            f"zero_pad_to ({zero_pad_to}) is below the sample count ({n})"
        )
    dt = waveform.dt
    iq = waveform.i_samples - 1j * waveform.q_samples
    x_iq = np.fft.fft(iq, n=zero_pad_to) * dt
    x_i = np.fft.fft(waveform.i_samples, n=zero_pad_to) * dt
    freqs = np.fft.fftfreq(zero_pad_to, dt)
    order = np.argsort(freqs)
    return SpectrumReport(
        freqs=freqs[order],
        amplitude_i=np.abs(x_i[order]),
        amplitude_iq=np.abs(x_iq[order]),
    )


def sampled_band_energy(report: SpectrumReport, f_l: float, f_h: float,
                        component: str = "iq") -> float:
    """Trapezoid integral of the squared tabulated amplitude over [f_l, f_h]."""
    amp = report.amplitude_i if component.lower() == "i" else report.amplitude_iq
    mask = (report.freqs >= f_l) & (report.freqs <= f_h)
    if mask.sum() < 2:
        return 0.0
    return float(np.trapezoid(amp[mask] ** 2, report.freqs[mask]))
