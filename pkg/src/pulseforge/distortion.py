"""Linear control-line distortion models and inverse-filter predistortion.

Each distortion term is a one-pole exponential: a unit step at the AWG maps
to 1 + a_j*exp(-t/tau_j) at the device.  The intra-quadrature model applies
the tails to I and Q independently; the cross-quadrature model injects the
tail of each quadrature into the other one with a 90-degree rotation, i.e.
the complex signal I + iQ acquires i times the tail.

The forward path is an exact per-sample recursion and the inverse path works
in the frequency domain on the continuous kernel, so a round trip through
both is a genuine cross-check of either implementation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .envelopes import SampledWaveform
from .errors import ConfigurationError, NumericError, PaddingWarning

INTRA = "intra"
CROSS = "cross"
DISTORTION_KINDS = (INTRA, CROSS)


@dataclass(frozen=True)
class DistortionModel:
    """Exponential distortion terms (a_j, tau_j) acting within or across quadratures."""

    kind: str
    terms: tuple

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise ConfigurationError(f"unknown distortion kind {self.kind!r}")
        terms = tuple((float(a), float(tau)) for a, tau in self.terms)
        for a, tau in terms:
            if not tau > 0:
                raise ConfigurationError(f"tau must be positive, got {tau}")
            if not abs(a) < 1:
                raise ConfigurationError(f"|a| must be < 1 to keep the filter invertible, got {a}")
        object.__setattr__(self, "terms", terms)

    @property
    def max_tau(self) -> float:
        return max((tau for _, tau in self.terms), default=0.0)


def _tail_ft(model: DistortionModel, f: np.ndarray) -> np.ndarray:
    """Transfer function of the summed tails: T(0) = 0, T(inf) = sum a_j."""
    out = np.zeros(np.shape(f), dtype=complex)
    for a, tau in model.terms:
        z = 2j * np.pi * np.asarray(f) * tau
        out += a * z / (1.0 + z)
    return out


def kernel_ft(model: DistortionModel, f):
    """Frequency response of the distortion.

    Intra: h(f) = 1 + sum_j i*a_j*2*pi*f*tau_j / (1 + i*2*pi*f*tau_j), applied
    to each quadrature.  Cross: 1 + i*T(f), applied to the complex pair I + iQ.
    """
    tail = _tail_ft(model, np.asarray(f, dtype=float))
    out = 1.0 + (1j * tail if model.kind == CROSS else tail)
    if np.ndim(f) == 0:
        return complex(out)
    return out


def _tail_samples(x: np.ndarray, a: float, tau: float, dt: float) -> np.ndarray:
    """Exact discrete tail: a*(x - E[x]) with E the one-pole smoother.

    E[n] = lam*E[n-1] + (1-lam)*x[n-1], lam = exp(-dt/tau), so a unit step
    produces exactly a*lam^n = a*exp(-n*dt/tau).
    """
    lam = np.exp(-dt / tau)
    smoothed = lfilter([0.0, 1.0 - lam], [1.0, -lam], x)
    return a * (x - smoothed)


def _check_padding(waveform: SampledWaveform, model: DistortionModel) -> None:
    needed = 10.0 * model.max_tau
    if needed == 0.0:
        return
    nonzero = np.flatnonzero((waveform.i_samples != 0.0) | (waveform.q_samples != 0.0))
    trailing = len(waveform.i_samples) - 1 - (nonzero[-1] if len(nonzero) else -1)
    if trailing * waveform.dt < needed:
        warnings.warn(
            f"waveform has {trailing * waveform.dt:.3g} s of trailing zeros but the "
            f"slowest tail needs about {needed:.3g} s to settle",
            PaddingWarning,
            stacklevel=3,
        )


def apply_distortion(waveform: SampledWaveform, model: DistortionModel) -> SampledWaveform:
    """Run the forward time-domain distortion over a sampled waveform."""
    _check_padding(waveform, model)
    x_i = waveform.i_samples
    x_q = waveform.q_samples
    tail_i = np.zeros_like(x_i)
    tail_q = np.zeros_like(x_q)
    for a, tau in model.terms:
        tail_i += _tail_samples(x_i, a, tau, waveform.dt)
        tail_q += _tail_samples(x_q, a, tau, waveform.dt)
    if model.kind == INTRA:
        y_i = x_i + tail_i
        y_q = x_q + tail_q
    else:
        y_i = x_i - tail_q
        y_q = x_q + tail_i
    return SampledWaveform(waveform.dt, y_i, y_q, waveform.start_time)


def _padded_length(waveform: SampledWaveform, model: DistortionModel) -> int:
    duration = len(waveform.i_samples) * waveform.dt
    needed = max(10.0 * model.max_tau, 4.0 * duration)
    n_min = max(int(np.ceil(needed / waveform.dt)), len(waveform.i_samples))
    return 1 << max(n_min - 1, 0).bit_length()


def predistort_waveform(waveform: SampledWaveform, model: DistortionModel) -> SampledWaveform:
    """Divide the spectrum by the distortion kernel so that the physical line
    reproduces the requested waveform.

    The returned waveform keeps the zero padding (the inverse filter rings
    past the pulse end).  Cross-kind inversion is exposed for experiments but
    only the forward cross model is guaranteed; intra inversion is the
    supported path and uses the same kernel for I and Q.
    """
    n_pad = _padded_length(waveform, model)
    freqs = np.fft.fftfreq(n_pad, waveform.dt)
    h = kernel_ft(model, freqs)
    if np.min(np.abs(h)) < 1e-6:
        raise NumericError("distortion kernel has a near-zero bin; cannot invert")
    if model.kind == INTRA:
        y_i = np.fft.ifft(np.fft.fft(waveform.i_samples, n=n_pad) / h).real
        y_q = np.fft.ifft(np.fft.fft(waveform.q_samples, n=n_pad) / h).real
    else:
        iq = np.fft.ifft(np.fft.fft(waveform.i_samples + 1j * waveform.q_samples, n=n_pad) / h)
        y_i = iq.real
        y_q = iq.imag
    return SampledWaveform(waveform.dt, y_i, y_q, waveform.start_time)
