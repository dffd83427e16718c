"""Control-envelope families and the DRAG quadrature transform.

All envelopes are defined on the support [0, t_p] and are exactly zero
outside it.  An envelope is ``amplitude * base(t)`` where ``base`` is the
family's defining shape:

- ``cosine``:             (1 - cos(2*pi*t/t_p)) / 2
- ``gaussian``:           exp(-(t - t_p/2)^2 / (2*sigma^2)) - offset
- ``fast_series``:        sum_n c_n * (1 - cos(2*pi*n*t/t_p))
- ``hd_series``:          sum_n beta_2n * g^(2n)(t),  g = sum_k d_k*(1 - cos(2*pi*k*t/t_p))
- ``square_cosine_rise``: cosine-shaped rise/fall of length t_r around a flat plateau

For the plain shapes the amplitude carries the drive rate in rad/s.  For the
series families the coefficients carry the rate units and the amplitude is a
dimensionless trim factor close to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

COSINE = "cosine"
GAUSSIAN = "gaussian"
FAST_SERIES = "fast_series"
HD_SERIES = "hd_series"
SQUARE_COSINE_RISE = "square_cosine_rise"

ENVELOPE_KINDS = (COSINE, GAUSSIAN, FAST_SERIES, HD_SERIES, SQUARE_COSINE_RISE)

DRAG_P = "drag_p"
DRAG_L = "drag_l"
NO_DRAG = "no_drag"

DRAG_VARIANTS = (DRAG_P, DRAG_L, NO_DRAG)

# AWG-style default sampling rate, Sa/s
DEFAULT_SAMPLE_RATE = 2.4e9
DEFAULT_RISE_TIME = 6.25e-9


@dataclass(frozen=True)
class EnvelopeSpec:
    """Parametric description of an in-phase control envelope.

    Parameters
    ----------
    kind :
        One of ``ENVELOPE_KINDS``.
    t_p :
        Pulse duration in s.
    amplitude :
        Scale factor multiplying the base shape: rad/s for the plain
        shapes and the higher-derivative series (whose base g peaks near
        1), dimensionless for ``fast_series`` whose coefficients already
        carry rad/s.
    rotation_angle :
        Target rotation angle in rad encoded by the envelope area.
    sigma_ratio :
        Gaussian width as a fraction of t_p (default t_p/5).
    subtract_offset :
        If True, shift the Gaussian so it vanishes at t=0 and t=t_p.
    coeffs :
        Fourier-series coefficients c_n (1/s) for ``fast_series``.
    d_coeffs :
        Cosine-series coefficients d_k of the base shape g for ``hd_series``.
    beta_even :
        Even-derivative weights (beta_0, beta_2, ...) for ``hd_series``;
        beta_2n carries units s^(2n).
    rise_time :
        Rise/fall duration t_r in s for ``square_cosine_rise``.
    """

    kind: str
    t_p: float
    amplitude: float
    rotation_angle: float
    sigma_ratio: float = 0.2
    subtract_offset: bool = True
    coeffs: tuple = ()
    d_coeffs: tuple = ()
    beta_even: tuple = ()
    rise_time: float = DEFAULT_RISE_TIME

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ConfigurationError(f"unknown envelope kind {self.kind!r}")
        if not self.t_p > 0:
            raise ConfigurationError(f"t_p must be positive, got {self.t_p}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "d_coeffs", tuple(float(d) for d in self.d_coeffs))
        object.__setattr__(self, "beta_even", tuple(float(b) for b in self.beta_even))
        if self.kind == GAUSSIAN and not self.sigma_ratio > 0:
            raise ConfigurationError("sigma_ratio must be positive")
        if self.kind == FAST_SERIES:
            if not self.coeffs:
                raise ConfigurationError("fast_series requires a non-empty coeffs list")
            area = sum(self.coeffs) * self.t_p
            scale = max(abs(self.rotation_angle), abs(area), 1e-300)
            if abs(area - self.rotation_angle) > 1e-9 * scale:
                raise ConfigurationError(
                    f"fast_series coefficients encode angle {area} "
                    f"but rotation_angle is {self.rotation_angle}"
                )
        if self.kind == HD_SERIES and (not self.d_coeffs or not self.beta_even):
            raise ConfigurationError("hd_series requires d_coeffs and beta_even")
        if self.kind == SQUARE_COSINE_RISE and not 0 < self.rise_time <= self.t_p / 2:
            raise ConfigurationError(
                f"rise_time must lie in (0, t_p/2], got {self.rise_time} for t_p={self.t_p}"
            )


@dataclass(frozen=True)
class DragConfig:
    """DRAG transform parameters: Omega_Q = -beta * dOmega_I/dt / alpha."""

    beta: float
    alpha: float
    variant: str = DRAG_L

    def __post_init__(self):
        if self.variant not in DRAG_VARIANTS:
            raise ConfigurationError(f"unknown drag variant {self.variant!r}")
        if self.variant != NO_DRAG and self.alpha == 0:
            raise ConfigurationError("alpha must be nonzero unless variant is no_drag")


NO_DRAG_CONFIG = DragConfig(beta=0.0, alpha=1.0, variant=NO_DRAG)


@dataclass(frozen=True, eq=False)
class SampledWaveform:
    """IQ envelope sampled on a uniform grid t = start_time + k*dt."""

    dt: float
    i_samples: np.ndarray
    q_samples: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "i_samples", np.asarray(self.i_samples, dtype=float))
        object.__setattr__(self, "q_samples", np.asarray(self.q_samples, dtype=float))
        if self.i_samples.shape != self.q_samples.shape or self.i_samples.ndim != 1:
            raise ConfigurationError("i_samples and q_samples must be 1-d and equal length")

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.dt * np.arange(len(self.i_samples))


def cosine(t_p: float, amplitude: float = 1.0, rotation_angle: float = np.pi / 2) -> EnvelopeSpec:
    """Raised-cosine envelope with peak value ``amplitude``."""
    return EnvelopeSpec(COSINE, t_p, amplitude, rotation_angle)


def gaussian(
    t_p: float,
    amplitude: float = 1.0,
    rotation_angle: float = np.pi / 2,
    sigma_ratio: float = 0.2,
    subtract_offset: bool = True,
) -> EnvelopeSpec:
    """Truncated Gaussian envelope, optionally shifted to vanish at the ends."""
    return EnvelopeSpec(
        GAUSSIAN, t_p, amplitude, rotation_angle,
        sigma_ratio=sigma_ratio, subtract_offset=subtract_offset,
    )


def fast_series(coeffs, t_p: float, amplitude: float = 1.0) -> EnvelopeSpec:
    """Fourier-series envelope; the rotation angle is fixed by the coefficients."""
    angle = float(np.sum(coeffs)) * t_p
    return EnvelopeSpec(FAST_SERIES, t_p, amplitude, angle, coeffs=tuple(coeffs))


def hd_series(d_coeffs, beta_even, t_p: float, amplitude: float) -> EnvelopeSpec:
    """Higher-derivative envelope built from a cosine-series base shape g."""
    angle = amplitude * float(np.sum(d_coeffs)) * t_p
    return EnvelopeSpec(
        HD_SERIES, t_p, amplitude, angle,
        d_coeffs=tuple(d_coeffs), beta_even=tuple(beta_even),
    )


def square_cosine_rise(
    t_p: float,
    amplitude: float = 1.0,
    rotation_angle: float = np.pi / 2,
    rise_time: float = DEFAULT_RISE_TIME,
) -> EnvelopeSpec:
    """Flat-top envelope with cosine-shaped rise and fall of length ``rise_time``."""
    return EnvelopeSpec(SQUARE_COSINE_RISE, t_p, amplitude, rotation_angle, rise_time=rise_time)


def _cos_series(coeffs, t_p: float, t: np.ndarray, order: int) -> np.ndarray:
    """order-th time derivative of sum_k coeffs[k-1] * (1 - cos(2*pi*k*t/t_p))."""
    out = np.zeros_like(t, dtype=float)
    for k, c in enumerate(coeffs, start=1):
        w = 2 * np.pi * k / t_p
        if order == 0:
            out += c * (1.0 - np.cos(w * t))
        else:
            out += -c * w**order * np.cos(w * t + order * np.pi / 2)
    return out


def _gaussian_parts(spec: EnvelopeSpec):
    sigma = spec.sigma_ratio * spec.t_p
    mu = spec.t_p / 2
    offset = np.exp(-spec.t_p**2 / (8 * sigma**2)) if spec.subtract_offset else 0.0
    return sigma, mu, offset


def _base(spec: EnvelopeSpec, t: np.ndarray, order: int) -> np.ndarray:
    """Base shape (order=0) or its first derivative (order=1) on the support."""
    if spec.kind == COSINE:
        return 0.5 * _cos_series((1.0,), spec.t_p, t, order)
    if spec.kind == FAST_SERIES:
        return _cos_series(spec.coeffs, spec.t_p, t, order)
    if spec.kind == HD_SERIES:
        out = np.zeros_like(t, dtype=float)
        for n, b in enumerate(spec.beta_even):
            out += b * _cos_series(spec.d_coeffs, spec.t_p, t, 2 * n + order)
        return out
    if spec.kind == GAUSSIAN:
        sigma, mu, offset = _gaussian_parts(spec)
        core = np.exp(-((t - mu) ** 2) / (2 * sigma**2))
        if order == 0:
            return core - offset
        return -(t - mu) / sigma**2 * core
    if spec.kind == SQUARE_COSINE_RISE:
        t_r, t_p = spec.rise_time, spec.t_p
        rising = t < t_r
        falling = t > t_p - t_r
        out = np.empty_like(t, dtype=float)
        if order == 0:
            out.fill(1.0)
            out[rising] = 0.5 * (1.0 - np.cos(np.pi * t[rising] / t_r))
            out[falling] = 0.5 * (1.0 - np.cos(np.pi * (t_p - t[falling]) / t_r))
        else:
            out.fill(0.0)
            out[rising] = 0.5 * np.pi / t_r * np.sin(np.pi * t[rising] / t_r)
            out[falling] = -0.5 * np.pi / t_r * np.sin(np.pi * (t_p - t[falling]) / t_r)
        return out
    raise ConfigurationError(f"unknown envelope kind {spec.kind!r}")


def _masked_eval(spec: EnvelopeSpec, t, order: int):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    inside = (t_arr >= 0.0) & (t_arr <= spec.t_p)
    out = np.zeros_like(t_arr)
    if np.any(inside):
        out[inside] = _base(spec, t_arr[inside], order)
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out[0])
    return out


def eval_envelope(spec: EnvelopeSpec, t):
    """In-phase envelope Omega_I(t) in rad/s; zero outside [0, t_p].

    ``t`` may be a scalar or an array; the return type matches.
    """
    return spec.amplitude * _masked_eval(spec, t, 0)


def envelope_derivative(spec: EnvelopeSpec, t):
    """Analytic time derivative of Omega_I(t); zero outside the support."""
    return spec.amplitude * _masked_eval(spec, t, 1)


def apply_drag(spec: EnvelopeSpec, drag: DragConfig, t):
    """Evaluate the IQ envelope pair (Omega_I, Omega_Q) at time(s) ``t``.

    The quadrature is the first-derivative DRAG transform
    Omega_Q(t) = -beta * dOmega_I/dt / alpha, computed analytically
    term by term for every family.  With ``no_drag`` (or beta = 0) the
    quadrature vanishes identically.
    """
    omega_i = eval_envelope(spec, t)
    if drag.variant == NO_DRAG or drag.beta == 0.0:
        return omega_i, omega_i * 0.0
    omega_q = -drag.beta / drag.alpha * envelope_derivative(spec, t)
    return omega_i, omega_q


def ac_stark_shift(omega_i, alpha: float):
    """Drive-induced qubit frequency shift -lambda_2^2 * Omega_I^2 / (4*alpha), rad/s.

    lambda_2 = sqrt(2) is the two-photon ladder matrix element, so the
    prefactor is -2/(4*alpha).  The shift is positive for negative alpha.
    """
    if alpha == 0:
        raise ConfigurationError("alpha must be nonzero")
    return -2.0 * omega_i**2 / (4.0 * alpha)


def sample_count(t_p: float, dt: float) -> int:
    """Number of samples at spacing dt covering [0, t_p]: floor(t_p/dt) + 1."""
    return int(np.floor(t_p / dt + 1e-9)) + 1


def sample_waveform(
    spec: EnvelopeSpec,
    drag: DragConfig = NO_DRAG_CONFIG,
    dt: float = 1.0 / DEFAULT_SAMPLE_RATE,
    pad_samples: int = 0,
) -> SampledWaveform:
    """Sample the IQ envelope at t = k*dt for all k*dt <= t_p.

    ``pad_samples`` extra zero samples are appended after the pulse when the
    caller needs head room for filtering or FFT work.
    """
    if not 0 < dt <= spec.t_p:
        raise ConfigurationError(f"dt must lie in (0, t_p], got {dt}")
    n = sample_count(spec.t_p, dt)
    t = dt * np.arange(n + pad_samples)
    omega_i, omega_q = apply_drag(spec, drag, t)
    return SampledWaveform(dt=dt, i_samples=omega_i, q_samples=np.asarray(omega_q, dtype=float))
