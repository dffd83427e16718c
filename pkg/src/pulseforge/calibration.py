"""Simulated tune-up of a single-qubit pulse against the transmon model.

The stages mirror a hardware bring-up: Rabi amplitude scan, Ramsey frequency
measurement with two-point sign disambiguation, a drag-weight stage (qscale
crossing for the phase-tuned variant, leakage benchmarking for the
leakage-tuned one), then an interleaved loop of frame-phase and amplitude
refinement on error-amplifying trains.  Every stage consumes simulated
populations only; with ``shots`` set they are multinomial-sampled first.

All stages raise CalibrationError when the measured response carries no
usable signal (flat scans, peaks at the scan edge, fits off the grid) so a
driver can widen its ranges instead of silently accepting garbage.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from .benchmarking import sequence_gate_ops
from .envelopes import (
    DRAG_L,
    DRAG_P,
    NO_DRAG,
    DragConfig,
    EnvelopeSpec,
    ac_stark_shift,
    eval_envelope,
)
from .errors import CalibrationError, ConfigurationError
from .simulator import (
    DEFAULT_GATE_DELAY,
    DEFAULT_PULSE_STEPS,
    TWO_PI,
    CalibratedPulse,
    GateCalibration,
    Idle,
    SequenceEngine,
    TransmonModel,
    ground_state,
)
from .spectrum import analytic_i_spectrum


@dataclass(frozen=True)
class CalibrationConfig:
    """Stage layout and scan sizes for a full tune-up."""

    variant: str = DRAG_L
    max_loop_iters: int = 3
    rabi_points: int = 41
    qscale_points: int = 21
    beta_points: int = 21
    bangbang_reps: int = 8
    phase_amp_reps: int = 16
    leakage_rb_lengths: tuple = (20, 40)
    ramsey_offset: float = 5e6
    t_d: float = DEFAULT_GATE_DELAY
    rotation_angle: float = np.pi / 2
    initial_beta: float | None = None
    seed: int = 0
    shots: int | None = None
    n_steps: int = DEFAULT_PULSE_STEPS

    def __post_init__(self):
        if self.variant not in (DRAG_P, DRAG_L, NO_DRAG):
            raise ConfigurationError(f"unknown calibration variant {self.variant!r}")
        if self.max_loop_iters < 1:
            raise ConfigurationError("max_loop_iters must be at least 1")
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError("shots must be positive when set")


def _default_beta(variant: str) -> float:
    return 1.0 if variant == DRAG_L else 0.5


def _measure(rho, rng, shots):
    """Populations of a final state, optionally with multinomial shot noise."""
    pops = np.clip(np.diag(rho).real, 0.0, None)
    pops = pops / pops.sum()
    if shots is None:
        return pops
    counts = rng.multinomial(shots, pops)
    return counts / shots


def _quadratic_peak(x, y, maximize: bool = True):
    """Vertex of a parabola through the three points around the extremum."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.ptp(y) < 1e-9:
        raise CalibrationError("scan response is flat; widen the scan range")
    k = int(np.argmax(y) if maximize else np.argmin(y))
    if k == 0 or k == len(x) - 1:
        raise CalibrationError("extremum sits at the scan edge; recenter the scan")
    xs, ys = x[k - 1 : k + 2], y[k - 1 : k + 2]
    a, b, _ = np.polyfit(xs, ys, 2)
    if (maximize and a >= 0) or (not maximize and a <= 0):
        return float(x[k])
    return float(-b / (2 * a))


def _linear_crossing_banded(x, y, level=0.5, lo=0.2, hi=0.8):
    """Crossing point of a monotone-ish response, using points inside a band."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (y >= lo) & (y <= hi)
    if mask.sum() < 2:
        mask = np.argsort(np.abs(y - level))[:3]
    coeffs = np.polyfit(x[mask], y[mask], 1)
    if abs(coeffs[0]) * np.ptp(x) < 1e-9:
        raise CalibrationError("response is flat; cannot locate the crossing")
    root = (level - coeffs[1]) / coeffs[0]
    if not x.min() <= root <= x.max():
        raise CalibrationError(f"crossing {root:g} falls outside the scanned range")
    return float(root)


def _run_pops(engine, gates, rng, shots):
    rho0 = ground_state(engine.model.levels).entries
    rho, _, _ = engine.run(rho0, gates)
    return _measure(rho, rng, shots)


def base_pulse_area(spec: EnvelopeSpec) -> float:
    """Integral of the unit-amplitude envelope over the pulse, in seconds."""
    unit = replace(spec, amplitude=1.0)
    return float(analytic_i_spectrum(unit, 0.0).real)


def calibrate_amplitude_rabi(
    model: TransmonModel,
    spec: EnvelopeSpec,
    drag: DragConfig,
    config: CalibrationConfig,
    drive_freq: float | None = None,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Amplitude scale for the target rotation angle from a Rabi scan.

    A single pulse is played from the ground state across an amplitude
    window centered on the two-level area estimate; the excited-state peak
    (a pi rotation) is refined with a local parabola and scaled down to the
    requested angle.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if drive_freq is None:
        drive_freq = model.omega_q / TWO_PI
    area = base_pulse_area(spec)
    if area <= 0:
        raise CalibrationError("envelope has non-positive area; cannot Rabi-calibrate")
    a_pi = np.pi / area
    grid = np.linspace(0.5 * a_pi, 1.5 * a_pi, config.rabi_points)
    p_e = np.empty_like(grid)
    for i, amp in enumerate(grid):
        calib = GateCalibration(amp, drag.beta, drive_freq, spec.t_p, 0.0, config.t_d)
        pulse = CalibratedPulse(spec, drag, calib)
        p_e[i] = _run_pops(engine, [pulse.gate(0.0)], rng, config.shots)[1]
    peak = _quadratic_peak(grid, p_e, maximize=True)
    return peak * config.rotation_angle / np.pi


def ramsey_fringe(
    model: TransmonModel,
    pulse: CalibratedPulse,
    drive_freq: float,
    delays,
    engine: SequenceEngine,
    rng,
    shots,
) -> np.ndarray:
    """Excited-state population of X90 - idle(tau) - X90 at a detuned drive."""
    calib = replace(pulse.calib, drive_freq=drive_freq)
    detuned = CalibratedPulse(pulse.spec, pulse.drag, calib)
    p_e = np.empty(len(delays))
    for i, tau in enumerate(delays):
        gates = [detuned.gate(0.0), Idle(float(tau)), detuned.gate(0.0)]
        p_e[i] = _run_pops(engine, gates, rng, shots)[1]
    return p_e


def fit_damped_cosine(t, y) -> tuple:
    """(frequency, decay_time, amplitude, phase, offset) of c + a e^{-t/T} cos."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.ptp(y) < 0.02:
        raise CalibrationError("fringe contrast too small to fit")
    dt = t[1] - t[0]
    yc = y - y.mean()
    spec = np.abs(np.fft.rfft(yc))
    freqs = np.fft.rfftfreq(len(t), dt)
    f0 = float(freqs[np.argmax(spec[1:]) + 1])
    span = t[-1] - t[0]

    def form(tt, c, a, big_t, nu, phi):
        return c + a * np.exp(-tt / big_t) * np.cos(TWO_PI * nu * tt + phi)

    p0 = [y.mean(), np.ptp(y) / 2, span, f0, 0.0]
    bounds = ([0.0, 0.0, span / 50, 0.0, -np.pi], [1.0, 1.0, 1e3 * span, freqs[-1], np.pi])
    try:
        popt, _ = curve_fit(form, t, y, p0=p0, bounds=bounds, maxfev=20000)
    except RuntimeError as exc:
        raise CalibrationError(f"damped cosine fit failed: {exc}") from exc
    c, a, big_t, nu, phi = popt
    return float(nu), float(big_t), float(a), float(phi), float(c)


def calibrate_frequency_ramsey(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    f_estimate: float | None = None,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Qubit frequency from two detuned Ramsey fringes.

    Fringes oscillate at |f_drive - f_qubit|, so a single run cannot sign
    the detuning; runs at f_estimate +- offset each produce two candidate
    qubit frequencies and the (nearly) coincident pair wins.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if f_estimate is None:
        f_estimate = pulse.calib.drive_freq
    delays = np.linspace(0.0, 400e-9, 41)
    candidates = []
    for sign in (+1.0, -1.0):
        f_drive = f_estimate + sign * config.ramsey_offset
        y = ramsey_fringe(model, pulse, f_drive, delays, engine, rng, config.shots)
        nu, _, amp, _, _ = fit_damped_cosine(delays, y)
        if abs(amp) < 0.02:
            raise CalibrationError("Ramsey fringe has no contrast")
        candidates.append((f_drive + nu, f_drive - nu))
    best = min(
        ((abs(a - b), 0.5 * (a + b)) for a in candidates[0] for b in candidates[1]),
        key=lambda item: item[0],
    )
    if best[0] > 2 * config.ramsey_offset:
        raise CalibrationError("Ramsey runs disagree on the qubit frequency")
    return float(best[1])


def calibrate_beta_qscale(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Drag weight nulling the phase error, from the qscale crossing.

    The pairs (X180, Y90) and (Y180, X90) tilt in opposite directions under
    a reduced-frame phase error; their excited-state difference crosses zero
    at the phase-neutral drag weight.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)

    def response(beta_grid):
        d = np.empty(len(beta_grid))
        for i, beta in enumerate(beta_grid):
            calib = replace(pulse.calib, beta=float(beta))
            p = CalibratedPulse(pulse.spec, pulse.drag, calib)
            seq_a = [p.gate(0.0), p.gate(0.0), p.gate(-np.pi / 2)]
            seq_b = [p.gate(-np.pi / 2), p.gate(-np.pi / 2), p.gate(0.0)]
            pa = _run_pops(engine, seq_a, rng, config.shots)[1]
            pb = _run_pops(engine, seq_b, rng, config.shots)[1]
            d[i] = pa - pb
        return d

    center, half = _default_beta(DRAG_P), 1.0
    for attempt in range(2):
        grid = np.linspace(center - half, center + half, config.qscale_points)
        d = response(grid)
        if np.max(np.abs(d)) < 1e-6:
            raise CalibrationError("qscale response is degenerate (no phase signal)")
        sign_change = np.nonzero(np.diff(np.sign(d)) != 0)[0]
        if len(sign_change):
            k = sign_change[0]
            x0, x1, y0, y1 = grid[k], grid[k + 1], d[k], d[k + 1]
            return float(x0 - y0 * (x1 - x0) / (y1 - y0))
        center, half = grid[np.argmin(np.abs(d))], 2 * half
    raise CalibrationError("no qscale zero crossing found; widen the beta range")


def calibrate_beta_leakage(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Drag weight minimizing leakage, measured on fixed random Clifford trains.

    A coarse scan over [0, 2] at the shorter train length brackets the
    minimum of the final f-state population; a fine scan at the longer
    length refines it with a parabola.  The random sequences are drawn once
    per stage so the scan varies only the drag weight.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    # averaging over few trains is cheap (propagators are cached per beta)
    # and keeps the shallow minimum stable between stages and reruns
    n_seq = 6
    lengths = config.leakage_rb_lengths

    def leakage_at(beta, index_sets):
        calib = replace(pulse.calib, beta=float(beta))
        p = CalibratedPulse(pulse.spec, pulse.drag, calib)
        total = 0.0
        for indices in index_sets:
            ops = sequence_gate_ops(indices, p, drag_l_mode=True)
            pops = _run_pops(engine, ops, rng, config.shots)
            total += 1.0 - pops[0] - pops[1]
        return total / len(index_sets)

    center = pulse.calib.beta
    grids = (
        np.linspace(0.0, 2.0, config.beta_points),
        None,  # filled after the coarse stage
    )
    for stage, n_cl in enumerate(lengths):
        seq_rng = np.random.default_rng(config.seed + 101 + stage)
        index_sets = [seq_rng.integers(0, 24, int(n_cl)) for _ in range(n_seq)]
        grid = grids[stage]
        if grid is None:
            grid = np.linspace(center - 0.2, center + 0.2, config.beta_points)
        y = np.array([leakage_at(b, index_sets) for b in grid])
        if np.ptp(y) < 1e-9:
            raise CalibrationError("leakage response is flat; widen the beta range")
        center = _quadratic_peak(grid, y, maximize=False)
    return float(center)


def stark_phase_estimate(spec: EnvelopeSpec, alpha: float, amplitude: float) -> float:
    """Drive-induced phase accumulated over one pulse, rad (small-shift estimate)."""
    played = replace(spec, amplitude=amplitude)
    t = np.linspace(0.0, spec.t_p, 2001)
    return float(np.trapezoid(ac_stark_shift(eval_envelope(played, t), alpha), t))


def _phase_train(pulse: CalibratedPulse, n_blocks: int):
    """X90 identity-train: n blocks of (X90, X90, X90m, X90m), then Y90."""
    gates = []
    for _ in range(n_blocks):
        gates += [pulse.gate(0.0), pulse.gate(0.0), pulse.gate(np.pi), pulse.gate(np.pi)]
    gates.append(pulse.gate(-np.pi / 2))
    return gates


def calibrate_virtual_z(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Frame advance per pulse that cancels the drive-induced phase error.

    Blocks of (X90, X90, X90m, X90m) are identity operations except for the
    per-pulse phase error, which the trailing Y90 converts into a population
    imbalance; the virtual-Z value restoring p_e = 0.5 is tracked through
    progressively longer trains (n = 1, 4, 16 blocks) for phase-noise-level
    resolution.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    estimate = pulse.calib.virtual_z
    if estimate == 0.0:
        # seed from the drive-induced phase so the first window brackets it
        estimate = -stark_phase_estimate(pulse.spec, model.alpha, pulse.calib.amplitude)
    for n_blocks in (1, 4, 16):
        window = 0.35 / n_blocks
        # the crossing can sit just outside the window when the seed is off
        # (envelope families shift the drive-induced phase); recenter on the
        # point nearest the target level and rescan before giving up
        for attempt in range(3):
            grid = estimate + np.linspace(-window, window, 21)
            p_e = np.empty(len(grid))
            for i, phi_z in enumerate(grid):
                calib = replace(pulse.calib, virtual_z=float(phi_z))
                p = CalibratedPulse(pulse.spec, pulse.drag, calib)
                p_e[i] = _run_pops(engine, _phase_train(p, n_blocks), rng, config.shots)[1]
            try:
                estimate = _linear_crossing_banded(grid, p_e)
                break
            except CalibrationError:
                if attempt == 2:
                    raise
                estimate = float(grid[int(np.argmin(np.abs(p_e - 0.5)))])
    return float(estimate)


def refine_amplitude_bangbang(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Amplitude refined on an error-amplifying X90 train.

    After an initial X90, n repetitions of four X90s leave the state on the
    equator only at exact calibration; a relative amplitude error eps maps
    to p_e = (1 + sin((4n+1) (pi/2) eps))/2, so the p_e = 0.5 crossing pins
    the scale factor.  A short train locates the crossing coarsely (the
    Rabi value can be several percent off once drag and drive-shift
    corrections renormalize the rotation), then the long train refines it
    within its monotone window.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    amplitude = pulse.calib.amplitude
    for n, window in ((1, 0.15), (config.bangbang_reps, 0.03)):
        # heavy drag corrections can renormalize the rotation beyond the
        # coarse window; recenter on the point nearest p_e = 0.5 and rescan
        center = 1.0
        for attempt in range(3):
            scale_grid = center + np.linspace(-window, window, 21)
            p_e = np.empty(len(scale_grid))
            for i, s in enumerate(scale_grid):
                calib = replace(pulse.calib, amplitude=float(s) * amplitude)
                p = CalibratedPulse(pulse.spec, pulse.drag, calib)
                gates = [p.gate(0.0)] * (1 + 4 * n)
                p_e[i] = _run_pops(engine, gates, rng, config.shots)[1]
            try:
                amplitude = _linear_crossing_banded(scale_grid, p_e) * amplitude
                break
            except CalibrationError:
                if attempt == 2:
                    raise
                center = float(scale_grid[int(np.argmin(np.abs(p_e - 0.5)))])
    return float(amplitude)


def refine_beta_phase(
    model: TransmonModel,
    pulse: CalibratedPulse,
    config: CalibrationConfig,
    engine: SequenceEngine | None = None,
    rng=None,
) -> float:
    """Drag weight refined on the phase train (phase-tuned variant).

    Same identity-train circuit as the virtual-Z stage, but the scanned knob
    is the drag weight, which sets the per-pulse phase through the quadrature
    amplitude; staged windows shrink with the train length.
    """
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    estimate = pulse.calib.beta
    for n_blocks, window in ((2, 0.5), (8, 0.15), (16, 0.05)):
        grid = estimate + np.linspace(-window, window, 21)
        p_e = np.empty(len(grid))
        for i, beta in enumerate(grid):
            calib = replace(pulse.calib, beta=float(beta))
            p = CalibratedPulse(pulse.spec, pulse.drag, calib)
            p_e[i] = _run_pops(engine, _phase_train(p, n_blocks), rng, config.shots)[1]
        estimate = _linear_crossing_banded(grid, p_e)
    return float(estimate)


@dataclass(frozen=True)
class CalibrationReport:
    """Full tune-up result: the playable pulse plus per-stage values."""

    pulse: CalibratedPulse
    drive_freq: float
    amplitude: float
    beta: float
    virtual_z: float
    stages: tuple = field(default=())


def full_calibration(
    model: TransmonModel,
    spec: EnvelopeSpec,
    config: CalibrationConfig | None = None,
    engine: SequenceEngine | None = None,
) -> CalibrationReport:
    """Run the complete tune-up and return the calibrated pulse.

    Order: Rabi amplitude, Ramsey frequency, drag-weight stage (qscale for
    the phase-tuned variant, leakage trains for the leakage-tuned one), then
    up to ``max_loop_iters`` rounds interleaving the phase knob (virtual-Z or
    drag weight) with bang-bang amplitude refinement.
    """
    if config is None:
        config = CalibrationConfig()
    if engine is None:
        engine = SequenceEngine(model, n_steps=config.n_steps)
    rng = np.random.default_rng(config.seed)
    stages = []

    beta0 = config.initial_beta
    if beta0 is None:
        beta0 = _default_beta(config.variant)
    if config.variant == NO_DRAG:
        drag = DragConfig(beta=0.0, alpha=model.alpha, variant=NO_DRAG)
        beta0 = 0.0
    else:
        drag = DragConfig(beta=beta0, alpha=model.alpha, variant=config.variant)

    f_drive = model.omega_q / TWO_PI
    amplitude = calibrate_amplitude_rabi(model, spec, drag, config, f_drive, engine, rng)
    stages.append(("rabi_amplitude", amplitude))

    calib = GateCalibration(amplitude, beta0, f_drive, spec.t_p, 0.0, config.t_d)
    pulse = CalibratedPulse(spec, drag, calib)

    f_drive = calibrate_frequency_ramsey(model, pulse, config, None, engine, rng)
    stages.append(("ramsey_frequency", f_drive))
    pulse = CalibratedPulse(spec, drag, replace(pulse.calib, drive_freq=f_drive))

    if config.variant == DRAG_P:
        beta = calibrate_beta_qscale(model, pulse, config, engine, rng)
        stages.append(("qscale_beta", beta))
        pulse = CalibratedPulse(spec, drag, replace(pulse.calib, beta=beta))
    elif config.variant == DRAG_L:
        # pre-set the frame from the drive-induced phase estimate; leakage
        # trains are only length-stable once the bulk of the phase error is
        # out of the way, and the loop below refines the exact value
        phi_z = -stark_phase_estimate(spec, model.alpha, pulse.calib.amplitude)
        stages.append(("stark_virtual_z", phi_z))
        pulse = CalibratedPulse(spec, drag, replace(pulse.calib, virtual_z=phi_z))
        beta = calibrate_beta_leakage(model, pulse, config, engine, rng)
        stages.append(("leakage_beta", beta))
        pulse = CalibratedPulse(spec, drag, replace(pulse.calib, beta=beta))

    for _ in range(config.max_loop_iters):
        if config.variant == DRAG_P:
            beta = refine_beta_phase(model, pulse, config, engine, rng)
            stages.append(("phase_beta", beta))
            pulse = CalibratedPulse(spec, drag, replace(pulse.calib, beta=beta))
        else:
            phi_z = calibrate_virtual_z(model, pulse, config, engine, rng)
            stages.append(("virtual_z", phi_z))
            pulse = CalibratedPulse(spec, drag, replace(pulse.calib, virtual_z=phi_z))
        amplitude = refine_amplitude_bangbang(model, pulse, config, engine, rng)
        stages.append(("bangbang_amplitude", amplitude))
        pulse = CalibratedPulse(spec, drag, replace(pulse.calib, amplitude=amplitude))

    return CalibrationReport(
        pulse,
        pulse.calib.drive_freq,
        pulse.calib.amplitude,
        pulse.calib.beta,
        pulse.calib.virtual_z,
        tuple(stages),
    )
