"""Randomized benchmarking, readout correction and distortion characterization.

The single-qubit Clifford group is decomposed over {I, R_X(+-pi/2),
R_Y(+-pi/2)} with minimal-length words (53 physical gates over 24 entries,
2.2083 on average; the identity costs one idle of a gate time).  Standard,
leakage and purity benchmarking share the sequence machinery; fits use
separable least squares (grid over the decay rate, linear solve for the
amplitudes, then local refinement) so they behave on near-flat data.

Distortion characterization simulates the full pulse train as one waveform,
because linear-response tails span gate boundaries; gate-level propagator
caching cannot represent that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .distortion import DistortionModel, apply_distortion, predistort_waveform
from .envelopes import DRAG_L, NO_DRAG, SampledWaveform, apply_drag
from .errors import ConfigurationError, FitError, NumericError, PaddingWarning
from .simulator import (
    TWO_PI,
    CalibratedPulse,
    Idle,
    PulseGate,
    SequenceEngine,
    TransmonModel,
    VirtualZ,
    evolve,
    ground_state,
    normalized_qubit_purity,
    tabulated_drive,
)

_SQ = 1.0 / np.sqrt(2.0)

GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X90": _SQ * np.array([[1, -1j], [-1j, 1]]),
    "X90m": _SQ * np.array([[1, 1j], [1j, 1]]),
    "Y90": _SQ * np.array([[1, -1], [1, 1]]),
    "Y90m": _SQ * np.array([[1, 1], [-1, 1]]),
}

GATE_PHASES = {"X90": 0.0, "X90m": np.pi, "Y90": -np.pi / 2, "Y90m": np.pi / 2}

# Minimal words over (X90, X90m, Y90, Y90m), breadth-first order; 53 physical
# gates total including one idle for the identity.
CLIFFORD_WORDS = (
    ("I",),
    ("X90",),
    ("X90m",),
    ("Y90",),
    ("Y90m",),
    ("X90", "X90"),
    ("X90", "Y90"),
    ("X90", "Y90m"),
    ("X90m", "Y90"),
    ("X90m", "Y90m"),
    ("Y90", "X90"),
    ("Y90", "X90m"),
    ("Y90", "Y90"),
    ("Y90m", "X90"),
    ("Y90m", "X90m"),
    ("X90", "X90", "Y90"),
    ("X90", "X90", "Y90m"),
    ("X90", "Y90", "X90"),
    ("X90", "Y90", "X90m"),
    ("X90", "Y90", "Y90"),
    ("X90", "Y90m", "X90"),
    ("X90", "Y90m", "X90m"),
    ("X90m", "Y90", "Y90"),
    ("X90", "X90", "Y90", "Y90"),
)


def _canonical(u: np.ndarray) -> tuple:
    """Phase-fix a 2x2 unitary so equal rotations hash equally."""
    flat = u.flatten()
    idx = int(np.argmax(np.abs(flat) > 1e-8))
    v = u * (abs(flat[idx]) / flat[idx])
    return tuple(np.round(v.flatten(), 8))


def word_unitary(word) -> np.ndarray:
    u = np.eye(2, dtype=complex)
    for label in word:
        u = GATE_MATRICES[label] @ u
    return u


@dataclass(frozen=True, eq=False)
class CliffordTable:
    """The 24 Clifford decompositions with inverse and product lookups."""

    words: tuple
    matrices: tuple
    inverse_indices: tuple
    avg_gate_count: float

    def index_of(self, unitary: np.ndarray) -> int:
        return _table_lookup()[_canonical(unitary)]


@lru_cache(maxsize=1)
def clifford_table() -> CliffordTable:
    matrices = tuple(word_unitary(w) for w in CLIFFORD_WORDS)
    lookup = _table_lookup()
    inverses = tuple(lookup[_canonical(m.conj().T)] for m in matrices)
    total = sum(max(len(w), 1) for w in CLIFFORD_WORDS)
    return CliffordTable(CLIFFORD_WORDS, matrices, inverses, total / len(CLIFFORD_WORDS))


@lru_cache(maxsize=1)
def _table_lookup() -> dict:
    return {
        _canonical(word_unitary(w)): i for i, w in enumerate(CLIFFORD_WORDS)
    }


def decompose_clifford(index: int, drag_l_mode: bool = False):
    """Gate labels of Clifford `index`; with drag_l_mode, Y rotations become
    virtual-Z-conjugated X rotations (physical pulse count unchanged)."""
    if not 0 <= index < 24:
        raise ConfigurationError(f"Clifford index must lie in [0, 24), got {index}")
    word = CLIFFORD_WORDS[index]
    if not drag_l_mode:
        return word
    out = []
    for label in word:
        if label in ("Y90", "Y90m"):
            out.extend([("vz", -np.pi / 2), "X90" if label == "Y90" else "X90m",
                        ("vz", np.pi / 2)])
        else:
            out.append(label)
    return tuple(out)


def _labels_to_gate_ops(labels, pulse: CalibratedPulse):
    ops = []
    for label in labels:
        if isinstance(label, tuple) and label[0] == "vz":
            ops.append(VirtualZ(label[1]))
        elif label == "I":
            ops.append(Idle(pulse.gate_time))
        else:
            ops.append(pulse.gate(GATE_PHASES[label]))
    return ops


def clifford_gate_ops(index: int, pulse: CalibratedPulse, drag_l_mode: bool = False):
    return _labels_to_gate_ops(decompose_clifford(index, drag_l_mode), pulse)


def recovery_index(indices) -> int:
    table = clifford_table()
    u = np.eye(2, dtype=complex)
    for i in indices:
        u = table.matrices[i] @ u
    return table.index_of(u.conj().T)


def sequence_gate_ops(indices, pulse: CalibratedPulse, drag_l_mode: bool = False,
                      with_recovery: bool = True):
    """Expand a Clifford index string (plus its recovery) into gate operations."""
    full = list(indices)
    if with_recovery:
        full.append(recovery_index(indices))
    ops = []
    for i in full:
        ops.extend(clifford_gate_ops(i, pulse, drag_l_mode))
    return ops


@dataclass(frozen=True, eq=False)
class RbOutcome:
    """Per-length, per-sequence populations from a benchmarking run."""

    lengths: tuple
    p_g: np.ndarray
    p_e: np.ndarray
    p_f: np.ndarray
    avg_gate_count: float
    seed: int


def _use_drag_l(pulse: CalibratedPulse, drag_l_mode) -> bool:
    if drag_l_mode is None:
        return pulse.drag.variant == DRAG_L
    return bool(drag_l_mode)


def run_rb(
    model: TransmonModel,
    calib: CalibratedPulse,
    lengths=(2, 8, 24, 60, 120, 240),
    n_sequences: int = 25,
    seed: int = 0,
    engine: SequenceEngine | None = None,
    drag_l_mode: bool | None = None,
) -> RbOutcome:
    """Random Clifford sequences with recovery, from the ground state.

    Probabilities are exact (shot-free); p_f collects everything outside the
    computational subspace.
    """
    lengths = tuple(int(n) for n in lengths)
    if len(set(lengths)) < 2:
        raise ConfigurationError("need at least 2 distinct sequence lengths")
    if engine is None:
        engine = SequenceEngine(model)
    drag_l = _use_drag_l(calib, drag_l_mode)
    rng = np.random.default_rng(seed)
    rho0 = ground_state(model.levels).entries
    p_g = np.zeros((len(lengths), n_sequences))
    p_e = np.zeros_like(p_g)
    for i, n_cl in enumerate(lengths):
        for j in range(n_sequences):
            indices = rng.integers(0, 24, size=n_cl)
            ops = sequence_gate_ops(indices, calib, drag_l)
            rho, _, _ = engine.run(rho0, ops)
            pops = np.diag(rho).real
            p_g[i, j] = pops[0]
            p_e[i, j] = pops[1]
    return RbOutcome(lengths, p_g, p_e, 1.0 - p_g - p_e,
                     clifford_table().avg_gate_count, seed)


@dataclass(frozen=True)
class ExpFit:
    """y = offset + amplitude * rate**x"""

    offset: float
    amplitude: float
    rate: float
    residual: float


def fit_exponential_decay(x, y) -> ExpFit:
    """Separable least squares for offset + amplitude * rate**x, rate in (0, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise FitError("decay data contain non-finite values")
    if np.ptp(y) < 1e-12:
        return ExpFit(float(np.mean(y)), 0.0, 1.0, 0.0)

    def solve(rate):
        basis = np.column_stack([np.ones_like(x), rate**x])
        coef, _, _, _ = np.linalg.lstsq(basis, y, rcond=None)
        resid = float(np.sum((basis @ coef - y) ** 2))
        return resid, coef

    # grid over 1 - rate, log spaced to resolve slow decays
    rates = 1.0 - np.logspace(-7, 0, 240)
    rates = rates[rates > 0.0]
    residuals = [solve(r)[0] for r in rates]
    best = int(np.argmin(residuals))
    lo = rates[min(best + 1, len(rates) - 1)]
    hi = rates[max(best - 1, 0)]
    if lo < hi:
        opt = minimize_scalar(lambda r: solve(r)[0], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        rate = float(opt.x) if opt.fun <= residuals[best] else float(rates[best])
    else:
        rate = float(rates[best])
    resid, coef = solve(rate)
    if not np.isfinite(resid):
        raise FitError(f"exponential fit did not converge (residual {resid})")
    return ExpFit(float(coef[0]), float(coef[1]), rate, resid)


def fit_rb(outcome: RbOutcome) -> tuple:
    """Error per Clifford and per gate from the ground-state return decay."""
    if len(outcome.lengths) < 3:
        raise ConfigurationError("need at least 3 lengths to fit")
    fit = fit_exponential_decay(outcome.lengths, outcome.p_g.mean(axis=1))
    eps_cl = 0.5 * (1.0 - fit.rate)
    return eps_cl, eps_cl / outcome.avg_gate_count


def fit_leakage_rb(outcome: RbOutcome) -> float:
    """Leakage per gate from the saturation of the f-state population."""
    if len(outcome.lengths) < 3:
        raise ConfigurationError("need at least 3 lengths to fit")
    fit = fit_exponential_decay(outcome.lengths, outcome.p_f.mean(axis=1))
    return fit.offset * (1.0 - fit.rate) / outcome.avg_gate_count


def purity_curve(
    model: TransmonModel,
    calib: CalibratedPulse,
    lengths=(2, 8, 24, 60, 120, 240),
    n_sequences: int = 25,
    seed: int = 0,
    engine: SequenceEngine | None = None,
    drag_l_mode: bool | None = None,
) -> np.ndarray:
    """Per-length, per-sequence normalized qubit purity of random trains.

    The simulation reads the density matrix directly (no tomography step);
    no recovery gate is appended since unitaries do not change purity.
    """
    lengths = tuple(int(n) for n in lengths)
    if len(set(lengths)) < 3:
        raise ConfigurationError("need at least 3 distinct sequence lengths")
    if engine is None:
        engine = SequenceEngine(model)
    drag_l = _use_drag_l(calib, drag_l_mode)
    rng = np.random.default_rng(seed)
    rho0 = ground_state(model.levels).entries
    purity = np.zeros((len(lengths), n_sequences))
    for i, n_cl in enumerate(lengths):
        for j in range(n_sequences):
            indices = rng.integers(0, 24, size=n_cl)
            ops = sequence_gate_ops(indices, calib, drag_l, with_recovery=False)
            rho, _, _ = engine.run(rho0, ops)
            purity[i, j] = normalized_qubit_purity(rho)
    return purity


def incoherent_error_per_gate(unitarity: float) -> float:
    """Per-gate incoherent error implied by a per-Clifford unitarity."""
    root = np.sqrt(max(unitarity, 0.0))
    return float(0.5 * (1.0 - root) / clifford_table().avg_gate_count)


def run_purity_rb(
    model: TransmonModel,
    calib: CalibratedPulse,
    lengths=(2, 8, 24, 60, 120, 240),
    n_sequences: int = 25,
    seed: int = 0,
    engine: SequenceEngine | None = None,
    drag_l_mode: bool | None = None,
) -> tuple:
    """Incoherent error per gate from the decay of qubit-subspace purity."""
    purity = purity_curve(model, calib, lengths, n_sequences, seed, engine, drag_l_mode)
    fit = fit_exponential_decay(tuple(int(n) for n in lengths), purity.mean(axis=1))
    return fit.rate, incoherent_error_per_gate(fit.rate)


@dataclass(frozen=True, eq=False)
class AssignmentMatrix:
    """Row-stochastic state-assignment probabilities beta_ij = P(read j | prepared i)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ConfigurationError("assignment matrix must be 3x3")
        # tolerate rounded published values (rows off by ~1e-3)
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > 5e-3:
            raise ConfigurationError("assignment matrix rows must sum to 1")
        if abs(np.linalg.det(m)) < 1e-12:
            raise ConfigurationError("assignment matrix is singular")
        object.__setattr__(self, "matrix", m)


def apply_assignment(p_true, beta) -> np.ndarray:
    """Measured distribution beta^T p for prepared distribution p."""
    m = beta.matrix if isinstance(beta, AssignmentMatrix) else np.asarray(beta, dtype=float)
    return m.T @ np.asarray(p_true, dtype=float)


def correct_readout(p_meas, beta) -> np.ndarray:
    """Invert the assignment: solve beta^T p_corr = p_meas.

    Negative components are reported as-is rather than clipped.
    """
    m = beta.matrix if isinstance(beta, AssignmentMatrix) else np.asarray(beta, dtype=float)
    try:
        return np.linalg.solve(m.T, np.asarray(p_meas, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"assignment matrix is singular: {exc}") from exc


def _pulse_sequence_states(gates, model: TransmonModel, pulse: CalibratedPulse,
                           distortion: DistortionModel | None,
                           predistort: bool, steps_per_pulse: int):
    """Simulate a gate list as a single continuous waveform.

    Returns the final density matrix.  The waveform is assembled on a fine
    uniform grid in the drive frame, optionally predistorted and distorted,
    then integrated with the tabulated-drive integrator.
    """
    calib = pulse.calib
    # walk the sequence like the engine does, collecting pulse start times/phases
    t = 0.0
    phase_acc = 0.0
    events = []
    for gate in gates:
        if isinstance(gate, VirtualZ):
            phase_acc += gate.phase
        elif isinstance(gate, Idle):
            t += gate.duration
        elif isinstance(gate, PulseGate):
            phase_acc += 0.5 * gate.calib.virtual_z
            events.append((t, gate.phase + phase_acc, gate))
            phase_acc += 0.5 * gate.calib.virtual_z
            t += gate.calib.t_p + gate.calib.t_d
        else:
            raise ConfigurationError(f"unknown gate operation {gate!r}")
    duration = t
    half = calib.t_p / (2 * steps_per_pulse)
    n_steps = int(np.ceil(duration / (2 * half)))
    tau = half * np.arange(2 * n_steps + 1)
    u = np.zeros(len(tau), dtype=complex)
    for t_k, phi_k, gate in events:
        spec = replace(gate.spec, amplitude=gate.calib.amplitude)
        drag = gate.drag
        if drag.variant != NO_DRAG:
            drag = replace(drag, beta=gate.calib.beta)
        mask = (tau >= t_k) & (tau <= t_k + gate.calib.t_p)
        i_env, q_env = apply_drag(spec, drag, tau[mask] - t_k)
        u[mask] += np.exp(-1j * phi_k) * (i_env + 1j * q_env)

    waveform = SampledWaveform(half, u.real, u.imag)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PaddingWarning)
        if predistort and distortion is not None:
            waveform = predistort_waveform(waveform, distortion)
        if distortion is not None:
            waveform = apply_distortion(waveform, distortion)
    n_keep = len(tau)
    detuning = TWO_PI * calib.drive_freq - model.omega_q
    z = (waveform.i_samples[:n_keep] + 1j * waveform.q_samples[:n_keep]) * np.exp(
        -1j * detuning * tau
    )
    drive = tabulated_drive(tau, z)
    return evolve(ground_state(model.levels), model, drive, tau[-1], n_steps=n_steps)


def _linear_crossing(x, y, level: float = 0.5, band: float = 0.3):
    """Root of a linear fit through the points nearest the crossing level."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.abs(y - level) <= band
    if mask.sum() < 2:
        raise FitError("no usable points near the crossing level")
    coeffs = np.polyfit(x[mask], y[mask], 1)
    if abs(coeffs[0]) < 1e-12:
        raise FitError("response is flat; cannot locate a crossing")
    root = (level - coeffs[1]) / coeffs[0]
    span = x.max() - x.min()
    if not x.min() - 0.5 * span <= root <= x.max() + 0.5 * span:
        raise FitError(f"crossing {root} falls outside the swept range")
    return float(root)


def i_distortion_characterization(
    model: TransmonModel,
    calib: CalibratedPulse,
    distortion: DistortionModel | None,
    t_d_values,
    phi_grid=None,
    n_pairs: int = 8,
    predistort: bool = False,
    steps_per_pulse: int = 512,
) -> np.ndarray:
    """Rotation-axis shift phi_s versus gate delay.

    For each delay, repeated (X180, Y180 at axis offset phi) pairs amplify
    the axis tilt the leading pulse's tail imprints on its successor; the
    phi nulling the final excited-state population locates the shift.
    Pulses are simulated as one continuous waveform so tails cross gate
    boundaries.  Use a phase-calibrated (DRAG-P style) pulse: the circuit
    assumes plain X/Y axes without virtual-Z bookkeeping.
    """
    if phi_grid is None:
        phi_grid = np.linspace(-10e-3, 10e-3, 9)
    phi_grid = np.asarray(phi_grid, dtype=float)
    shifts = np.zeros(len(t_d_values))
    for k, t_d in enumerate(t_d_values):
        pulse_td = CalibratedPulse(calib.spec, calib.drag, replace(calib.calib, t_d=float(t_d)))
        p_e = np.zeros(len(phi_grid))
        for m, phi in enumerate(phi_grid):
            gates = [pulse_td.gate(0.0)]
            for _ in range(n_pairs):
                gates += [pulse_td.gate(0.0), pulse_td.gate(0.0)]
                gates += [pulse_td.gate(-(np.pi / 2 + phi))] * 2
            gates.append(pulse_td.gate(-np.pi / 2))
            rho = _pulse_sequence_states(gates, model, pulse_td, distortion,
                                         predistort, steps_per_pulse)
            p_e[m] = rho.populations[1]
        shifts[k] = _linear_crossing(phi_grid, p_e)
    return shifts


def c_distortion_characterization(
    model: TransmonModel,
    calib: CalibratedPulse,
    distortion: DistortionModel | None,
    t_d_values,
    n_reps_values=(4, 8, 16),
    predistort: bool = False,
    steps_per_pulse: int = 512,
) -> np.ndarray:
    """Excited-state population map of the (X180, X180m)-train circuit.

    The repeated back-and-forth rotations are insensitive to in-quadrature
    tails but accumulate error from cross-quadrature ones; without
    distortion the final Y90 leaves p_e = 0.5.
    """
    out = np.zeros((len(t_d_values), len(n_reps_values)))
    for i, t_d in enumerate(t_d_values):
        pulse_td = CalibratedPulse(calib.spec, calib.drag, replace(calib.calib, t_d=float(t_d)))
        for j, n_reps in enumerate(n_reps_values):
            gates = []
            for _ in range(int(n_reps)):
                gates += [pulse_td.gate(0.0)] * 2 + [pulse_td.gate(np.pi)] * 2
            gates.append(pulse_td.gate(-np.pi / 2))
            rho = _pulse_sequence_states(gates, model, pulse_td, distortion,
                                         predistort, steps_per_pulse)
            out[i, j] = rho.populations[1]
    return out
