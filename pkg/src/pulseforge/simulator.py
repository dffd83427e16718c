"""Lindblad simulation of a driven anharmonic (Duffing) oscillator.

Everything runs in the frame rotating at the qubit frequency omega_q under
the rotating-wave approximation:

    H(t) = (alpha/2) n(n-1) + (1/2) (z(t) a_dag + conj(z(t)) a),
    z(t) = exp(-i ((omega_d - omega_q) t + phi)) (Omega_I(t) + i Omega_Q(t)).

Drive phase phi = 0 rotates about +X, phi = -pi/2 about +Y; a rotation about
the equatorial axis at angle u from +X uses phi = -u.  Dissipation uses the
jump operators sqrt((1+n_bar)/T1) a, sqrt(n_bar/T1) a_dag and
sqrt(1/T_phi) a_dag a.

Gate sequences run through cached superoperator propagators: a constant
drive-phase offset acts by conjugation with exp(-i phi n), so one propagator
per distinct physical pulse covers every rotation axis, virtual-Z frame and
start time.  Idle periods use the exact exponential of the static Liouvillian.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .envelopes import NO_DRAG, NO_DRAG_CONFIG, DragConfig, EnvelopeSpec, apply_drag
from .errors import ConfigurationError, NumericError

TWO_PI = 2.0 * np.pi
DEFAULT_PULSE_STEPS = 2048
DEFAULT_GATE_DELAY = 0.41e-9

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class TransmonModel:
    """Duffing-oscillator qubit model; defaults match the reference device."""

    omega_q: float = TWO_PI * 4.417e9
    alpha: float = -TWO_PI * 212.0e6
    t1: float = 35e-6
    t_phi: float = 40e-6
    n_bar: float = 0.02
    levels: int = 4

    def __post_init__(self):
        if self.levels not in (2, 3, 4, 5):
            raise ConfigurationError(f"levels must be in {{2,3,4,5}}, got {self.levels}")
        if not self.t1 > 0 or not self.t_phi > 0:
            raise ConfigurationError("T1 and T_phi must be positive")
        if not 0 <= self.n_bar < 1:
            raise ConfigurationError(f"n_bar must lie in [0, 1), got {self.n_bar}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density operator (Hermitian, unit trace, positive)."""

    entries: np.ndarray
    dim: int = 0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ConfigurationError("entries must be a square matrix")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dim", entries.shape[0])
        if np.max(np.abs(entries - entries.conj().T)) > HERMITICITY_TOL:
            raise ConfigurationError("density matrix is not Hermitian")
        if abs(np.trace(entries).real - 1.0) > TRACE_TOL:
            raise ConfigurationError(f"trace must be 1, got {np.trace(entries)}")
        if np.linalg.eigvalsh(entries).min() < -EIGENVALUE_TOL:
            raise ConfigurationError("density matrix has a negative eigenvalue")

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.entries).real.copy()


def basis_state(index: int, levels: int = 4) -> DensityMatrix:
    if not 0 <= index < levels:
        raise ConfigurationError(f"index must lie in [0, {levels}), got {index}")
    rho = np.zeros((levels, levels), dtype=complex)
    rho[index, index] = 1.0
    return DensityMatrix(rho)


def ground_state(levels: int = 4) -> DensityMatrix:
    return basis_state(0, levels)


def cardinal_state_vectors(levels: int = 4) -> list:
    """The six qubit-axis states embedded in the full Hilbert space."""
    s = 1.0 / np.sqrt(2.0)
    pairs = [(1, 0), (0, 1), (s, s), (s, -s), (s, 1j * s), (s, -1j * s)]
    out = []
    for c0, c1 in pairs:
        v = np.zeros(levels, dtype=complex)
        v[0] = c0
        v[1] = c1
        out.append(v)
    return out


def cardinal_states(levels: int = 4) -> list:
    return [DensityMatrix(np.outer(v, v.conj())) for v in cardinal_state_vectors(levels)]


@dataclass(frozen=True)
class GateCalibration:
    """Calibrated pulse parameters: amplitude (rad/s for shape-scaled
    envelopes, dimensionless for coefficient-scaled series), two-quadrature
    coefficient beta, drive frequency (Hz), virtual-Z phase per gate (rad),
    pulse duration and trailing delay (s)."""

    amplitude: float
    beta: float
    drive_freq: float
    t_p: float
    virtual_z: float = 0.0
    t_d: float = DEFAULT_GATE_DELAY

    def __post_init__(self):
        if not self.t_p > 0:
            raise ConfigurationError("t_p must be positive")
        if self.t_d < 0:
            raise ConfigurationError("t_d must be non-negative")


@dataclass(frozen=True)
class PulseGate:
    """Physical pulse with drive-axis phase (0 -> +X, -pi/2 -> +Y, pi -> -X).

    The calibrated amplitude and beta override the template's; total gate
    time is calib.t_p + calib.t_d.
    """

    spec: EnvelopeSpec
    drag: DragConfig
    calib: GateCalibration
    phase: float = 0.0


@dataclass(frozen=True)
class VirtualZ:
    """Frame update: later pulses see their drive phase advanced by `phase`."""

    phase: float


@dataclass(frozen=True)
class CalibratedPulse:
    """Envelope template plus drag variant plus calibration: a playable gate."""

    spec: EnvelopeSpec
    drag: DragConfig
    calib: GateCalibration

    def gate(self, phase: float = 0.0) -> "PulseGate":
        return PulseGate(self.spec, self.drag, self.calib, phase)

    @property
    def gate_time(self) -> float:
        return self.calib.t_p + self.calib.t_d


@dataclass(frozen=True)
class Idle:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ConfigurationError("idle duration must be non-negative")


def lowering(levels: int) -> np.ndarray:
    a = np.zeros((levels, levels), dtype=complex)
    for j in range(1, levels):
        a[j - 1, j] = np.sqrt(j)
    return a


def static_hamiltonian(model: TransmonModel) -> np.ndarray:
    j = np.arange(model.levels)
    return np.diag(0.5 * model.alpha * j * (j - 1)).astype(complex)


def jump_operators(model: TransmonModel) -> list:
    a = lowering(model.levels)
    ops = [
        np.sqrt((1.0 + model.n_bar) / model.t1) * a,
        np.sqrt(1.0 / model.t_phi) * (a.conj().T @ a),
    ]
    if model.n_bar > 0:
        ops.append(np.sqrt(model.n_bar / model.t1) * a.conj().T)
    return ops


def drive_amplitude(i_env, q_env, phase: float = 0.0, detuning: float = 0.0, t=0.0):
    """Phase-rotated complex drive z(t) entering the Hamiltonian."""
    return np.exp(-1j * (detuning * np.asarray(t) + phase)) * (
        np.asarray(i_env) + 1j * np.asarray(q_env)
    )


def build_hamiltonian(
    model: TransmonModel,
    i_env: float,
    q_env: float,
    phase: float = 0.0,
    detuning: float = 0.0,
    t: float = 0.0,
) -> np.ndarray:
    a = lowering(model.levels)
    z = complex(drive_amplitude(i_env, q_env, phase, detuning, t))
    return static_hamiltonian(model) + 0.5 * (z * a.conj().T + np.conj(z) * a)


def lindblad_rhs(model: TransmonModel, rho: np.ndarray, hamiltonian: np.ndarray) -> np.ndarray:
    """Matrix-form master-equation right-hand side (reference implementation)."""
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for op in jump_operators(model):
        op_dag = op.conj().T
        anti = op_dag @ op
        out += op @ rho @ op_dag - 0.5 * (anti @ rho + rho @ anti)
    return out


# Superoperators use column-stacking vec(rho), so vec(A rho B) = kron(B.T, A) vec(rho).

def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


def _hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    eye = np.eye(len(h))
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def _dissipator_superop(op: np.ndarray) -> np.ndarray:
    eye = np.eye(len(op))
    anti = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * (np.kron(eye, anti) + np.kron(anti.T, eye))


def static_liouvillian(model: TransmonModel) -> np.ndarray:
    l0 = _hamiltonian_superop(static_hamiltonian(model))
    for op in jump_operators(model):
        l0 += _dissipator_superop(op)
    return l0


def drive_superops(levels: int):
    """Coefficient superoperators: L(t) = L0 + z(t) La + conj(z(t)) Lb."""
    a = lowering(levels)
    a_dag = a.conj().T
    eye = np.eye(levels)
    la = -0.5j * (np.kron(eye, a_dag) - np.kron(a, eye))  # (a_dag).T = a, real ladder
    lb = -0.5j * (np.kron(eye, a) - np.kron(a_dag, eye))
    return la, lb


def pulse_drive(
    spec: EnvelopeSpec,
    drag: DragConfig = NO_DRAG_CONFIG,
    phase: float = 0.0,
    detuning: float = 0.0,
):
    """Drive callable t -> z(t) for a single pulse starting at t = 0."""

    def drive(t):
        i_env, q_env = apply_drag(spec, drag, t)
        return complex(drive_amplitude(i_env, q_env, phase, detuning, t))

    return drive


def tabulated_drive(times: np.ndarray, z_samples: np.ndarray):
    """Drive callable backed by precomputed samples on a uniform grid.

    Lookup is nearest-sample; integrate with a step equal to twice the grid
    spacing so every integrator stage lands exactly on a sample.
    """
    times = np.asarray(times, dtype=float)
    z_samples = np.asarray(z_samples, dtype=complex)
    dt = times[1] - times[0]
    last = len(z_samples) - 1

    def drive(t):
        idx = int(round((t - times[0]) / dt))
        return z_samples[min(max(idx, 0), last)]

    return drive


def _finalize(rho: np.ndarray, what: str) -> DensityMatrix:
    herm = np.max(np.abs(rho - rho.conj().T))
    trace_err = abs(np.trace(rho).real - 1.0)
    eig_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if herm > HERMITICITY_TOL or trace_err > TRACE_TOL or eig_min < -EIGENVALUE_TOL:
        raise NumericError(
            f"{what} left the density-matrix manifold "
            f"(hermiticity {herm:.2e}, trace error {trace_err:.2e}, "
            f"min eigenvalue {eig_min:.2e}); reduce the integration step"
        )
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def evolve(
    rho0: DensityMatrix,
    model: TransmonModel,
    drive=None,
    duration: float = 0.0,
    n_steps: int | None = None,
) -> DensityMatrix:
    """Integrate the master equation with fixed-step 4th-order Runge-Kutta.

    ``drive`` is a callable t -> complex z(t) (the phase-rotated envelope),
    or None for free evolution.  Default step is duration/2048.
    """
    if duration < 0:
        raise ConfigurationError("duration must be non-negative")
    if rho0.dim != model.levels:
        raise ConfigurationError(
            f"state dimension {rho0.dim} does not match model levels {model.levels}"
        )
    if duration == 0:
        return rho0
    if n_steps is None:
        n_steps = DEFAULT_PULSE_STEPS
    l0 = static_liouvillian(model)
    la, lb = drive_superops(model.levels)

    if drive is None:
        def rhs(t, v):
            return l0 @ v
    else:
        def rhs(t, v):
            z = complex(drive(t))
            return l0 @ v + z * (la @ v) + np.conj(z) * (lb @ v)

    v = _vec(rho0.entries.astype(complex))
    h = duration / n_steps
    for k in range(n_steps):
        t = k * h
        k1 = rhs(t, v)
        k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2)
        k4 = rhs(t + h, v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _finalize(_unvec(v, model.levels), "evolve")


class SequenceEngine:
    """Gate-sequence executor with cached pulse and idle propagators.

    Propagators are superoperators integrated once per distinct physical
    pulse (envelope, drag, detuning); the total drive phase of each gate
    (axis + virtual-Z frame + detuning * start time) is applied by number-
    operator phase conjugation, which is exact.
    """

    def __init__(self, model: TransmonModel, n_steps: int = DEFAULT_PULSE_STEPS):
        if n_steps < 1:
            raise ConfigurationError("n_steps must be at least 1")
        self.model = model
        self.n_steps = n_steps
        self._l0 = static_liouvillian(model)
        self._la, self._lb = drive_superops(model.levels)
        levels = np.arange(model.levels)
        self._level_diff = levels[:, None] - levels[None, :]
        self._pulse_cache: dict = {}
        self._idle_cache: dict = {}

    def idle_propagator(self, duration: float) -> np.ndarray:
        key = float(duration)
        if key not in self._idle_cache:
            self._idle_cache[key] = expm(self._l0 * duration)
        return self._idle_cache[key]

    def pulse_propagator(self, spec: EnvelopeSpec, drag: DragConfig, detuning: float) -> np.ndarray:
        key = (spec, drag, float(detuning))
        cached = self._pulse_cache.get(key)
        if cached is not None:
            return cached
        n = self.n_steps
        tau = np.linspace(0.0, spec.t_p, 2 * n + 1)
        i_env, q_env = apply_drag(spec, drag, tau)
        z = drive_amplitude(i_env, q_env, 0.0, detuning, tau)
        h = spec.t_p / n
        dim2 = self.model.levels**2
        u = np.eye(dim2, dtype=complex)
        l0, la, lb = self._l0, self._la, self._lb
        for k in range(n):
            l_a = l0 + z[2 * k] * la + np.conj(z[2 * k]) * lb
            l_m = l0 + z[2 * k + 1] * la + np.conj(z[2 * k + 1]) * lb
            l_b = l0 + z[2 * k + 2] * la + np.conj(z[2 * k + 2]) * lb
            k1 = l_a @ u
            k2 = l_m @ (u + 0.5 * h * k1)
            k3 = l_m @ (u + 0.5 * h * k2)
            k4 = l_b @ (u + h * k3)
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        self._pulse_cache[key] = u
        return u

    def _phase_matrix(self, phase: float) -> np.ndarray:
        return np.exp(1j * phase * self._level_diff)

    def _apply_superop(self, u: np.ndarray, rho: np.ndarray) -> np.ndarray:
        return _unvec(u @ _vec(rho), self.model.levels)

    def run(self, rho: np.ndarray, gates, phase0: float = 0.0, t0: float = 0.0):
        """Execute gates on a raw density matrix.

        Returns (rho, accumulated_z_phase, end_time).  Pulse gates advance
        the frame by half their calibrated virtual-Z phase before and after
        the pulse and are followed by their t_d idle.
        """
        phase_acc = float(phase0)
        t = float(t0)
        rho = np.asarray(rho, dtype=complex)
        for gate in gates:
            if isinstance(gate, VirtualZ):
                phase_acc += gate.phase
            elif isinstance(gate, Idle):
                if gate.duration > 0:
                    rho = self._apply_superop(self.idle_propagator(gate.duration), rho)
                t += gate.duration
            elif isinstance(gate, PulseGate):
                calib = gate.calib
                if abs(calib.t_p - gate.spec.t_p) > 1e-15:
                    raise ConfigurationError(
                        f"calibration t_p {calib.t_p} does not match envelope t_p {gate.spec.t_p}"
                    )
                spec = replace(gate.spec, amplitude=calib.amplitude)
                drag = gate.drag
                if drag.variant != NO_DRAG:
                    drag = replace(drag, beta=calib.beta)
                detuning = TWO_PI * calib.drive_freq - self.model.omega_q
                phase_acc += 0.5 * calib.virtual_z
                total_phase = gate.phase + phase_acc + detuning * t
                u = self.pulse_propagator(spec, drag, detuning)
                p = self._phase_matrix(total_phase)
                rho = np.conj(p) * self._apply_superop(u, p * rho)
                phase_acc += 0.5 * calib.virtual_z
                t += calib.t_p
                if calib.t_d > 0:
                    rho = self._apply_superop(self.idle_propagator(calib.t_d), rho)
                    t += calib.t_d
            else:
                raise ConfigurationError(f"unknown gate operation {gate!r}")
        return rho, phase_acc, t


def run_sequence(
    rho0: DensityMatrix,
    model: TransmonModel,
    gates,
    engine: SequenceEngine | None = None,
) -> tuple:
    """Run a gate sequence; returns (final state, accumulated virtual-Z phase).

    The accumulated phase is the frame offset a fidelity evaluation must undo
    (see undo_virtual_z) before comparing against the ideal circuit.
    """
    if engine is None:
        engine = SequenceEngine(model)
    if rho0.dim != model.levels:
        raise ConfigurationError(
            f"state dimension {rho0.dim} does not match model levels {model.levels}"
        )
    rho, phase_acc, _ = engine.run(rho0.entries, gates)
    return _finalize(rho, "run_sequence"), phase_acc


def undo_virtual_z(rho, phase: float):
    """Rotate the final frame offset out of a state: rho_jk *= exp(i*phase*(j-k))."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    levels = np.arange(entries.shape[0])
    p = np.exp(1j * phase * (levels[:, None] - levels[None, :]))
    out = p * entries
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def ideal_rotation(angle: float, drive_phase: float = 0.0, levels: int = 4) -> np.ndarray:
    """Unitary of the ideal qubit-subspace rotation driven at `drive_phase`."""
    r = np.eye(levels, dtype=complex)
    half = 0.5 * angle
    r[0, 0] = r[1, 1] = np.cos(half)
    r[0, 1] = -1j * np.sin(half) * np.exp(1j * drive_phase)
    r[1, 0] = -1j * np.sin(half) * np.exp(-1j * drive_phase)
    return r


def gate_error_cardinal(
    model: TransmonModel,
    calib: GateCalibration,
    drag: DragConfig,
    spec: EnvelopeSpec,
    engine: SequenceEngine | None = None,
) -> tuple:
    """Average gate error and leakage of the calibrated pi/2 pulse.

    The error averages state fidelity against the ideal rotation over the six
    qubit-axis states (with the virtual-Z frame undone); leakage averages the
    population left outside the computational subspace.  The trailing t_d
    idle is part of the gate.
    """
    if engine is None:
        engine = SequenceEngine(model)
    gate = PulseGate(spec, drag, calib)
    target = ideal_rotation(np.pi / 2, 0.0, model.levels)
    fidelities = []
    leakages = []
    for psi in cardinal_state_vectors(model.levels):
        rho = np.outer(psi, psi.conj())
        out, phase_acc, _ = engine.run(rho, [gate])
        out = undo_virtual_z(out, phase_acc)
        ideal = target @ psi
        fidelities.append(np.real(ideal.conj() @ out @ ideal))
        pops = np.diag(out).real
        leakages.append(1.0 - pops[0] - pops[1])
    eps_g = 1.0 - float(np.mean(fidelities))
    leakage = float(np.mean(leakages))
    return eps_g, leakage


def normalized_qubit_purity(rho) -> float:
    """2 tr(rho_hat^2) - 1 of the qubit block renormalized to unit trace."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    block = entries[:2, :2]
    weight = np.trace(block).real
    if weight <= 0:
        raise NumericError("computational subspace carries no population")
    block = block / weight
    return float(2.0 * np.trace(block @ block).real - 1.0)
