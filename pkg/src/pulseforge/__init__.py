"""Spectrally optimized single-qubit control pulses for weakly anharmonic
qubits: envelope synthesis, transmon master-equation simulation, closed-loop
calibration, randomized benchmarking and waveform distortion tooling."""

from .envelopes import (
    COSINE,
    DRAG_L,
    DRAG_P,
    FAST_SERIES,
    GAUSSIAN,
    HD_SERIES,
    NO_DRAG,
    NO_DRAG_CONFIG,
    SQUARE_COSINE_RISE,
    DragConfig,
    EnvelopeSpec,
    SampledWaveform,
    ac_stark_shift,
    apply_drag,
    cosine,
    eval_envelope,
    fast_series,
    gaussian,
    hd_series,
    sample_waveform,
    square_cosine_rise,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    DegenerateProblemError,
    FitError,
    NumericError,
    PulseforgeError,
)
from .fast_synth import (
    FastSolution,
    HeuristicParams,
    SuppressionProblem,
    basis_ft,
    build_gram,
    critical_n,
    heuristic_hyperparams,
    heuristic_problem,
    slepian_problem,
    solve_fast,
)
from .hd_drag import (
    HdProblem,
    HdSolution,
    beta_polynomial,
    hd_envelope_spec,
    hd_problem,
    solve_betas,
    solve_hd,
)
from .spectrum import (
    SpectrumReport,
    analytic_i_spectrum,
    analytic_iq_spectrum,
    band_energy,
    fft_spectrum,
    sampled_band_energy,
    spectrum_report,
)
from .distortion import (
    CROSS,
    INTRA,
    DistortionModel,
    apply_distortion,
    kernel_ft,
    predistort_waveform,
)
from .simulator import (
    DEFAULT_GATE_DELAY,
    DEFAULT_PULSE_STEPS,
    CalibratedPulse,
    DensityMatrix,
    GateCalibration,
    Idle,
    PulseGate,
    SequenceEngine,
    TransmonModel,
    VirtualZ,
    basis_state,
    cardinal_states,
    evolve,
    gate_error_cardinal,
    ground_state,
    ideal_rotation,
    run_sequence,
    undo_virtual_z,
)
from .calibration import (
    CalibrationConfig,
    CalibrationReport,
    base_pulse_area,
    calibrate_amplitude_rabi,
    calibrate_beta_leakage,
    calibrate_beta_qscale,
    calibrate_frequency_ramsey,
    calibrate_virtual_z,
    full_calibration,
    refine_amplitude_bangbang,
    refine_beta_phase,
)
from .benchmarking import (
    AssignmentMatrix,
    CliffordTable,
    RbOutcome,
    apply_assignment,
    c_distortion_characterization,
    clifford_table,
    correct_readout,
    decompose_clifford,
    fit_exponential_decay,
    fit_leakage_rb,
    fit_rb,
    i_distortion_characterization,
    incoherent_error_per_gate,
    purity_curve,
    recovery_index,
    run_purity_rb,
    run_rb,
    sequence_gate_ops,
)

__version__ = "0.1.0"
