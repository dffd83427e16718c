"""Command-line front end: pulse synthesis, spectra, simulation, calibration,
parameter sweeps, benchmarking and waveform distortion tooling.

Structured data travels as JSON documents tagged with a ``schema`` field
("<name>/v1"); loaders reject unknown fields so stale or misspelled configs
fail loudly instead of being silently ignored.  Tabular data travels as CSV
with SI-prefixed headers (t_ns, f_MHz) ready for plotting scripts.

Exit codes: 0 success, 1 usage, 2 configuration/validation, 3 numeric
failure.  Every command is deterministic for a fixed --seed (environment
variable PULSEFORGE_SEED is the fallback).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .benchmarking import (
    c_distortion_characterization,
    fit_exponential_decay,
    fit_leakage_rb,
    fit_rb,
    i_distortion_characterization,
    incoherent_error_per_gate,
    purity_curve,
    run_rb,
)
from .calibration import CalibrationConfig, base_pulse_area, full_calibration
from .distortion import DistortionModel, apply_distortion, predistort_waveform
from .envelopes import (
    DRAG_L,
    DRAG_P,
    DRAG_VARIANTS,
    ENVELOPE_KINDS,
    NO_DRAG,
    NO_DRAG_CONFIG,
    DEFAULT_SAMPLE_RATE,
    DragConfig,
    EnvelopeSpec,
    SampledWaveform,
    cosine,
    fast_series,
    gaussian,
    sample_waveform,
    square_cosine_rise,
)
from .errors import ConfigurationError, NumericError, PulseforgeError
from .fast_synth import (
    SuppressionProblem,
    heuristic_hyperparams,
    slepian_problem,
    solve_fast,
)
from .hd_drag import HdProblem, hd_envelope_spec, hd_problem, solve_hd
from .simulator import (
    DEFAULT_GATE_DELAY,
    DEFAULT_PULSE_STEPS,
    TWO_PI,
    CalibratedPulse,
    GateCalibration,
    SequenceEngine,
    TransmonModel,
    gate_error_cardinal,
)
from .spectrum import fft_spectrum, spectrum_report

SWEEP_AXES = (
    "gate_duration",
    "n_terms",
    "f_c",
    "w_ef",
    "interval_center",
    "interval_width",
    "beta2_freq",
)

SWEEP_COLUMNS = ("axis_value", "eps_g", "L_g", "A_calibrated", "beta_calibrated", "error")

_FLOAT_FMT = "%.12g"


# ---------------------------------------------------------------- JSON layer

def _dump_json(path: str, name: str, payload: dict) -> None:
    doc = {"schema": f"{name}/v1"}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _load_json(path: str, name: str, required, optional=()) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    schema = doc.get("schema")
    if schema != f"{name}/v1":
        raise ConfigurationError(
            f"{path}: expected schema {name!r}/v1, got {schema!r}"
        )
    known = {"schema", *required, *optional}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigurationError(f"{path}: unknown fields {unknown} for schema {schema}")
    missing = sorted(set(required) - set(doc))
    if missing:
        raise ConfigurationError(f"{path}: missing fields {missing} for schema {schema}")
    return doc


_PULSE_OPTIONAL = (
    "sigma_ratio",
    "subtract_offset",
    "coeffs",
    "d_coeffs",
    "beta_even",
    "rise_time",
    "meta",
)


def pulse_to_payload(spec: EnvelopeSpec, drag: DragConfig, meta: dict | None = None) -> dict:
    payload = {
        "kind": spec.kind,
        "t_p": spec.t_p,
        "amplitude": spec.amplitude,
        "rotation_angle": spec.rotation_angle,
        "drag": {"beta": drag.beta, "alpha": drag.alpha, "variant": drag.variant},
    }
    if spec.kind == "gaussian":
        payload["sigma_ratio"] = spec.sigma_ratio
        payload["subtract_offset"] = spec.subtract_offset
    if spec.coeffs:
        payload["coeffs"] = list(spec.coeffs)
    if spec.d_coeffs:
        payload["d_coeffs"] = list(spec.d_coeffs)
    if spec.beta_even:
        payload["beta_even"] = list(spec.beta_even)
    if spec.kind == "square_cosine_rise":
        payload["rise_time"] = spec.rise_time
    if meta:
        payload["meta"] = meta
    return payload


def load_pulse(path: str):
    doc = _load_json(
        path, "pulse", ("kind", "t_p", "amplitude", "rotation_angle", "drag"), _PULSE_OPTIONAL
    )
    if doc["kind"] not in ENVELOPE_KINDS:
        raise ConfigurationError(f"{path}: unknown envelope kind {doc['kind']!r}")
    kwargs = {}
    for key in ("sigma_ratio", "subtract_offset", "coeffs", "d_coeffs", "beta_even", "rise_time"):
        if key in doc:
            kwargs[key] = doc[key]
    spec = EnvelopeSpec(
        kind=doc["kind"],
        t_p=float(doc["t_p"]),
        amplitude=float(doc["amplitude"]),
        rotation_angle=float(doc["rotation_angle"]),
        **kwargs,
    )
    d = doc["drag"]
    extra = sorted(set(d) - {"beta", "alpha", "variant"})
    if extra:
        raise ConfigurationError(f"{path}: unknown drag fields {extra}")
    drag = DragConfig(
        beta=float(d["beta"]),
        alpha=float(d["alpha"]),
        variant=d.get("variant", DRAG_L),
    )
    return spec, drag


_MODEL_FIELDS = ("omega_q", "alpha", "t1", "t_phi", "n_bar", "levels")


def model_to_payload(model: TransmonModel) -> dict:
    return {name: getattr(model, name) for name in _MODEL_FIELDS}


def load_model(path: str) -> TransmonModel:
    doc = _load_json(path, "model", (), _MODEL_FIELDS)
    kwargs = {k: doc[k] for k in _MODEL_FIELDS if k in doc}
    if "levels" in kwargs:
        kwargs["levels"] = int(kwargs["levels"])
    return TransmonModel(**kwargs)


def _model_from_dict(d: dict, where: str) -> TransmonModel:
    unknown = sorted(set(d) - set(_MODEL_FIELDS))
    if unknown:
        raise ConfigurationError(f"{where}: unknown model fields {unknown}")
    if "levels" in d:
        d = dict(d, levels=int(d["levels"]))
    return TransmonModel(**d)


_CALIB_FIELDS = ("amplitude", "beta", "drive_freq", "t_p", "virtual_z", "t_d")


def calibration_to_payload(calib: GateCalibration, stages=()) -> dict:
    payload = {name: getattr(calib, name) for name in _CALIB_FIELDS}
    if stages:
        payload["stages"] = [[name, value] for name, value in stages]
    return payload


def load_calibration(path: str) -> GateCalibration:
    doc = _load_json(path, "calibration", ("amplitude", "beta", "drive_freq", "t_p"),
                     ("virtual_z", "t_d", "stages"))
    kwargs = {k: float(doc[k]) for k in _CALIB_FIELDS if k in doc}
    return GateCalibration(**kwargs)


def distortion_to_payload(model: DistortionModel) -> dict:
    return {"kind": model.kind, "terms": [[a, tau] for a, tau in model.terms]}


def load_distortion(path: str) -> DistortionModel:
    doc = _load_json(path, "distortion", ("kind", "terms"))
    terms = doc["terms"]
    if not isinstance(terms, list) or any(len(t) != 2 for t in terms):
        raise ConfigurationError(f"{path}: terms must be a list of [a, tau] pairs")
    return DistortionModel(kind=doc["kind"], terms=tuple((a, tau) for a, tau in terms))


# ----------------------------------------------------------------- CSV layer

def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [c if isinstance(c, str) else _FLOAT_FMT % c for c in row]
            )


def write_waveform_csv(path: str, waveform: SampledWaveform) -> None:
    rows = zip(waveform.times * 1e9, waveform.i_samples, waveform.q_samples)
    _write_csv(path, ("t_ns", "I", "Q"), rows)


def read_waveform_csv(path: str) -> SampledWaveform:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            data = [[float(c) for c in row] for row in reader if row]
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric cell: {exc}") from exc
    if header is None or [h.strip() for h in header] != ["t_ns", "I", "Q"]:
        raise ConfigurationError(f"{path}: expected header t_ns,I,Q, got {header}")
    if len(data) < 2:
        raise ConfigurationError(f"{path}: need at least two samples")
    arr = np.asarray(data, dtype=float)
    t = arr[:, 0] * 1e-9
    steps = np.diff(t)
    dt = float(np.median(steps))
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt + 1e-15:
        raise ConfigurationError(f"{path}: time grid is not uniform")
    return SampledWaveform(dt=dt, i_samples=arr[:, 1], q_samples=arr[:, 2],
                           start_time=float(t[0]))


# ------------------------------------------------------------------- helpers

def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("PULSEFORGE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigurationError(f"PULSEFORGE_SEED must be an integer, got {env!r}") from exc
    return 0


def _parse_float_list(text: str, flag: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{flag} expects comma-separated numbers: {exc}") from exc
    if not values:
        raise ConfigurationError(f"{flag} must list at least one value")
    return values


def _auto_amplitude(spec: EnvelopeSpec) -> float:
    # Small-amplitude estimate theta = A * area(unit shape); Rabi refines it.
    area = base_pulse_area(spec)
    if area == 0.0:
        raise NumericError("unit envelope area is zero; cannot scale amplitude")
    return float(spec.rotation_angle / area)


def _calibrated_pulse(spec: EnvelopeSpec, drag: DragConfig, calib: GateCalibration):
    if abs(calib.t_p - spec.t_p) > 1e-15 + 1e-9 * spec.t_p:
        raise ConfigurationError(
            f"calibration t_p {calib.t_p} does not match pulse t_p {spec.t_p}"
        )
    return CalibratedPulse(spec, drag, calib)


# ------------------------------------------------------------------ commands

def cmd_synth(args) -> int:
    theta = args.theta
    t_p = args.tp
    if t_p is None:
        t_p = (args.tg - args.td) if args.tg is not None else 6e-9
    if not t_p > 0:
        raise ConfigurationError(f"pulse duration must be positive, got {t_p}")
    variant = NO_DRAG if args.no_drag else args.variant
    meta: dict = {"method": args.method}

    if args.method == "fast":
        if args.intervals:
            intervals = tuple((f_l, f_h, w) for f_l, f_h, w in args.intervals)
            n_terms = args.n_terms if args.n_terms is not None else 4
            problem = SuppressionProblem(n_terms, intervals, theta, t_p)
        else:
            if args.alpha is None:
                raise ConfigurationError("--alpha is required for the heuristic band layout")
            hp = heuristic_hyperparams(args.alpha, variant if variant != NO_DRAG else DRAG_L,
                                       args.f_high)
            if args.n_terms is not None:
                hp = replace(hp, n_terms=args.n_terms)
            if args.f_c is not None:
                hp = replace(hp, f_c=args.f_c)
            if args.w_ef is not None:
                hp = replace(hp, w_ef=args.w_ef)
            intervals = ((hp.f_l_ef, hp.f_h_ef, hp.w_ef), (hp.f_c, hp.f_h_2, 1.0))
            problem = SuppressionProblem(hp.n_terms, intervals, theta, t_p)
        solution = solve_fast(problem)
        spec = fast_series(solution.coeffs, t_p)
        meta.update(
            intervals=[list(iv) for iv in problem.intervals],
            objective=solution.objective,
            kkt_residual=solution.kkt_residual,
        )
    elif args.method == "slepian":
        if args.f_c is None:
            raise ConfigurationError("--f-c is required for the slepian layout")
        n_terms = args.n_terms if args.n_terms is not None else 6
        problem = slepian_problem(args.f_c, theta, t_p, n_terms, args.f_high)
        solution = solve_fast(problem)
        spec = fast_series(solution.coeffs, t_p)
        meta.update(
            intervals=[list(iv) for iv in problem.intervals],
            objective=solution.objective,
            kkt_residual=solution.kkt_residual,
        )
    elif args.method == "hd":
        if args.alpha is None:
            raise ConfigurationError("--alpha is required for the hd method")
        if args.beta2_freq is not None:
            problem = HdProblem(args.k, (args.beta2_freq,) * args.k, t_p)
        else:
            problem = hd_problem(args.alpha, t_p, order=args.k)
        solution = solve_hd(problem)
        # hd_series pins rotation_angle = A * sum(d) * t_p
        amplitude = theta / (float(np.sum(solution.d_coeffs)) * t_p)
        spec = hd_envelope_spec(solution, amplitude, t_p)
        meta.update(
            suppressed_freqs=list(problem.suppressed_freqs),
            beta_even=list(solution.beta_even),
            d_coeffs=list(solution.d_coeffs),
        )
    elif args.method == "cosine":
        spec = cosine(t_p, 1.0, theta)
        spec = replace(spec, amplitude=_auto_amplitude(spec))
    elif args.method == "gaussian":
        spec = gaussian(t_p, 1.0, theta)
        spec = replace(spec, amplitude=_auto_amplitude(spec))
    else:  # square
        spec = square_cosine_rise(t_p, 1.0, theta, rise_time=args.rise_time)
        spec = replace(spec, amplitude=_auto_amplitude(spec))

    if variant == NO_DRAG:
        drag = NO_DRAG_CONFIG
    else:
        if args.alpha is None:
            raise ConfigurationError("--alpha is required unless --no-drag is set")
        drag = DragConfig(beta=args.beta, alpha=args.alpha, variant=variant)

    _dump_json(args.out, "pulse", pulse_to_payload(spec, drag, meta))
    if args.waveform:
        write_waveform_csv(args.waveform, sample_waveform(spec, drag, dt=args.dt))
    return 0


def cmd_spectrum(args) -> int:
    spec, drag = load_pulse(args.pulse)
    if args.sampled:
        report = fft_spectrum(sample_waveform(spec, drag, dt=args.dt))
        mask = (report.freqs >= args.f_min) & (report.freqs <= args.f_max)
        freqs = report.freqs[mask]
        amp_i = report.amplitude_i[mask]
        amp_iq = report.amplitude_iq[mask]
    else:
        freqs = np.linspace(args.f_min, args.f_max, args.points)
        report = spectrum_report(spec, drag, freqs)
        amp_i = report.amplitude_i
        amp_iq = report.amplitude_iq
    _write_csv(args.out, ("f_MHz", "abs_I", "abs_IQ"),
               zip(freqs / 1e6, amp_i, amp_iq))
    return 0


def cmd_simulate(args) -> int:
    spec, drag = load_pulse(args.pulse)
    model = load_model(args.model) if args.model else TransmonModel()
    if args.calibration:
        calib = load_calibration(args.calibration)
        pulse = _calibrated_pulse(spec, drag, calib)
        calib = pulse.calib
    else:
        # Uncalibrated template: drive on resonance with the template scales.
        calib = GateCalibration(spec.amplitude, drag.beta, model.omega_q / TWO_PI,
                                spec.t_p, 0.0, args.td)
    engine = SequenceEngine(model, n_steps=args.steps)
    eps_g, leakage = gate_error_cardinal(model, calib, drag, spec, engine)
    _dump_json(args.out, "result", {
        "eps_g": eps_g,
        "leakage": leakage,
        "model": model_to_payload(model),
        "calibration": calibration_to_payload(calib),
    })
    return 0


def _calibration_config(variant: str, seed: int, args=None, overrides=None) -> CalibrationConfig:
    kwargs = {"variant": variant, "seed": seed}
    if args is not None:
        kwargs.update(t_d=args.td, n_steps=args.steps, max_loop_iters=args.loops)
    if overrides:
        allowed = set(CalibrationConfig.__dataclass_fields__) - {"variant", "seed"}
        unknown = sorted(set(overrides) - allowed)
        if unknown:
            raise ConfigurationError(f"unknown calibration fields {unknown}")
        for key, value in overrides.items():
            if key == "leakage_rb_lengths":
                value = tuple(int(v) for v in value)
            elif key in ("max_loop_iters", "rabi_points", "qscale_points", "beta_points",
                         "bangbang_reps", "phase_amp_reps", "n_steps", "shots"):
                value = int(value) if value is not None else None
            kwargs[key] = value
    return CalibrationConfig(**kwargs)


def cmd_calibrate(args) -> int:
    spec, drag = load_pulse(args.pulse)
    model = load_model(args.model) if args.model else TransmonModel()
    variant = args.variant if args.variant is not None else drag.variant
    config = _calibration_config(variant, _resolve_seed(args), args)
    report = full_calibration(model, spec, config)
    _dump_json(args.out, "calibration",
               calibration_to_payload(report.pulse.calib, report.stages))
    return 0


def _load_rb_inputs(args):
    spec, drag = load_pulse(args.pulse)
    model = load_model(args.model) if args.model else TransmonModel()
    calib = load_calibration(args.calibration)
    pulse = _calibrated_pulse(spec, drag, calib)
    lengths = tuple(int(v) for v in _parse_float_list(args.lengths, "--lengths"))
    engine = SequenceEngine(model, n_steps=args.steps)
    return model, pulse, lengths, engine


def _rb_csv(path, outcome) -> None:
    # sequence-averaged populations per length
    _write_csv(path, ("n_cliffords", "p_g", "p_e", "p_f"),
               zip(outcome.lengths, outcome.p_g.mean(axis=1),
                   outcome.p_e.mean(axis=1), outcome.p_f.mean(axis=1)))


def cmd_rb(args) -> int:
    model, pulse, lengths, engine = _load_rb_inputs(args)
    outcome = run_rb(model, pulse, lengths, args.sequences, _resolve_seed(args), engine)
    eps_cl, eps_g = fit_rb(outcome)
    _dump_json(args.out, "result", {
        "eps_cl": eps_cl,
        "eps_g": eps_g,
        "lengths": list(outcome.lengths),
        "p_g": [float(v) for v in outcome.p_g.mean(axis=1)],
        "avg_gate_count": outcome.avg_gate_count,
    })
    if args.csv:
        _rb_csv(args.csv, outcome)
    return 0


def cmd_leakage_rb(args) -> int:
    model, pulse, lengths, engine = _load_rb_inputs(args)
    outcome = run_rb(model, pulse, lengths, args.sequences, _resolve_seed(args), engine)
    leakage = fit_leakage_rb(outcome)
    _dump_json(args.out, "result", {
        "leakage_per_gate": leakage,
        "lengths": list(outcome.lengths),
        "p_f": [float(v) for v in outcome.p_f.mean(axis=1)],
        "avg_gate_count": outcome.avg_gate_count,
    })
    if args.csv:
        _rb_csv(args.csv, outcome)
    return 0


def cmd_purity_rb(args) -> int:
    model, pulse, lengths, engine = _load_rb_inputs(args)
    purity = purity_curve(model, pulse, lengths, args.sequences,
                          _resolve_seed(args), engine)
    means = purity.mean(axis=1)
    fit = fit_exponential_decay(lengths, means)
    _dump_json(args.out, "result", {
        "unitarity": fit.rate,
        "eps_inc": incoherent_error_per_gate(fit.rate),
        "lengths": list(lengths),
        "p_norm": [float(v) for v in means],
    })
    if args.csv:
        _write_csv(args.csv, ("n_cliffords", "p_norm"), zip(lengths, means))
    return 0


def cmd_distort(args) -> int:
    model = load_distortion(args.distortion)
    waveform = read_waveform_csv(args.infile)
    if args.invert:
        out = predistort_waveform(waveform, model)
        n = len(waveform.i_samples)  # identical grid: drop the ringing pad
        out = SampledWaveform(out.dt, out.i_samples[:n], out.q_samples[:n],
                              out.start_time)
    else:
        out = apply_distortion(waveform, model)
    write_waveform_csv(args.out, out)
    return 0


def cmd_characterize_distortion(args) -> int:
    spec, drag = load_pulse(args.pulse)
    model = load_model(args.model) if args.model else TransmonModel()
    calib = load_calibration(args.calibration)
    pulse = _calibrated_pulse(spec, drag, calib)
    distortion = load_distortion(args.distortion) if args.distortion else None
    t_d_values = _parse_float_list(args.t_d, "--t-d")
    if args.kind == "intra":
        shifts = i_distortion_characterization(
            model, pulse, distortion, t_d_values,
            n_pairs=args.pairs, predistort=args.predistort,
            steps_per_pulse=args.steps,
        )
        _write_csv(args.out, ("t_d_ns", "phi_s_mrad"),
                   zip(np.asarray(t_d_values) * 1e9, shifts * 1e3))
        if args.summary:
            summary = {"max_abs_phi_s_mrad": float(np.max(np.abs(shifts)) * 1e3)}
            if len(t_d_values) >= 3:
                # rate per ns -> tail time constant
                fit = fit_exponential_decay(np.asarray(t_d_values) * 1e9, shifts)
                if 0.0 < fit.rate < 1.0:
                    summary["tau_ns"] = -1.0 / float(np.log(fit.rate))
                    summary["amplitude_mrad"] = fit.amplitude * 1e3
                    summary["offset_mrad"] = fit.offset * 1e3
            _dump_json(args.summary, "result", summary)
    else:
        reps = [int(v) for v in _parse_float_list(args.reps, "--reps")]
        p_map = c_distortion_characterization(
            model, pulse, distortion, t_d_values, reps,
            predistort=args.predistort, steps_per_pulse=args.steps,
        )
        rows = []
        for i, t_d in enumerate(t_d_values):
            for j, n in enumerate(reps):
                rows.append((t_d * 1e9, float(n), p_map[i, j]))
        _write_csv(args.out, ("t_d_ns", "n_reps", "p_e"), rows)
        if args.summary:
            dev = np.max(np.abs(p_map - 0.5), axis=0)
            _dump_json(args.summary, "result", {
                "max_abs_dev_from_half": {str(n): float(d) for n, d in zip(reps, dev)},
            })
    return 0


# --------------------------------------------------------------------- sweep

_SWEEP_PULSE_FIELDS = (
    "method", "t_g", "t_p", "theta", "n_terms", "f_c", "w_ef", "f_high",
    "interval_center", "interval_width", "k", "beta2_freq", "sigma_ratio",
    "rise_time", "beta", "variant",
)


def load_sweep(path: str) -> dict:
    doc = _load_json(path, "sweep", ("axis", "values", "base"), ("seed",))
    if doc["axis"] not in SWEEP_AXES:
        raise ConfigurationError(f"{path}: axis must be one of {SWEEP_AXES}, got {doc['axis']!r}")
    values = doc["values"]
    if not isinstance(values, list) or not values:
        raise ConfigurationError(f"{path}: values must be a non-empty list")
    base = doc["base"]
    unknown = sorted(set(base) - {"model", "pulse", "calibration"})
    if unknown:
        raise ConfigurationError(f"{path}: unknown base sections {unknown}")
    pulse_cfg = base.get("pulse", {})
    unknown = sorted(set(pulse_cfg) - set(_SWEEP_PULSE_FIELDS))
    if unknown:
        raise ConfigurationError(f"{path}: unknown pulse fields {unknown}")
    if "method" not in pulse_cfg:
        raise ConfigurationError(f"{path}: base.pulse.method is required")
    axis = doc["axis"]
    if axis != "gate_duration" and axis not in _SWEEP_PULSE_FIELDS:
        raise ConfigurationError(f"{path}: axis {axis!r} has no matching pulse field")
    return {
        "axis": axis,
        "values": [float(v) for v in values],
        "seed": int(doc.get("seed", 0)),
        "model": base.get("model", {}),
        "pulse": dict(pulse_cfg),
        "calibration": dict(base.get("calibration", {})),
    }


def _sweep_spec(pulse_cfg: dict, t_d: float, alpha: float) -> EnvelopeSpec:
    """Build the envelope template a sweep point requests."""
    cfg = dict(pulse_cfg)
    method = cfg.pop("method")
    variant = cfg.pop("variant", DRAG_L)
    theta = float(cfg.pop("theta", np.pi / 2))
    t_p = cfg.pop("t_p", None)
    t_g = cfg.pop("t_g", None)
    if t_p is None:
        if t_g is None:
            raise ConfigurationError("sweep pulse config needs t_p or t_g")
        t_p = float(t_g) - t_d
    t_p = float(t_p)
    if not t_p > 0:
        raise ConfigurationError(f"pulse duration must be positive, got {t_p}")

    if method == "slepian":
        f_c = float(cfg.get("f_c", 185e6))
        n_terms = int(cfg.get("n_terms", 6))
        problem = slepian_problem(f_c, theta, t_p, n_terms, float(cfg.get("f_high", 1e9)))
        return fast_series(solve_fast(problem).coeffs, t_p)
    if method == "fast":
        hp = heuristic_hyperparams(alpha, variant if variant != NO_DRAG else DRAG_L,
                                   float(cfg.get("f_high", 1e9)))
        if "n_terms" in cfg:
            hp = replace(hp, n_terms=int(cfg["n_terms"]))
        if "f_c" in cfg:
            hp = replace(hp, f_c=float(cfg["f_c"]))
        if "w_ef" in cfg:
            hp = replace(hp, w_ef=float(cfg["w_ef"]))
        center = float(cfg.get("interval_center", (hp.f_l_ef + hp.f_h_ef) / 2))
        width = float(cfg.get("interval_width", hp.f_h_ef - hp.f_l_ef))
        intervals = ((center - width / 2, center + width / 2, hp.w_ef),
                     (hp.f_c, hp.f_h_2, 1.0))
        problem = SuppressionProblem(hp.n_terms, intervals, theta, t_p)
        return fast_series(solve_fast(problem).coeffs, t_p)
    if method == "hd":
        k = int(cfg.get("k", 1))
        if "beta2_freq" in cfg:
            problem = HdProblem(k, (float(cfg["beta2_freq"]),) * k, t_p)
        else:
            problem = hd_problem(alpha, t_p, order=k)
        solution = solve_hd(problem)
        amplitude = theta / (float(np.sum(solution.d_coeffs)) * t_p)
        return hd_envelope_spec(solution, amplitude, t_p)
    if method == "cosine":
        spec = cosine(t_p, 1.0, theta)
    elif method == "gaussian":
        spec = gaussian(t_p, 1.0, theta, sigma_ratio=float(cfg.get("sigma_ratio", 0.2)))
    elif method == "square":
        spec = square_cosine_rise(t_p, 1.0, theta,
                                  rise_time=float(cfg.get("rise_time", t_p / 2)))
    else:
        raise ConfigurationError(f"unknown sweep pulse method {method!r}")
    return replace(spec, amplitude=_auto_amplitude(spec))


def _sweep_point(task) -> dict:
    sweep, value = task
    axis = sweep["axis"]
    pulse_cfg = dict(sweep["pulse"])
    if axis == "gate_duration":
        pulse_cfg.pop("t_p", None)
        pulse_cfg["t_g"] = value
    else:
        pulse_cfg[axis] = value

    model = _model_from_dict(sweep["model"], "sweep base.model")
    calib_overrides = dict(sweep["calibration"])
    variant = pulse_cfg.get("variant", calib_overrides.pop("variant", DRAG_L))
    pulse_cfg["variant"] = variant
    beta0 = pulse_cfg.pop("beta", None)
    config = _calibration_config(variant, sweep["seed"], overrides=calib_overrides)
    if beta0 is not None:
        config = replace(config, initial_beta=float(beta0))

    spec = _sweep_spec(pulse_cfg, config.t_d, model.alpha)
    report = full_calibration(model, spec, config)
    engine = SequenceEngine(model, n_steps=config.n_steps)
    eps_g, leakage = gate_error_cardinal(model, report.pulse.calib, report.pulse.drag,
                                         report.pulse.spec, engine)
    return {
        "axis_value": value,
        "eps_g": eps_g,
        "L_g": leakage,
        "A_calibrated": report.amplitude,
        "beta_calibrated": report.beta,
        "error": "",
    }


def _sweep_point_guarded(task) -> dict:
    try:
        return _sweep_point(task)
    except PulseforgeError as exc:
        return {
            "axis_value": task[1],
            "eps_g": np.nan,
            "L_g": np.nan,
            "A_calibrated": np.nan,
            "beta_calibrated": np.nan,
            "error": f"{type(exc).__name__}: {exc}",
        }


def cmd_sweep(args) -> int:
    sweep = load_sweep(args.config)
    if args.seed is not None:
        sweep["seed"] = int(args.seed)
    tasks = [(sweep, value) for value in sweep["values"]]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point_guarded, tasks))
    else:
        rows = [_sweep_point_guarded(task) for task in tasks]
    _write_csv(args.out, SWEEP_COLUMNS,
               [[row[c] for c in SWEEP_COLUMNS] for row in rows])
    return 0


# ----------------------------------------------------------------- arg layer

class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for config.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _interval(parts):
    f_l, f_h, w = (float(p) for p in parts)
    return (f_l, f_h, w)


def _add_common_sim(p, steps_default=DEFAULT_PULSE_STEPS):
    p.add_argument("--steps", type=int, default=steps_default,
                   help="integration steps per pulse")
    p.add_argument("--td", type=float, default=DEFAULT_GATE_DELAY,
                   help="idle delay after each pulse (s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pulseforge",
                     description="Spectrally optimized single-qubit pulse toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("synth", parents=[], help="solve a pulse and write its definition")
    p.add_argument("--method", required=True,
                   choices=("fast", "hd", "cosine", "gaussian", "square", "slepian"))
    p.add_argument("--heuristic", action="store_true",
                   help="use the anharmonicity-derived band layout (default when no --interval)")
    p.add_argument("--alpha", type=float, help="anharmonicity (rad/s), e.g. -1.332e9")
    p.add_argument("--tp", type=float, help="pulse duration (s)")
    p.add_argument("--tg", type=float, help="gate duration (s); t_p = t_g - t_d")
    p.add_argument("--td", type=float, default=DEFAULT_GATE_DELAY)
    p.add_argument("--theta", type=float, default=np.pi / 2, help="rotation angle (rad)")
    p.add_argument("--variant", choices=(DRAG_L, DRAG_P), default=DRAG_L)
    p.add_argument("--no-drag", action="store_true", help="emit a bare in-phase pulse")
    p.add_argument("--beta", type=float, default=1.0, help="drag coefficient template value")
    p.add_argument("--n-terms", type=int, dest="n_terms")
    p.add_argument("--f-c", type=float, dest="f_c", help="wideband/cutoff start (Hz)")
    p.add_argument("--w-ef", type=float, dest="w_ef", help="ef-band weight ratio")
    p.add_argument("--f-high", type=float, dest="f_high", default=1e9,
                   help="upper edge of the wideband interval (Hz)")
    p.add_argument("--interval", nargs=3, metavar=("F_L", "F_H", "W"), action="append",
                   dest="intervals", type=float, help="explicit band (repeatable)")
    p.add_argument("--k", type=int, default=1, help="derivative order for --method hd")
    p.add_argument("--beta2-freq", type=float, dest="beta2_freq",
                   help="suppressed baseband frequency override (Hz)")
    p.add_argument("--rise-time", type=float, dest="rise_time", default=6.25e-9)
    p.add_argument("--dt", type=float, default=1.0 / DEFAULT_SAMPLE_RATE)
    p.add_argument("--waveform", help="also write the sampled waveform CSV here")
    p.add_argument("--out", required=True, help="pulse JSON output path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrum", help="tabulate |spectrum| of a pulse")
    p.add_argument("--pulse", required=True)
    p.add_argument("--f-min", type=float, dest="f_min", default=-1.0e9)
    p.add_argument("--f-max", type=float, dest="f_max", default=1.0e9)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--sampled", action="store_true",
                   help="FFT of the sampled waveform instead of the analytic transform")
    p.add_argument("--dt", type=float, default=1.0 / DEFAULT_SAMPLE_RATE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("simulate", help="cardinal-state gate error and leakage")
    p.add_argument("--pulse", required=True)
    p.add_argument("--model", help="transmon model JSON (defaults to the reference device)")
    p.add_argument("--calibration", help="calibration JSON (defaults to the raw template)")
    _add_common_sim(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="full closed-loop tune-up")
    p.add_argument("--pulse", required=True)
    p.add_argument("--model")
    p.add_argument("--variant", choices=DRAG_VARIANTS,
                   help="override the drag variant stored with the pulse")
    p.add_argument("--loops", type=int, default=3, help="phase/amplitude refinement rounds")
    p.add_argument("--seed", type=int)
    _add_common_sim(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sweep", help="calibrate and score a pulse across an axis")
    p.add_argument("--config", required=True, help="sweep JSON")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, help="override the seed stored in the config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    for name, func in (("rb", cmd_rb), ("leakage-rb", cmd_leakage_rb),
                       ("purity-rb", cmd_purity_rb)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} experiment")
        p.add_argument("--pulse", required=True)
        p.add_argument("--model")
        p.add_argument("--calibration", required=True)
        p.add_argument("--lengths", default="2,8,24,60,120,240",
                       help="comma-separated Clifford sequence lengths")
        p.add_argument("--sequences", type=int, default=25)
        p.add_argument("--seed", type=int)
        _add_common_sim(p)
        p.add_argument("--out", required=True)
        p.add_argument("--csv", help="also write per-length data CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("distort", help="apply or invert a distortion model on a waveform")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--apply", action="store_true")
    group.add_argument("--invert", action="store_true")
    p.add_argument("--distortion", required=True, help="distortion model JSON")
    p.add_argument("--in", dest="infile", required=True, help="waveform CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("characterize-distortion",
                       help="error-amplification circuits probing waveform tails")
    p.add_argument("--kind", choices=("intra", "cross"), required=True)
    p.add_argument("--pulse", required=True)
    p.add_argument("--model")
    p.add_argument("--calibration", required=True)
    p.add_argument("--distortion", help="distortion model JSON (omit for the clean line)")
    p.add_argument("--t-d", dest="t_d", default="0,1e-9,2e-9,4e-9,8e-9,16e-9",
                   help="comma-separated gate delays (s)")
    p.add_argument("--pairs", type=int, default=8, help="amplification pairs (intra)")
    p.add_argument("--reps", default="4,8,16", help="train repetitions (cross)")
    p.add_argument("--predistort", action="store_true")
    p.add_argument("--steps", type=int, default=512, help="integration steps per pulse")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="also write a fitted-summary JSON here")
    p.set_defaults(func=cmd_characterize_distortion)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "intervals", None):
        args.intervals = [_interval(iv) for iv in args.intervals]
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"pulseforge: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"pulseforge: numeric failure: {exc}", file=sys.stderr)
        return 3
    except PulseforgeError as exc:  # base class fallback
        print(f"pulseforge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
