"""Shared fixtures: the reference device model, cached closed-loop
calibrations (several suites score the same tuned pulses), and the
acceptance-summary report printed after the run."""

import numpy as np
import pytest

from pulseforge.calibration import CalibrationConfig, full_calibration
from pulseforge.simulator import SequenceEngine, TransmonModel, gate_error_cardinal

ACCEPTANCE_RESULTS = {}


def record_acceptance(number: int, label: str, ok: bool, detail: str) -> None:
    """Register one acceptance criterion outcome for the final summary."""
    ACCEPTANCE_RESULTS[number] = (label, bool(ok), detail)


@pytest.fixture(scope="session")
def paper_model():
    """Reference transmon: alpha/2pi = -212 MHz, T1 = 35 us, Tphi = 40 us."""
    return TransmonModel()


_CAL_CACHE = {}


@pytest.fixture(scope="session")
def calibrate_cached():
    """Memoized full_calibration: (spec, variant, model, seed) -> report."""

    def run(spec, variant, model=None, seed=3):
        model = model if model is not None else TransmonModel()
        key = (spec, variant, model, seed)
        if key not in _CAL_CACHE:
            config = CalibrationConfig(variant=variant, seed=seed)
            _CAL_CACHE[key] = full_calibration(model, spec, config)
        return _CAL_CACHE[key]

    return run


_SCORE_CACHE = {}


@pytest.fixture(scope="session")
def score_cached():
    """Memoized cardinal-state (error, leakage) of a calibration report."""

    def run(report, model=None):
        model = model if model is not None else TransmonModel()
        pulse = report.pulse
        key = (pulse.spec, pulse.drag, pulse.calib, model)
        if key not in _SCORE_CACHE:
            _SCORE_CACHE[key] = gate_error_cardinal(
                model, pulse.calib, pulse.drag, pulse.spec
            )
        return _SCORE_CACHE[key]

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        label, ok, detail = ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:2d}. {label}: {detail}")
