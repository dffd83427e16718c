"""Coefficient systems for envelopes with engineered spectral zeros.

The in-phase envelope Omega_I = A * sum_n beta_2n * g^(2n)(t) multiplies the
spectrum of the base shape g by the even polynomial

    P(f) = sum_{n=0}^{K} beta_2n * (-1)^n * (2*pi*f)^(2n),

so choosing the beta coefficients places P's zeros at the suppressed
frequencies (with multiplicity for repeated entries).  The base shape is a
cosine series g(t) = sum_k d_k * (1 - cos(2*pi*k*t/t_p)) whose d_k make g
and its derivatives through order 2K+1 vanish at both ends, keeping every
derivative term in the envelope smooth at the pulse edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelopes import EnvelopeSpec, hd_series
from .errors import ConfigurationError, DegenerateProblemError

MAX_ORDER = 4


@dataclass(frozen=True)
class HdProblem:
    """Derivative order K and the K suppressed baseband frequencies (Hz).

    A frequency listed m times requests an m-fold zero of P.
    """

    order: int
    suppressed_freqs: tuple
    t_p: float

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ConfigurationError(f"order must lie in [0, {MAX_ORDER}], got {self.order}")
        freqs = tuple(float(f) for f in self.suppressed_freqs)
        if len(freqs) != self.order:
            raise ConfigurationError(
                f"expected {self.order} suppressed frequencies, got {len(freqs)}"
            )
        if any(f <= 0 for f in freqs):
            raise ConfigurationError("suppressed frequencies must be positive")
        if not self.t_p > 0:
            raise ConfigurationError("t_p must be positive")
        object.__setattr__(self, "suppressed_freqs", freqs)


@dataclass(frozen=True)
class HdSolution:
    """beta_even = (1, beta_2, ..., beta_2K); d_coeffs = (d_1, ..., d_{K+1})."""

    beta_even: tuple
    d_coeffs: tuple


def hd_problem(alpha: float, t_p: float, order: int = 1) -> HdProblem:
    """Problem with an ``order``-fold zero at the ef transition |alpha|/(2*pi)."""
    if alpha == 0:
        raise ConfigurationError("alpha must be nonzero")
    f_ef = abs(alpha) / (2 * np.pi)
    return HdProblem(order, (f_ef,) * order, t_p)


def beta_polynomial(beta_even, f):
    """Spectral factor P(f) = sum_n beta_2n * (-1)^n * (2*pi*f)^(2n)."""
    u = (2 * np.pi * np.asarray(f, dtype=float)) ** 2
    out = np.zeros_like(u)
    for n, b in enumerate(beta_even):
        out += b * (-u) ** n
    if np.ndim(f) == 0:
        return float(out)
    return out


def _group_roots(freqs, rel_tol=1e-9):
    """Collect (value, multiplicity) pairs, merging nearly equal frequencies."""
    groups = []
    for f in sorted(freqs):
        if groups and abs(f - groups[-1][0]) <= rel_tol * abs(groups[-1][0]):
            groups[-1][1] += 1
        else:
            groups.append([f, 1])
    return [(f, m) for f, m in groups]


def solve_betas(problem: HdProblem) -> tuple:
    """Solve for beta_even with beta_0 = 1 and P zero at every suppressed frequency.

    Repeated frequencies add derivative conditions (a confluent Vandermonde
    system), producing a multiplicity-m zero instead of a singular system.
    The solve runs on frequencies normalized by the largest one, so the
    returned coefficients are accurate to rounding for small K.
    """
    k = problem.order
    if k == 0:
        return (1.0,)
    u = [(2 * np.pi * f) ** 2 for f in problem.suppressed_freqs]
    u_ref = max(u)
    roots = _group_roots([x / u_ref for x in u])

    # unknowns x_n = beta_2n * u_ref^n for n = 1..K; P(v) = 1 + sum_n (-1)^n x_n v^n
    mat = np.zeros((k, k))
    rhs = np.zeros(k)
    row = 0
    for v, mult in roots:
        for r in range(mult):
            for n in range(1, k + 1):
                if n >= r:
                    fall = 1.0
                    for i in range(r):
                        fall *= n - i
                    mat[row, n - 1] = (-1.0) ** n * fall * v ** (n - r)
            rhs[row] = -1.0 if r == 0 else 0.0
            row += 1

    condition = np.linalg.cond(mat)
    if not np.isfinite(condition) or condition > 1e12:
        raise DegenerateProblemError(
            f"beta system is numerically singular (condition {condition:.3e})"
        )
    x = np.linalg.solve(mat, rhs)
    betas = [1.0]
    for n in range(1, k + 1):
        betas.append(float(x[n - 1] / u_ref**n))
    return tuple(betas)


def solve_basis_coeffs(order: int) -> tuple:
    """Cosine-series coefficients d_k normalized to sum_k d_k = 1.

    The K additional conditions sum_k d_k * k^(2n) = 0 (n = 1..K) zero the
    even endpoint derivatives of g through order 2K, and the odd ones vanish
    by symmetry, so g is flat through order 2K+1 at t = 0 and t = t_p.
    """
    if order < 0:
        raise ConfigurationError("order must be non-negative")
    if order > 8:
        raise ConfigurationError("order above 8 is not supported")
    size = order + 1
    k = np.arange(1, size + 1, dtype=float)
    nodes = (k / size) ** 2
    mat = np.vstack([nodes**n for n in range(size)])
    rhs = np.zeros(size)
    rhs[0] = 1.0
    condition = np.linalg.cond(mat)
    if condition > 1e12:
        raise DegenerateProblemError(
            f"basis system is badly conditioned (condition {condition:.3e})"
        )
    return tuple(float(d) for d in np.linalg.solve(mat, rhs))


def solve_hd(problem: HdProblem) -> HdSolution:
    """Solve both coefficient sets of the higher-derivative construction."""
    return HdSolution(
        beta_even=solve_betas(problem),
        d_coeffs=solve_basis_coeffs(problem.order),
    )


def hd_envelope_spec(solution: HdSolution, amplitude: float, t_p: float) -> EnvelopeSpec:
    """Envelope spec whose IQ spectrum factors as A * P(f) * drag_factor * g_hat(f)."""
    return hd_series(solution.d_coeffs, solution.beta_even, t_p, amplitude)
