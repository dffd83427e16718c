"""Fourier-coefficient synthesis for spectrally suppressed envelopes.

The envelope ansatz is Omega_I(t) = A * sum_n c_n * (1 - cos(2*pi*n*t/t_p))
on [0, t_p].  The coefficients minimize the weighted spectral energy

    E(c) = sum_j w_j * integral_{f_l,j}^{f_h,j} |Omega_I_hat(f)|^2 df

subject to the rotation-angle constraint sum_n c_n * t_p = theta.  The
stationarity conditions form a bordered linear system

    [[A + A^T, -b], [b^T, 0]] [c, mu] = [0, theta/t_p]

where A is the Hermitian Gram matrix of the basis transforms over the
suppression bands and b is the all-ones constraint vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .envelopes import DRAG_L, DRAG_P
from .errors import ConfigurationError, DegenerateProblemError

DEFAULT_UPPER_CUTOFF = 1.0e9  # Hz; cap for "suppress everything above f_c" bands


@dataclass(frozen=True)
class SuppressionProblem:
    """Inputs of the constrained band-energy minimization.

    intervals is a sequence of (f_l, f_h, weight) triples in Hz (baseband).
    """

    n_terms: int
    intervals: tuple
    theta: float
    t_p: float

    def __post_init__(self):
        if self.n_terms < 1:
            raise ConfigurationError("n_terms must be >= 1")
        if not self.t_p > 0:
            raise ConfigurationError("t_p must be positive")
        clean = []
        for iv in self.intervals:
            f_l, f_h, w = (float(x) for x in iv)
            if f_l < 0:
                raise ConfigurationError(f"interval start must be >= 0, got {f_l}")
            if not f_l < f_h:
                raise ConfigurationError(f"interval ({f_l}, {f_h}) must satisfy f_l < f_h")
            if not w > 0:
                raise ConfigurationError(f"interval weight must be positive, got {w}")
            clean.append((f_l, f_h, w))
        if not clean:
            raise ConfigurationError("at least one suppression interval is required")
        object.__setattr__(self, "intervals", tuple(clean))


@dataclass(frozen=True)
class FastSolution:
    """Solved coefficients with optimality diagnostics.

    kkt_residual is the stationarity defect |M c - mu b| relative to
    |M| * |c|, with M = A + A^T; condition is the condition number of the
    bordered matrix.
    """

    coeffs: tuple
    lagrange_multiplier: float
    objective: float
    kkt_residual: float
    condition: float


@dataclass(frozen=True)
class HeuristicParams:
    """Suppression-band layout derived from the anharmonicity."""

    f_l_ef: float
    f_h_ef: float
    f_c: float
    f_h_2: float
    w_ef: float
    n_terms: int
    variant: str

    def __post_init__(self):
        if not self.f_l_ef < self.f_h_ef < self.f_c < self.f_h_2:
            raise ConfigurationError(
                "heuristic frequencies must satisfy f_l_ef < f_h_ef < f_c < f_h_2"
            )


def _sinc(x):
    # unnormalized sinc: sin(x)/x with sinc(0) = 1
    return np.sinc(x / np.pi)


def _basis_ft_scaled(n: int, x):
    """Dimensionless transform G_n(x) = g_n_hat(f) / t_p at x = f * t_p."""
    a = np.pi * x
    b = np.pi * (n - x)
    c = np.pi * (n + x)
    return (
        np.exp(-1j * a) * _sinc(a)
        - 0.5 * np.exp(1j * b) * _sinc(b)
        - 0.5 * np.exp(-1j * c) * _sinc(c)
    )


def basis_ft(n: int, t_p: float, f):
    """Fourier transform of 1 - cos(2*pi*n*t/t_p) over [0, t_p], in s.

    The closed form is a sum of three complex sinc terms; the removable
    singularities at f = 0 and f = +-n/t_p evaluate to t_p and -t_p/2.
    """
    if n < 1 or int(n) != n:
        raise ConfigurationError(f"basis index must be a positive integer, got {n}")
    if not t_p > 0:
        raise ConfigurationError("t_p must be positive")
    x = np.asarray(f, dtype=float) * t_p
    out = t_p * _basis_ft_scaled(int(n), x)
    if np.ndim(f) == 0:
        return complex(out)
    return out


def build_gram(problem: SuppressionProblem) -> np.ndarray:
    """Hermitian matrix A_nm = sum_j w_j * integral g_n_hat(f) conj(g_m_hat(f)) df.

    Each band is integrated adaptively (Gauss-Kronrod) in the dimensionless
    variable x = f * t_p, where the integrand is O(1) and smooth.
    """
    n_terms, t_p = problem.n_terms, problem.t_p
    gram = np.zeros((n_terms, n_terms), dtype=complex)
    for row in range(1, n_terms + 1):
        for col in range(row, n_terms + 1):
            def integrand(x, row=row, col=col):
                return _basis_ft_scaled(row, x) * np.conj(_basis_ft_scaled(col, x))

            total = 0.0 + 0.0j
            for f_l, f_h, w in problem.intervals:
                val, _ = quad(
                    integrand, f_l * t_p, f_h * t_p,
                    epsabs=1e-13, epsrel=1e-12, limit=200, complex_func=True,
                )
                total += w * val
            if not np.isfinite(total):
                raise DegenerateProblemError(
                    f"band-energy integral diverged for entry ({row}, {col})"
                )
            gram[row - 1, col - 1] = t_p * total
            gram[col - 1, row - 1] = t_p * np.conj(total)
    return gram


def solve_fast(problem: SuppressionProblem) -> FastSolution:
    """Minimize the weighted band energy at fixed rotation angle.

    Solves the bordered stationarity system with a direct partially pivoted
    factorization and reports the objective c^T Re(A) c, the stationarity
    residual, and the condition number of the bordered matrix.
    """
    n = problem.n_terms
    gram = build_gram(problem)
    m = 2.0 * gram.real  # A + A^T of a Hermitian matrix
    target = problem.theta / problem.t_p

    m_scale = np.linalg.norm(m, 2)
    if m_scale == 0.0:
        # all suppression bands carry no energy; any feasible point is optimal
        coeffs = np.full(n, target / n)
        return FastSolution(tuple(coeffs), 0.0, 0.0, 0.0, np.nan)

    # equilibrate: M carries units of s^3 (|g_hat|^2 df), the border rows are
    # O(1), so solve for mu' = mu / |M| to keep the condition number meaningful
    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = m / m_scale
    bordered[:n, n] = -1.0
    bordered[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = target

    condition = float(np.linalg.cond(bordered))
    if not np.isfinite(condition):
        raise DegenerateProblemError(
            f"bordered KKT matrix is singular (condition {condition:.3e})"
        )
    try:
        sol = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateProblemError(
            f"bordered KKT matrix is singular (condition {condition:.3e})"
        ) from exc
    if not np.all(np.isfinite(sol)):
        raise DegenerateProblemError(
            f"non-finite KKT solution (condition {condition:.3e})"
        )
    coeffs, mu = sol[:n], float(sol[n]) * m_scale
    if target != 0.0 and np.sum(coeffs) != 0.0:
        # make the angle constraint exact to rounding
        coeffs = coeffs * (target / np.sum(coeffs))

    objective = float(coeffs @ gram.real @ coeffs)
    defect = np.linalg.norm(m @ coeffs - mu)
    residual = float(defect / (m_scale * np.linalg.norm(coeffs) + 1e-300))
    return FastSolution(tuple(coeffs), mu, objective, residual, condition)


def heuristic_hyperparams(
    alpha: float, variant: str, f_h_2: float = DEFAULT_UPPER_CUTOFF
) -> HeuristicParams:
    """Suppression bands placed from the anharmonicity alpha (rad/s).

    The ef band covers [0.95, 1.05] * |alpha|/(2*pi) and the wideband
    interval starts at f_c = 2 * |alpha|/(2*pi).  The leakage-tuned variant
    uses weight ratio 5 and four terms; the phase-tuned variant suppresses
    the ef band harder (ratio 100) and adds a fifth term.
    """
    if alpha == 0:
        raise ConfigurationError("alpha must be nonzero")
    if variant not in (DRAG_P, DRAG_L):
        raise ConfigurationError(f"variant must be drag_p or drag_l, got {variant!r}")
    f_alpha = abs(alpha) / (2 * np.pi)
    w_ef = 100.0 if variant == DRAG_P else 5.0
    n_terms = 5 if variant == DRAG_P else 4
    return HeuristicParams(
        f_l_ef=0.95 * f_alpha,
        f_h_ef=1.05 * f_alpha,
        f_c=2.0 * f_alpha,
        f_h_2=f_h_2,
        w_ef=w_ef,
        n_terms=n_terms,
        variant=variant,
    )


def heuristic_problem(
    alpha: float,
    variant: str,
    theta: float,
    t_p: float,
    f_h_2: float = DEFAULT_UPPER_CUTOFF,
) -> SuppressionProblem:
    """SuppressionProblem with the two heuristic bands for the given variant."""
    p = heuristic_hyperparams(alpha, variant, f_h_2)
    intervals = ((p.f_l_ef, p.f_h_ef, p.w_ef), (p.f_c, p.f_h_2, 1.0))
    return SuppressionProblem(p.n_terms, intervals, theta, t_p)


def slepian_problem(
    f_c: float,
    theta: float,
    t_p: float,
    n_terms: int,
    f_high: float = DEFAULT_UPPER_CUTOFF,
) -> SuppressionProblem:
    """Minimum-energy layout: a single unit-weight band above the cutoff f_c."""
    if not f_c > 0:
        raise ConfigurationError("f_c must be positive")
    return SuppressionProblem(n_terms, ((f_c, f_high, 1.0),), theta, t_p)


def critical_n(theta: float, t_p: float, problem: SuppressionProblem, n_max: int = 10) -> int:
    """Largest term count whose solved top coefficient stays below theta/t_p.

    Scans n = 2, 3, ... on the supplied suppression layout and stops at the
    first n whose |c_n| reaches theta/t_p; a single term always qualifies.
    """
    bound = abs(theta) / t_p
    best = 1
    for n in range(2, n_max + 1):
        try:
            sol = solve_fast(replace(problem, n_terms=n, theta=theta, t_p=t_p))
        except DegenerateProblemError:
            break
        if abs(sol.coeffs[-1]) < bound:
            best = n
        else:
            break
    return best
