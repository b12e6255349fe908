"""Cubically-constrained model minimizer for diagonal curvature.

Solves  min_s  g^T s + 1/2 s^T Diag(b) s   s.t.  ||s||_2^3 <= xi
via a safeguarded Newton iteration on the dual variable nu of the
constraint, with closed-form shifted solves (the curvature is diagonal)
and an explicit negative-curvature branch for the hard case.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import AdaCubicConfig


class ShiftNotPositiveDefiniteError(ValueError):
    """The requested diagonal shift does not make every entry positive."""


class SolverStallError(RuntimeError):
    """Newton and bisection both failed; carries the best iterate found."""

    def __init__(self, message: str, best: "SubproblemSolution"):
        super().__init__(message)
        self.best = best


class SubproblemStatus(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    HARD_CASE = "HardCase"


@dataclass(frozen=True)
class SubproblemSolution:
    s: np.ndarray
    nu: float
    status: SubproblemStatus
    newton_iters: int
    newton_iters_to_band: int
    model_decrease: float


@dataclass(frozen=True)
class KktResidual:
    stationarity: float
    min_shifted_curvature: float
    slackness: float


def solve_shifted(b: np.ndarray, g: np.ndarray, nu: float, r: float) -> np.ndarray:
    """s = -(Diag(b) + (nu r / 2) I)^{-1} g, coordinate-wise."""
    shift = b + 0.5 * nu * r
    if np.any(shift <= 0.0):
        raise ShiftNotPositiveDefiniteError(
            f"shifted curvature not positive definite: min entry {shift.min():g}")
    return -g / shift


def phi(b: np.ndarray, g: np.ndarray, nu: float, r: float, xi: float) -> float:
    """Secular residual 1/||s(nu, r)|| - 1/xi^(1/3); zero iff ||s|| hits the radius."""
    s = solve_shifted(b, g, nu, r)
    ns = float(np.linalg.norm(s))
    if ns == 0.0:
        raise ZeroDivisionError("zero step: phi undefined (g = 0); handle as interior/hard case")
    return 1.0 / ns - 1.0 / xi ** (1.0 / 3.0)


def dphi_dnu(b: np.ndarray, g: np.ndarray, nu: float, r: float) -> float:
    """d(phi)/d(nu) = (r/2) * sum_i s_i^2 / (b_i + nu r/2) / ||s||^3 > 0."""
    shift = b + 0.5 * nu * r
    if np.any(shift <= 0.0):
        raise ShiftNotPositiveDefiniteError(
            f"shifted curvature not positive definite: min entry {shift.min():g}")
    s = -g / shift
    ns = float(np.linalg.norm(s))
    if ns == 0.0:
        raise ZeroDivisionError("zero step: dphi undefined (g = 0)")
    return float(0.5 * r * np.sum(s * s / shift) / ns ** 3)


def hard_case_step(b: np.ndarray, g: np.ndarray, s_reg: np.ndarray,
                   xi: float) -> tuple[np.ndarray, float]:
    """Extend an interior regularized solve to the boundary along e_j, j = argmin b.

    For diagonal curvature the most-negative eigenvector is a coordinate
    axis.  Of the two roots of ||s_reg + alpha e_j|| = xi^(1/3), the one
    with the smaller quadratic model value wins; ties go to alpha > 0.
    """
    r = xi ** (1.0 / 3.0)
    j = int(np.argmin(b))  # smallest index on ties, for determinism
    rest = float(s_reg @ s_reg - s_reg[j] ** 2)
    disc = r * r - rest
    if disc < 0.0:
        raise AssertionError("hard case invoked with ||s_reg|| >= radius")
    root = np.sqrt(disc)
    alphas = (-s_reg[j] + root, -s_reg[j] - root)

    def quad(alpha: float) -> float:
        s = s_reg.copy()
        s[j] += alpha
        # both candidates share ||s|| = r, so the cubic term cancels
        return float(g @ s + 0.5 * s @ (b * s))

    alpha = max(alphas, key=lambda a: (-quad(a), a))
    s = s_reg.copy()
    s[j] += alpha
    return s, float(alpha)


def _model_decrease(b, g, s, nu) -> float:
    ns = float(np.linalg.norm(s))
    return float(-(g @ s + 0.5 * s @ (b * s) + nu / 6.0 * ns ** 3))


def _nu_init(lam: float, r: float) -> float:
    # lambda_d^+ barely below lambda_d keeps the initial shift strictly PD
    margin = max(1e-8, 1e-8 * abs(lam))
    return -2.0 * (lam - margin) / r


def root_finder(b: np.ndarray, g: np.ndarray, xi: float,
                cfg: AdaCubicConfig) -> SubproblemSolution:
    """Full model-minimizer search: interior / boundary / hard-case branches.

    On the boundary the dual variable is found by Newton on the secular
    equation, safeguarded by a bracket; termination requires the relative
    radius band ``kappa_easy`` and additionally drives the stationarity
    residual below ``kkt_tol * (1 + ||g||)`` (a few extra quadratic-phase
    iterations) so emitted steps satisfy the KKT conditions tightly.
    """
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    if xi < cfg.eps_m:
        raise ValueError(f"xi={xi:g} below the floor eps_m={cfg.eps_m:g}")
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(g))):
        raise ValueError("b and g must be finite")

    r = xi ** (1.0 / 3.0)
    lam = float(b.min())
    gnorm = float(np.linalg.norm(g))

    if gnorm == 0.0:
        if lam >= 0.0:
            zero = np.zeros_like(b)
            return SubproblemSolution(zero, 0.0, SubproblemStatus.INTERIOR, 0, 0, 0.0)
        nu = _nu_init(lam, r)
        s, _ = hard_case_step(b, g, np.zeros_like(b), xi)
        return SubproblemSolution(s, nu, SubproblemStatus.HARD_CASE, 0, 0,
                                  _model_decrease(b, g, s, nu))

    nu = 0.0 if lam > 0.0 else _nu_init(lam, r)
    s = solve_shifted(b, g, nu, r)
    ns = float(np.linalg.norm(s))

    if ns ** 3 <= xi:
        on_boundary = abs(ns ** 3 - xi) <= 1e-12 * max(1.0, xi)
        if on_boundary:
            return SubproblemSolution(s, nu, SubproblemStatus.BOUNDARY, 0, 0,
                                      _model_decrease(b, g, s, nu))
        if lam >= 0.0:
            return SubproblemSolution(s, 0.0, SubproblemStatus.INTERIOR, 0, 0,
                                      _model_decrease(b, g, s, 0.0))
        s, _ = hard_case_step(b, g, s, xi)
        return SubproblemSolution(s, nu, SubproblemStatus.HARD_CASE, 0, 0,
                                  _model_decrease(b, g, s, nu))

    # ||s||^3 > xi: the constraint is active and phi(nu, r) < 0 here
    tol_abs = cfg.kkt_tol * (1.0 + gnorm)
    nu_lo, nu_hi = nu, np.inf
    iters = 0
    iters_to_band = -1

    def converged(ns_cur: float, nu_cur: float, s_cur: np.ndarray) -> bool:
        band = abs(ns_cur - r) <= cfg.kappa_easy * r
        resid = 0.5 * nu_cur * abs(ns_cur - r) * float(np.max(np.abs(s_cur)))
        return band and resid <= tol_abs

    while iters < cfg.max_newton_iters:
        if iters_to_band < 0 and abs(ns - r) <= cfg.kappa_easy * r:
            iters_to_band = iters
        if converged(ns, nu, s):
            return SubproblemSolution(s, nu, SubproblemStatus.BOUNDARY, iters,
                                      max(iters_to_band, 0),
                                      _model_decrease(b, g, s, nu))
        phi_val = 1.0 / ns - 1.0 / r
        if phi_val < 0.0:
            nu_lo = max(nu_lo, nu)
        else:
            nu_hi = min(nu_hi, nu)
        proposal = nu - phi_val / dphi_dnu(b, g, nu, r)
        if not (nu_lo < proposal < nu_hi):
            proposal = 0.5 * (nu_lo + nu_hi) if np.isfinite(nu_hi) else 2.0 * max(nu, 1.0)
        nu = proposal
        s = solve_shifted(b, g, nu, r)
        ns = float(np.linalg.norm(s))
        iters += 1

    # bisection fallback: establish a sign change, then halve
    hi = nu_hi if np.isfinite(nu_hi) else max(nu_lo, 1.0)
    grow = 0
    while not np.isfinite(nu_hi):
        hi *= 2.0
        if phi(b, g, hi, r, xi) > 0.0:
            nu_hi = hi
        grow += 1
        if grow > 200:
            break
    lo = nu_lo
    for _ in range(10 * cfg.max_newton_iters):
        if not np.isfinite(nu_hi):
            break
        nu = 0.5 * (lo + nu_hi)
        s = solve_shifted(b, g, nu, r)
        ns = float(np.linalg.norm(s))
        iters += 1
        if converged(ns, nu, s):
            return SubproblemSolution(s, nu, SubproblemStatus.BOUNDARY, iters,
                                      max(iters_to_band, 0),
                                      _model_decrease(b, g, s, nu))
        if 1.0 / ns - 1.0 / r < 0.0:
            lo = nu
        else:
            nu_hi = nu

    best = SubproblemSolution(s, nu, SubproblemStatus.BOUNDARY, iters,
                              max(iters_to_band, 0), _model_decrease(b, g, s, nu))
    raise SolverStallError(
        f"dual Newton failed to converge after {iters} iterations", best)


def kkt_residual(b: np.ndarray, g: np.ndarray, sol: SubproblemSolution,
                 xi: float) -> KktResidual:
    """First-order optimality diagnostics for a subproblem solution."""
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    s = sol.s
    ns = float(np.linalg.norm(s))
    stationarity = float(np.max(np.abs(b * s + 0.5 * sol.nu * ns * s + g)))
    min_shifted = float(b.min() + 0.5 * sol.nu * ns)
    slackness = float(sol.nu * (ns ** 3 - xi))
    return KktResidual(stationarity, min_shifted, slackness)
