"""Optimal combination weights for weighted TTA.

Minimising ``w^T Gamma w`` subject to ``sum(w) = 1`` has the closed form
``w = Gamma^{-1} 1 / (1^T Gamma^{-1} 1)``.  That solution may put negative
weight on some strategies, so :func:`solve_projected` additionally enforces
``w >= 0`` with an active-set loop over the support.

Residual co-moment matrices of TTA are typically near-singular (all columns
share the same model), so both solvers accept a relative ridge.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import GammaMatrix, WeightVector, uniform_weights, weighted_risk
from .errors import InvalidInput, NonConvergence, SingularGamma

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class SolverOptions:
    ridge_lambda: float = 1e-8
    conditioning_threshold: float = 1e12
    projection: bool = True

    def __post_init__(self):
        if not (self.ridge_lambda >= 0 and math.isfinite(self.ridge_lambda)):
            raise InvalidInput("ridge_lambda must be a finite nonnegative number")
        if not self.conditioning_threshold > 1:
            raise InvalidInput("conditioning_threshold must exceed 1")


@dataclass(frozen=True)
class SolverReport:
    weights: WeightVector
    achieved_risk: float
    condition_estimate: float
    lagrange_lambda: float
    iterations: int = 0
    ill_conditioned: bool = False

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.weights.tolist(),
            "provenance": self.weights.provenance,
            "negative_weights_present": self.weights.negative_weights_present,
            "achieved_risk": self.achieved_risk,
            "condition_estimate": self.condition_estimate,
            "ill_conditioned": self.ill_conditioned,
            "lagrange_lambda": self.lagrange_lambda,
            "iterations": self.iterations,
        }


def condition_diagnostics(gamma: GammaMatrix) -> float:
    """Spectral condition number ``lambda_max / lambda_min`` of a PSD matrix.

    Eigenvalues at or below ``m * eps * lambda_max`` are treated as zero, in
    which case ``math.inf`` is returned (also for the zero matrix).
    """
    g = gamma.entries if isinstance(gamma, GammaMatrix) else np.asarray(gamma, dtype=float)
    eig = np.linalg.eigvalsh(g)
    hi, lo = float(eig[-1]), float(eig[0])
    if hi <= 0 or lo <= g.shape[0] * np.finfo(float).eps * hi:
        return math.inf
    return hi / lo


def _sum_to_one_direction(g: np.ndarray) -> np.ndarray:
    """Solve ``g x = 1`` by LU with partial pivoting, refusing tiny pivots."""
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    if scale == 0.0:
        raise SingularGamma("gamma is the zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(g, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < PIVOT_TOL * scale:
        raise SingularGamma(
            f"smallest pivot {np.min(pivots):.3e} is below {PIVOT_TOL:g} x scale {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), np.ones(g.shape[0]), check_finite=False)


def _closed_form(g: np.ndarray) -> tuple[np.ndarray, float]:
    x = _sum_to_one_direction(g)
    total = float(x.sum())
    if total == 0.0 or not math.isfinite(total):
        raise SingularGamma("1^T Gamma^{-1} 1 vanishes; weights are undefined")
    return x / total, 1.0 / total


def _options(opts: SolverOptions | None) -> SolverOptions:
    return SolverOptions() if opts is None else opts


def solve_closed_form(gamma: GammaMatrix, opts: SolverOptions | None = None) -> SolverReport:
    """Unconstrained-sign optimum ``Gamma^{-1} 1 / (1^T Gamma^{-1} 1)``.

    The Lagrange multiplier ``1 / (1^T Gamma^{-1} 1)`` equals the achieved
    risk and every coordinate of ``Gamma w``.
    """
    opts = _options(opts)
    reg = gamma.regularized(opts.ridge_lambda)
    w, lam = _closed_form(reg.entries)
    weights = WeightVector(w, "closed_form_raw")
    cond = condition_diagnostics(reg)
    return SolverReport(
        weights=weights,
        achieved_risk=weighted_risk(reg, weights),
        condition_estimate=cond,
        lagrange_lambda=lam,
        iterations=0,
        ill_conditioned=cond > opts.conditioning_threshold,
    )


def _refine_active_set(g, w, free, tol, max_iter):
    """Primal active-set iterations for min w^T g w on the simplex.

    Starts from a feasible ``w`` whose zero coordinates are the fixed set.
    Returns the optimum, its free set, the multiplier and the iteration count.
    """
    m = g.shape[0]
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(free)
        target = np.zeros(m)
        target[idx], lam = _closed_form(g[np.ix_(idx, idx)])
        step = target - w
        if np.max(np.abs(step)) <= 1e-15:
            grad = g @ target
            slack = grad - lam
            slack[free] = 0.0
            j = int(np.argmin(slack))
            if slack[j] >= -tol:
                return target, free, lam, it
            # releasing the most violated bound strictly decreases the objective
            free = free.copy()
            free[j] = True
            w = target
            continue
        shrinking = (step < 0) & free
        alpha, block = 1.0, -1
        if np.any(shrinking):
            ratios = np.full(m, np.inf)
            ratios[shrinking] = w[shrinking] / -step[shrinking]
            block = int(np.argmin(ratios))
            if ratios[block] < 1.0:
                alpha = float(ratios[block])
        w = w + alpha * step
        if alpha < 1.0:
            free = free.copy()
            free[block] = False
            w[block] = 0.0
            if not free.any():
                raise NonConvergence("support shrank to empty")
        else:
            w = target
    raise NonConvergence(f"active set did not settle within {max_iter} iterations")


def solve_projected(gamma: GammaMatrix, opts: SolverOptions | None = None) -> SolverReport:
    """Minimise ``w^T (Gamma + ridge) w`` over the probability simplex.

    Phase one starts from the closed form and repeatedly fixes the most
    negative coordinate at zero, re-solving on the remaining support, until
    every free weight is nonnegative.  Phase two checks the KKT multipliers
    of the fixed coordinates and runs primal active-set steps until none is
    violated, so the result is the exact simplex minimiser.
    """
    opts = _options(opts)
    reg = gamma.regularized(opts.ridge_lambda)
    g = reg.entries
    m = g.shape[0]
    cond = condition_diagnostics(reg)

    w, lam = _closed_form(g)
    free = np.ones(m, dtype=bool)
    iterations = 0
    if np.any(w < 0):
        while True:
            iterations += 1
            if np.all(w[free] >= 0):
                break
            worst = int(np.argmin(np.where(free, w, np.inf)))
            free[worst] = False
            if not free.any():
                raise NonConvergence("support shrank to empty")
            idx = np.flatnonzero(free)
            w = np.zeros(m)
            w[idx], lam = _closed_form(g[np.ix_(idx, idx)])
        tol = 1e-12 * max(reg.mean_diagonal, np.finfo(float).tiny)
        w, free, lam, extra = _refine_active_set(g, w, free, tol, max_iter=10 * m + 50)
        iterations += extra
        w = np.clip(w, 0.0, None)
        w = w / w.sum()

    weights = WeightVector(w, "closed_form_projected")
    return SolverReport(
        weights=weights,
        achieved_risk=weighted_risk(reg, weights),
        condition_estimate=cond,
        lagrange_lambda=lam,
        iterations=iterations,
        ill_conditioned=cond > opts.conditioning_threshold,
    )


def solve(gamma: GammaMatrix, opts: SolverOptions | None = None) -> SolverReport:
    """Dispatch on ``opts.projection``."""
    opts = _options(opts)
    return solve_projected(gamma, opts) if opts.projection else solve_closed_form(gamma, opts)


def uniform_risk(gamma: GammaMatrix) -> float:
    """Risk of plain averaging, the baseline every solver should beat."""
    return weighted_risk(gamma, uniform_weights(gamma.size))
