"""Monte Carlo checks of the TTA risk results on synthetic correlated errors.

Errors are equicorrelated Gaussians: for every sample,
``eps_i = sigma * (sqrt(rho) * z + sqrt(1 - rho) * u_i)`` with ``z`` and the
``u_i`` independent standard normals, so every pair of strategies has
correlation ``rho`` and every strategy variance ``sigma**2``.  Labels are 0
and predictions are ``-eps`` so the residuals are exactly ``eps``.

Trial ``t`` of a run with seed ``s`` draws from its own substream
``SeedSequence(s, spawn_key=(t,))``.  Trials are therefore independent of
execution order, and a sweep over ``rho`` reuses the same underlying normals
at every grid point.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .core import PredictionSet, direct_risk, estimate_gamma, per_augmentation_error, uniform_weights
from .errors import InvalidInput
from .pruning import prune_check

FIG1_TARGETS = {0.33: 0.38, 0.99: 0.49}
FIG1_TOLERANCE = 0.15
FIG1_SEARCH_M = (2, 5, 10, 20)


@dataclass(frozen=True)
class SimulationConfig:
    m: int = 10
    rho: float = 0.0
    sigma: float = 1.0
    n_samples: int = 100
    n_trials: int = 100
    seed: int = 0
    rho_grid: tuple[float, ...] | None = None
    prune_index: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise InvalidInput("m must be at least 1")
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidInput(f"rho must lie in [0, 1], got {self.rho}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InvalidInput("sigma must be finite and nonnegative")
        if self.n_samples < 2:
            raise InvalidInput("n_samples must be at least 2")
        if self.n_trials < 1:
            raise InvalidInput("n_trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")
        if self.rho_grid is not None:
            grid = tuple(float(r) for r in self.rho_grid)
            if any(not 0.0 <= r <= 1.0 for r in grid):
                raise InvalidInput("rho_grid values must lie in [0, 1]")
            object.__setattr__(self, "rho_grid", grid)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rho_grid"] = None if self.rho_grid is None else list(self.rho_grid)
        return d


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))


def _errors(config: SimulationConfig, trial_index: int, rho: float, n: int) -> np.ndarray:
    rng = trial_rng(config.seed, trial_index)
    z = rng.standard_normal((n, 1))
    u = rng.standard_normal((n, config.m))
    return config.sigma * (math.sqrt(rho) * z + math.sqrt(1.0 - rho) * u)


def generate_correlated_errors(config: SimulationConfig, trial_index: int = 0) -> PredictionSet:
    """One synthetic calibration set whose residual columns have correlation ``config.rho``."""
    eps = _errors(config, trial_index, config.rho, config.n_samples)
    return PredictionSet(np.zeros(config.n_samples), -eps)


@dataclass(frozen=True)
class TrialOutcome:
    rho: float
    probability_holds: float
    trials: int
    per_trial_flags: tuple[bool, ...] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "probability_holds": self.probability_holds,
            "trials": self.trials,
            "per_trial_flags": [int(f) for f in self.per_trial_flags],
        }


def fig1_experiment(config: SimulationConfig) -> list[TrialOutcome]:
    """Frequency with which dropping one strategy does not hurt, per correlation.

    For each ``rho`` in ``config.rho_grid`` and each trial: draw errors,
    estimate Gamma and record whether strategy ``config.prune_index`` is
    removable.
    """
    if not config.rho_grid:
        raise InvalidInput("rho_grid must be non-empty")
    if config.m < 2:
        raise InvalidInput("the removal experiment needs m >= 2")
    outcomes = []
    for rho in config.rho_grid:
        cfg = replace(config, rho=rho)
        flags = tuple(
            prune_check(estimate_gamma(generate_correlated_errors(cfg, t)), cfg.prune_index).removable
            for t in range(cfg.n_trials)
        )
        outcomes.append(TrialOutcome(rho, sum(flags) / len(flags), len(flags), flags))
    return outcomes


def isotonic_residual(values: Sequence[float]) -> float:
    """Largest absolute gap between a curve and its nondecreasing least-squares fit."""
    y = np.asarray(values, dtype=float)
    if y.size == 0:
        return 0.0
    fit = isotonic_regression(y, increasing=True).x
    return float(np.max(np.abs(y - fit)))


@dataclass(frozen=True)
class Fig1Search:
    targets: dict
    tolerance: float
    attempts: list  # (m, {rho: probability}) in the order tried
    selected_m: int | None

    @property
    def found(self) -> bool:
        return self.selected_m is not None


def fig1_config_search(
    config: SimulationConfig,
    targets: dict | None = None,
    tolerance: float = FIG1_TOLERANCE,
    m_values: Sequence[int] = FIG1_SEARCH_M,
) -> Fig1Search:
    """Try ``config.m`` first, then each of ``m_values``; stop at the first
    strategy count whose removal frequencies all land within ``tolerance`` of
    ``targets`` (``rho -> probability``)."""
    targets = dict(FIG1_TARGETS if targets is None else targets)
    order = [config.m] + [m for m in m_values if m != config.m]
    attempts = []
    for m in order:
        cfg = replace(config, m=m, rho_grid=tuple(targets))
        probs = {o.rho: o.probability_holds for o in fig1_experiment(cfg)}
        attempts.append((m, probs))
        if all(abs(probs[r] - p) <= tolerance for r, p in targets.items()):
            return Fig1Search(targets, tolerance, attempts, m)
    return Fig1Search(targets, tolerance, attempts, None)


@dataclass(frozen=True)
class Theorem1Report:
    trials: int
    violations: int
    max_excess: float
    mean_ratio: float
    tta_risks: tuple[float, ...] = field(repr=False)
    average_risks: tuple[float, ...] = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tta_risks"] = list(self.tta_risks)
        d["average_risks"] = list(self.average_risks)
        d["passed"] = self.passed
        return d


def jensen_gap(data: PredictionSet) -> tuple[float, float]:
    """(uniform TTA risk, mean single-strategy risk) of one prediction set."""
    tta = direct_risk(data, uniform_weights(data.n_augmentations))
    return tta, float(np.mean(per_augmentation_error(data)))


def verify_theorem1(config: SimulationConfig) -> Theorem1Report:
    """Averaging never does worse than the mean single-strategy risk.

    This is Jensen's inequality per sample, so it must hold in every trial;
    the tolerance is ``1e-12`` relative to the risk scale.
    """
    tta, avg = [], []
    for t in range(config.n_trials):
        a, b = jensen_gap(generate_correlated_errors(config, t))
        tta.append(a)
        avg.append(b)
    tta_a, avg_a = np.array(tta), np.array(avg)
    excess = tta_a - avg_a
    violations = int(np.sum(excess > 1e-12 * np.maximum(1.0, avg_a)))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(avg_a > 0, tta_a / np.where(avg_a > 0, avg_a, 1.0), 1.0)
    return Theorem1Report(
        trials=config.n_trials,
        violations=violations,
        max_excess=float(np.max(excess)),
        mean_ratio=float(np.mean(ratios)),
        tta_risks=tuple(tta),
        average_risks=tuple(avg),
    )


@dataclass(frozen=True)
class Theorem2Report:
    m: int
    total_samples: int
    tta_risk: float
    average_risk: float
    ratio: float
    expected_ratio: float
    standard_error: float

    @property
    def passed(self) -> bool:
        return abs(self.ratio - self.expected_ratio) <= 3.0 * self.standard_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def verify_theorem2(config: SimulationConfig) -> Theorem2Report:
    """With uncorrelated zero-mean errors, averaging divides the risk by ``m``.

    Samples from all trials are pooled.  The ratio's standard error uses the
    delta method on the per-sample pairs ``(tta loss, mean member loss)``.
    """
    if config.rho != 0.0:
        raise InvalidInput("the 1/m law assumes uncorrelated errors; set rho = 0")
    n_tot = 0
    s_a = s_b = s_aa = s_bb = s_ab = 0.0
    for t in range(config.n_trials):
        eps = generate_correlated_errors(config, t).residuals
        a = np.mean(eps, axis=1) ** 2
        b = np.mean(eps * eps, axis=1)
        n_tot += a.size
        s_a += float(a.sum())
        s_b += float(b.sum())
        s_aa += float(a @ a)
        s_bb += float(b @ b)
        s_ab += float(a @ b)
    mean_a, mean_b = s_a / n_tot, s_b / n_tot
    ratio = mean_a / mean_b if mean_b > 0 else 1.0
    # variance of a - ratio * b, which drives the ratio estimator to first order
    var = (s_aa - 2 * ratio * s_ab + ratio**2 * s_bb) / n_tot - (mean_a - ratio * mean_b) ** 2
    var *= n_tot / max(n_tot - 1, 1)
    se = math.sqrt(max(var, 0.0) / n_tot) / mean_b if mean_b > 0 else 0.0
    return Theorem2Report(
        m=config.m,
        total_samples=n_tot,
        tta_risk=mean_a,
        average_risk=mean_b,
        ratio=ratio,
        expected_ratio=1.0 / config.m,
        standard_error=se,
    )


@dataclass(frozen=True)
class ConsistencyReport:
    n_grid: tuple[int, ...]
    expectation: float
    mean_abs_deviation: tuple[float, ...]
    step_decreases: tuple[bool, ...]
    fraction_trials_shrinking: float
    deviations: tuple[tuple[float, ...], ...] = field(repr=False)

    @property
    def passed(self) -> bool:
        return sum(self.step_decreases) * 2 > len(self.step_decreases)

    def to_dict(self) -> dict:
        return {
            "n_grid": list(self.n_grid),
            "expectation": self.expectation,
            "mean_abs_deviation": list(self.mean_abs_deviation),
            "step_decreases": list(self.step_decreases),
            "fraction_trials_shrinking": self.fraction_trials_shrinking,
            "deviations": [list(r) for r in self.deviations],
            "passed": self.passed,
        }


def _shrinks(earlier: float, later: float) -> bool:
    return later < earlier or later == earlier == 0.0


def verify_consistency(
    config: SimulationConfig, n_grid: Sequence[int] = (100, 400, 1600, 6400)
) -> ConsistencyReport:
    """Augmentation-averaged empirical risk converges to ``sigma**2``.

    Each trial draws one sequence of ``max(n_grid)`` samples and evaluates the
    risk on its growing prefixes.  A step counts as shrinking when the
    deviation from ``sigma**2`` at the larger size is below that at the
    smaller one.
    """
    grid = tuple(int(n) for n in n_grid)
    if len(grid) < 2 or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInput("n_grid needs at least two strictly increasing positive sizes")
    expectation = config.sigma**2
    rows = []
    for t in range(config.n_trials):
        eps = _errors(config, t, config.rho, grid[-1])
        sq = np.cumsum(np.sum(eps * eps, axis=1))
        rows.append(tuple(abs(float(sq[n - 1]) / (n * config.m) - expectation) for n in grid))
    dev = np.array(rows)
    mean_dev = dev.mean(axis=0)
    steps = tuple(_shrinks(mean_dev[i], mean_dev[i + 1]) for i in range(len(grid) - 1))
    per_trial = [
        sum(_shrinks(r[i], r[i + 1]) for i in range(len(grid) - 1)) * 2 > len(grid) - 1
        for r in rows
    ]
    return ConsistencyReport(
        n_grid=grid,
        expectation=expectation,
        mean_abs_deviation=tuple(float(x) for x in mean_dev),
        step_decreases=steps,
        fraction_trials_shrinking=sum(per_trial) / len(per_trial),
        deviations=tuple(rows),
    )


@dataclass(frozen=True)
class PruneEquivalenceReport:
    trials: int
    mismatches: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def to_dict(self) -> dict:
        return {"trials": self.trials, "mismatches": self.mismatches, "passed": self.passed}


def verify_prune_equivalence(config: SimulationConfig) -> PruneEquivalenceReport:
    """The removal inequality agrees with comparing the two uniform risks directly."""
    if config.m < 2:
        raise InvalidInput("the removal inequality needs m >= 2")
    mismatches = 0
    checked = 0
    for t in range(config.n_trials):
        g = estimate_gamma(generate_correlated_errors(config, t)).entries
        m = g.shape[0]
        before = g.sum() / m**2
        for k in range(m):
            keep = [i for i in range(m) if i != k]
            after = g[np.ix_(keep, keep)].sum() / (m - 1) ** 2
            mismatches += prune_check(g, k).removable != (after <= before + 1e-12)
            checked += 1
    return PruneEquivalenceReport(checked, mismatches)
