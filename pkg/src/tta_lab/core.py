"""Domain types and the residual-moment algebra of test-time augmentation.

A :class:`PredictionSet` holds the scalar outputs of one fixed model under
``m`` augmentation strategies on ``N`` labelled calibration samples.  Every
other quantity in the package (the residual co-moment matrix, weighted
risks, the error/ambiguity split) is a function of it.

All values are immutable after construction: arrays are copied and flagged
read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np
import numpy.typing as npt

from .errors import DimensionMismatch, InvalidInput

Provenance = Literal["uniform", "closed_form_raw", "closed_form_projected"]
PROVENANCES: tuple[str, ...] = ("uniform", "closed_form_raw", "closed_form_projected")

SUM_TOL = 1e-12
PSD_TOL = 1e-9


def _frozen(a: npt.ArrayLike, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidInput(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Labels ``y`` (N,) and per-augmentation predictions (N, m)."""

    labels: np.ndarray
    predictions: np.ndarray
    augmentation_names: tuple[str, ...] = ()

    def __post_init__(self):
        labels = _frozen(self.labels, 1, "labels")
        preds = _frozen(self.predictions, 2, "predictions")
        if labels.shape[0] < 1 or preds.shape[1] < 1:
            raise InvalidInput("a prediction set needs N >= 1 samples and m >= 1 strategies")
        if preds.shape[0] != labels.shape[0]:
            raise DimensionMismatch(
                f"{preds.shape[0]} prediction rows for {labels.shape[0]} labels"
            )
        names = tuple(str(n) for n in self.augmentation_names)
        if not names:
            names = tuple(f"aug{i}" for i in range(preds.shape[1]))
        if len(names) != preds.shape[1]:
            raise DimensionMismatch(
                f"{len(names)} augmentation names for {preds.shape[1]} prediction columns"
            )
        if len(set(names)) != len(names):
            raise InvalidInput("augmentation names must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "predictions", preds)
        object.__setattr__(self, "augmentation_names", names)

    @property
    def n_samples(self) -> int:
        return self.predictions.shape[0]

    @property
    def n_augmentations(self) -> int:
        return self.predictions.shape[1]

    @property
    def residuals(self) -> np.ndarray:
        """``y_n - p_{n,i}`` as an (N, m) array."""
        return self.labels[:, None] - self.predictions

    def __eq__(self, other):
        if not isinstance(other, PredictionSet):
            return NotImplemented
        return (
            self.augmentation_names == other.augmentation_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.predictions, other.predictions)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    """Symmetric PSD matrix of residual co-moments between strategies.

    ``entries[i, j]`` is the mean of ``(y - p_i)(y - p_j)``.  Symmetry is
    enforced exactly by mirroring the upper triangle; inputs that are
    asymmetric beyond rounding, or have an eigenvalue below
    ``-1e-9 * max(1, scale)``, are rejected.
    """

    entries: np.ndarray
    sample_count: int | None = None

    def __post_init__(self):
        g = np.array(self.entries, dtype=np.float64, copy=True)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise InvalidInput(f"gamma must be a non-empty square matrix, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise InvalidInput("gamma contains non-finite values")
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g - g.T)) > 1e-12 * scale:
            raise InvalidInput("gamma is not symmetric")
        g = np.triu(g) + np.triu(g, 1).T
        if np.linalg.eigvalsh(g)[0] < -PSD_TOL * scale:
            raise InvalidInput("gamma is not positive semidefinite")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)
        if self.sample_count is not None and self.sample_count < 1:
            raise InvalidInput("sample_count must be positive")

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def mean_diagonal(self) -> float:
        return float(np.mean(np.diag(self.entries)))

    def submatrix(self, keep: Sequence[int]) -> "GammaMatrix":
        idx = np.asarray(keep, dtype=int)
        return GammaMatrix(self.entries[np.ix_(idx, idx)], self.sample_count)

    def regularized(self, ridge_lambda: float) -> "GammaMatrix":
        """``Gamma + ridge_lambda * mean_diag(Gamma) * I`` (relative ridge)."""
        if ridge_lambda < 0:
            raise InvalidInput("ridge_lambda must be nonnegative")
        if ridge_lambda == 0:
            return self
        shift = ridge_lambda * self.mean_diagonal
        return GammaMatrix(self.entries + shift * np.eye(self.size), self.sample_count)


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Combination weights on the augmentation strategies.

    ``uniform`` and ``closed_form_projected`` weights must lie on the
    probability simplex.  ``closed_form_raw`` weights only need to sum to
    one; negative entries are recorded in ``negative_weights_present``.
    """

    weights: np.ndarray
    provenance: Provenance = "uniform"
    negative_weights_present: bool = field(init=False, default=False)

    def __post_init__(self):
        w = _frozen(self.weights, 1, "weights")
        if w.size < 1:
            raise InvalidInput("weights must be non-empty")
        if self.provenance not in PROVENANCES:
            raise InvalidInput(f"unknown provenance {self.provenance!r}")
        # cancellation in heavily signed raw weights inflates the rounding error of the sum
        if abs(w.sum() - 1.0) > SUM_TOL * max(1.0, float(np.abs(w).sum())):
            raise InvalidInput(f"weights sum to {w.sum()!r}, not 1")
        negative = bool(np.any(w < 0))
        if negative and self.provenance != "closed_form_raw":
            raise InvalidInput(f"{self.provenance} weights must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "negative_weights_present", negative)

    @property
    def size(self) -> int:
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def __len__(self):
        return self.weights.size


WeightsLike = Union[WeightVector, npt.ArrayLike]


def uniform_weights(m: int) -> WeightVector:
    if m < 1:
        raise InvalidInput("m must be at least 1")
    return WeightVector(np.full(m, 1.0 / m), "uniform")


def _weights(w: WeightsLike, m: int) -> np.ndarray:
    arr = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    if arr.ndim != 1 or arr.size != m:
        raise DimensionMismatch(f"expected {m} weights, got shape {arr.shape}")
    return arr


def combine(data: PredictionSet, w: WeightsLike | None = None) -> np.ndarray:
    """TTA output per sample: the weighted (default: plain) mean of the columns."""
    if w is None:
        return data.predictions.mean(axis=1)
    return data.predictions @ _weights(w, data.n_augmentations)


def estimate_gamma(data: PredictionSet) -> GammaMatrix:
    """Plug-in estimate ``(1/N) R^T R`` of the residual co-moment matrix."""
    r = data.residuals
    return GammaMatrix(r.T @ r / data.n_samples, data.n_samples)


def weighted_risk(gamma: GammaMatrix, w: WeightsLike) -> float:
    """Quadratic form ``w^T Gamma w`` over the full double sum."""
    g = gamma.entries if isinstance(gamma, GammaMatrix) else np.asarray(gamma, dtype=float)
    arr = _weights(w, g.shape[0])
    return float(arr @ g @ arr)


def direct_risk(data: PredictionSet, w: WeightsLike) -> float:
    """Mean squared error of the combined prediction, computed sample by sample."""
    err = data.labels - combine(data, w)
    return float(np.mean(err * err))


def per_augmentation_error(data: PredictionSet) -> np.ndarray:
    r = data.residuals
    return np.mean(r * r, axis=0)


@dataclass(frozen=True)
class DecompositionReport:
    per_aug_error: np.ndarray
    per_aug_ambiguity: np.ndarray
    weighted_error: float
    weighted_ambiguity: float
    total_risk: float
    weights: np.ndarray
    augmentation_names: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "augmentation_names": list(self.augmentation_names),
            "weights": self.weights.tolist(),
            "per_aug_error": self.per_aug_error.tolist(),
            "per_aug_ambiguity": self.per_aug_ambiguity.tolist(),
            "weighted_error": self.weighted_error,
            "weighted_ambiguity": self.weighted_ambiguity,
            "total_risk": self.total_risk,
        }


def decompose(data: PredictionSet, w: WeightsLike | None = None) -> DecompositionReport:
    """Split the combined risk into weighted member error minus weighted ambiguity.

    ``total_risk`` is ``weighted_error - weighted_ambiguity``; it agrees with
    :func:`direct_risk` to rounding, but is computed from the two terms so the
    identity can be checked independently.
    """
    if w is None:
        w = uniform_weights(data.n_augmentations)
    arr = _weights(w, data.n_augmentations)
    if np.any(arr < 0):
        raise InvalidInput("decomposition requires nonnegative weights")
    err = per_augmentation_error(data)
    spread = data.predictions - combine(data, arr)[:, None]
    amb = np.mean(spread * spread, axis=0)
    weighted_error = float(arr @ err)
    weighted_ambiguity = float(arr @ amb)
    err.setflags(write=False)
    amb.setflags(write=False)
    return DecompositionReport(
        per_aug_error=err,
        per_aug_ambiguity=amb,
        weighted_error=weighted_error,
        weighted_ambiguity=weighted_ambiguity,
        total_risk=weighted_error - weighted_ambiguity,
        weights=arr.copy(),
        augmentation_names=data.augmentation_names,
    )
