"""Inductive (split) conformal prediction intervals.

Nonconformity is the absolute residual on a held-out calibration set. The
resulting intervals are symmetric about the point prediction and share one
width everywhere, which is the price of the simplest valid construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .gbt import GbtModel, predict, predict_batch


@dataclass(frozen=True)
class ConformalCalibration:
    """Sorted nonconformity scores plus the calibrated quantile q_hat."""

    alpha: float
    scores: np.ndarray
    q_hat: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        scores = np.asarray(self.scores, dtype=float)
        if scores.ndim != 1 or scores.size == 0:
            raise ValidationError("scores must be a nonempty 1-D vector")
        if np.any(scores < 0.0):
            raise ValidationError("nonconformity scores must be nonnegative")
        if np.any(np.diff(scores) < 0.0):
            raise ValidationError("scores must be sorted ascending")
        if not (math.isinf(self.q_hat) or np.any(scores == self.q_hat)):
            raise ValidationError("q_hat must be one of the scores or +inf")
        scores = scores.copy()
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.scores.size

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "scores": self.scores.tolist(),
            "q_hat": None if math.isinf(self.q_hat) else self.q_hat,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ConformalCalibration":
        q_hat = doc["q_hat"]
        return cls(
            alpha=float(doc["alpha"]),
            scores=np.array(doc["scores"], dtype=float),
            q_hat=math.inf if q_hat is None else float(q_hat),
        )


def calibration_from_scores(scores, alpha: float = 0.05) -> ConformalCalibration:
    """Build a calibration from raw nonconformity scores.

    q_hat is the ceil((n+1)(1-alpha))-th smallest score (1-based); when that
    index exceeds n the interval is vacuous and q_hat = +inf.
    """
    scores = np.sort(np.asarray(scores, dtype=float))
    if scores.size == 0:
        raise ValidationError("calibration needs at least one score")
    n = scores.size
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    k = math.ceil((n + 1) * (1.0 - alpha))
    q_hat = math.inf if k > n else float(scores[k - 1])
    return ConformalCalibration(alpha=alpha, scores=scores, q_hat=q_hat)


def calibrate(model: GbtModel, x_cal, y_cal, alpha: float = 0.05) -> ConformalCalibration:
    """Score a calibration set with absolute residuals.

    The calibration rows must be disjoint from the model's training rows or
    the coverage guarantee is lost; the split module provides such sets.
    """
    x_cal = np.asarray(x_cal, dtype=float)
    y_cal = np.asarray(y_cal, dtype=float)
    if x_cal.ndim != 2 or y_cal.ndim != 1 or x_cal.shape[0] != y_cal.size:
        raise ValidationError("x_cal must be (n, d) and y_cal length n")
    if x_cal.shape[0] == 0:
        raise ValidationError("calibration set is empty")
    residuals = np.abs(y_cal - predict_batch(model, x_cal))
    return calibration_from_scores(residuals, alpha)


def predict_interval(
    model: GbtModel, cal: ConformalCalibration, x
) -> tuple[float, float]:
    """Symmetric interval (yhat - q_hat, yhat + q_hat) for one feature vector."""
    yhat = predict(model, x)
    return yhat - cal.q_hat, yhat + cal.q_hat


def predict_interval_batch(model: GbtModel, cal: ConformalCalibration, x) -> np.ndarray:
    """Interval endpoints for each row of x, shape (n, 2)."""
    yhat = predict_batch(model, x)
    return np.column_stack([yhat - cal.q_hat, yhat + cal.q_hat])
