"""Correlation, empirical-distribution, and two-sample similarity statistics.

Everything here is a pure function over immutable inputs. The Pearson
coefficient drives correlated-pair identification, the Cramér-von Mises
criterion scores distributional similarity between setpoint samples, and the
ECDF/KDE curves exist for display.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import DataTable
from .errors import ValidationError


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length vectors.

    Raises on constant input rather than returning 0: an undefined
    correlation must not masquerade as independence.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValidationError("pearson needs two 1-D vectors of equal length")
    if x.size < 2:
        raise ValidationError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.sum(dx * dx))
    sy = np.sqrt(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("pearson is undefined for a constant vector")
    return float(np.sum(dx * dy) / (sx * sy))


@dataclass(frozen=True)
class CorrelationReport:
    """Symmetric PCC matrix plus the pairs whose |PCC| exceeds a threshold."""

    names: tuple[str, ...]
    matrix: np.ndarray
    threshold: float
    correlated_pairs: tuple[tuple[str, str, float], ...]
    constant_variables: tuple[str, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        k = len(self.names)
        if matrix.shape != (k, k):
            raise ValidationError("correlation matrix shape must match the name list")
        matrix = matrix.copy()
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "correlated_pairs", tuple(self.correlated_pairs))
        object.__setattr__(self, "constant_variables", tuple(self.constant_variables))

    def value(self, a: str, b: str) -> float:
        return float(self.matrix[self.names.index(a), self.names.index(b)])

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": [[None if np.isnan(v) else float(v) for v in row] for row in self.matrix],
            "threshold": self.threshold,
            "correlated_pairs": [[a, b, float(r)] for a, b, r in self.correlated_pairs],
            "constant_variables": list(self.constant_variables),
        }


def correlation_matrix(table: DataTable, threshold: float = 0.9) -> CorrelationReport:
    """Pairwise Pearson matrix over all variables in a table.

    Correlated pairs are restricted to operating variables because only those
    feed the tolerance-chain constraints. Constant columns have no defined
    correlation; their matrix entries are NaN and they are flagged, never
    paired.
    """
    names = tuple(table.schema.names)
    values = table.values
    k = len(names)
    matrix = np.full((k, k), np.nan)
    constant = [bool(values[:, i].std() == 0.0) for i in range(k)]
    for i in range(k):
        if constant[i]:
            continue
        matrix[i, i] = 1.0
        for j in range(i + 1, k):
            if constant[j]:
                continue
            r = pearson(values[:, i], values[:, j])
            matrix[i, j] = r
            matrix[j, i] = r

    operating = set(table.schema.operating_names)
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            if names[i] in operating and names[j] in operating and not np.isnan(matrix[i, j]):
                if abs(matrix[i, j]) > threshold:
                    pairs.append((names[i], names[j], float(matrix[i, j])))
    return CorrelationReport(
        names=names,
        matrix=matrix,
        threshold=threshold,
        correlated_pairs=tuple(pairs),
        constant_variables=tuple(n for n, c in zip(names, constant) if c),
    )


@dataclass(frozen=True)
class EcdfCurve:
    """Right-continuous empirical CDF: F(t) = (#values <= t) / n."""

    sorted_values: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        for attr in ("sorted_values", "probabilities"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        counts = np.searchsorted(self.sorted_values, t, side="right")
        return counts / self.sorted_values.size

    def to_dict(self) -> dict:
        return {
            "values": self.sorted_values.tolist(),
            "probabilities": self.probabilities.tolist(),
        }


def ecdf(values) -> EcdfCurve:
    """Empirical distribution function of a nonempty sample."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("ecdf needs a nonempty 1-D sample")
    ordered = np.sort(arr)
    n = ordered.size
    return EcdfCurve(sorted_values=ordered, probabilities=np.arange(1, n + 1) / n)


@dataclass(frozen=True)
class SimilarityValue:
    """Two-sample Cramér-von Mises criterion with its sample sizes."""

    statistic: float
    n: int
    m: int

    def __post_init__(self):
        if not np.isfinite(self.statistic):
            raise ValidationError("CvM statistic must be finite")
        if self.statistic < -1e-9:
            raise ValidationError("CvM statistic fell below its lower bound")
        # average-rank ties can introduce float noise around the exact zero
        object.__setattr__(self, "statistic", float(max(self.statistic, 0.0)))

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "n": self.n, "m": self.m}


def cvm_two_sample(a, b) -> SimilarityValue:
    """Rank-based two-sample Cramér-von Mises criterion.

    T = U / (n m (n+m)) - (4 n m - 1) / (6 (n+m)), where
    U = n * sum_i (r_i - i)^2 + m * sum_j (s_j - j)^2
    and r, s are the pooled-sample ranks (average ranks for ties) of each
    sample sorted ascending. Symmetric in its arguments; identical samples
    score exactly 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size < 1 or b.size < 1:
        raise ValidationError("cvm_two_sample needs two nonempty 1-D samples")
    n, m = a.size, b.size
    ranks = rankdata(np.concatenate([a, b]))
    r = np.sort(ranks[:n])
    s = np.sort(ranks[n:])
    i = np.arange(1, n + 1)
    j = np.arange(1, m + 1)
    u = n * np.sum((r - i) ** 2) + m * np.sum((s - j) ** 2)
    t = u / (n * m * (n + m)) - (4.0 * n * m - 1.0) / (6.0 * (n + m))
    return SimilarityValue(statistic=float(t), n=n, m=m)


@dataclass(frozen=True)
class KdeCurve:
    """Gaussian kernel density evaluated on a fixed grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def __post_init__(self):
        for attr in ("grid", "density"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "density": self.density.tolist(),
            "bandwidth": self.bandwidth,
        }


def silverman_bandwidth(values) -> float:
    """Silverman's rule of thumb; falls back to 1.0 for degenerate samples."""
    arr = np.asarray(values, dtype=float)
    n = arr.size
    sigma = arr.std()
    q75, q25 = np.percentile(arr, [75, 25])
    iqr = q75 - q25
    spread_candidates = [v for v in (sigma, iqr / 1.34) if v > 0.0]
    if not spread_candidates:
        return 1.0
    return float(0.9 * min(spread_candidates) * n ** (-0.2))


def kde(values, bandwidth: float | None = None, grid_size: int = 256) -> KdeCurve:
    """Gaussian KDE sampled on `grid_size` points over data range +- 3 bandwidths."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("kde needs a nonempty 1-D sample")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(arr)
    if bandwidth <= 0.0:
        raise ValidationError("bandwidth must be positive")
    low = arr.min() - 3.0 * bandwidth
    high = arr.max() + 3.0 * bandwidth
    grid = np.linspace(low, high, grid_size)
    z = (grid[:, None] - arr[None, :]) / bandwidth
    density = np.exp(-0.5 * z * z).sum(axis=1) / (arr.size * bandwidth * np.sqrt(2.0 * np.pi))
    return KdeCurve(grid=grid, density=density, bandwidth=float(bandwidth))
