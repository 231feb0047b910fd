"""Finite pseudo-metric spaces as validated distance tables.

A space is an ``n x n`` symmetric table of nonnegative float64 distances
with zero diagonal and the triangle inequality, validated either at
ingestion time (:func:`from_distance_matrix`) or guaranteed by
construction (:func:`from_point_cloud`). Distinct points at distance 0
are allowed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    AsymmetryError,
    DiagonalError,
    NegativeEntryError,
    NonFiniteCoordinate,
    NonFiniteEntry,
    TooFewPoints,
    TriangleError,
)

DEFAULT_TOLERANCE = 1e-9

_CDIST_METRIC = {
    "euclidean": "euclidean",
    "manhattan": "cityblock",
    "chebyshev": "chebyshev",
}


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite pseudo-metric space backed by a full distance table."""

    dist: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.dist, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "dist", arr)
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError(
                f"{len(self.labels)} labels for {self.n} points"
            )

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def d(self, x: int, y: int) -> float:
        return float(self.dist[x, y])

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def points(self) -> np.ndarray:
        return np.arange(self.n)

    def label_of(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def submatrix(self, members: Sequence[int]) -> np.ndarray:
        idx = np.asarray(members, dtype=np.intp)
        return self.dist[np.ix_(idx, idx)]


@dataclass(frozen=True)
class MetricValidationReport:
    """Worst-case deviations from the metric axioms, plus a verdict."""

    worst_asymmetry: float
    worst_triangle_defect: float
    worst_negative: float
    worst_diagonal: float
    tolerance: float
    verdict: bool = field(init=False)

    def __post_init__(self):
        ok = all(
            v <= self.tolerance
            for v in (
                self.worst_asymmetry,
                self.worst_triangle_defect,
                self.worst_negative,
                self.worst_diagonal,
            )
        )
        object.__setattr__(self, "verdict", ok)

    def to_dict(self) -> dict:
        return {
            "worst_asymmetry": self.worst_asymmetry,
            "worst_triangle_defect": self.worst_triangle_defect,
            "worst_negative": self.worst_negative,
            "worst_diagonal": self.worst_diagonal,
            "tolerance": self.tolerance,
            "verdict": "pass" if self.verdict else "fail",
        }


def worst_triangle_defect(dist: np.ndarray) -> tuple[float, tuple[int, int, int]]:
    """Max over triples of d(i,k) - d(i,j) - d(j,k) and an attaining triple.

    Positive defect means the triangle inequality fails through
    intermediate point j.
    """
    n = dist.shape[0]
    worst = -np.inf
    witness = (0, 0, 0)
    for j in range(n):
        # defect[i, k] through intermediate j, vectorized per column
        defect = dist - (dist[:, j][:, None] + dist[j, :][None, :])
        i, k = np.unravel_index(int(np.argmax(defect)), defect.shape)
        if defect[i, k] > worst:
            worst = float(defect[i, k])
            witness = (int(i), int(j), int(k))
    return worst, witness


def from_distance_matrix(
    table: np.ndarray | Sequence[Sequence[float]],
    tolerance: float = DEFAULT_TOLERANCE,
    labels: Sequence[str] | None = None,
) -> tuple[FiniteMetricSpace, MetricValidationReport]:
    """Validate a raw distance table and build a space from it.

    Checks run in order: finiteness, nonnegativity, zero diagonal,
    symmetry, triangle inequality. Violations beyond ``tolerance``
    raise, naming an offending pair or triple; deviations within
    tolerance are repaired (entries clamped, table symmetrized as
    ``(t + t.T) / 2``, diagonal zeroed).
    """
    arr = np.asarray(table, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"distance table must be square, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise NonFiniteEntry(
            f"non-finite distance at ({i},{j})", pair=[int(i), int(j)]
        )

    worst_negative = max(0.0, float(-arr.min()))
    if worst_negative > tolerance:
        i, j = np.unravel_index(int(np.argmin(arr)), arr.shape)
        raise NegativeEntryError(
            f"negative distance {arr[i, j]} at ({i},{j})",
            pair=[int(i), int(j)],
            value=float(arr[i, j]),
        )

    diag = np.abs(np.diagonal(arr))
    worst_diagonal = float(diag.max()) if arr.size else 0.0
    if worst_diagonal > tolerance:
        i = int(np.argmax(diag))
        raise DiagonalError(
            f"d({i},{i}) = {arr[i, i]} != 0", point=i, value=float(arr[i, i])
        )

    asym = np.abs(arr - arr.T)
    worst_asymmetry = float(asym.max()) if arr.size else 0.0
    if worst_asymmetry > tolerance:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise AsymmetryError(
            f"d({i},{j}) = {arr[i, j]} but d({j},{i}) = {arr[j, i]}",
            pair=[int(i), int(j)],
            values=[float(arr[i, j]), float(arr[j, i])],
        )

    repaired = np.clip((arr + arr.T) / 2.0, 0.0, None)
    np.fill_diagonal(repaired, 0.0)

    defect, (i, j, k) = worst_triangle_defect(repaired)
    if defect > tolerance:
        raise TriangleError(
            f"d({i},{k}) = {repaired[i, k]} > d({i},{j}) + d({j},{k}) = "
            f"{repaired[i, j] + repaired[j, k]}",
            triple=[i, j, k],
            defect=defect,
        )

    report = MetricValidationReport(
        worst_asymmetry=worst_asymmetry,
        worst_triangle_defect=max(defect, 0.0),
        worst_negative=worst_negative,
        worst_diagonal=worst_diagonal,
        tolerance=tolerance,
    )
    space = FiniteMetricSpace(
        repaired, labels=tuple(labels) if labels is not None else None
    )
    return space, report


def from_point_cloud(
    coords: np.ndarray | Sequence[Sequence[float]],
    metric_kind: str = "euclidean",
) -> FiniteMetricSpace:
    """Build the space of rows of ``coords`` under a norm-induced metric.

    ``metric_kind`` is one of euclidean, manhattan, chebyshev. The
    result passes validation by construction.
    """
    pts = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    if not np.isfinite(pts).all():
        i = int(np.argwhere(~np.isfinite(pts).all(axis=1))[0][0])
        raise NonFiniteCoordinate(f"non-finite coordinate in point {i}", point=i)
    if metric_kind not in _CDIST_METRIC:
        raise ValueError(
            f"unknown metric kind {metric_kind!r}; "
            f"expected one of {sorted(_CDIST_METRIC)}"
        )
    dist = cdist(pts, pts, metric=_CDIST_METRIC[metric_kind])
    # exact symmetry and zero diagonal regardless of floating round-off
    dist = (dist + dist.T) / 2.0
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(dist)


def line_space(n: int) -> FiniteMetricSpace:
    """The integer segment {0, ..., n-1} with |i - j|."""
    idx = np.arange(n, dtype=np.float64)
    return FiniteMetricSpace(np.abs(idx[:, None] - idx[None, :]))


def closed_ball(space: FiniteMetricSpace, x: int, radius: float) -> np.ndarray:
    """Indices of the closed ball {y : d(x,y) <= radius}, sorted."""
    if radius < 0:
        raise ValueError(f"ball radius must be >= 0, got {radius}")
    return np.flatnonzero(space.dist[x] <= radius)


def separation_of(space: FiniteMetricSpace, members: Sequence[int]) -> float:
    """Min distance over distinct pairs of ``members``."""
    idx = np.asarray(members, dtype=np.intp)
    if idx.size < 2:
        raise TooFewPoints(
            f"separation needs at least 2 points, got {idx.size}", size=int(idx.size)
        )
    sub = space.dist[np.ix_(idx, idx)]
    off = ~np.eye(idx.size, dtype=bool)
    return float(sub[off].min())


def cover_radius_of(space: FiniteMetricSpace, members: Sequence[int]) -> float:
    """Max over all points of the distance to the nearest member."""
    idx = np.asarray(members, dtype=np.intp)
    if idx.size == 0:
        raise TooFewPoints("cover radius of an empty set", size=0)
    return float(space.dist[:, idx].min(axis=1).max())


# --- file interfaces ---

def _is_numeric_row(row: Iterable[str]) -> bool:
    try:
        for tok in row:
            float(tok)
    except ValueError:
        return False
    return True


def load_distance_matrix_csv(path: str) -> tuple[np.ndarray, list[str] | None]:
    """Read an n x n distance table; a non-numeric first row gives labels."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    labels = None
    if not _is_numeric_row(rows[0]):
        labels = [tok.strip() for tok in rows[0]]
        rows = rows[1:]
    table = np.array([[float(tok) for tok in row] for row in rows])
    return table, labels


def load_point_cloud_csv(path: str) -> np.ndarray:
    """Read one point per row; a non-numeric first row is skipped."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    if not _is_numeric_row(rows[0]):
        rows = rows[1:]
    return np.array([[float(tok) for tok in row] for row in rows])
