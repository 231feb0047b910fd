"""Coarse quasi-convexity and the geodesic graph skeleton.

A space is quasi-convex at scale c with constants (a, b) if every pair
is joined by a chain of steps <= c whose total length is <= a*d + b.
Chains are realized as shortest paths in the threshold graph whose
edges join points at distance <= c, weighted by the ambient distance;
the skeleton construction then puts unit edges between net points at
distance <= 3c and certifies both comparison bounds

    hop(x, y) <= ((a*c + b) / c^2) * d(x, y)
    d(x, y)   <= 3c * hop(x, y)

over all vertex pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .errors import (
    CertificateError,
    GraphDisconnected,
    NonPositiveScale,
    NotQuasiConvexAtScale,
)
from .nets import Net, greedy_separated_net
from .space import FiniteMetricSpace

CERT_TOL = 1e-9


@dataclass(frozen=True)
class ChainMetric:
    """Shortest chain totals at step bound c; inf encodes disconnection."""

    c: float
    table: np.ndarray
    predecessors: np.ndarray

    def __post_init__(self):
        for name in ("table", "predecessors"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def chain_between(self, x: int, y: int) -> list[int] | None:
        """Witness chain from x to y with every step <= c, or None."""
        if not math.isfinite(self.table[x, y]):
            return None
        path = [y]
        while path[-1] != x:
            prev = int(self.predecessors[x, path[-1]])
            if prev < 0:
                return None if path[-1] != x else path[::-1]
            path.append(prev)
        return path[::-1]

    def is_connected(self) -> bool:
        return bool(np.isfinite(self.table).all())


@dataclass(frozen=True)
class ConvexityConstants:
    """Certified (a, b) at scale c: chain totals <= a*d + b on all pairs."""

    a: float
    b: float
    c: float

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


def chain_metric(space: FiniteMetricSpace, c: float) -> ChainMetric:
    """Minimal total length of chains with steps <= c, between all pairs.

    Zero-length steps (pseudo-metric duplicates) are legitimate edges.
    """
    if c <= 0:
        raise NonPositiveScale(f"step bound must be > 0, got {c}", c=c)
    weights = np.where(space.dist <= c, space.dist, np.inf)
    np.fill_diagonal(weights, np.inf)
    graph = csgraph_from_dense(weights, null_value=np.inf)
    table, pred = shortest_path(
        graph, method="D", directed=False, return_predecessors=True
    )
    np.fill_diagonal(table, 0.0)
    return ChainMetric(c=float(c), table=table, predecessors=pred)


def convexity_constants(
    space: FiniteMetricSpace,
    c: float,
    b_grid: Sequence[float] | None = None,
    chains: ChainMetric | None = None,
) -> list[ConvexityConstants]:
    """Pareto frontier of certified (a, b) pairs at scale c.

    For each b in the grid, a(b) is the least slope covering every
    pair (clamped below at 1); pairs dominated by a smaller b with the
    same slope are dropped.
    """
    cm = chains if chains is not None else chain_metric(space, c)
    if not cm.is_connected():
        i, j = np.argwhere(~np.isfinite(cm.table))[0]
        raise NotQuasiConvexAtScale(
            f"points {i} and {j} are not chain-connected at scale {c}",
            c=c,
            witness=[int(i), int(j)],
        )
    if b_grid is None:
        b_grid = [0.0, c / 2.0, c, 2.0 * c, 4.0 * c]
    positive = space.dist > 0
    frontier: list[ConvexityConstants] = []
    for b in sorted(float(b) for b in b_grid):
        if b < 0:
            raise ValueError(f"offsets in b_grid must be >= 0, got {b}")
        if positive.any():
            with np.errstate(invalid="ignore", divide="ignore"):
                slopes = np.where(positive, (cm.table - b) / space.dist, -np.inf)
            a = max(float(slopes.max()), 1.0)
        else:
            a = 1.0
        if frontier and frontier[-1].a <= a + CERT_TOL:
            continue
        defect = float((cm.table - (a * space.dist + b)).max())
        if defect > CERT_TOL:
            raise CertificateError(
                f"constants (a={a}, b={b}) fail certification by {defect:g}"
            )
        frontier.append(ConvexityConstants(a=a, b=b, c=float(c)))
    return frontier


@dataclass(frozen=True)
class GeodesicGraph:
    """Unit-edge graph on a c-separated c-net, edges at ambient d <= 3c."""

    vertices: Net
    edges: list[tuple[int, int]]
    hop: np.ndarray
    c: float

    def __post_init__(self):
        arr = np.ascontiguousarray(self.hop)
        arr.setflags(write=False)
        object.__setattr__(self, "hop", arr)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "vertices": self.vertices.to_dict(),
            "edges": [list(e) for e in self.edges],
            "hop": self.hop.tolist(),
        }

    def to_dot(self, space: FiniteMetricSpace | None = None) -> str:
        lines = ["graph geodesic_skeleton {"]
        for v in self.vertices.members:
            label = space.label_of(int(v)) if space is not None else str(int(v))
            lines.append(f'  {int(v)} [label="{label}"];')
        for u, v in self.edges:
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines)


def build_geodesic_graph(
    space: FiniteMetricSpace,
    c: float,
    order: Sequence[int] | None = None,
    constants: ConvexityConstants | None = None,
    b_grid: Sequence[float] | None = None,
) -> tuple[GeodesicGraph, dict]:
    """Build the unit-edge skeleton and certify both comparison bounds.

    When ``constants`` is omitted they are fitted from the chain
    metric, choosing the frontier pair minimizing the claimed slope
    (a*c + b) / c^2.
    """
    if c <= 0:
        raise NonPositiveScale(f"scale must be > 0, got {c}", c=c)
    if constants is None:
        frontier = convexity_constants(space, c, b_grid)
        constants = min(frontier, key=lambda k: (k.a * c + k.b) / (c * c))

    net = greedy_separated_net(space, c, order)
    members = net.members
    sub = space.dist[np.ix_(members, members)]
    off = ~np.eye(len(members), dtype=bool)
    adjacency = off & (sub <= 3.0 * c)
    edges = [
        (int(members[i]), int(members[j]))
        for i, j in np.argwhere(np.triu(adjacency, k=1))
    ]

    hop = shortest_path(adjacency.astype(np.int8), method="D", unweighted=True,
                        directed=False)
    if off.any() and not np.isfinite(hop[off]).all():
        i, j = np.argwhere(~np.isfinite(hop))[0]
        raise GraphDisconnected(
            f"net points {members[i]} and {members[j]} are in different "
            f"components; the quasi-convexity certificate must be wrong",
            witness=[int(members[i]), int(members[j])],
        )

    slope = (constants.a * c + constants.b) / (c * c)
    upper_defect = float((hop - slope * sub)[off].max(initial=-math.inf))
    lower_defect = float((sub - 3.0 * c * hop)[off].max(initial=-math.inf))
    report = {
        "constants": constants.to_dict(),
        "claimed_slope": slope,
        "upper_defect": upper_defect,
        "lower_defect": lower_defect,
        "n_vertices": int(len(members)),
        "n_edges": len(edges),
    }
    if upper_defect > CERT_TOL or lower_defect > CERT_TOL:
        raise CertificateError(
            "geodesic skeleton violates the comparison bounds", **report
        )
    graph = GeodesicGraph(vertices=net, edges=edges, hop=hop, c=float(c))
    return graph, report


def ls_constants_from_expansive(
    S: float, a: float, b: float, c: float
) -> tuple[float, float]:
    """Large-scale Lipschitz constants for a uniformly expansive map on a
    quasi-convex space: (4aS/c, 4bS/c + S).

    S is the expansiveness modulus at radius c; (a, b, c) the
    quasi-convexity constants of the domain.
    """
    if c <= 0:
        raise NonPositiveScale(f"scale must be > 0, got {c}", c=c)
    return 4.0 * a * S / c, 4.0 * b * S / c + S
