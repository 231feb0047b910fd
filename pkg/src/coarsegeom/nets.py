"""Separated nets and the cell partitions they induce.

The greedy scan replaces the maximality argument used for infinite
spaces: admit a point iff it lies strictly more than K from everything
admitted before it. The result is always K-separated and a K-net, but
the member set depends on the scan order, which is therefore an
explicit parameter everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IncompleteCover, NotANet, NotSeparated
from .space import FiniteMetricSpace, cover_radius_of, separation_of


def _as_order(space: FiniteMetricSpace, order: Sequence[int] | None) -> np.ndarray:
    if order is None:
        return np.arange(space.n)
    arr = np.asarray(order, dtype=np.intp)
    if sorted(arr.tolist()) != list(range(space.n)):
        raise ValueError("order must be a permutation of all point ids")
    return arr


@dataclass(frozen=True)
class Net:
    """A subset whose points cover the space within K and sit > delta apart.

    ``K`` is the certified cover bound, ``cover_radius`` the measured
    one (<= K), ``delta`` the measured separation (inf for singletons).
    """

    members: np.ndarray
    K: float
    delta: float
    cover_radius: float

    def __post_init__(self):
        arr = np.asarray(self.members, dtype=np.intp).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "members", arr)

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "members": self.members.tolist(),
            "K": self.K,
            "delta": None if math.isinf(self.delta) else self.delta,
            "cover_radius": self.cover_radius,
        }


@dataclass(frozen=True)
class BorelPartition:
    """Disjoint cells F_x, one per net member, with x in F_x subset B(x, K)."""

    cells: dict[int, np.ndarray]
    K: float
    enumeration_order: np.ndarray

    def members(self) -> np.ndarray:
        return self.enumeration_order

    def cell_index(self, n_points: int) -> np.ndarray:
        """Array mapping each point to the member owning its cell."""
        owner = np.full(n_points, -1, dtype=np.intp)
        for x, cell in self.cells.items():
            owner[cell] = x
        return owner

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "enumeration_order": self.enumeration_order.tolist(),
            "cells": {str(x): cell.tolist() for x, cell in self.cells.items()},
        }


def net_from_members(
    space: FiniteMetricSpace, members: Sequence[int], K: float
) -> Net:
    """Wrap an explicit member set as a Net, measuring delta and cover."""
    arr = np.asarray(members, dtype=np.intp)
    delta = separation_of(space, arr) if arr.size >= 2 else math.inf
    cover = cover_radius_of(space, arr)
    return Net(members=arr, K=float(K), delta=delta, cover_radius=cover)


def greedy_separated_net(
    space: FiniteMetricSpace,
    K: float,
    order: Sequence[int] | None = None,
) -> Net:
    """Greedy K-separated K-net: scan in ``order``, admit iff > K from
    all admitted points.

    Every space yields a net (a singleton space yields itself); the
    member set depends on ``order`` but the separation and cover
    properties do not.
    """
    if K <= 0:
        raise ValueError(f"net scale K must be > 0, got {K}")
    scan = _as_order(space, order)
    min_dist = np.full(space.n, np.inf)
    admitted: list[int] = []
    for x in scan:
        if min_dist[x] > K:
            admitted.append(int(x))
            np.minimum(min_dist, space.dist[x], out=min_dist)
    return net_from_members(space, np.array(admitted, dtype=np.intp), K)


def refine_net(space: FiniteMetricSpace, net: Net, K: float) -> Net:
    """Extract from a K-net a K-separated subset that is still a 2K-net.

    Greedy scan restricted to the members of ``net`` (in their stored
    order); each dropped member stays within K of a kept one, so the
    cover radius at most doubles.
    """
    if K <= 0:
        raise ValueError(f"net scale K must be > 0, got {K}")
    members = net.members
    if cover_radius_of(space, members) > K:
        worst = int(np.argmax(space.dist[:, members].min(axis=1)))
        raise NotANet(
            f"input is not a {K}-net: point {worst} is "
            f"{space.dist[worst, members].min():g} from it",
            K=K,
            witness=worst,
        )
    min_dist = np.full(space.n, np.inf)
    kept: list[int] = []
    for x in members:
        if min_dist[x] > K:
            kept.append(int(x))
            np.minimum(min_dist, space.dist[x], out=min_dist)
    return net_from_members(space, np.array(kept, dtype=np.intp), 2.0 * K)


def borel_partition(
    space: FiniteMetricSpace,
    net: Net | Sequence[int],
    K: float,
    order: Sequence[int] | None = None,
) -> BorelPartition:
    """Partition the space into cells F_x nested in the K-balls of net members.

    The first member in ``order`` takes its whole K-ball; each later
    member takes itself plus whatever of its K-ball is still
    unclaimed. Points equidistant to several members therefore land
    with the earliest claimant.
    """
    members = net.members if isinstance(net, Net) else np.asarray(net, dtype=np.intp)
    enum = members if order is None else np.asarray(order, dtype=np.intp)
    if sorted(enum.tolist()) != sorted(members.tolist()):
        raise ValueError("order must enumerate exactly the net members")

    assigned = np.zeros(space.n, dtype=bool)
    cells: dict[int, np.ndarray] = {}
    for x in enum:
        x = int(x)
        if assigned[x]:
            raise NotSeparated(
                f"member {x} already lies in an earlier cell; "
                f"the net is not {K}-separated",
                member=x,
                K=K,
            )
        ball = space.dist[x] <= K
        cell = np.flatnonzero(ball & ~assigned)
        assigned[cell] = True
        cells[x] = cell
    if not assigned.all():
        missing = int(np.flatnonzero(~assigned)[0])
        raise IncompleteCover(
            f"point {missing} lies in no cell; the members are not a {K}-net",
            witness=missing,
            K=K,
        )
    return BorelPartition(cells=cells, K=float(K), enumeration_order=enum)
