"""Exception hierarchy.

Every error carries a ``payload`` dict with machine-readable witnesses
(offending indices, measured values) so the CLI can emit structured
error reports.
"""

from __future__ import annotations

from typing import Any


class CoarseGeomError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **payload: Any):
        super().__init__(message)
        self.payload = payload

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": str(self),
            **self.payload,
        }


# --- distance table validation ---

class NonFiniteEntry(CoarseGeomError):
    pass


class NegativeEntryError(CoarseGeomError):
    pass


class DiagonalError(CoarseGeomError):
    pass


class AsymmetryError(CoarseGeomError):
    pass


class TriangleError(CoarseGeomError):
    pass


class NonFiniteCoordinate(CoarseGeomError):
    pass


class TooFewPoints(CoarseGeomError):
    pass


# --- nets and partitions ---

class NotANet(CoarseGeomError):
    pass


class NotSeparated(CoarseGeomError):
    pass


class IncompleteCover(CoarseGeomError):
    pass


class PartitionGap(CoarseGeomError):
    pass


# --- maps ---

class NotBijective(CoarseGeomError):
    pass


class NetCoverViolation(CoarseGeomError):
    pass


class InjectivityFailure(CoarseGeomError):
    pass


class NotDense(CoarseGeomError):
    pass


class SizeMismatch(CoarseGeomError):
    pass


class TooLarge(CoarseGeomError):
    pass


class CertificateError(CoarseGeomError):
    """A claimed (lambda, c) or closeness bound fails its exhaustive scan."""


# --- convexity ---

class NotQuasiConvexAtScale(CoarseGeomError):
    pass


class GraphDisconnected(CoarseGeomError):
    pass


class NonPositiveScale(CoarseGeomError):
    pass


# --- higson ---

class OverlappingBalls(CoarseGeomError):
    pass


class EmptyTail(CoarseGeomError):
    pass
