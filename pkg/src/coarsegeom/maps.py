"""The map calculus: coarse quasi-isometries and large-scale maps.

A coarse quasi-isometry is a bi-Lipschitz bijection between nets,
carrying the distortion pair (K, C). A large-scale map carries
(lambda, c) with d'(fx, fy) <= lambda*d(x, y) + c, and an equivalence
adds an inverse-up-to-R pair. The two constructions here convert
between the presentations with explicit, exhaustively certified
constants: a (K, C) bijection extends to an equivalence within
(C, 2CK, K), and a (lambda, c, R) equivalence restricts, for any
epsilon > 0, to a bijection between nets with

    K' = R + 2*lambda*R + lambda*c + lambda*epsilon + c
    C' = lambda * (1 + (2R + c) / epsilon).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CertificateError,
    InjectivityFailure,
    NetCoverViolation,
    NotBijective,
    NotDense,
    SizeMismatch,
    TooLarge,
)
from .nets import Net, greedy_separated_net, net_from_members
from .space import FiniteMetricSpace, cover_radius_of

CERT_TOL = 1e-9

# factorial enumeration stays sub-second up to here
BRUTEFORCE_CAP = 8

_CHUNK = 512


def _mapping_array(space: FiniteMetricSpace, mapping: Sequence[int]) -> np.ndarray:
    arr = np.asarray(mapping, dtype=np.intp)
    if arr.shape != (space.n,):
        raise ValueError(
            f"mapping must assign every point of the domain: "
            f"expected length {space.n}, got {arr.shape}"
        )
    return arr


def additive_slack(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    mapping: Sequence[int],
    lam: float,
) -> tuple[float, tuple[int, int]]:
    """Max over pairs of d'(fx, fy) - lam*d(x, y), with a witness pair.

    The result (clamped at 0) is the least additive constant c making
    (lam, c) a valid large-scale Lipschitz distortion of ``mapping``.
    """
    m = _mapping_array(dom, mapping)
    worst = -math.inf
    witness = (0, 0)
    for lo in range(0, dom.n, _CHUNK):
        hi = min(lo + _CHUNK, dom.n)
        gap = rng.dist[np.ix_(m[lo:hi], m)] - lam * dom.dist[lo:hi]
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        if gap[i, j] > worst:
            worst = float(gap[i, j])
            witness = (lo + int(i), int(j))
    return worst, witness


def displacement(
    space: FiniteMetricSpace, mapping: Sequence[int]
) -> tuple[float, int]:
    """Max over x of d(x, mapping(x)): how far a self-map moves points."""
    m = _mapping_array(space, mapping)
    moved = space.dist[np.arange(space.n), m]
    x = int(np.argmax(moved))
    return float(moved[x]), x


@dataclass(frozen=True)
class LargeScaleMap:
    """Total map with certified d'(fx, fy) <= lam*d(x, y) + c."""

    mapping: np.ndarray
    lam: float
    c: float

    def __post_init__(self):
        arr = np.asarray(self.mapping, dtype=np.intp).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "mapping", arr)
        if self.lam < 1.0:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if self.c < 0.0:
            raise ValueError(f"additive constant must be >= 0, got {self.c}")

    def __call__(self, x: int) -> int:
        return int(self.mapping[x])

    def to_dict(self) -> dict:
        return {"mapping": self.mapping.tolist(), "lambda": self.lam, "c": self.c}


def large_scale_map(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    mapping: Sequence[int],
    lam: float,
    c: float,
) -> LargeScaleMap:
    """Build a LargeScaleMap, certifying the claimed (lam, c) exhaustively."""
    slack, (x, y) = additive_slack(dom, rng, mapping, lam)
    if slack > c + CERT_TOL:
        raise CertificateError(
            f"claimed (lambda={lam}, c={c}) fails at pair ({x},{y}): "
            f"needs c >= {slack:g}",
            pair=[x, y],
            required_c=slack,
        )
    return LargeScaleMap(np.asarray(mapping, dtype=np.intp), lam, c)


@dataclass(frozen=True)
class EquivalencePair:
    """Mutually inverse (up to R) large-scale maps between two spaces."""

    forward: LargeScaleMap
    backward: LargeScaleMap
    closeness: float

    @property
    def lam(self) -> float:
        return max(self.forward.lam, self.backward.lam)

    @property
    def c(self) -> float:
        return max(self.forward.c, self.backward.c)

    def to_dict(self) -> dict:
        return {
            "forward": self.forward.to_dict(),
            "backward": self.backward.to_dict(),
            "closeness": self.closeness,
        }


def certify_equivalence(
    dom: FiniteMetricSpace, rng: FiniteMetricSpace, pair: EquivalencePair
) -> dict:
    """Re-measure an EquivalencePair's claimed constants; raise on failure."""
    slack_f, wf = additive_slack(dom, rng, pair.forward.mapping, pair.forward.lam)
    slack_b, wb = additive_slack(rng, dom, pair.backward.mapping, pair.backward.lam)
    round_dom, _ = displacement(dom, pair.backward.mapping[pair.forward.mapping])
    round_rng, _ = displacement(rng, pair.forward.mapping[pair.backward.mapping])
    measured_R = max(round_dom, round_rng)
    report = {
        "claimed": {"lambda": pair.lam, "c": pair.c, "R": pair.closeness},
        "measured": {
            "forward_slack": max(slack_f, 0.0),
            "backward_slack": max(slack_b, 0.0),
            "R": measured_R,
        },
    }
    if slack_f > pair.forward.c + CERT_TOL:
        raise CertificateError(
            f"forward map fails (lambda, c) at {wf}", **report["measured"]
        )
    if slack_b > pair.backward.c + CERT_TOL:
        raise CertificateError(
            f"backward map fails (lambda, c) at {wb}", **report["measured"]
        )
    if measured_R > pair.closeness + CERT_TOL:
        raise CertificateError(
            f"round trips move points {measured_R:g} > R = {pair.closeness}",
            **report["measured"],
        )
    return report


@dataclass(frozen=True)
class DistortionReport:
    """Measured bi-Lipschitz constant of a net pairing, with witnesses."""

    min_C: float
    worst_expand_pair: tuple[int, int] | None
    worst_contract_pair: tuple[int, int] | None
    degenerate_pair: tuple[int, int] | None
    profile: list[tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "min_C": None if math.isinf(self.min_C) else self.min_C,
            "worst_expand_pair": self.worst_expand_pair,
            "worst_contract_pair": self.worst_contract_pair,
            "degenerate_pair": self.degenerate_pair,
            "profile": [[r, s] for r, s in self.profile],
        }


@dataclass(frozen=True)
class NetBijection:
    """Bi-Lipschitz bijection between nets: a coarse quasi-isometry (K, C)."""

    domain_net: Net
    range_net: Net
    image: np.ndarray
    measured_C: float
    K: float

    def __post_init__(self):
        arr = np.asarray(self.image, dtype=np.intp).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "image", arr)

    @property
    def domain_members(self) -> np.ndarray:
        return self.domain_net.members

    def pair_map(self, n_dom: int) -> np.ndarray:
        """Member id -> image id as a dense lookup (-1 off the net)."""
        lookup = np.full(n_dom, -1, dtype=np.intp)
        lookup[self.domain_net.members] = self.image
        return lookup

    def to_dict(self) -> dict:
        return {
            "domain_net": self.domain_net.to_dict(),
            "range_net": self.range_net.to_dict(),
            "image": self.image.tolist(),
            "measured_C": None if math.isinf(self.measured_C) else self.measured_C,
            "K": self.K,
        }


def default_radius_grid(diameter: float) -> list[float]:
    """Geometric grid 1, 2, 4, ... capped by the diameter."""
    if diameter <= 1.0:
        return [max(diameter, 1.0)]
    grid: list[float] = []
    r = 1.0
    while r < diameter:
        grid.append(r)
        r *= 2.0
    grid.append(float(diameter))
    return grid


def measure_distortion(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    domain: Sequence[int],
    image: Sequence[int],
) -> DistortionReport:
    """Least C with d/C <= d' <= C*d over all pairs of a net pairing.

    Pairs with both distances 0 are ignored; a pair with exactly one 0
    makes the constant infinite and is reported as degenerate rather
    than raised.
    """
    a = np.asarray(domain, dtype=np.intp)
    b = np.asarray(image, dtype=np.intp)
    if a.size != b.size:
        raise NotBijective(
            f"pairing sizes differ: {a.size} vs {b.size}", sizes=[int(a.size), int(b.size)]
        )
    if len(set(a.tolist())) != a.size or len(set(b.tolist())) != b.size:
        raise NotBijective("pairing has repeated points")

    dd = dom.dist[np.ix_(a, a)]
    dr = rng.dist[np.ix_(b, b)]
    off = ~np.eye(a.size, dtype=bool)
    both_zero = (dd == 0) & (dr == 0)
    degenerate = off & ((dd == 0) ^ (dr == 0))

    profile = [
        (float(r), float(dr[off & (dd <= r)].max(initial=0.0)))
        for r in default_radius_grid(float(dd.max(initial=0.0)))
    ]

    deg_pair = None
    if degenerate.any():
        i, j = np.argwhere(degenerate)[0]
        deg_pair = (int(a[i]), int(a[j]))

    valid = off & ~both_zero & ~degenerate
    if not valid.any():
        return DistortionReport(1.0, None, None, deg_pair, profile)

    with np.errstate(divide="ignore", invalid="ignore"):
        expand = np.where(valid, dr / dd, -np.inf)
        contract = np.where(valid, dd / dr, -np.inf)
    ei, ej = np.unravel_index(int(np.argmax(expand)), expand.shape)
    ci, cj = np.unravel_index(int(np.argmax(contract)), contract.shape)
    min_C = max(float(expand[ei, ej]), float(contract[ci, cj]), 1.0)
    if deg_pair is not None:
        min_C = math.inf
    return DistortionReport(
        min_C=min_C,
        worst_expand_pair=(int(a[ei]), int(a[ej])),
        worst_contract_pair=(int(a[ci]), int(a[cj])),
        degenerate_pair=deg_pair,
        profile=profile,
    )


def make_net_bijection(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    domain_net: Net,
    range_net: Net,
    image: Sequence[int],
    K: float | None = None,
) -> NetBijection:
    """Assemble a NetBijection, measuring its bi-Lipschitz constant."""
    img = np.asarray(image, dtype=np.intp)
    if sorted(img.tolist()) != sorted(range_net.members.tolist()):
        raise NotBijective("image is not a bijection onto the range net members")
    report = measure_distortion(dom, rng, domain_net.members, img)
    joint_K = max(domain_net.K, range_net.K) if K is None else K
    return NetBijection(
        domain_net=domain_net,
        range_net=range_net,
        image=img,
        measured_C=report.min_C,
        K=float(joint_K),
    )


def _nearest_member(space: FiniteMetricSpace, members: np.ndarray) -> np.ndarray:
    """Snap each point to its nearest member, ties to the lowest point id;
    members map to themselves."""
    by_id = np.sort(members)
    nearest = by_id[np.argmin(space.dist[:, by_id], axis=1)]
    nearest[members] = members
    return nearest


def extend_net_map(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    f: NetBijection,
) -> tuple[EquivalencePair, dict]:
    """Extend a (K, C) net bijection to a total equivalence within (C, 2CK, K).

    Each point rides with its nearest net member (ties to the lowest
    id, members fixed), then crosses via the bijection. The measured
    (lambda, c, R) of the result is certified against the claimed
    bound componentwise.
    """
    K, C = f.K, f.measured_C
    if not math.isfinite(C):
        raise CertificateError("cannot extend a bijection with infinite distortion")
    for space, net, side in ((dom, f.domain_net, "domain"), (rng, f.range_net, "range")):
        cover = cover_radius_of(space, net.members)
        if cover > K + CERT_TOL:
            worst = int(np.argmax(space.dist[:, net.members].min(axis=1)))
            raise NetCoverViolation(
                f"{side} net does not cover within K={K}: point {worst} "
                f"is {cover:g} away",
                side=side,
                witness=worst,
                cover=cover,
            )

    h_dom = _nearest_member(dom, f.domain_net.members)
    h_rng = _nearest_member(rng, f.range_net.members)
    fwd_lookup = f.pair_map(dom.n)
    bwd_lookup = np.full(rng.n, -1, dtype=np.intp)
    bwd_lookup[f.image] = f.domain_net.members
    phi = fwd_lookup[h_dom]
    psi = bwd_lookup[h_rng]

    lam = max(C, 1.0)
    slack_f, _ = additive_slack(dom, rng, phi, lam)
    slack_b, _ = additive_slack(rng, dom, psi, lam)
    c_meas = max(slack_f, slack_b, 0.0)
    back_forth, _ = displacement(dom, psi[phi])
    forth_back, _ = displacement(rng, phi[psi])
    r_meas = max(back_forth, forth_back)

    claimed = {"lambda": lam, "c": 2.0 * C * K, "R": K}
    measured = {"lambda": lam, "c": c_meas, "R": r_meas}
    if c_meas > claimed["c"] + CERT_TOL or r_meas > claimed["R"] + CERT_TOL:
        raise CertificateError(
            "extension exceeds the (C, 2CK, K) bound",
            claimed=claimed,
            measured=measured,
        )
    pair = EquivalencePair(
        forward=LargeScaleMap(phi, lam, c_meas),
        backward=LargeScaleMap(psi, lam, c_meas),
        closeness=r_meas,
    )
    return pair, {"claimed": claimed, "measured": measured}


def restrict_equivalence(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    pair: EquivalencePair,
    epsilon: float,
    order: Sequence[int] | None = None,
) -> tuple[NetBijection, dict]:
    """Restrict a (lambda, c, R) equivalence to a coarse quasi-isometry.

    The domain net is the greedy (2R+c+eps)-separated net; its image
    under the forward map is the range net. Certifies injectivity, the
    range cover radius, the bi-Lipschitz bound, and the pairwise
    inequality d(x,y) <= lambda*d'(fx,fy) + 2R + c on all of the domain.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    lam, c, R = pair.lam, pair.c, pair.closeness
    phi = pair.forward.mapping

    threshold = 2.0 * R + c + epsilon
    domain_net = greedy_separated_net(dom, threshold, order)
    image = phi[domain_net.members]
    if len(set(image.tolist())) != image.size:
        values, counts = np.unique(image, return_counts=True)
        dup = int(values[counts > 1][0])
        clash = domain_net.members[image == dup][:2]
        raise InjectivityFailure(
            f"points {clash.tolist()} collide at image {dup}; the "
            f"(lambda, c, R) certificate of the input must be wrong",
            witness=clash.tolist(),
            image=dup,
        )

    claimed_radius = R + 2.0 * lam * R + lam * c + lam * epsilon + c
    claimed_C = lam * (1.0 + (2.0 * R + c) / epsilon)

    # max over pairs of d(x,y) - lam*d'(phi x, phi y); must stay <= 2R + c
    eq_slack = -math.inf
    eq_witness = (0, 0)
    for lo in range(0, dom.n, _CHUNK):
        hi = min(lo + _CHUNK, dom.n)
        gap = dom.dist[lo:hi] - lam * rng.dist[np.ix_(phi[lo:hi], phi)]
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        if gap[i, j] > eq_slack:
            eq_slack = float(gap[i, j])
            eq_witness = (lo + int(i), int(j))

    range_net = net_from_members(rng, image, claimed_radius)
    measured_radius = range_net.cover_radius
    bijection = make_net_bijection(
        dom, rng, domain_net, range_net, image, K=claimed_radius
    )

    report = {
        "epsilon": epsilon,
        "separation_threshold": threshold,
        "claimed": {"range_cover": claimed_radius, "C": claimed_C, "eq_bound": 2.0 * R + c},
        "measured": {
            "range_cover": measured_radius,
            "C": bijection.measured_C,
            "eq_slack": max(eq_slack, 0.0),
        },
    }
    failures = []
    if measured_radius > claimed_radius + CERT_TOL:
        failures.append("range net cover radius")
    if bijection.measured_C > claimed_C + CERT_TOL:
        failures.append("bi-Lipschitz constant")
    if eq_slack > 2.0 * R + c + CERT_TOL:
        failures.append(f"pairwise inequality at {eq_witness}")
    if failures:
        raise CertificateError(
            "restriction exceeds its claimed bounds: " + ", ".join(failures),
            **report,
        )
    return bijection, report


def closeness_gap(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    f: NetBijection,
    g: NetBijection,
    r: float,
) -> float | None:
    """Least s making f and g (r, s)-close, or None if the nets are not
    mutually r-dense."""
    a, b = f.domain_net.members, g.domain_net.members
    if float(dom.dist[np.ix_(a, b)].min(axis=1).max()) > r:
        return None
    if float(dom.dist[np.ix_(b, a)].min(axis=1).max()) > r:
        return None
    cross = dom.dist[np.ix_(a, b)] <= r
    if not cross.any():
        return 0.0
    d_images = rng.dist[np.ix_(f.image, g.image)]
    return float(d_images[cross].max())


def expansiveness_profile(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    mapping: Sequence[int],
    radius_grid: Sequence[float] | None = None,
) -> list[tuple[float, float]]:
    """S(R) = max d'(fx, fz) over pairs with d(x, z) <= R, per grid R."""
    m = _mapping_array(dom, mapping)
    grid = (
        default_radius_grid(dom.diameter()) if radius_grid is None else list(radius_grid)
    )
    dr = rng.dist[np.ix_(m, m)]
    return [(float(r), float(dr[dom.dist <= r].max(initial=0.0))) for r in grid]


def properness_profile(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    mapping: Sequence[int],
    radius_grid: Sequence[float] | None = None,
) -> list[tuple[float, float]]:
    """S'(R) = max d(x, z) over pairs with d'(fx, fz) <= R, per grid R."""
    m = _mapping_array(dom, mapping)
    grid = (
        default_radius_grid(rng.diameter()) if radius_grid is None else list(radius_grid)
    )
    dr = rng.dist[np.ix_(m, m)]
    return [(float(r), float(dom.dist[dr <= r].max(initial=0.0))) for r in grid]


def quasi_inverse(
    dom: FiniteMetricSpace,
    rng: FiniteMetricSpace,
    mapping: Sequence[int],
    N: float,
    order: Sequence[int] | None = None,
) -> np.ndarray:
    """Pick psi with d'(f(psi(x')), x') <= N for every x' in the range space.

    Requires the image of ``mapping`` to be N-dense; the selection is
    the first qualifying preimage point in ``order``.
    """
    m = _mapping_array(dom, mapping)
    scan = np.arange(dom.n) if order is None else np.asarray(order, dtype=np.intp)
    hits = rng.dist[m[scan], :] <= N
    covered = hits.any(axis=0)
    if not covered.all():
        witness = int(np.flatnonzero(~covered)[0])
        gap = float(rng.dist[m, witness].min())
        raise NotDense(
            f"image is not {N}-dense: point {witness} of the range space "
            f"is {gap:g} from it",
            N=N,
            witness=witness,
            gap=gap,
        )
    return scan[np.argmax(hits, axis=0)]


def min_distortion_bruteforce(
    dom: FiniteMetricSpace, rng: FiniteMetricSpace
) -> tuple[float, np.ndarray]:
    """Exact minimal bi-Lipschitz constant over all bijections.

    Factorial enumeration; both spaces must have the same number of
    points, at most BRUTEFORCE_CAP.
    """
    n = dom.n
    if n != rng.n:
        raise SizeMismatch(
            f"spaces have {n} and {rng.n} points", sizes=[n, rng.n]
        )
    if n > BRUTEFORCE_CAP:
        raise TooLarge(
            f"{n} points exceeds the brute-force cap {BRUTEFORCE_CAP}",
            cap=BRUTEFORCE_CAP,
        )
    if n == 0:
        return 1.0, np.array([], dtype=np.intp)

    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    dd = dom.dist[None, :, :]
    dr = rng.dist[perms[:, :, None], perms[:, None, :]]
    off = ~np.eye(n, dtype=bool)[None, :, :]
    both_zero = (dd == 0) & (dr == 0)
    degenerate = (dd == 0) ^ (dr == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.maximum(dr / dd, dd / dr)
    ratio = np.where(off & ~both_zero, ratio, 1.0)
    ratio = np.where(off & degenerate, np.inf, ratio)
    worst = ratio.reshape(perms.shape[0], -1).max(axis=1)
    best = int(np.argmin(worst))
    return max(float(worst[best]), 1.0), perms[best]
