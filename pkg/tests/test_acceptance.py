"""Acceptance gate: every stated criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass line
per criterion.
"""

import time

import numpy as np
import pytest

import coarsegeom as cg
from conftest import (
    diameter_scales,
    random_bounded_function,
    random_cloud_space,
    random_graph_space,
    random_net_bijection,
    random_space,
)
from test_convexity import brute_force_chain_table


def report(n, detail):
    print(f"\n[acceptance {n}] PASS — {detail}")


def test_criterion_1_net_lemma_suite():
    start = time.monotonic()
    rng = np.random.default_rng(10)
    checked = 0
    for _ in range(100):
        space = random_space(rng, n_max=64)
        for K in diameter_scales(space):
            net = cg.greedy_separated_net(space, K)
            if len(net) >= 2:
                assert cg.separation_of(space, net.members) > K
            assert cg.cover_radius_of(space, net.members) <= K

            refined = cg.refine_net(space, net, K)
            assert set(refined.members.tolist()) <= set(net.members.tolist())
            if len(refined) >= 2:
                assert cg.separation_of(space, refined.members) > K
            assert cg.cover_radius_of(space, refined.members) <= 2 * K
            checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report(1, f"{checked} greedy/refine constructions verified in {elapsed:.2f}s")


def _extension_instances(count):
    rng = np.random.default_rng(20)
    for _ in range(count):
        yield random_net_bijection(rng, n_max=64)


def test_criterion_2_extension_certificate():
    start = time.monotonic()
    for dom, rng_space, f in _extension_instances(200):
        pair, cert = cg.extend_net_map(dom, rng_space, f)
        C, K = f.measured_C, f.K
        assert pair.forward.lam <= C + 1e-9
        assert pair.backward.lam <= C + 1e-9
        assert cert["measured"]["c"] <= 2 * C * K + 1e-9
        assert cert["measured"]["R"] <= K + 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(2, f"200 extensions within (C, 2CK, K) in {elapsed:.2f}s")


def test_criterion_3_restriction_certificate():
    start = time.monotonic()
    count = 0
    for dom, rng_space, f in _extension_instances(200):
        pair, _ = cg.extend_net_map(dom, rng_space, f)
        lam, c, R = pair.lam, pair.c, pair.closeness
        for eps in (0.5, 1.0, 2.0):
            bijection, rep = cg.restrict_equivalence(dom, rng_space, pair, eps)
            assert len(set(bijection.image.tolist())) == len(bijection.image)
            assert (
                rep["measured"]["range_cover"]
                <= R + 2 * lam * R + lam * c + lam * eps + c + 1e-9
            )
            assert rep["measured"]["C"] <= lam * (1 + (2 * R + c) / eps) + 1e-9
            assert rep["measured"]["eq_slack"] <= 2 * R + c + 1e-9
            count += 1
    elapsed = time.monotonic() - start
    report(3, f"{count} restrictions within the stated bounds in {elapsed:.2f}s")


def _assert_skeleton_bounds(space, c, graph, rep):
    members = graph.vertices.members
    sub = space.dist[np.ix_(members, members)]
    off = ~np.eye(len(members), dtype=bool)
    if off.any():
        slope = rep["claimed_slope"]
        assert (graph.hop[off] <= slope * sub[off]).all()
        assert (sub[off] <= 3 * c * graph.hop[off]).all()


def test_criterion_4_geodesic_graph_certificate():
    line21 = cg.line_space(21)
    graph, rep = cg.build_geodesic_graph(line21, 1.0)
    _assert_skeleton_bounds(line21, 1.0, graph, rep)

    grid = cg.from_point_cloud(
        [[i, j] for i in range(10) for j in range(10)], "manhattan"
    )
    graph, rep = cg.build_geodesic_graph(grid, 1.0)
    _assert_skeleton_bounds(grid, 1.0, graph, rep)

    rng = np.random.default_rng(40)
    built = 0
    while built < 50:
        if built % 2:
            space = random_graph_space(rng, int(rng.integers(6, 33)), unit=True)
            c = 1.0
        else:
            space = random_cloud_space(rng, int(rng.integers(6, 33)))
            thresholds = np.unique(space.dist[space.dist > 0])
            if thresholds.size == 0:
                continue
            c = None
            for cand in thresholds:
                if cg.chain_metric(space, float(cand)).is_connected():
                    c = float(cand) * 1.25
                    break
        graph, rep = cg.build_geodesic_graph(space, c)
        _assert_skeleton_bounds(space, c, graph, rep)
        built += 1
    report(4, "interval, 10x10 L1 grid, and 50 random instances certified exactly")


def test_criterion_5_oracle_equivalence():
    rng = np.random.default_rng(50)
    for _ in range(50):
        space = random_space(rng, n_max=7)
        q = space.diameter() or 1.0
        for c in (q / 3, q / 2, q):
            if c <= 0:
                continue
            cm = cg.chain_metric(space, c)
            oracle = brute_force_chain_table(space, c)
            assert np.allclose(cm.table, oracle, atol=1e-9)

    for _ in range(25):
        n = int(rng.integers(2, 8))
        dom = cg.from_point_cloud(rng.uniform(0, 10, size=(n, 2)))
        rng_space = cg.from_point_cloud(rng.uniform(0, 10, size=(n, 2)))
        c_star, pairing = cg.min_distortion_bruteforce(dom, rng_space)
        measured = cg.measure_distortion(dom, rng_space, np.arange(n), pairing)
        assert measured.min_C == pytest.approx(c_star, abs=1e-12)
    report(5, "chain metric matches brute-force chains; oracle optimizer confirmed")


def test_criterion_6_higson_algebra():
    rng = np.random.default_rng(60)
    tol = 1e-12
    for _ in range(100):
        space = random_space(rng, n_max=20)
        target = random_space(rng, n_max=20)
        f = random_bounded_function(rng, target.n)
        g = random_bounded_function(rng, target.n)
        mapping = rng.integers(0, target.n, size=space.n)
        lam = 1.0 + float(rng.uniform(0, 2))
        slack, _ = cg.additive_slack(space, target, mapping, lam)
        c = max(slack, 0.0)
        r = float(rng.uniform(0, target.diameter() or 1.0))

        grad_f = cg.expansion(target, f, r).values
        grad_g = cg.expansion(target, g, r).values
        assert (cg.expansion(target, f + g, r).values <= grad_f + grad_g + tol).all()
        assert (
            cg.expansion(target, f * g, r).values
            <= f.sup_norm * grad_g + g.sup_norm * grad_f + tol
        ).all()
        assert (grad_f <= cg.expansion(target, f, r + 1.0).values + tol).all()
        pullback = cg.expansion(space, f.compose(mapping), r).values
        pushed = cg.expansion(target, f, lam * r + c).values[mapping]
        assert (pullback <= pushed + tol).all()
    report(6, "subadditivity, product rule, monotonicity, pullback at 1e-12")


def test_criterion_7_bump_function_bound():
    space = cg.line_space(361)
    centers, radii = [10, 50, 200], [5.0, 20.0, 80.0]
    bump = cg.bump_function(space, centers, radii, base=0)
    for center, radius in zip(centers, radii):
        ball = cg.closed_ball(space, center, radius)
        for rho in (1.0, radius / 4, radius / 2):
            field = cg.expansion(space, bump, rho)
            # equality cases differ by one ulp (0.4 - 0.2 in binary64)
            assert field.values[ball].max() <= rho / radius + 1e-12
    profile = cg.decay_profile(space, bump, 1.0, 0, [0, 30, 90, 200])
    assert profile.final_level() < 0.05
    report(7, f"per-ball slope bounds hold; tail level {profile.final_level():.4f} < 0.05")


def test_criterion_8_squares_cubes_separation():
    start = time.monotonic()
    for k in range(2, 21):
        cubes = cg.from_point_cloud([[float(n ** 3)] for n in range(1, k + 1)])
        squares = cg.from_point_cloud([[float(n * n)] for n in range(1, k + 1)])
        profile = cg.expansiveness_profile(cubes, squares, np.arange(k))
        assert all(s <= r for r, s in profile)

    c_stars = []
    for k in range(2, 8):
        squares = cg.from_point_cloud([[float(n * n)] for n in range(1, k + 1)])
        cubes = cg.from_point_cloud([[float(n ** 3)] for n in range(1, k + 1)])
        c_star, _ = cg.min_distortion_bruteforce(squares, cubes)
        c_stars.append(c_star)
    assert all(b >= a for a, b in zip(c_stars, c_stars[1:]))
    assert c_stars[-1] > c_stars[0]
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    report(8, f"distance decreasing up to k=20; C*(2..7)={[round(v, 3) for v in c_stars]}")


def test_criterion_9_partition_pipeline_at_scale():
    space = cg.line_space(10_000)
    K = 16.0
    start = time.monotonic()
    net = cg.greedy_separated_net(space, K)
    partition = cg.borel_partition(space, net, K)
    f_members = cg.BoundedFunction(np.sqrt(net.members.astype(float)))
    extended = cg.partition_extend(space, partition, f_members)
    profile = cg.decay_profile(space, extended, 1.0, 0, [0, 2500, 5000, 9000])
    elapsed = time.monotonic() - start

    owner = partition.cell_index(space.n)
    assert (owner >= 0).all()
    assert sum(len(cell) for cell in partition.cells.values()) == space.n
    for x, cell in partition.cells.items():
        assert owner[x] == x
        assert space.dist[x, cell].max() <= K
    assert np.array_equal(extended.values[net.members], f_members.values)
    assert elapsed < 10.0
    levels = [level for _, level in profile.samples]
    assert all(a >= b for a, b in zip(levels, levels[1:]))
    report(9, f"{len(net)}-member pipeline on 10^4 points in {elapsed:.2f}s")
