import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpverify.dynamics import (
    ArchimedesInstance,
    DomainEdgeWarning,
    NotAnExpansionError,
    archimedes_check,
    csikos_derivative,
    fd_stencil,
    kp_defect,
    lifted_monotone_motion,
    linear_motion,
    proof_chain_check,
    total_volume_derivative_fd,
    triple_count_trace,
    wall_s_derivative_fd,
)
from kpverify.geometry import BallConfiguration, GeometryError, RadiusFamily, distance_matrix
from kpverify.measure import union_area_2d
from kpverify.power import wall
from kpverify.random_instances import expansion_pairs, no_halfspace_instance, random_archimedes_instance

from . import oracles


def cfg(centers, radii):
    return BallConfiguration.from_lists(centers, radii)


P1 = cfg([[0], [1]], [1, 1])
Q1 = cfg([[0], [2]], [1, 1])


def test_lifted_motion_distances():
    m = lifted_monotone_motion(P1, Q1)
    assert m.dimension == 2
    # cos^2(pi/4) * 1 + sin^2(pi/4) * 4
    assert m.distances(0.5)[0, 1] == pytest.approx(math.sqrt(2.5), abs=1e-14)
    np.testing.assert_allclose(m.positions(0.0), [[0, 0], [1, 0]], atol=1e-15)
    np.testing.assert_allclose(m.positions(1.0), [[0, 0], [0, 2]], atol=1e-15)


def test_lifted_distance_derivative_matches_fd():
    rng = np.random.default_rng(1)
    p, q = next(expansion_pairs(rng, 4, 2, 10**6))
    m = lifted_monotone_motion(p, q)
    for t in (0.1, 0.5, 0.9):
        fd = oracles.central_difference(lambda x: m.distances(x), t, 1e-6)
        np.testing.assert_allclose(m.distance_derivatives(t), fd, atol=1e-7)
        assert np.all(m.distance_derivatives(t) >= -1e-12)


def test_linear_distance_derivative_matches_fd():
    m = linear_motion(cfg([[0, 0], [1, 0], [0, 1]], [1, 1, 1]), cfg([[0, 0], [2, 1], [-1, 1]], [1, 1, 1]))
    fd = oracles.central_difference(lambda x: m.distances(x), 0.3, 1e-6)
    np.testing.assert_allclose(m.distance_derivatives(0.3), fd, atol=1e-7)


def test_static_motion_has_zero_derivatives():
    m = lifted_monotone_motion(P1, P1)
    np.testing.assert_allclose(m.distance_derivatives(0.4), 0.0, atol=1e-15)
    assert csikos_derivative(m, 0.4) == pytest.approx(0.0, abs=1e-15)


def test_lifted_endpoints_are_congruent():
    rng = np.random.default_rng(2)
    p, q = next(expansion_pairs(rng, 5, 2, 10**6))
    m = lifted_monotone_motion(p, q)
    # distances at t=0 and t=1 are those of p and q
    np.testing.assert_allclose(m.distances(0.0), distance_matrix(p), atol=1e-12)
    np.testing.assert_allclose(m.distances(1.0), distance_matrix(q), atol=1e-12)


def test_lifted_motion_monotone_on_grid():
    rng = np.random.default_rng(3)
    pairs = expansion_pairs(rng, 4, 2, 10**6)
    for p, q in (next(pairs) for _ in range(5)):
        m = lifted_monotone_motion(p, q)
        D = np.array([m.distances(t) for t in np.linspace(0, 1, 101)])
        assert np.all(np.diff(D, axis=0) >= -1e-12)


def test_motion_preconditions():
    with pytest.raises(NotAnExpansionError):
        lifted_monotone_motion(Q1, P1)
    with pytest.raises(GeometryError):
        linear_motion(P1, cfg([[0], [1], [2]], [1, 1, 1]))
    with pytest.raises(GeometryError):
        linear_motion(P1, cfg([[0], [1]], [1, 2]))


def test_csikos_two_disks_linear_motion():
    # distance 0.5 -> 1.5, so d' = 1 and at t = 0.5 the wall is the sqrt(3) chord
    m = linear_motion(cfg([[0, 0], [0.5, 0]], [1, 1]), cfg([[0, 0], [1.5, 0]], [1, 1]))
    assert csikos_derivative(m, 0.5) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert total_volume_derivative_fd(m, 0.5) == pytest.approx(math.sqrt(3), abs=1e-6)


def test_csikos_rejects_coincident_points_and_1d():
    m = linear_motion(cfg([[0, 0], [1, 0]], [1, 1]), cfg([[1, 0], [0, 0]], [1, 1]))
    with pytest.raises(GeometryError):
        csikos_derivative(m, 0.5)
    with pytest.raises(GeometryError):
        csikos_derivative(linear_motion(P1, Q1), 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_csikos_matches_fd_random_2d(seed):
    rng = np.random.default_rng(seed)
    p, q = next(expansion_pairs(rng, int(rng.integers(2, 5)), 1, 10**6, box=2.0))
    m = lifted_monotone_motion(p, q)
    t = float(rng.uniform(0.1, 0.9))
    formula = csikos_derivative(m, t)
    fd = total_volume_derivative_fd(m, t, h=1e-5)
    assert abs(formula - fd) <= 1e-5 * (1 + abs(formula))


def test_csikos_mc_in_3d():
    p = cfg([[0, 0, 0], [1, 0, 0], [0.4, 0.8, 0]], [1, 0.9, 0.8])
    q = cfg([[0, 0, 0], [1.3, 0, 0], [0.4, 1.1, 0.2]], [1, 0.9, 0.8])
    m = linear_motion(p, q)
    formula = csikos_derivative(m, 0.5, wall_measure="mc", samples=2 * 10**5, seed=1)
    fd = total_volume_derivative_fd(m, 0.5, h=1e-2, measure_mode="mc", samples=2 * 10**6, seed=2)
    err = math.hypot(formula.std_error, fd.std_error)
    assert abs(formula.value - fd.value) <= 3 * err + 1e-3
    with pytest.raises(GeometryError):
        csikos_derivative(m, 0.5, wall_measure="exact")


def test_fd_stencil_and_t_domain():
    assert fd_stencil(2, 0.1) == ([0.1, 0.0, -0.1], pytest.approx([100.0, -200.0, 100.0]))
    with pytest.raises(ValueError):
        fd_stencil(3, 0.1)
    m = linear_motion(cfg([[0, 0], [1, 0]], [1, 1]), cfg([[0, 0], [2, 0]], [1, 1]))
    with pytest.raises(ValueError):
        total_volume_derivative_fd(m, 0.0)


def test_wall_s_derivative_two_disks():
    w = wall(RadiusFamily(cfg([[0, 0], [1, 0]], [1, 1])), 0, 1)
    assert wall_s_derivative_fd(w, 0.0, 1) == pytest.approx(2 / math.sqrt(3), abs=1e-8)
    assert wall_s_derivative_fd(w, 0.0, 0) == pytest.approx(math.sqrt(3), abs=1e-15)
    # L'' = -1 / (2 (3/4)^{3/2})
    assert wall_s_derivative_fd(w, 0.0, 2, h=1e-4) == pytest.approx(-0.5 / 0.75**1.5, abs=1e-5)


def test_wall_s_derivative_domain_and_edge():
    w = wall(RadiusFamily(cfg([[0, 0], [2, 0]], [1, 1])), 0, 1)
    with pytest.warns(DomainEdgeWarning):
        wall_s_derivative_fd(w, 1e-6, 1, h=1e-5)
    with pytest.raises(ValueError):
        wall_s_derivative_fd(w, -1.0, 1, h=1e-2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        wall_s_derivative_fd(w, 0.5, 1, h=1e-5)


def test_archimedes_no_halfspace_is_exact():
    for n in (1, 2):
        res = archimedes_check(no_halfspace_instance(n, 1, 1.0), h=1e-5, samples=10**4)
        # Vol_{n+2}(B(sqrt(1+s))) differentiates to pi Vol_n(B(sqrt(1+s)))
        assert res.passed and abs(res.lhs - res.rhs) <= 1e-6
    assert archimedes_check(no_halfspace_instance(1, 1, 1.0), h=1e-5).rhs == pytest.approx(2 * math.pi)


def test_archimedes_random_instances():
    rng = np.random.default_rng(4)
    for n in (1, 2):
        for m in (1, 2):
            inst = random_archimedes_instance(rng, n, 1, m)
            assert archimedes_check(inst, samples=10**6, seed=int(rng.integers(1 << 30))).passed


def test_archimedes_k2_no_halfspace():
    res = archimedes_check(no_halfspace_instance(1, 2, 1.0), h=1e-3, samples=10**4)
    assert res.lhs == pytest.approx(res.rhs, abs=1e-4)


def test_archimedes_validation():
    with pytest.raises(GeometryError):
        ArchimedesInstance(1, 1, 1.0, np.zeros(3), np.eye(3)[:1], np.array([[0, 1, 0]]), np.array([0.0]))
    with pytest.raises(GeometryError):
        ArchimedesInstance(1, 1, -1.0, np.zeros(3), np.eye(3)[:1], np.zeros((0, 3)), np.zeros(0))


def test_proof_chain_examples():
    assert proof_chain_check(P1, P1, samples=10**5).lhs == 0.0
    assert proof_chain_check(P1, P1, samples=10**5).rhs == 0.0
    res = proof_chain_check(P1, Q1, samples=10**6, seed=3)
    assert res.lhs == pytest.approx(math.pi)
    assert res.passed
    big = proof_chain_check(P1.scaled(2.0), Q1.scaled(2.0), samples=10**5)
    assert big.lhs == pytest.approx(2 * math.pi)
    with pytest.raises(GeometryError):
        proof_chain_check(cfg([[0, 0]], [1]), cfg([[0, 0]], [1]))


def test_triple_trace_examples():
    far = cfg([[0, 0], [10, 0], [0, 10]], [1, 1, 1])
    rows = triple_count_trace(linear_motion(far, far), [0, 0.5, 1])
    assert all(r.total_triples == 0 and r.max_pair_count == 0 for r in rows)
    tri = cfg([[0, 0], [1, 0], [0.5, 0.8]], [1, 1, 1])
    spread = cfg([[0, 0], [4, 0], [2, 4]], [1, 1, 1])
    rows = triple_count_trace(linear_motion(tri, spread), np.linspace(0, 1, 11))
    counts = [r.total_triples for r in rows]
    assert counts[0] == 1 and counts[-1] == 0
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    with pytest.raises(ValueError):
        triple_count_trace(linear_motion(tri, tri), [0.5, 0.2])


def test_kp_defect_examples():
    assert kp_defect(P1, P1) == 0.0
    # lengths 3 -> 4 in d = 1
    assert kp_defect(P1, Q1) == pytest.approx(1.0)
    p = cfg([[0, 0], [1, 0]], [1, 1])
    q = cfg([[0, 0], [2, 0]], [1, 1])
    expected = 2 * math.pi - union_area_2d(RadiusFamily(p))
    assert kp_defect(p, q) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.2283696986087567, abs=1e-12)
    assert kp_defect(p.scaled(1.5), q.scaled(1.5)) == pytest.approx(2.25 * expected, rel=1e-12)
    mc = kp_defect(p, q, measure_mode="mc", samples=10**6, seed=5)
    assert mc.within(expected)
