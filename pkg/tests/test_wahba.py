import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attfilt import wahba
from attfilt.so3 import expv, hat, principal_angle
from oracles import random_rotation, random_unit, wahba_double_sum


def _random_E(rng, k):
    while True:
        E = random_unit(rng, k).T
        s = np.linalg.svd(E, compute_uv=False)
        if s[2] > 0.05 * s[0]:
            return E


def test_augment_example():
    cols = wahba.augment_two_vectors([1.0, 0.0, 0.0], [1.0, 1.0, 0.0] / np.sqrt(2.0))
    assert np.allclose(cols[:, 2], [0.0, 0.0, 1.0 / np.sqrt(2.0)], rtol=0.0, atol=1e-15)
    assert cols.shape == (3, 3)


@pytest.mark.parametrize(
    "u2", [[1.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [1.0, 1e-8, 0.0], [0.0, 0.0, 0.0]]
)
def test_augment_rejects_parallel_or_zero(u2):
    with pytest.raises(wahba.DegenerateGeometryError):
        wahba.augment_two_vectors([1.0, 0.0, 0.0], u2)


def test_direction_set_checks():
    ds = wahba.DirectionSet.from_vectors([[1, 0, 0], [0, 1, 0]], frame="inertial")
    assert ds.k == 3 and ds.frame == "inertial"
    with pytest.raises(wahba.DegenerateGeometryError):
        wahba.DirectionSet(np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0]]).T)
    with pytest.raises(wahba.DegenerateGeometryError):
        wahba.DirectionSet.from_vectors([[1, 0, 0]])
    with pytest.raises(ValueError):
        wahba.DirectionSet(np.eye(3), frame="sensor")
    with pytest.raises(ValueError):
        ds.columns[0, 0] = 2.0


def test_weights_for_identity_set():
    w = wahba.build_weights(np.eye(3), d=(3.0, 2.0, 1.0))
    assert np.allclose(w.W, np.diag([3.0, 2.0, 1.0]), rtol=0.0, atol=1e-14)
    assert np.allclose(w.K, np.diag([3.0, 2.0, 1.0]), rtol=0.0, atol=1e-14)
    assert np.linalg.det(w.U_E) > 0


def test_weights_pin_eigenvalues_of_K():
    rng = np.random.default_rng(3)
    d = np.array([3.0, 2.0, 1.0])
    for trial in range(100):
        E = _random_E(rng, 3 + trial % 7)
        w = wahba.build_weights(E, d)
        assert np.allclose(E @ w.W @ E.T, w.K, rtol=0.0, atol=1e-12)
        assert np.allclose(np.linalg.eigvalsh(w.K)[::-1], d, rtol=0.0, atol=1e-9)
        assert abs(np.linalg.det(w.U_E) - 1.0) < 1e-12
        assert np.allclose(w.W, w.W.T, rtol=0.0, atol=0.0)


def test_positive_fill_keeps_K():
    rng = np.random.default_rng(4)
    E = _random_E(rng, 7)
    plain = wahba.build_weights(E)
    filled = wahba.build_weights(E, positive_fill=True)
    assert np.allclose(plain.K, filled.K, rtol=0.0, atol=1e-12)
    assert np.linalg.eigvalsh(plain.W).min() > -1e-12
    assert np.linalg.eigvalsh(filled.W).min() > 0.0


@pytest.mark.parametrize("d", [(2.0, 2.0, 1.0), (3.0, 2.0, 0.0), (3.0, -2.0, 1.0), (3.0, 2.0)])
def test_bad_eigenvalues_rejected(d):
    with pytest.raises(wahba.WeightError):
        wahba.build_weights(np.eye(3), d)


def test_rank_deficient_set_rejected():
    E = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0], [1, -1, 0]]).T
    with pytest.raises(wahba.DegenerateGeometryError):
        wahba.build_weights(E)


def test_potential_matches_double_sum():
    rng = np.random.default_rng(5)
    for k in (3, 5, 9):
        E = _random_E(rng, k)
        U = random_rotation(rng) @ E + 0.05 * rng.standard_normal(E.shape)
        Rhat = random_rotation(rng)
        w = wahba.build_weights(E, positive_fill=True)
        assert math.isclose(wahba.potential(Rhat, U, E, w), wahba_double_sum(E, U, Rhat, w.W), rel_tol=1e-12)


def test_potential_zero_for_consistent_data_and_phi_hook():
    rng = np.random.default_rng(6)
    E = _random_E(rng, 5)
    R = random_rotation(rng)
    w = wahba.build_weights(E)
    assert abs(wahba.potential(R, R.T @ E, E, w)) < 1e-13
    Rhat = random_rotation(rng)
    base = wahba.potential(Rhat, R.T @ E, E, w)
    assert wahba.potential(Rhat, R.T @ E, E, w, phi=lambda x: 2.0 * x + 1.0) == 2.0 * base + 1.0
    with pytest.raises(ValueError):
        wahba.potential(Rhat, (R.T @ E)[:, :4], E, w)


def test_exact_potential_is_attitude_cost():
    rng = np.random.default_rng(7)
    for _ in range(50):
        E = _random_E(rng, int(rng.integers(3, 10)))
        R, Rhat = random_rotation(rng), random_rotation(rng)
        w = wahba.build_weights(E)
        Q = R @ Rhat.T
        assert abs(wahba.potential(Rhat, R.T @ E, E, w) - wahba.attitude_cost(Q, w.K)) < 1e-10


def test_s_l_generates_the_s_k_term():
    # Rhat hat(S_L) Rhat^T = Q^T K - K Q when L = K R
    rng = np.random.default_rng(8)
    for _ in range(50):
        E = _random_E(rng, 6)
        R, Rhat = random_rotation(rng), random_rotation(rng)
        w = wahba.build_weights(E)
        Q = R @ Rhat.T
        L = E @ w.W @ (R.T @ E).T
        lhs = Rhat @ hat(wahba.s_l(Rhat, L)) @ Rhat.T
        assert np.allclose(lhs, Q.T @ w.K - w.K @ Q, rtol=0.0, atol=1e-10)
        assert np.allclose(wahba.s_k(Q.T, w.K), -Rhat @ wahba.s_l(Rhat, L), rtol=0.0, atol=1e-10)


def test_s_l_zero_at_truth():
    rng = np.random.default_rng(9)
    E = _random_E(rng, 4)
    R = random_rotation(rng)
    w = wahba.build_weights(E)
    assert np.allclose(wahba.s_l(R, E @ w.W @ (R.T @ E).T), 0.0, rtol=0.0, atol=1e-12)


def test_critical_points_for_diagonal_K():
    w = wahba.build_weights(np.eye(3), d=(3.0, 2.0, 1.0))
    points = wahba.critical_points(w)
    expected = [np.eye(3), np.diag([1.0, -1, -1]), np.diag([-1.0, 1, -1]), np.diag([-1.0, -1, 1])]
    for Q, ref in zip(points, expected):
        assert np.allclose(Q, ref, rtol=0.0, atol=1e-15)
    costs = [wahba.attitude_cost(Q, w.K) for Q in points]
    assert costs == [0.0, 6.0, 8.0, 10.0]


def test_critical_points_random_sets():
    rng = np.random.default_rng(10)
    for _ in range(100):
        w = wahba.build_weights(_random_E(rng, int(rng.integers(3, 10))), d=(3.0, 2.0, 1.0))
        points = wahba.critical_points(w)
        for Q in points:
            assert np.linalg.norm(wahba.s_k(Q, w.K)) < 1e-9
        costs = [wahba.attitude_cost(Q, w.K) for Q in points]
        assert np.allclose(costs, [0.0, 6.0, 8.0, 10.0], rtol=0.0, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_s_k_vanishes_only_on_critical_set(seed):
    rng = np.random.default_rng(seed)
    w = wahba.build_weights(_random_E(rng, 5), d=(3.0, 2.0, 1.0))
    Q = random_rotation(rng)
    distance = min(principal_angle(Q @ C.T) for C in wahba.critical_points(w))
    if distance > 0.1:
        assert np.linalg.norm(wahba.s_k(Q, w.K)) > 1e-6


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_identity_is_the_unique_minimum(seed):
    rng = np.random.default_rng(seed)
    K = wahba.build_weights(_random_E(rng, 4), d=(3.0, 2.0, 1.0)).K
    Q = random_rotation(rng)
    cost = wahba.attitude_cost(Q, K)
    assert cost >= -1e-12
    if principal_angle(Q) > 1e-3:
        assert cost > 0.0
    # small rotations cost about (1/2) v^T (tr K I - K) v
    v = 1e-4 * rng.standard_normal(3)
    quad = 0.5 * v @ (np.trace(K) * np.eye(3) - K) @ v
    assert math.isclose(wahba.attitude_cost(expv(v), K), quad, rel_tol=1e-3)
