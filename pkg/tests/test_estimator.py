import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attfilt import estimator as est
from attfilt.measurement import MeasurementFrame, NoiseConfig, generate_measurements
from attfilt.so3 import orthogonality_error, principal_angle
from attfilt.truth import DynamicsConfig, generate_trajectory
from attfilt.wahba import build_weights, potential
from oracles import random_rotation, random_unit, series_expm, skew

CFG = est.GainConfig()  # m = 100, l = 40, k_p = 150, h = 0.01, n = 10
W0 = np.array([-1.2, 2.1, -1.9]) * math.pi / 60


def _world(N=600, seed=0, noise=NoiseConfig()):
    rng = np.random.default_rng(100 + seed)
    traj = generate_trajectory(DynamicsConfig(), random_rotation(rng), W0, CFG.h, N)
    rotations = [s.R for s in traj]
    stream = generate_measurements(rotations, [s.Omega for s in traj], CFG.n, noise)
    return rotations, stream


def _L(E, U, d=CFG.d):
    # independent of the filter's cached products
    return E @ build_weights(E, d).W @ U.T


def _s(Rhat, L):
    M = L.T @ Rhat - Rhat.T @ L
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def test_gain_validation():
    for kwargs in (dict(l=100.0), dict(m=0.0), dict(l=-1.0), dict(k_p=0.0), dict(h=0.0), dict(n=0), dict(n=2.5), dict(d=(1.0, 2.0))):
        with pytest.raises(est.GainError):
            est.GainConfig(**kwargs)
    assert est.GainConfig(l=150.0).l == 150.0


def test_first_frame_must_carry_directions():
    with pytest.raises(est.StreamError):
        est.init_filter(np.eye(3), np.zeros(3), MeasurementFrame(0, np.zeros(3)), CFG)


def test_stream_contiguity():
    rotations, stream = _world(30)
    with pytest.raises(est.StreamError):
        est.run([], np.eye(3), np.zeros(3), CFG)
    with pytest.raises(est.StreamError):
        est.run(stream[:5] + stream[6:], np.eye(3), np.zeros(3), CFG)
    with pytest.raises(est.StreamError):
        est.run(stream[1:], np.eye(3), np.zeros(3), CFG)
    state = est.init_filter(np.eye(3), np.zeros(3), stream[0], CFG)
    with pytest.raises(est.StreamError):
        est.step(state, stream[2], CFG)


def test_single_frame_history():
    _, stream = _world(0)
    history = est.run(stream, np.eye(3), np.zeros(3), CFG)
    assert len(history) == 1 and history.records == []


def test_one_step_by_hand():
    rng = np.random.default_rng(30)
    E = random_unit(rng, 5).T
    R, Rhat = random_rotation(rng), random_rotation(rng)
    U = R.T @ E
    w = np.array([0.01, -0.02, 0.03])
    g0, g1 = np.array([0.1, 0.2, -0.3]), np.array([0.11, 0.19, -0.31])
    state = est.init_filter(Rhat, w, MeasurementFrame(0, g0, U, E), CFG)
    nxt, record = est.step(state, MeasurementFrame(1, g1), CFG)

    s = _s(Rhat, _L(E, U))
    w1 = (60.0 * w + 1.5 * s) / 140.0
    assert np.allclose(record.s, s, rtol=1e-12, atol=1e-13)
    assert np.allclose(nxt.omega, w1, rtol=1e-12, atol=1e-15)
    Ohat0, Ohat1 = g0 - w, g1 - w1
    assert np.allclose(nxt.Rhat, Rhat @ series_expm(skew(0.005 * (Ohat0 + Ohat1))), rtol=0.0, atol=1e-14)
    assert np.allclose(nxt.Utilde.value, series_expm(skew(-0.005 * (g0 + g1))) @ U, rtol=0.0, atol=1e-14)
    assert nxt.Utilde.last_sync == 0


def test_estimated_rate_is_gyro_minus_bias():
    rotations, stream = _world(300, noise=NoiseConfig(2.4, 0.97, seed=1))
    history = est.run(stream, np.eye(3), np.zeros(3), CFG)
    for state, frame in zip(history.states, stream):
        assert np.allclose(state.Omega_hat + state.omega, frame.gyro, rtol=0.0, atol=4e-16 * (1 + np.abs(frame.gyro)))


def test_discrete_identity_holds_every_step():
    rotations, stream = _world(600, noise=NoiseConfig(2.4, 0.97, seed=2))
    history = est.run(stream, random_rotation(np.random.default_rng(31)), [0.01, 0.0, -0.01], CFG)
    for prev, nxt, rec in zip(history.states, history.states[1:], history.records):
        assert est.discrete_identity_residual(prev.omega, nxt.omega, rec.s, CFG) <= 1e-12


def test_exact_start_stays_exact():
    rotations, stream = _world(6000)
    history = est.run(stream, rotations[0], np.zeros(3), CFG)
    assert max(principal_angle(R @ s.Rhat.T) for R, s in zip(rotations, history.states)) < 1e-12
    assert max(np.linalg.norm(s.omega) for s in history.states) < 1e-14


def test_estimate_stays_on_so3():
    rotations, stream = _world(6000, noise=NoiseConfig(2.4, 0.97, seed=3))
    history = est.run(stream, random_rotation(np.random.default_rng(32)), np.zeros(3), CFG)
    assert max(orthogonality_error(s.Rhat) for s in history.states) < 1e-10


def test_online_potential_is_the_wahba_cost():
    rotations, stream = _world(120, noise=NoiseConfig(2.4, 0.97, seed=4))
    history = est.run(stream, random_rotation(np.random.default_rng(33)), np.zeros(3), CFG, rotations)
    for state, rec in zip(history.states, history.records):
        direct = potential(state.Rhat, state.Utilde.value, state.E, state.weights)
        assert abs(rec.potential - direct) <= 1e-12 * max(1.0, direct)


def test_noise_free_potential_matches_attitude_cost():
    rotations, stream = _world(600)
    history = est.run(stream, random_rotation(np.random.default_rng(34)), np.zeros(3), CFG, rotations)
    for rec in history.records:
        assert abs(rec.potential - rec.true_potential) < 1e-9
        assert abs(rec.dV - rec.true_dV) < 1e-8


@settings(max_examples=300, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(0.0, 0.5),
    st.floats(0.0, 3.0),
    st.sampled_from([(100.0, 40.0, 150.0), (100.0, 99.0, 300.0), (10.0, 40.0, 5.0), (1.0, 0.5, 1000.0)]),
)
def test_lyapunov_decrease_law(seed, w_scale, gyro_scale, gains):
    m, l, k_p = gains
    cfg = est.GainConfig(m=m, l=l, k_p=k_p)
    rng = np.random.default_rng(seed)
    E = random_unit(rng, int(rng.integers(3, 10))).T
    if np.linalg.svd(E, compute_uv=False)[2] < 0.05:
        return
    U = random_rotation(rng).T @ E + 0.02 * rng.standard_normal(E.shape)
    g0, g1 = gyro_scale * random_unit(rng), gyro_scale * random_unit(rng)
    state = est.init_filter(random_rotation(rng), w_scale * rng.standard_normal(3), MeasurementFrame(0, g0, U, E), cfg)
    _, rec = est.step(state, MeasurementFrame(1, g1), cfg)
    assert abs(rec.dV - rec.dV_law) <= rec.dV_tol
    assert rec.dV <= rec.dV_tol


def test_lyapunov_decrease_over_a_run():
    rotations, stream = _world(6000, noise=NoiseConfig(2.4, 0.97, seed=5))
    history = est.run(stream, random_rotation(np.random.default_rng(35)), [0.05, -0.05, 0.02], CFG)
    for rec in history.records:
        assert abs(rec.dV - rec.dV_law) <= rec.dV_tol
        assert rec.dV <= rec.dV_tol


def test_run_is_deterministic():
    rotations, stream = _world(200, noise=NoiseConfig(2.4, 0.97, seed=6))
    a = est.run(stream, rotations[0], [0.01, 0.0, 0.0], CFG)
    b = est.run(stream, rotations[0], [0.01, 0.0, 0.0], CFG)
    for sa, sb in zip(a.states, b.states):
        assert np.array_equal(sa.Rhat, sb.Rhat) and np.array_equal(sa.omega, sb.omega)


def test_degenerate_resync_is_skipped(caplog):
    rng = np.random.default_rng(36)
    E = random_unit(rng, 4).T
    g = np.array([0.1, 0.0, 0.0])
    state = est.init_filter(np.eye(3), np.zeros(3), MeasurementFrame(0, g, E, E), CFG)
    flat = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0]]).T
    with caplog.at_level(logging.WARNING, logger="attfilt.estimator"):
        nxt, _ = est.step(state, MeasurementFrame(1, g, flat, flat), CFG)
    assert "skipping direction resync" in caplog.text
    assert np.array_equal(nxt.E, E)
    assert nxt.Utilde.last_sync == 0
    assert np.allclose(nxt.Utilde.value, series_expm(skew(-0.01 * g)) @ E, rtol=0.0, atol=1e-15)
