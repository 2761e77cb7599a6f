"""Ground-truth rigid body: Euler's equations under sinusoidal torque (RK4) and
the trapezoidal exponential attitude update."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from attfilt.so3 import expv


@dataclass(frozen=True, eq=False)
class RigidBodyState:
    R: np.ndarray
    Omega: np.ndarray
    index: int = 0


def _vec(values) -> np.ndarray:
    return np.array(values, dtype=float)


@dataclass(frozen=True)
class DynamicsConfig:
    """Inertia (kg m^2) and the torque ``tau_j(t) = A_j sin(f_j t + phase_j)``."""

    inertia: np.ndarray = field(default_factory=lambda: np.diag([2.56, 3.01, 2.98]))
    torque_amplitudes: np.ndarray = field(default_factory=lambda: _vec([0.1, 0.2, 0.3]))
    torque_frequencies: np.ndarray = field(default_factory=lambda: _vec([1.0, np.pi / 2, np.pi / 5]))
    torque_phases: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        J = np.array(self.inertia, dtype=float)
        if J.shape != (3, 3) or not np.allclose(J, J.T, rtol=0.0, atol=1e-12):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(J).min() <= 0.0:
            raise ValueError("inertia must be positive definite")
        object.__setattr__(self, "inertia", J)
        for name in ("torque_amplitudes", "torque_frequencies", "torque_phases"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must have three entries")
            object.__setattr__(self, name, v)

    def __eq__(self, other):
        if not isinstance(other, DynamicsConfig):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("inertia", "torque_amplitudes", "torque_frequencies", "torque_phases")
        )

    def torque(self, t: float) -> np.ndarray:
        return self.torque_amplitudes * np.sin(self.torque_frequencies * t + self.torque_phases)


def step_kinematics(state: RigidBodyState, Omega_next, h: float) -> np.ndarray:
    """``R_{i+1} = R_i expm((h/2) hat(Omega_{i+1} + Omega_i))``."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    return state.R @ expv(0.5 * h * (np.asarray(Omega_next) + state.Omega))


def _euler_rhs(w, J, J_inv, tau):
    # J_inv @ ((J w) x w + tau), on plain floats
    w0, w1, w2 = w
    p0 = J[0][0] * w0 + J[0][1] * w1 + J[0][2] * w2
    p1 = J[1][0] * w0 + J[1][1] * w1 + J[1][2] * w2
    p2 = J[2][0] * w0 + J[2][1] * w1 + J[2][2] * w2
    g0 = p1 * w2 - p2 * w1 + tau[0]
    g1 = p2 * w0 - p0 * w2 + tau[1]
    g2 = p0 * w1 - p1 * w0 + tau[2]
    return (
        J_inv[0][0] * g0 + J_inv[0][1] * g1 + J_inv[0][2] * g2,
        J_inv[1][0] * g0 + J_inv[1][1] * g1 + J_inv[1][2] * g2,
        J_inv[2][0] * g0 + J_inv[2][1] * g1 + J_inv[2][2] * g2,
    )


def _rk4(w, J, J_inv, tau0, tau_mid, tau1, h):
    k1 = _euler_rhs(w, J, J_inv, tau0)
    k2 = _euler_rhs([a + 0.5 * h * b for a, b in zip(w, k1)], J, J_inv, tau_mid)
    k3 = _euler_rhs([a + 0.5 * h * b for a, b in zip(w, k2)], J, J_inv, tau_mid)
    k4 = _euler_rhs([a + h * b for a, b in zip(w, k3)], J, J_inv, tau1)
    return np.array(
        [a + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(w, k1, k2, k3, k4)]
    )


def step_dynamics(state: RigidBodyState, cfg: DynamicsConfig, h: float, t: float) -> np.ndarray:
    """Advance ``J dOmega/dt = (J Omega) x Omega + tau(t)`` by one RK4 step from time ``t``."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    return _rk4(
        state.Omega.tolist(),
        cfg.inertia.tolist(),
        np.linalg.inv(cfg.inertia).tolist(),
        cfg.torque(t).tolist(),
        cfg.torque(t + 0.5 * h).tolist(),
        cfg.torque(t + h).tolist(),
        h,
    )


def generate_trajectory(cfg: DynamicsConfig, R0, Omega0, h: float, N: int) -> list[RigidBodyState]:
    """``N + 1`` states starting from ``(R0, Omega0)`` at ``t = 0``."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if N < 0:
        raise ValueError("tick count must be non-negative")
    state = RigidBodyState(np.array(R0, dtype=float), np.array(Omega0, dtype=float), 0)
    states = [state]
    J = cfg.inertia.tolist()
    J_inv = np.linalg.inv(cfg.inertia).tolist()
    # torque at every half step, sampled once
    taus = cfg.torque((0.5 * h) * np.arange(2 * N + 1)[:, None]).tolist()
    for i in range(N):
        Omega_next = _rk4(state.Omega.tolist(), J, J_inv, taus[2 * i], taus[2 * i + 1], taus[2 * i + 2], h)
        R_next = state.R @ expv((0.5 * h) * (Omega_next + state.Omega))
        state = RigidBodyState(R_next, Omega_next, i + 1)
        states.append(state)
    return states
