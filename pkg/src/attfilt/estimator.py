"""Discrete-time geometric attitude and angular-velocity estimator.

One step, from tick ``i`` to ``i + 1``::

    L      = E W Ut^T,   s = vex(L^T Rhat - Rhat^T L)
    w'     = ((m - l) w + k_p h s) / (m + l)
    Ohat'  = gyro' - w'
    Rhat'  = Rhat expm((h/2) hat(Ohat' + Ohat))

``Ut`` is the body-frame direction set, resynced on direction ticks and
carried forward with the measured rates otherwise. ``E`` and ``W`` are held
between direction ticks.

The Lyapunov function ``V = k_p U + (m/2)|w|^2`` is evaluated with ``K`` held
at its tick-``i`` value across the step, which is the setting in which it is
non-increasing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from attfilt.measurement import MeasurementFrame, PropagatedDirections
from attfilt.so3 import expv
from attfilt.wahba import (
    DEFAULT_D,
    DegenerateGeometryError,
    WahbaWeights,
    WeightError,
    attitude_cost,
    build_weights,
    s_l,
)

log = logging.getLogger(__name__)

# dV matches -(l/2)|w' + w|^2 up to a splitting error bounded by
# DV_SLACK * k_p tr(K) h^2 |w' + w| (|w' + w| + |gyro' + gyro|),
# plus rounding in the potential, which is a difference of O(tr K) terms
DV_SLACK = 0.25
DV_ROUNDING = 64.0 * np.finfo(float).eps


class GainError(ValueError):
    pass


class StreamError(ValueError):
    pass


@dataclass(frozen=True)
class GainConfig:
    m: float = 100.0
    l: float = 40.0
    k_p: float = 150.0
    h: float = 0.01
    n: int = 10
    d: tuple = DEFAULT_D

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        if not self.m > 0.0:
            raise GainError(f"m must be positive, got {self.m}")
        if not self.l > 0.0:
            raise GainError(f"l must be positive, got {self.l}")
        if abs(self.l - self.m) < 1e-9 * max(self.l, self.m):
            raise GainError("l must differ from m")
        if not self.k_p > 0.0:
            raise GainError(f"k_p must be positive, got {self.k_p}")
        if not self.h > 0.0:
            raise GainError(f"h must be positive, got {self.h}")
        if int(self.n) != self.n or self.n < 1:
            raise GainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if len(self.d) != 3:
            raise GainError("d needs three entries")


@dataclass(frozen=True, eq=False)
class FilterState:
    Rhat: np.ndarray
    omega: np.ndarray
    Omega_hat: np.ndarray
    Utilde: PropagatedDirections
    index: int
    gyro: np.ndarray
    E: np.ndarray = field(repr=False)
    weights: WahbaWeights = field(repr=False)
    EW: np.ndarray = field(repr=False)
    # 1/2 (tr(E W E^T) + tr(Ut W Ut^T)); rotating Ut leaves it unchanged
    pot_const: float = field(repr=False, default=0.0)


@dataclass(frozen=True)
class LyapunovRecord:
    """Lyapunov bookkeeping for the step leaving tick ``index``.

    ``V``, ``potential`` and ``kinetic`` are tick-``index`` values; ``dV`` is
    ``V(index + 1) - V(index)`` with ``K`` frozen and ``dV_tol`` bounds
    ``|dV - dV_law|``. The potential comes from the measured directions; the
    ``true_*`` fields use ``Q = R Rhat^T`` and are only filled when the true
    attitude is supplied.
    """

    index: int
    V: float
    dV: float
    potential: float
    kinetic: float
    s: tuple
    dV_law: float
    dV_tol: float
    true_potential: Optional[float] = None
    true_V: Optional[float] = None
    true_dV: Optional[float] = None


@dataclass
class FilterHistory:
    states: list
    records: list

    def __len__(self):
        return len(self.states)


def _weights_for(E: np.ndarray, U: np.ndarray, cfg: GainConfig):
    weights = build_weights(E, cfg.d)
    pot_const = 0.5 * (float(np.trace(weights.K)) + float(np.sum((U @ weights.W) * U)))
    return weights, E @ weights.W, pot_const


def init_filter(Rhat0, omega0, first_frame: MeasurementFrame, cfg: GainConfig) -> FilterState:
    if not first_frame.has_directions:
        raise StreamError("the first frame must carry a direction measurement")
    E = np.asarray(first_frame.inertial, dtype=float)
    U = np.asarray(first_frame.body, dtype=float)
    weights, EW, pot_const = _weights_for(E, U, cfg)
    gyro = np.asarray(first_frame.gyro, dtype=float)
    omega0 = np.array(omega0, dtype=float)
    return FilterState(
        Rhat=np.array(Rhat0, dtype=float),
        omega=omega0,
        Omega_hat=gyro - omega0,
        Utilde=PropagatedDirections(U, first_frame.index),
        index=first_frame.index,
        gyro=gyro,
        E=E,
        weights=weights,
        EW=EW,
        pot_const=pot_const,
    )


def lyapunov_terms(state: FilterState, cfg: GainConfig) -> tuple[float, float]:
    """Measured-direction potential and kinetic term at ``state``."""
    L = state.EW @ state.Utilde.value.T
    return state.pot_const - float(np.vdot(L, state.Rhat)), 0.5 * cfg.m * float(state.omega @ state.omega)


def step(
    state: FilterState,
    frame_next: MeasurementFrame,
    cfg: GainConfig,
    truth: Optional[tuple] = None,
) -> tuple[FilterState, LyapunovRecord]:
    """Advance the estimate by one tick.

    ``truth`` is an optional ``(R_i, R_next)`` pair of true attitudes; when
    given, the record also carries the ``Q``-based Lyapunov values.
    """
    if frame_next.index != state.index + 1:
        raise StreamError(f"expected tick {state.index + 1}, got {frame_next.index}")
    m, l, k_p, h = cfg.m, cfg.l, cfg.k_p, cfg.h
    Rhat, Ut = state.Rhat, state.Utilde.value
    # 3-vector arithmetic on plain floats; numpy only for the matrix products
    c_w, c_s = (m - l) / (m + l), k_p * h / (m + l)
    w = state.omega.tolist()
    g0, g1 = state.gyro.tolist(), frame_next.gyro.tolist()

    L = state.EW @ Ut.T
    s = s_l(Rhat, L).tolist()
    w1 = [c_w * a + c_s * b for a, b in zip(w, s)]
    Oh1 = [a - b for a, b in zip(g1, w1)]
    Rhat_next = Rhat @ expv([(0.5 * h) * (a + b) for a, b in zip(Oh1, state.Omega_hat.tolist())])
    gs = [a + b for a, b in zip(g0, g1)]
    P = expv([(-0.5 * h) * a for a in gs])
    Ut_pred = P @ Ut

    # Wahba potential as pot_const - <L, Rhat>; the propagated set gives L P^T.
    potential = state.pot_const - float(np.vdot(L, Rhat))
    potential_next = state.pot_const - float(np.vdot(L @ P.T, Rhat_next))
    kinetic = 0.5 * m * sum(a * a for a in w)
    kinetic_next = 0.5 * m * sum(a * a for a in w1)
    V = k_p * potential + kinetic
    ws2 = sum((a + b) ** 2 for a, b in zip(w1, w))
    ws_norm = math.sqrt(ws2)
    trK = sum(cfg.d)
    dV_tol = DV_SLACK * k_p * trK * h * h * ws_norm * (ws_norm + math.sqrt(sum(a * a for a in gs)))
    dV_tol += DV_ROUNDING * k_p * (trK + state.pot_const)
    true_potential = true_V = true_dV = None
    if truth is not None:
        R, R_next = truth
        K = state.weights.K
        true_potential = attitude_cost(R @ Rhat.T, K)
        true_V = k_p * true_potential + kinetic
        true_dV = k_p * attitude_cost(R_next @ Rhat_next.T, K) + kinetic_next - true_V
    record = LyapunovRecord(
        index=state.index,
        V=V,
        dV=k_p * potential_next + kinetic_next - V,
        potential=potential,
        kinetic=kinetic,
        s=tuple(s),
        dV_law=-0.5 * l * ws2,
        dV_tol=dV_tol,
        true_potential=true_potential,
        true_V=true_V,
        true_dV=true_dV,
    )

    E, weights, EW, pot_const = state.E, state.weights, state.EW, state.pot_const
    Utilde = PropagatedDirections(Ut_pred, state.Utilde.last_sync)
    if frame_next.body is not None:
        try:
            weights, EW, pot_const = _weights_for(frame_next.inertial, frame_next.body, cfg)
        except (DegenerateGeometryError, WeightError) as exc:
            log.warning("tick %d: skipping direction resync (%s)", frame_next.index, exc)
        else:
            E = frame_next.inertial
            Utilde = PropagatedDirections(frame_next.body, frame_next.index)

    next_state = FilterState(
        Rhat=Rhat_next,
        omega=np.array(w1),
        Omega_hat=np.array(Oh1),
        Utilde=Utilde,
        index=frame_next.index,
        gyro=frame_next.gyro,
        E=E,
        weights=weights,
        EW=EW,
        pot_const=pot_const,
    )
    return next_state, record


def run(
    stream: Sequence[MeasurementFrame],
    Rhat0,
    omega0,
    cfg: GainConfig,
    true_rotations: Optional[Sequence[np.ndarray]] = None,
) -> FilterHistory:
    """Run the estimator over a tick-contiguous stream starting at tick 0."""
    if not stream:
        raise StreamError("empty measurement stream")
    for expected, frame in enumerate(stream):
        if frame.index != expected:
            raise StreamError(f"stream is not contiguous at position {expected} (tick {frame.index})")
    state = init_filter(Rhat0, omega0, stream[0], cfg)
    states, records = [state], []
    for i, frame in enumerate(stream[1:]):
        truth = None if true_rotations is None else (true_rotations[i], true_rotations[i + 1])
        state, record = step(state, frame, cfg, truth)
        states.append(state)
        records.append(record)
    return FilterHistory(states, records)


def discrete_identity_residual(w, w_next, s, cfg: GainConfig) -> float:
    """Norm of ``m (w' - w) - k_p h s + l (w' + w)``, zero for an exact update."""
    w, w_next, s = np.asarray(w), np.asarray(w_next), np.asarray(s)
    r = cfg.m * (w_next - w) - cfg.k_p * cfg.h * s + cfg.l * (w_next + w)
    return float(math.sqrt(float(r @ r)))
