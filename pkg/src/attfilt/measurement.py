"""Multi-rate measurement stream.

Gyro readings arrive every tick, direction sets every ``n``-th tick. Between
direction ticks the last body-frame set is carried forward with the measured
rates (:func:`propagate_directions`). Noise is bounded: the gyro error is
uniform in a ball, each direction is turned by a bounded angle about a
uniformly random axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from attfilt.so3 import expv
from attfilt.wahba import augment_two_vectors

DEG = math.pi / 180.0

# Directions in the default inertial pool: unit vectors, pairwise angles > 20 deg,
# and every triple has sigma_min / sigma_max > 0.08.
DEFAULT_POOL = np.array(
    [
        [-0.339042, 0.882647, 0.325553],
        [-0.866834, -0.161456, -0.471731],
        [0.173863, -0.080736, 0.981455],
        [0.228627, -0.791688, 0.566533],
        [-0.370468, 0.09288, 0.92419],
        [0.551214, 0.816488, 0.171786],
        [0.613811, -0.759243, 0.216299],
        [0.855144, 0.471601, -0.215225],
        [-0.609588, -0.387154, -0.691747],
    ]
)


@dataclass(frozen=True)
class NoiseConfig:
    direction_bound: float = 0.0  # deg
    gyro_bound: float = 0.0  # deg/s
    seed: int = 0

    def __post_init__(self):
        if not (self.direction_bound >= 0.0 and self.gyro_bound >= 0.0):
            raise ValueError("noise bounds must be non-negative")


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """Sensor record for tick ``index``.

    ``body`` (U^m) and ``inertial`` (E) are ``3 x k`` arrays, already augmented
    for two-direction measurements, or both ``None`` on gyro-only ticks. Rank
    is not checked here; the estimator decides what to do with a bad set.
    """

    index: int
    gyro: np.ndarray
    body: Optional[np.ndarray] = None
    inertial: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "gyro", np.asarray(self.gyro, dtype=float))
        if self.gyro.shape != (3,):
            raise ValueError(f"gyro reading must be a 3-vector, got shape {self.gyro.shape}")
        if self.body is not None:
            object.__setattr__(self, "body", np.asarray(self.body, dtype=float))
        if self.inertial is not None:
            object.__setattr__(self, "inertial", np.asarray(self.inertial, dtype=float))
        if (self.body is None) != (self.inertial is None):
            raise ValueError("body and inertial directions must come together")
        if self.body is not None and (
            self.body.shape != self.inertial.shape or self.body.shape[0] != 3
        ):
            raise ValueError(
                f"direction sets must both be 3 x k, got {self.body.shape} and {self.inertial.shape}"
            )

    @property
    def has_directions(self) -> bool:
        return self.body is not None


@dataclass(frozen=True, eq=False)
class PropagatedDirections:
    value: np.ndarray
    last_sync: int


def propagate_directions(
    prev: PropagatedDirections,
    gyro_prev,
    gyro_curr,
    h: float,
    frame: MeasurementFrame,
) -> PropagatedDirections:
    """Resync to a delivered set, otherwise rotate ``prev`` back by the
    trapezoidal increment of the measured rates."""
    if frame.body is not None:
        return PropagatedDirections(frame.body, frame.index)
    if h <= 0.0:
        raise ValueError("step size must be positive")
    step = expv(-0.5 * h * (np.asarray(gyro_prev) + np.asarray(gyro_curr)))
    return PropagatedDirections(step @ prev.value, prev.last_sync)


def random_unit_vectors(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_ball(rng: np.random.Generator, radius: float, size: int) -> np.ndarray:
    """``size`` points uniform in the ball of ``radius``, one per row."""
    directions = random_unit_vectors(rng, size)
    return directions * (radius * rng.random(size) ** (1.0 / 3.0))[:, None]


def sample_turns(rng: np.random.Generator, bound: float, size: int) -> np.ndarray:
    """Rotation vectors with uniform random axis and angle uniform in ``[0, bound]``."""
    axes = random_unit_vectors(rng, size)
    return axes * (bound * rng.random(size))[:, None]


def corrupt_gyro(truth, cfg: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """Add a zero-mean error drawn uniformly from the ball of radius ``cfg.gyro_bound``."""
    truth = np.asarray(truth, dtype=float)
    if cfg.gyro_bound == 0.0:
        return truth.copy()
    return truth + sample_ball(rng, cfg.gyro_bound * DEG, 1)[0]


def corrupt_directions(truth, cfg: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """Turn each column by at most ``cfg.direction_bound`` degrees.

    ``truth`` holds the raw (pre-augmentation) body-frame columns. A two-column
    input comes back augmented with the cross product of the corrupted pair.
    """
    cols = np.array(truth, dtype=float)
    k = cols.shape[1]
    if cfg.direction_bound > 0.0:
        turns = sample_turns(rng, cfg.direction_bound * DEG, k)
        for j in range(k):
            cols[:, j] = expv(turns[j]) @ cols[:, j]
    if k == 2:
        return augment_two_vectors(cols[:, 0], cols[:, 1])
    return cols


def generate_measurements(
    rotations: Sequence[np.ndarray],
    rates: Sequence[np.ndarray],
    n: int,
    noise: NoiseConfig,
    pool=DEFAULT_POOL,
    k_min: int = 2,
    k_max: int = 9,
) -> list[MeasurementFrame]:
    """Sensor stream for a truth trajectory.

    On direction ticks ``k`` is drawn from ``[k_min, k_max]`` and that many
    pool directions are picked without replacement. Selection, gyro noise and
    direction noise draw from independent child streams of ``noise.seed``, so
    zeroing the noise bounds leaves the selected directions unchanged.
    """
    if n < 1:
        raise ValueError("rate ratio n must be >= 1")
    pool = np.asarray(pool, dtype=float)
    pool = pool / np.linalg.norm(pool, axis=1, keepdims=True)
    if not (2 <= k_min <= k_max <= len(pool)):
        raise ValueError(f"need 2 <= k_min <= k_max <= {len(pool)}, got {k_min}, {k_max}")
    select_ss, gyro_ss, dir_ss = np.random.SeedSequence(noise.seed).spawn(3)
    select_rng = np.random.default_rng(select_ss)
    gyro_rng = np.random.default_rng(gyro_ss)
    dir_rng = np.random.default_rng(dir_ss)

    frames = []
    for i, (R, Omega) in enumerate(zip(rotations, rates)):
        gyro = corrupt_gyro(Omega, noise, gyro_rng)
        if i % n:
            frames.append(MeasurementFrame(i, gyro))
            continue
        k = int(select_rng.integers(k_min, k_max + 1))
        idx = select_rng.choice(len(pool), size=k, replace=False)
        E_raw = pool[idx].T
        body = corrupt_directions(R.T @ E_raw, noise, dir_rng)
        E = augment_two_vectors(E_raw[:, 0], E_raw[:, 1]) if k == 2 else E_raw
        frames.append(MeasurementFrame(i, gyro, body, E))
    return frames
