"""End-to-end scenario runs: truth, measurements, estimator, metrics, files."""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from attfilt import estimator
from attfilt.harness import csvio
from attfilt.harness.scenario import Scenario
from attfilt.measurement import MeasurementFrame, NoiseConfig, generate_measurements
from attfilt.so3 import orthogonality_error, principal_angle
from attfilt.truth import RigidBodyState, generate_trajectory

log = logging.getLogger(__name__)

TAIL_SECONDS = 10.0
SWEEP_PARAMS = ("m", "l", "k_p", "direction_bound", "gyro_bound")


@dataclass
class RunReport:
    scenario: str
    seed: int
    noise_free: bool
    t: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    V: np.ndarray
    dV: np.ndarray  # NaN at the last tick
    potential: np.ndarray
    kinetic: np.ndarray
    Rhat: np.ndarray
    metrics: dict
    files: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "noise_free": self.noise_free,
            "metrics": self.metrics,
            "files": {k: str(v) for k, v in self.files.items()},
        }


def settling_time(t: np.ndarray, values: np.ndarray, threshold: float) -> float:
    """First time after which ``values`` stays below ``threshold``; ``inf`` if it never does."""
    above = np.nonzero(values >= threshold)[0]
    if len(above) == 0:
        return float(t[0])
    if above[-1] == len(values) - 1:
        return math.inf
    return float(t[above[-1] + 1])


def decay_rate(t: np.ndarray, phi: np.ndarray, start: float = 0.1, floor: float = 1e-8) -> float:
    """Slope of a least-squares fit of ``-log(phi)`` against ``t``.

    The fit uses the samples after ``phi`` first drops below ``start`` that
    still sit above ``floor`` and above ten times the final-10 s maximum, so a
    noise band does not flatten the estimate. ``nan`` if fewer than ten
    samples qualify.
    """
    tail = t >= t[-1] - TAIL_SECONDS
    lower = max(floor, 10.0 * float(phi[tail].max()))
    below = np.nonzero(phi < start)[0]
    if len(below) == 0:
        return math.nan
    idx = np.arange(below[0], len(phi))
    idx = idx[phi[idx] > lower]
    if len(idx) < 10:
        return math.nan
    slope = np.polyfit(t[idx], np.log(phi[idx]), 1)[0]
    return float(-slope)


def effective_noise(s: Scenario, seed: Optional[int] = None, noise_free: bool = False) -> NoiseConfig:
    noise = s.noise
    if seed is not None:
        noise = dataclasses.replace(noise, seed=seed)
    if noise_free:
        noise = dataclasses.replace(noise, direction_bound=0.0, gyro_bound=0.0)
    return noise


def simulate_truth(s: Scenario) -> list[RigidBodyState]:
    return generate_trajectory(s.dynamics, s.R0, s.angular_velocity, s.gains.h, s.steps)


def simulate_measurements(s: Scenario, truth: Sequence[RigidBodyState], noise: NoiseConfig):
    return generate_measurements(
        [st.R for st in truth],
        [st.Omega for st in truth],
        s.gains.n,
        noise,
        pool=np.array(s.pool),
        k_min=s.k_min,
        k_max=s.k_max,
    )


def run_scenario(
    s: Scenario,
    *,
    seed: Optional[int] = None,
    noise_free: bool = False,
    csv_dir=None,
    include_rhat: bool = False,
    truth: Optional[Sequence[RigidBodyState]] = None,
    stream: Optional[Sequence[MeasurementFrame]] = None,
) -> RunReport:
    """Simulate ``s`` and score the estimator against the true trajectory.

    ``truth`` and ``stream`` may be passed in to reuse a trajectory or replay
    a recorded measurement stream; they are generated from the scenario
    otherwise.
    """
    noise = effective_noise(s, seed, noise_free)
    if truth is None:
        truth = simulate_truth(s)
    if stream is None:
        stream = simulate_measurements(s, truth, noise)
    if len(stream) != len(truth):
        raise ValueError(f"stream has {len(stream)} ticks, truth has {len(truth)}")
    rotations = [st.R for st in truth]
    history = estimator.run(stream, s.Rhat0, s.omega_error, s.gains, rotations)

    h = s.gains.h
    states, records = history.states, history.records
    t = h * np.arange(len(states))
    Rhat = np.array([st.Rhat for st in states])
    phi = np.array([principal_angle(R @ Rh.T) for R, Rh in zip(rotations, Rhat)])
    omega = np.array([st.omega for st in states])
    last_pot, last_kin = estimator.lyapunov_terms(states[-1], s.gains)
    potential = np.array([r.potential for r in records] + [last_pot])
    kinetic = np.array([r.kinetic for r in records] + [last_kin])
    V = s.gains.k_p * potential + kinetic
    dV = np.array([r.dV for r in records] + [math.nan])

    report = RunReport(
        scenario=s.name,
        seed=noise.seed,
        noise_free=noise.direction_bound == 0.0 and noise.gyro_bound == 0.0,
        t=t,
        phi=phi,
        omega=omega,
        V=V,
        dV=dV,
        potential=potential,
        kinetic=kinetic,
        Rhat=Rhat,
        metrics=_metrics(t, phi, omega, dV, Rhat),
    )
    if csv_dir is not None:
        out = Path(csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.files["truth_csv"] = csvio.write_truth_csv(out / "truth.csv", truth, h)
        report.files["estimate_csv"] = csvio.write_estimate_csv(out / "estimate.csv", report, include_rhat)
        report.files["measurements_csv"] = csvio.write_measurements_csv(out / "measurements.csv", stream)
    return report


def _metrics(t, phi, omega, dV, Rhat) -> dict:
    w = np.linalg.norm(omega, axis=1)
    tail = t >= t[-1] - TAIL_SECONDS
    finite_dV = dV[~np.isnan(dV)]
    return {
        "final_phi_rad": float(phi[-1]),
        "final_omega_norm": float(w[-1]),
        "max_phi_last10s": float(phi[tail].max()),
        "max_omega_last10s": float(w[tail].max()),
        "mean_phi_last10s": float(phi[tail].mean()),
        "mean_omega_last10s": float(w[tail].mean()),
        "time_to_phi_1e-2": settling_time(t, phi, 1e-2),
        "time_to_phi_1e-3": settling_time(t, phi, 1e-3),
        "phi_decay_rate": decay_rate(t, phi),
        "max_dV": float(finite_dV.max()) if len(finite_dV) else 0.0,
        "max_orthogonality_error": max(orthogonality_error(R) for R in Rhat[:: max(1, len(Rhat) // 100)]),
    }


def _sweep_one(args):
    s, seed, noise_free = args
    return run_scenario(s, seed=seed, noise_free=noise_free).metrics


def with_param(s: Scenario, param: str, value: float) -> Scenario:
    if param in ("m", "l", "k_p"):
        return dataclasses.replace(s, gains=dataclasses.replace(s.gains, **{param: value}))
    if param in ("direction_bound", "gyro_bound"):
        return dataclasses.replace(s, noise=dataclasses.replace(s.noise, **{param: value}))
    raise ValueError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def sweep(
    s: Scenario,
    param: str,
    values: Sequence[float],
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    noise_free: bool = False,
    jobs: int = 1,
) -> list[dict]:
    """Seed-averaged metrics for each value of one gain or noise parameter."""
    variants = [with_param(s, param, v) for v in values]
    tasks = [(v, seed, noise_free) for v in variants for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(task) for task in tasks]
    rows = []
    for i, value in enumerate(values):
        chunk = results[i * len(seeds) : (i + 1) * len(seeds)]
        row = {"param": param, "value": value, "seeds": list(seeds)}
        for key in chunk[0]:
            row[key] = float(np.mean([m[key] for m in chunk]))
        rows.append(row)
    return rows
