"""CSV schemas for truth trajectories, estimate histories and measurement streams.

Floats are written with ``repr`` so a read-back is bit-exact.

Column orders::

    truth.csv         i, t, R00..R22, wx, wy, wz
    estimate.csv      i, t, phi_rad, wx, wy, wz, V, dV, potential, kinetic
                      [, Rhat00..Rhat22]
    measurements.csv  i, wx, wy, wz, has_dirs, k, u1x, u1y, u1z, ..., u9z,
                      e1x, e1y, e1z, ..., e9z

Rotation entries are row-major. In the measurement file ``k`` counts stored
columns (a two-direction measurement is stored augmented, so ``k = 3``);
direction cells are left empty on gyro-only ticks and past column ``k``.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from attfilt.measurement import MeasurementFrame

MAX_COLUMNS = 9
_RIJ = [f"{i}{j}" for i in range(3) for j in range(3)]
TRUTH_HEADER = ["i", "t"] + [f"R{ij}" for ij in _RIJ] + ["wx", "wy", "wz"]
ESTIMATE_HEADER = ["i", "t", "phi_rad", "wx", "wy", "wz", "V", "dV", "potential", "kinetic"]
RHAT_HEADER = [f"Rhat{ij}" for ij in _RIJ]
MEASUREMENT_HEADER = (
    ["i", "wx", "wy", "wz", "has_dirs", "k"]
    + [f"u{j}{c}" for j in range(1, MAX_COLUMNS + 1) for c in "xyz"]
    + [f"e{j}{c}" for j in range(1, MAX_COLUMNS + 1) for c in "xyz"]
)


def _f(x) -> str:
    return repr(float(x))


def write_truth_csv(path, states, h: float) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRUTH_HEADER)
        for s in states:
            w.writerow([s.index, _f(s.index * h)] + [_f(x) for x in s.R.ravel()] + [_f(x) for x in s.Omega])
    return path


def write_estimate_csv(path, report, include_rhat: bool = False) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ESTIMATE_HEADER + (RHAT_HEADER if include_rhat else []))
        for i in range(len(report.t)):
            dV = "" if np.isnan(report.dV[i]) else _f(report.dV[i])
            row = [i, _f(report.t[i]), _f(report.phi[i])]
            row += [_f(x) for x in report.omega[i]]
            row += [_f(report.V[i]), dV, _f(report.potential[i]), _f(report.kinetic[i])]
            if include_rhat:
                row += [_f(x) for x in report.Rhat[i].ravel()]
            w.writerow(row)
    return path


def write_measurements_csv(path, frames: Sequence[MeasurementFrame]) -> Path:
    path = Path(path)
    blank = [""] * (3 * MAX_COLUMNS)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MEASUREMENT_HEADER)
        for fr in frames:
            row = [fr.index] + [_f(x) for x in fr.gyro]
            if fr.body is None:
                w.writerow(row + [0, 0] + blank + blank)
                continue
            k = fr.body.shape[1]
            if k > MAX_COLUMNS:
                raise ValueError(f"tick {fr.index}: {k} columns exceed the {MAX_COLUMNS}-column schema")
            pad = [""] * (3 * (MAX_COLUMNS - k))
            row += [1, k]
            row += [_f(x) for x in fr.body.T.ravel()] + pad
            row += [_f(x) for x in fr.inertial.T.ravel()] + pad
            w.writerow(row)
    return path


def read_measurements_csv(path) -> list[MeasurementFrame]:
    frames = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != MEASUREMENT_HEADER:
            raise ValueError(f"{path}: unexpected measurement header")
        for line_no, row in enumerate(reader, start=2):
            try:
                i = int(row[0])
                gyro = np.array([float(x) for x in row[1:4]])
                if int(row[4]) == 0:
                    frames.append(MeasurementFrame(i, gyro))
                    continue
                k = int(row[5])
                u = row[6 : 6 + 3 * MAX_COLUMNS][: 3 * k]
                e = row[6 + 3 * MAX_COLUMNS :][: 3 * k]
                body = np.array([float(x) for x in u]).reshape(k, 3).T
                inertial = np.array([float(x) for x in e]).reshape(k, 3).T
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{line_no}: malformed row ({exc})") from None
            frames.append(MeasurementFrame(i, gyro, body, inertial))
    return frames
