"""Rotation algebra on SO(3): hat/vex, the closed-form exponential map and
the principal angle of a rotation.

Rotations and skew matrices are plain ``(3, 3)`` float arrays; axial vectors
are ``(3,)`` arrays. Validation happens at the boundaries (:func:`as_rotation`,
:func:`vex`), the hot paths trust their inputs.
"""

from __future__ import annotations

import math

import numpy as np

ROTATION_TOL = 1e-12
SKEW_TOL = 1e-9

# Below this angle the Rodrigues coefficients switch to their Taylor series.
_SMALL_ANGLE = 1e-8


class NotARotationError(ValueError):
    pass


class NotSkewError(ValueError):
    pass


def hat(v) -> np.ndarray:
    """Map a 3-vector to the skew matrix with ``hat(v) @ w == cross(v, w)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vex(M) -> np.ndarray:
    """Inverse of :func:`hat`, using the skew part ``(M - M.T) / 2``.

    Raises :class:`NotSkewError` when the symmetric part of ``M`` is larger
    than ``SKEW_TOL`` (scaled by ``max(1, |M|)``).
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise NotSkewError(f"expected a 3x3 matrix, got shape {M.shape}")
    sym = 0.5 * (M + M.T)
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(sym))) > SKEW_TOL * scale:
        raise NotSkewError("matrix is not skew-symmetric")
    return _vex(M)


def _vex(M: np.ndarray) -> np.ndarray:
    (_, m01, m02), (m10, _, m12), (m20, m21, _) = M.tolist()
    return np.array([0.5 * (m21 - m12), 0.5 * (m02 - m20), 0.5 * (m10 - m01)])


def expv(v) -> np.ndarray:
    """``expm(hat(v))`` by the Rodrigues formula."""
    x, y, z = v.tolist() if isinstance(v, np.ndarray) else v
    t2 = x * x + y * y + z * z
    if t2 < _SMALL_ANGLE * _SMALL_ANGLE:
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        t = math.sqrt(t2)
        a = math.sin(t) / t
        b = (1.0 - math.cos(t)) / t2
    # I + a*hat(v) + b*hat(v)^2, with hat(v)^2 = v v^T - |v|^2 I
    bxy, bxz, byz = b * x * y, b * x * z, b * y * z
    return np.array(
        [
            [1.0 - b * (y * y + z * z), bxy - a * z, bxz + a * y],
            [bxy + a * z, 1.0 - b * (x * x + z * z), byz - a * x],
            [bxz - a * y, byz + a * x, 1.0 - b * (x * x + y * y)],
        ]
    )


def expm(M) -> np.ndarray:
    """Exponential of a skew matrix, evaluated in closed form."""
    M = np.asarray(M, dtype=float)
    return expv(_vex(M))


def principal_angle(Q) -> float:
    """Rotation angle of ``Q`` in ``[0, pi]``.

    The cosine comes from the trace (clamped to [-1, 1]) and the sine from the
    skew part, so the result stays accurate near 0 and near pi where a bare
    ``arccos`` loses half the digits.
    """
    Q = np.asarray(Q, dtype=float)
    c = min(1.0, max(-1.0, 0.5 * (Q[0, 0] + Q[1, 1] + Q[2, 2] - 1.0)))
    s = 0.5 * math.sqrt(
        (Q[2, 1] - Q[1, 2]) ** 2 + (Q[0, 2] - Q[2, 0]) ** 2 + (Q[1, 0] - Q[0, 1]) ** 2
    )
    return math.atan2(s, c)


def orthogonality_error(R) -> float:
    """Frobenius norm of ``R.T @ R - I``."""
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


def is_rotation(R, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return orthogonality_error(R) <= tol and abs(np.linalg.det(R) - 1.0) <= tol


def as_rotation(R, tol: float = ROTATION_TOL) -> np.ndarray:
    """Validate raw entries as a rotation matrix and return a float copy."""
    R = np.array(R, dtype=float)
    if R.shape != (3, 3):
        raise NotARotationError(f"expected a 3x3 matrix, got shape {R.shape}")
    if not is_rotation(R, tol):
        raise NotARotationError(
            f"not in SO(3): |R^T R - I| = {orthogonality_error(R):.3e}, "
            f"det = {np.linalg.det(R):.15f}"
        )
    return R


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation by ``angle`` about ``axis`` (normalised here)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    return expv(axis * (angle / n))
