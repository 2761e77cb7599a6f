"""Wahba cost machinery: direction sets, the weight construction that pins the
eigenvalues of ``K = E W E^T``, the potential, its gradient-like term and the
critical points of ``<I - Q, K>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from attfilt.so3 import _vex

RANK_TOL = 1e-9
PARALLEL_TOL = 1e-6  # rad
DISTINCT_REL_GAP = 1e-3
DEFAULT_D = (15.0, 10.0, 5.0)
POSITIVE_FILL = 1e-9


class DegenerateGeometryError(ValueError):
    """Direction measurements do not determine an attitude."""


class WeightError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """``3 x k`` matrix of direction columns tagged with the frame they live in.

    ``k >= 3`` always: two-vector sets are augmented with their cross product
    by :func:`augment_two_vectors` before they get here.
    """

    columns: np.ndarray
    frame: str = "body"

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim != 2 or cols.shape[0] != 3:
            raise DegenerateGeometryError(f"direction set must be 3 x k, got {cols.shape}")
        if self.frame not in ("body", "inertial"):
            raise ValueError(f"unknown frame tag {self.frame!r}")
        check_rank(cols)
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def from_vectors(cls, vectors, frame: str = "body") -> "DirectionSet":
        """Build from a list of 3-vectors, augmenting when only two are given."""
        vectors = [np.asarray(v, dtype=float) for v in vectors]
        if len(vectors) == 2:
            return cls(augment_two_vectors(*vectors), frame)
        if len(vectors) < 2:
            raise DegenerateGeometryError("at least two directions are required")
        return cls(np.column_stack(vectors), frame)


def check_rank(cols: np.ndarray) -> np.ndarray:
    """Raise unless ``cols`` has 3 columns or more and full row rank."""
    _check_shape(cols)
    _check_singular_values(np.linalg.svd(cols, compute_uv=False))
    return cols


def _check_shape(cols: np.ndarray) -> None:
    if cols.ndim != 2 or cols.shape[0] != 3 or cols.shape[1] < 3:
        raise DegenerateGeometryError(f"need a 3 x k set with k >= 3, got shape {cols.shape}")
    if not np.all(np.isfinite(cols)):
        raise DegenerateGeometryError("non-finite direction entries")


def _check_singular_values(sv: np.ndarray) -> None:
    if sv[0] == 0.0 or sv[2] <= RANK_TOL * sv[0]:
        raise DegenerateGeometryError(f"direction set is rank deficient (singular values {sv})")


def augment_two_vectors(u1, u2) -> np.ndarray:
    """Columns ``[u1, u2, u1 x u2]`` for a two-direction measurement."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    n1, n2 = np.linalg.norm(u1), np.linalg.norm(u2)
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateGeometryError("zero direction vector")
    c = np.cross(u1, u2)
    angle = np.arctan2(np.linalg.norm(c), float(np.dot(u1, u2)))
    if angle <= PARALLEL_TOL or np.pi - angle <= PARALLEL_TOL:
        raise DegenerateGeometryError("directions are parallel")
    return np.column_stack([u1, u2, c])


def _columns(x) -> np.ndarray:
    return x.columns if isinstance(x, DirectionSet) else np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class WahbaWeights:
    """Weight matrix ``W`` with the SVD pieces of ``E`` it was built from.

    ``K = E W E^T = U_E diag(d) U_E^T``.
    """

    W: np.ndarray
    d: np.ndarray
    K: np.ndarray
    U_E: np.ndarray
    sigma: np.ndarray
    V_E: np.ndarray


def _check_d(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.shape != (3,):
        raise WeightError(f"need exactly three eigenvalues, got {d.shape}")
    if np.any(~np.isfinite(d)) or np.any(d <= 0.0):
        raise WeightError(f"eigenvalues must be positive, got {d}")
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(d[i] - d[j]) < DISTINCT_REL_GAP * max(d[i], d[j]):
                raise WeightError(f"eigenvalues must be pairwise distinct, got {d}")
    return d


def build_weights(E, d=DEFAULT_D, positive_fill: bool = False) -> WahbaWeights:
    """Weights ``W = V_E W0 V_E^T`` with ``W0[i, i] = d[i] / sigma[i]**2``.

    Singular values of ``E`` are sorted descending and ``U_E`` is forced into
    SO(3). For ``k > 3`` the trailing diagonal of ``W0`` is zero, or a tiny
    positive value when ``positive_fill`` is set; ``K`` is unaffected either way.
    """
    E = _columns(E)
    _check_shape(E)
    d = _check_d(d)
    k = E.shape[1]
    U, s, Vt = np.linalg.svd(E, full_matrices=True)
    _check_singular_values(s)
    V = Vt.T
    if np.linalg.det(U) < 0.0:
        U[:, 2] *= -1.0
        V[:, 2] *= -1.0
    w0 = np.full(k, POSITIVE_FILL if positive_fill else 0.0)
    w0[:3] = d / s**2
    W = (V * w0) @ V.T
    W = 0.5 * (W + W.T)
    K = (U * d) @ U.T
    return WahbaWeights(W=W, d=d, K=K, U_E=U, sigma=s, V_E=V)


def potential(
    Rhat,
    Um,
    E,
    weights: WahbaWeights,
    phi: Optional[Callable[[float], float]] = None,
) -> float:
    """Generalised Wahba cost ``phi(1/2 <E - Rhat Um, (E - Rhat Um) W>)``.

    ``phi`` defaults to the identity.
    """
    Um, E = _columns(Um), _columns(E)
    if Um.shape != E.shape:
        raise ValueError(f"direction sets differ in shape: {Um.shape} vs {E.shape}")
    if weights.W.shape != (E.shape[1], E.shape[1]):
        raise ValueError(f"W is {weights.W.shape} but E has {E.shape[1]} columns")
    D = E - np.asarray(Rhat) @ Um
    value = 0.5 * float(np.sum(D * (D @ weights.W)))
    return value if phi is None else float(phi(value))


def attitude_cost(Q, K) -> float:
    """``<I - Q, K>``; equals :func:`potential` when measurements are exact."""
    K = np.asarray(K)
    return float(K[0, 0] + K[1, 1] + K[2, 2]) - float(np.vdot(np.asarray(Q), K))


def s_l(Rhat, L) -> np.ndarray:
    """``vex(L^T Rhat - Rhat^T L)``."""
    # with A = L^T Rhat the argument is A - A^T, whose vex needs no halving
    (_, a01, a02), (a10, _, a12), (a20, a21, _) = (np.asarray(L).T @ np.asarray(Rhat)).tolist()
    return np.array([a21 - a12, a02 - a20, a10 - a01])


def s_k(Q, K) -> np.ndarray:
    """``vex(K Q^T - Q K)``; zero exactly on the critical set of ``<I - Q, K>``."""
    Q = np.asarray(Q)
    K = np.asarray(K)
    return _vex(K @ Q.T - Q @ K)


def critical_points(weights: WahbaWeights) -> list[np.ndarray]:
    """Identity followed by the half turns ``2 U_E a_i a_i^T U_E^T - I``."""
    U = weights.U_E
    out = [np.eye(3)]
    for i in range(3):
        a = U[:, i]
        out.append(2.0 * np.outer(a, a) - np.eye(3))
    return out
