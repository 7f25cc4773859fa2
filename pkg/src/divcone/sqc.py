"""Conversion layer between stochastic matrices and quantum objects.

Any stochastic matrix is the entrywise squared modulus of a complex matrix
(its Schur-Hadamard square root).  With the quasi-unitary phase layout the
square root of a 2x2 matrix becomes unitary exactly when the two diagonal
entries agree, and |det| of the square root measures how far from unitary
the dynamics is.  Columns of the square root define Kraus operators, which
evolve a diagonal initial density matrix and convert back to the original
stochastic matrix through the measurement-statistics formula.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DEFAULT_TOL, ProbabilityVector, StochasticMatrix, validate
from .errors import DimensionMismatchError, KrausConditionViolatedError, NonPositiveMatrixError

__all__ = [
    "DensityMatrix",
    "sh_sqrt",
    "unitarity_deviation",
    "is_unistochastic2",
    "kraus_from_theta",
    "evolve_density",
    "channel_to_stochastic",
    "BirkhoffRatio",
    "birkhoff_ratio_check",
]

#: eigenvalue floor accepted as positive semidefinite
PSD_FLOOR = -1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace complex matrix."""

    entries: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"expected square, got {arr.shape}")
        if np.max(np.abs(arr - arr.conj().T)) > self.tol:
            raise NonPositiveMatrixError("density matrix must be Hermitian")
        eigs = np.linalg.eigvalsh(arr)
        if float(eigs.min()) < PSD_FLOOR:
            raise NonPositiveMatrixError(f"negative eigenvalue {eigs.min():.3e}")
        if abs(arr.trace().real - 1.0) > self.tol or abs(arr.trace().imag) > self.tol:
            raise NonPositiveMatrixError(f"trace {arr.trace()} != 1")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def diagonal(self) -> ProbabilityVector:
        return ProbabilityVector(self.entries.diagonal().real, self.tol)


def sh_sqrt(g: StochasticMatrix, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Schur-Hadamard square root of a 2x2 matrix with the quasi-unitary phases.

    Layout: e^{i phi} [[sqrt(p), -sqrt(1-q) e^{i theta}],
                       [sqrt(1-p) e^{-i theta}, sqrt(q)]].
    The entrywise squared moduli reproduce the matrix for any phases, and the
    result is unitary exactly when p = q.
    """
    if g.dim != 2:
        raise DimensionMismatchError("the quasi-unitary square root is a 2x2 construction")
    p, q = g.entries[0, 0], g.entries[1, 1]
    global_phase = cmath.exp(1j * phi)
    off_phase = cmath.exp(1j * theta)
    theta_m = np.array(
        [
            [math.sqrt(p), -math.sqrt(1.0 - q) * off_phase],
            [math.sqrt(1.0 - p) / off_phase, math.sqrt(q)],
        ],
        dtype=complex,
    )
    return global_phase * theta_m


def unitarity_deviation(theta: np.ndarray) -> float:
    """|det| of a square root from :func:`sh_sqrt`: 1 iff unitary, toward 0 as
    the dynamics becomes irreversible."""
    t = np.asarray(theta, dtype=complex)
    return float(abs(t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]))


def is_unistochastic2(g: StochasticMatrix, tol: float = DEFAULT_TOL) -> bool:
    """A 2x2 stochastic matrix is unistochastic exactly when p = q."""
    if g.dim != 2:
        raise DimensionMismatchError("the p = q criterion is the 2x2 characterization")
    return bool(abs(g.entries[0, 0] - g.entries[1, 1]) <= tol)


def kraus_from_theta(theta: np.ndarray, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """One Kraus operator per column: K_a keeps only column a of theta.

    Raises unless the operators resolve the identity, which holds exactly
    when the squared column moduli each sum to one (a stochastic source).
    """
    t = np.asarray(theta, dtype=complex)
    n = t.shape[0]
    ops = []
    for a in range(n):
        k = np.zeros((n, n), dtype=complex)
        k[:, a] = t[:, a]
        ops.append(k)
    _check_kraus(ops, tol)
    return ops


def _check_kraus(ops: Sequence[np.ndarray], tol: float) -> int:
    n = np.asarray(ops[0]).shape[0]
    total = sum(np.asarray(k).conj().T @ np.asarray(k) for k in ops)
    err = float(np.max(np.abs(total - np.eye(n))))
    if err > max(tol, 1e-9):
        raise KrausConditionViolatedError(f"sum K^dagger K deviates from identity by {err:.3e}")
    return n


def evolve_density(theta: np.ndarray, p0) -> DensityMatrix:
    """rho = theta @ diag(p0) @ theta^dagger; its diagonal equals the
    stochastic push-forward of p0."""
    t = np.asarray(theta, dtype=complex)
    p = p0.entries if isinstance(p0, ProbabilityVector) else np.asarray(p0, dtype=float)
    if t.shape[0] != p.size:
        raise DimensionMismatchError(f"theta dim {t.shape[0]} != p0 dim {p.size}")
    rho = (t * p[None, :]) @ t.conj().T
    return DensityMatrix(rho)


def channel_to_stochastic(kraus: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> StochasticMatrix:
    """Measurement statistics of a channel in the computational basis.

    Gamma_ij = sum_a |<i| K_a |j>|^2; the Kraus condition makes the columns
    sum to one.  Any number of operators is accepted.
    """
    _check_kraus(kraus, tol)
    stacked = np.stack([np.abs(np.asarray(k, dtype=complex)) ** 2 for k in kraus])
    return validate(stacked.sum(axis=0), max(tol, 1e-9))


@dataclass(frozen=True)
class BirkhoffRatio:
    """det(Gamma) over |det(Theta)|^2 with both ingredients reported."""

    det_gamma: float
    abs_det_theta_sq: float
    ratio: float


def birkhoff_ratio_check(g: StochasticMatrix) -> BirkhoffRatio:
    """Ratio det(Gamma)/|det(Theta)|^2, whose absolute value equals the
    Birkhoff contraction coefficient of the matrix.

    Equality holds because det(Gamma) = p + q - 1 factors as the product of
    (sqrt(pq) - sqrt((1-p)(1-q))) and (sqrt(pq) + sqrt((1-p)(1-q))), the
    second factor being |det(Theta)|.
    """
    if g.dim != 2:
        raise DimensionMismatchError("2x2 identity")
    if np.any(g.entries <= 0.0):
        raise NonPositiveMatrixError("strictly positive matrix required")
    theta = sh_sqrt(g)
    abs_det_sq = unitarity_deviation(theta) ** 2
    det_gamma = g.det
    return BirkhoffRatio(det_gamma, abs_det_sq, det_gamma / abs_det_sq)
