"""Entropy and ergodicity functionals tied to divisibility.

A division step contracts relative entropy by at most |det|, the projective
metric by the Birkhoff coefficient, and moves the erasure coordinate |T|
toward zero; steps that gain information must be indivisible or jumps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, ProbabilityVector, StochasticMatrix
from .divisibility import DynamicsCurve, divide
from .errors import (
    DimensionMismatchError,
    NonPositiveEntryError,
    NonPositiveMatrixError,
    SupportMismatchError,
    ZeroRowError,
)

#: entries at or below this count as zero for the strictly-positive domains
POSITIVITY_FLOOR = 1e-300

__all__ = [
    "PhiKernel",
    "phi_entropy",
    "check_contraction",
    "hilbert_metric",
    "birkhoff_coefficient",
    "birkhoff_closed_form_2x2",
    "dobrushin_coefficient",
    "MonotonicityStep",
    "MonotonicityReport",
    "monotonicity_report",
]


class PhiKernel(enum.Enum):
    """Named convex kernels for the relative phi-entropy."""

    KL = "kl"
    TOTAL_VARIATION = "tv"
    CHI_SQUARED = "chi2"


def _as_prob(x) -> np.ndarray:
    if isinstance(x, ProbabilityVector):
        return x.entries
    return np.asarray(x, dtype=float)


def phi_entropy(kernel: PhiKernel, pi, pihat, base_two: bool = False) -> float:
    """Relative phi-entropy, summed componentwise.

    For the KL kernel every component with pi > 0 needs pihat > 0; terms with
    pi = 0 contribute zero.  ``base_two`` switches natural log to log2.
    """
    p = _as_prob(pi)
    ph = _as_prob(pihat)
    if p.shape != ph.shape:
        raise DimensionMismatchError(f"shapes {p.shape} != {ph.shape}")
    if kernel is PhiKernel.KL:
        mask = p > 0
        if np.any(ph[mask] <= 0):
            raise SupportMismatchError("KL needs pihat > 0 wherever pi > 0")
        val = float(np.sum(p[mask] * np.log(p[mask] / ph[mask])))
    elif kernel is PhiKernel.TOTAL_VARIATION:
        val = float(0.5 * np.sum(np.abs(p - ph)))
    else:
        if np.any(ph <= 0):
            raise SupportMismatchError("chi-squared needs pihat > 0")
        val = float(np.sum((p - ph) ** 2 / ph))
    if base_two:
        val /= math.log(2.0)
    return val


def check_contraction(
    g: StochasticMatrix, pi, pihat, kernel: PhiKernel = PhiKernel.KL
) -> tuple[float, float, bool]:
    """Both sides of the entropy-contraction inequality and whether it holds.

    Returns (H(g pi, g pihat), |det g| * H(pi, pihat), holds).  The matrix
    must have no all-zero row; for 2x2 the contraction coefficient |det g|
    equals |1 - (p + q)|.
    """
    if g.dim != 2:
        raise DimensionMismatchError("the contraction inequality is implemented for 2x2")
    if np.any(np.all(g.entries <= POSITIVITY_FLOOR, axis=1)):
        raise ZeroRowError("matrix has an all-zero row")
    p = _as_prob(pi)
    ph = _as_prob(pihat)
    lhs = phi_entropy(kernel, g.entries @ p, g.entries @ ph)
    rhs = abs(g.det) * phi_entropy(kernel, p, ph)
    return lhs, rhs, bool(lhs <= rhs + 1e-12)


def hilbert_metric(x, y) -> float:
    """Hilbert projective distance max log (x_i y_j) / (x_j y_i) over i, j."""
    xv = _as_prob(x)
    yv = _as_prob(y)
    if xv.shape != yv.shape:
        raise DimensionMismatchError(f"shapes {xv.shape} != {yv.shape}")
    if np.any(xv <= POSITIVITY_FLOOR) or np.any(yv <= POSITIVITY_FLOOR):
        raise NonPositiveEntryError("strictly positive vectors required")
    log_ratio = np.log(xv) - np.log(yv)
    return float(np.max(log_ratio) - np.min(log_ratio))


def birkhoff_closed_form_2x2(g: StochasticMatrix) -> float:
    """Cross-ratio form |sqrt(pq) - sqrt((1-p)(1-q))| / (sqrt(pq) + sqrt((1-p)(1-q)))."""
    p, q = g.entries[0, 0], g.entries[1, 1]
    a = math.sqrt(p * q)
    b = math.sqrt((1.0 - p) * (1.0 - q))
    return abs(a - b) / (a + b)


def birkhoff_coefficient(g: StochasticMatrix) -> float:
    """Worst-case contraction ratio of the Hilbert metric under the matrix.

    Computed from the minimal cross-ratio phi of entries as
    (1 - sqrt(phi)) / (1 + sqrt(phi)); strictly positive matrices only.  For
    2x2 this reduces to the cross-ratio closed form, which the test suite
    validates against a sampled supremum oracle.
    """
    e = g.entries
    if np.any(e <= POSITIVITY_FLOOR):
        raise NonPositiveMatrixError("Birkhoff coefficient needs a strictly positive matrix")
    n = g.dim
    if n < 2:
        raise DimensionMismatchError("dim >= 2 required")
    phi = np.inf
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ratios = (e[i, :, None] * e[j, None, :]) / (e[j, :, None] * e[i, None, :])
            phi = min(phi, float(np.min(ratios)))
    root = math.sqrt(phi)
    return (1.0 - root) / (1.0 + root)


def dobrushin_coefficient(g: StochasticMatrix) -> float:
    """Ergodicity coefficient for two configurations: |det| = |1 - (p + q)|."""
    if g.dim != 2:
        raise DimensionMismatchError("implemented for 2x2 matrices")
    return abs(g.det)


@dataclass(frozen=True)
class MonotonicityStep:
    index: int
    t_from: float
    t_to: float
    abs_t_from: float
    abs_t_to: float
    direction: int  # sign of |T(t+)| - |T(t-)|; +1 means information recovery
    divisible: bool | None
    is_jump: bool


@dataclass(frozen=True)
class MonotonicityReport:
    """Per-step erasure-coordinate direction with the divisibility cross-check.

    ``violations`` lists steps where |T| increased on a continuous divisible
    step, which the geometry forbids; it should always be empty.
    """

    steps: tuple[MonotonicityStep, ...]
    recovery_steps: tuple[int, ...]
    violations: tuple[int, ...]


def monotonicity_report(curve: DynamicsCurve, tol: float = DEFAULT_TOL) -> MonotonicityReport:
    if curve.dim != 2:
        raise DimensionMismatchError("erasure-coordinate analysis is a 2x2 notion")
    abs_t = np.abs(1.0 - (curve.diag_arrays()[0] + curve.diag_arrays()[1]))
    steps = []
    recovery = []
    violations = []
    for k in range(len(curve) - 1):
        verdict = divide(curve.matrices[k + 1], curve.matrices[k], tol)
        delta = abs_t[k + 1] - abs_t[k]
        direction = 0 if abs(delta) <= tol else (1 if delta > 0 else -1)
        is_jump = bool(curve.flags[k + 1])
        steps.append(
            MonotonicityStep(
                k,
                float(curve.times[k]),
                float(curve.times[k + 1]),
                float(abs_t[k]),
                float(abs_t[k + 1]),
                direction,
                verdict.divisible,
                is_jump,
            )
        )
        if direction > 0:
            recovery.append(k)
            if verdict.divisible and not is_jump:
                violations.append(k)
    return MonotonicityReport(tuple(steps), tuple(recovery), tuple(violations))
