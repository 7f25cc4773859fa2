"""Stochastic-matrix data types, validation, coordinate charts and decompositions.

Conventions used throughout the package:

* matrices are column-stochastic (each column is a probability vector);
  row-stochastic input must be transposed by the caller;
* a 2x2 stochastic matrix is identified by its diagonal ``(p, q)``, i.e. the
  matrix ``[[p, 1-q], [1-p, q]]``;
* the alternative ``(X, T)`` chart uses the asymmetry ``X = p - q`` and the
  erasure coordinate ``T = 1 - (p + q)``; the determinant equals ``-T``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import (
    ColumnSumError,
    DimensionMismatchError,
    DomainError,
    EntryOutOfRangeError,
    NonSquareError,
    NotDegenerateError,
    SingularMatrixError,
)

#: default validation tolerance for matrices built from measured/float data
DEFAULT_TOL = 1e-9
#: tighter tolerance used for algebraic identities on well-conditioned 2x2 formulas
ALGEBRA_TOL = 1e-12

__all__ = [
    "DEFAULT_TOL",
    "ALGEBRA_TOL",
    "StochasticMatrix",
    "ProbabilityVector",
    "validate",
    "DiagCoord",
    "XTCoord",
    "InverseXT",
    "to_xt",
    "from_xt",
    "xt_mul",
    "xt_inv",
    "decompose_degenerate",
    "decompose_deterministic",
    "PermutationMatrix",
    "all_permutations",
    "is_permutation_matrix",
    "identity",
    "sigma_x",
    "proj_a",
    "proj_b",
    "flat",
    "IDENTITY2",
    "SIGMA_X",
    "PI_A",
    "PI_B",
    "FLAT_J",
]


@dataclass(frozen=True)
class StochasticMatrix:
    """A validated N x N column-stochastic matrix.

    ``entries`` is stored read-only; ``max_violation`` records the worst
    constraint violation seen before clamping/renormalization.
    """

    entries: np.ndarray
    tol: float = DEFAULT_TOL
    max_violation: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def det(self) -> float:
        if self.dim == 2:
            e = self.entries
            return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])
        return float(np.linalg.det(self.entries))

    @property
    def diag_coord(self) -> "DiagCoord":
        if self.dim != 2:
            raise DimensionMismatchError("diagonal chart is defined for 2x2 matrices only")
        return DiagCoord(float(self.entries[0, 0]), float(self.entries[1, 1]))

    def is_degenerate(self, tol: float | None = None) -> bool:
        """True when all columns are (numerically) equal, i.e. det = 0 for 2x2."""
        t = self.tol if tol is None else tol
        first = self.entries[:, :1]
        return bool(np.all(np.abs(self.entries - first) <= t))

    def __matmul__(self, other: "StochasticMatrix") -> "StochasticMatrix":
        if self.dim != other.dim:
            raise DimensionMismatchError(f"{self.dim} != {other.dim}")
        return StochasticMatrix(self.entries @ other.entries, max(self.tol, other.tol))

    def apply(self, p: np.ndarray) -> np.ndarray:
        """Push a probability vector forward through the matrix."""
        return self.entries @ np.asarray(p, dtype=float)

    def allclose(self, other: "StochasticMatrix", tol: float = ALGEBRA_TOL) -> bool:
        return self.dim == other.dim and bool(
            np.all(np.abs(self.entries - other.entries) <= tol)
        )


@dataclass(frozen=True)
class ProbabilityVector:
    """Nonnegative entries summing to one within ``tol``."""

    entries: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("a probability vector must be a nonempty 1-D array")
        if np.min(arr) < -self.tol:
            raise EntryOutOfRangeError(f"negative entry {np.min(arr):.3e}")
        if abs(arr.sum() - 1.0) > arr.size * self.tol:
            raise ColumnSumError(f"entries sum to {arr.sum()!r}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.size

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.entries > 0.0))


def validate(entries, tol: float = DEFAULT_TOL) -> StochasticMatrix:
    """Validate an array as a column-stochastic matrix.

    Entries may violate [0, 1] by at most ``tol`` and column sums may deviate
    from 1 by at most ``dim * tol``; violations within tolerance are repaired
    by clamping and renormalizing.  The worst violation is recorded on the
    returned matrix.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]

    entry_violation = float(max(np.max(-arr, initial=0.0), np.max(arr - 1.0, initial=0.0), 0.0))
    if entry_violation > tol:
        raise EntryOutOfRangeError(
            f"entry outside [0, 1] by {entry_violation:.3e} (tol {tol:.3e})"
        )
    sums = arr.sum(axis=0)
    sum_violation = float(np.max(np.abs(sums - 1.0)))
    if sum_violation > n * tol:
        raise ColumnSumError(
            f"column sum deviates from 1 by {sum_violation:.3e} (allowed {n * tol:.3e})"
        )

    fixed = np.clip(arr, 0.0, 1.0)
    # renormalize only when needed so exact inputs round-trip bitwise
    sums = fixed.sum(axis=0)
    off = np.abs(sums - 1.0) > 8 * np.finfo(float).eps
    if np.any(off):
        fixed = fixed.copy()
        fixed[:, off] /= sums[off]
    return StochasticMatrix(fixed, tol, max(entry_violation, sum_violation))


# ---------------------------------------------------------------------------
# diagonal (p, q) chart
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagCoord:
    """Diagonal chart ``(p, q)`` of the 2x2 matrix ``[[p, 1-q], [1-p, q]]``."""

    p: float
    q: float

    def __post_init__(self):
        if not (-1e-9 <= self.p <= 1 + 1e-9 and -1e-9 <= self.q <= 1 + 1e-9):
            raise DomainError(f"(p, q) = ({self.p}, {self.q}) outside the unit square")
        object.__setattr__(self, "p", float(min(max(self.p, 0.0), 1.0)))
        object.__setattr__(self, "q", float(min(max(self.q, 0.0), 1.0)))

    @property
    def det(self) -> float:
        return self.p + self.q - 1.0

    def to_matrix(self, tol: float = DEFAULT_TOL) -> StochasticMatrix:
        p, q = self.p, self.q
        return validate([[p, 1.0 - q], [1.0 - p, q]], tol)

    @staticmethod
    def from_matrix(m: StochasticMatrix) -> "DiagCoord":
        return m.diag_coord

    def is_degenerate(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.p + self.q - 1.0) <= tol

    def __iter__(self):
        return iter((self.p, self.q))


@dataclass(frozen=True)
class XTCoord:
    """Asymmetry/erasure chart with ``X = p - q`` and ``T = 1 - (p + q)``."""

    x: float
    t: float

    def __post_init__(self):
        if abs(self.x + self.t) > 1 + 1e-12 or abs(self.x - self.t) > 1 + 1e-12:
            raise DomainError(f"(X, T) = ({self.x}, {self.t}) outside the stochastic polytope")

    def __iter__(self):
        return iter((self.x, self.t))

    @property
    def det(self) -> float:
        return -self.t


@dataclass(frozen=True)
class InverseXT:
    """Raw inverse coordinates; generally outside the stochastic polytope.

    ``stochastic`` flags whether the point happens to be a valid chart point
    (only permutations have stochastic inverses).
    """

    x: float
    t: float
    stochastic: bool

    def __iter__(self):
        return iter((self.x, self.t))


def to_xt(c: DiagCoord) -> XTCoord:
    return XTCoord(c.p - c.q, 1.0 - (c.p + c.q))


def from_xt(x: XTCoord) -> DiagCoord:
    return DiagCoord((1.0 + x.x - x.t) / 2.0, (1.0 - x.x - x.t) / 2.0)


def xt_mul(a, b) -> XTCoord:
    """Chart image of the matrix product: (X, T)(x, t) = (X - x*T, -T*t)."""
    ax, at = a
    bx, bt = b
    return XTCoord(ax - bx * at, -at * bt)


def xt_inv(a) -> InverseXT:
    """Inverse in the XT chart: (x, t)^-1 = (x/t, 1/t).

    The result is generally not a stochastic chart point, so it is returned
    raw with a validity flag instead of as an ``XTCoord``.
    """
    ax, at = a
    if at == 0.0:
        raise SingularMatrixError("matrix with T = 0 (zero determinant) has no inverse")
    ix, it = ax / at, 1.0 / at
    ok = abs(ix + it) <= 1 + 1e-12 and abs(ix - it) <= 1 + 1e-12
    return InverseXT(ix, it, ok)


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------


def decompose_degenerate(c: DiagCoord, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Weights of a degenerate matrix on the absorbing projectors (PI_A, PI_B)."""
    if abs(c.p + c.q - 1.0) > tol:
        raise NotDegenerateError(f"(p, q) = ({c.p}, {c.q}) has p + q != 1")
    return c.p, 1.0 - c.p


def decompose_deterministic(c: DiagCoord) -> tuple[float, float]:
    """Coefficients ((p+q)/2, (p-q)/2) of the swap/identity/projector split.

    Reconstruction: sigma_x + a*(identity - sigma_x) + b*(PI_A - PI_B) with
    (a, b) the returned pair.
    """
    return (c.p + c.q) / 2.0, (c.p - c.q) / 2.0


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PermutationMatrix:
    """Deterministic stochastic matrix sending basis vector j to perm[j]."""

    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        object.__setattr__(self, "perm", perm)

    @property
    def dim(self) -> int:
        return len(self.perm)

    @property
    def matrix(self) -> StochasticMatrix:
        n = self.dim
        m = np.zeros((n, n))
        m[list(self.perm), range(n)] = 1.0
        return StochasticMatrix(m, 0.0)

    @property
    def inverse(self) -> "PermutationMatrix":
        inv = np.argsort(self.perm)
        return PermutationMatrix(tuple(int(i) for i in inv))

    def compose(self, other: "PermutationMatrix") -> "PermutationMatrix":
        """Permutation of the product matrix(self) @ matrix(other)."""
        if self.dim != other.dim:
            raise DimensionMismatchError(f"{self.dim} != {other.dim}")
        return PermutationMatrix(tuple(self.perm[j] for j in other.perm))

    def apply_left(self, arr: np.ndarray) -> np.ndarray:
        """Row relabel: matrix(self) @ arr, computed as an exact index shuffle."""
        out = np.empty_like(arr)
        out[list(self.perm), :] = arr
        return out

    def apply_right(self, arr: np.ndarray) -> np.ndarray:
        """Column relabel: arr @ matrix(self), computed as an exact index shuffle."""
        return arr[:, list(self.perm)].copy()


def all_permutations(n: int) -> Iterator[PermutationMatrix]:
    """All permutations of n symbols in lexicographic order (capped at n = 8)."""
    if n > 8:
        raise ValueError("permutation enumeration is capped at n = 8")
    for p in itertools.permutations(range(n)):
        yield PermutationMatrix(p)


def is_permutation_matrix(m: StochasticMatrix, tol: float = DEFAULT_TOL) -> bool:
    e = m.entries
    near01 = np.minimum(np.abs(e), np.abs(e - 1.0)) <= tol
    ones_per_col = np.sum(e > 0.5, axis=0)
    ones_per_row = np.sum(e > 0.5, axis=1)
    return bool(np.all(near01) and np.all(ones_per_col == 1) and np.all(ones_per_row == 1))


# ---------------------------------------------------------------------------
# named 2x2 matrices
# ---------------------------------------------------------------------------

IDENTITY2 = DiagCoord(1.0, 1.0)
SIGMA_X = DiagCoord(0.0, 0.0)
PI_A = DiagCoord(1.0, 0.0)
PI_B = DiagCoord(0.0, 1.0)
FLAT_J = DiagCoord(0.5, 0.5)


def identity(n: int = 2) -> StochasticMatrix:
    return StochasticMatrix(np.eye(n), 0.0)


def sigma_x() -> StochasticMatrix:
    return SIGMA_X.to_matrix(0.0)


def proj_a() -> StochasticMatrix:
    return PI_A.to_matrix(0.0)


def proj_b() -> StochasticMatrix:
    return PI_B.to_matrix(0.0)


def flat() -> StochasticMatrix:
    return FLAT_J.to_matrix(0.0)
