"""Pairwise divisibility decisions and curve-level division-event analysis.

A pair (later, earlier) of stochastic matrices of the same size is divisible
when a stochastic transition matrix ``M`` with ``later = M @ earlier`` exists.
For an invertible earlier the only candidate is ``later @ inv(earlier)``; for
a singular 2x2 earlier the pair is divisible exactly when the later matrix is
itself degenerate, with ``M = later`` always available.  Singular pasts in
dimension three or higher are reported as undecided rather than guessed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import ALGEBRA_TOL, DEFAULT_TOL, StochasticMatrix, validate
from .errors import DimensionMismatchError, InvalidGridError

#: below this |det| a 2x2 past is routed to the degenerate branch
NEAR_SINGULAR_DET = 1e-6
#: below this |det| a matrix counts as exactly degenerate
ZERO_DET = 1e-12

#: table cell codes used by :class:`DivisionEventReport`
DIVISIBLE = 1
INDIVISIBLE = 0
UNKNOWN = -1
UNSET = -2

__all__ = [
    "NEAR_SINGULAR_DET",
    "ZERO_DET",
    "DIVISIBLE",
    "INDIVISIBLE",
    "UNKNOWN",
    "Branch",
    "DivisionVerdict",
    "divide",
    "verify_transition",
    "DynamicsCurve",
    "DivisionEventReport",
    "analyze_curve",
]


class Branch(enum.Enum):
    INVERTIBLE_PAST = "invertible_past"
    DEGENERATE_PAST = "degenerate_past"
    DEGENERATE_BOTH = "degenerate_both"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class DivisionVerdict:
    """Outcome of a pairwise divisibility test.

    ``divisible`` is ``None`` when the test is undecidable (singular past in
    dimension > 2).  ``max_violation`` grades indivisible verdicts by the
    worst candidate-entry violation; for degenerate branches it is the
    residual of the canonical transition.
    """

    divisible: bool | None
    transition: StochasticMatrix | None
    branch: Branch
    max_violation: float

    @property
    def code(self) -> int:
        if self.divisible is None:
            return UNKNOWN
        return DIVISIBLE if self.divisible else INDIVISIBLE


def _violation(arr: np.ndarray) -> float:
    return float(max(np.max(-arr, initial=0.0), np.max(arr - 1.0, initial=0.0), 0.0))


def _candidate2(p, q, r, s, det_e):
    """Entries of later @ inv(earlier) for 2x2 diagonal charts (vectorizable)."""
    c11 = (p * s - (1.0 - q) * (1.0 - r)) / det_e
    c12 = (r * (1.0 - q) - p * (1.0 - s)) / det_e
    c21 = (s * (1.0 - p) - q * (1.0 - r)) / det_e
    c22 = (q * r - (1.0 - p) * (1.0 - s)) / det_e
    return c11, c12, c21, c22


def divide(
    later: StochasticMatrix, earlier: StochasticMatrix, tol: float | None = None
) -> DivisionVerdict:
    """Decide whether ``later = M @ earlier`` for some stochastic ``M``.

    Within the near-singular band (|det earlier| < ``NEAR_SINGULAR_DET``) the
    determinant identity of a divisible verdict holds only to the band width,
    not to ``tol``.
    """
    if later.dim != earlier.dim:
        raise DimensionMismatchError(f"dim {later.dim} != {earlier.dim}")
    if tol is None:
        tol = max(later.tol, earlier.tol, DEFAULT_TOL)

    det_e = earlier.det
    det_l = later.det

    if later.dim == 2:
        p, q = later.entries[0, 0], later.entries[1, 1]
        r, s = earlier.entries[0, 0], earlier.entries[1, 1]
        if abs(det_e) < NEAR_SINGULAR_DET:
            if abs(det_l) <= NEAR_SINGULAR_DET:
                residual = float(np.max(np.abs(later.entries @ earlier.entries - later.entries)))
                return DivisionVerdict(True, later, Branch.DEGENERATE_BOTH, residual)
            return DivisionVerdict(False, None, Branch.DEGENERATE_PAST, abs(det_l))
        if abs(det_l) <= ZERO_DET:
            # degenerate rows: later @ inv(earlier) equals later for any unit-column-sum inverse
            return DivisionVerdict(True, later, Branch.INVERTIBLE_PAST, 0.0)
        c11, c12, c21, c22 = _candidate2(p, q, r, s, det_e)
        cand = np.array([[c11, c12], [c21, c22]])
        violation = _violation(cand)
        if violation <= tol:
            return DivisionVerdict(
                True, validate(np.clip(cand, 0.0, 1.0), tol), Branch.INVERTIBLE_PAST, violation
            )
        return DivisionVerdict(False, None, Branch.INVERTIBLE_PAST, violation)

    # dimension > 2: the singular-past branch is only solved for two configurations
    if abs(det_e) < NEAR_SINGULAR_DET:
        return DivisionVerdict(None, None, Branch.UNDECIDED, float("nan"))
    cand = later.entries @ np.linalg.inv(earlier.entries)
    violation = _violation(cand)
    if violation <= tol:
        return DivisionVerdict(
            True, validate(np.clip(cand, 0.0, 1.0), tol), Branch.INVERTIBLE_PAST, violation
        )
    return DivisionVerdict(False, None, Branch.INVERTIBLE_PAST, violation)


def verify_transition(
    later: StochasticMatrix,
    earlier: StochasticMatrix,
    transition: StochasticMatrix,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Check an explicitly supplied transition: stochastic and reproduces later.

    Resolves cells that :func:`divide` reports as undecided.
    """
    if transition.dim != later.dim or earlier.dim != later.dim:
        raise DimensionMismatchError("all three matrices must share the same dimension")
    if _violation(transition.entries) > tol:
        return False
    residual = np.max(np.abs(transition.entries @ earlier.entries - later.entries))
    return bool(residual <= tol)


# ---------------------------------------------------------------------------
# dynamics curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicsCurve:
    """Time-indexed sequence of stochastic matrices of a common dimension.

    ``flags[k]`` marks sample k as a declared jump (the curve is continuous
    from the right at jumps).  A curve that starts at t = 0 must start at the
    identity unless ``identity_start`` is disabled, as for dilated dynamics.
    """

    times: np.ndarray
    matrices: tuple[StochasticMatrix, ...]
    flags: np.ndarray
    identity_start: bool = True
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise InvalidGridError("times must be a nonempty 1-D sequence")
        if np.any(np.diff(times) <= 0):
            raise InvalidGridError("times must be strictly increasing")
        if len(self.matrices) != times.size:
            raise InvalidGridError("one matrix per time sample required")
        dims = {m.dim for m in self.matrices}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixed dimensions {sorted(dims)}")
        flags = (
            np.zeros(times.size, dtype=bool)
            if self.flags is None
            else np.asarray(self.flags, dtype=bool)
        )
        if flags.shape != times.shape:
            raise InvalidGridError("flags must align with times")
        if self.identity_start and times[0] == 0.0:
            first = self.matrices[0].entries
            if np.max(np.abs(first - np.eye(first.shape[0]))) > self.tol:
                raise InvalidGridError("a curve starting at t = 0 must start at the identity")
        times.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "matrices", tuple(self.matrices))

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    def __len__(self) -> int:
        return len(self.matrices)

    def diag_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dim != 2:
            raise DimensionMismatchError("diagonal chart arrays exist for 2x2 curves only")
        stack = np.array([m.entries for m in self.matrices])
        return stack[:, 0, 0], stack[:, 1, 1]

    def dets(self) -> np.ndarray:
        return np.array([m.det for m in self.matrices])


@dataclass(frozen=True)
class DivisionEventReport:
    """Full pairwise division-event table of a sampled curve.

    ``table[j, k]`` for j <= k holds DIVISIBLE/INDIVISIBLE/UNKNOWN for the
    pair (earlier = sample j, later = sample k); cells with j > k are UNSET.
    ``proper_events`` lists indices whose transition stays stochastic for the
    whole remaining (finite) horizon.  ``det_sign_changes`` lists index pairs
    (j, k) of consecutive nonzero determinant signs of opposite sign with no
    declared jump in between; such a stretch forces an indivisible segment.
    """

    times: np.ndarray
    table: np.ndarray
    proper_events: tuple[int, ...]
    det_sign_changes: tuple[tuple[int, int], ...]
    dets: np.ndarray

    def cell(self, j: int, k: int) -> int:
        return int(self.table[j, k])


def _table2(p: np.ndarray, q: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized dim-2 divisibility table mirroring :func:`divide` branch logic."""
    det = p + q - 1.0
    P, Q, L = p[None, :], q[None, :], det[None, :]  # later, column index
    R, S, E = p[:, None], q[:, None], det[:, None]  # earlier, row index

    with np.errstate(divide="ignore", invalid="ignore"):
        c11, c12, c21, c22 = _candidate2(P, Q, R, S, E)
        stacked = np.stack([c11, c12, c21, c22])
        violation = np.maximum(np.max(-stacked, axis=0), np.max(stacked - 1.0, axis=0))
        invertible_ok = violation <= tol

    deg_past = np.abs(E) < NEAR_SINGULAR_DET
    deg_later_band = np.abs(L) <= NEAR_SINGULAR_DET
    deg_later_exact = np.abs(L) <= ZERO_DET

    code = np.where(invertible_ok | deg_later_exact, DIVISIBLE, INDIVISIBLE)
    code = np.where(deg_past, np.where(deg_later_band, DIVISIBLE, INDIVISIBLE), code)
    return code.astype(np.int8)


def analyze_curve(curve: DynamicsCurve, tol: float | None = None) -> DivisionEventReport:
    """Fill the pairwise table, proper events and determinant sign changes."""
    if tol is None:
        tol = max(curve.tol, DEFAULT_TOL)
    k_count = len(curve)
    dets = curve.dets()

    if curve.dim == 2:
        p, q = curve.diag_arrays()
        full = _table2(p, q, tol)
    else:
        full = np.full((k_count, k_count), UNSET, dtype=np.int8)
        for j in range(k_count):
            for k in range(j, k_count):
                full[j, k] = divide(curve.matrices[k], curve.matrices[j], tol).code

    table = np.full((k_count, k_count), UNSET, dtype=np.int8)
    upper = np.triu_indices(k_count)
    table[upper] = full[upper]
    table.setflags(write=False)

    proper = tuple(
        j for j in range(k_count) if bool(np.all(table[j, j:] == DIVISIBLE))
    )

    sign_changes: list[tuple[int, int]] = []
    signs = np.where(np.abs(dets) <= ZERO_DET, 0, np.sign(dets)).astype(int)
    prev: int | None = None
    for k in range(k_count):
        if curve.flags[k]:
            prev = None  # continuity broken at a declared jump
        if signs[k] != 0:
            if prev is not None and signs[prev] != signs[k]:
                sign_changes.append((prev, k))
            prev = k

    return DivisionEventReport(curve.times, table, proper, tuple(sign_changes), dets)
