"""Coarse graining and dilation of stochastic dynamics, with uncertainty.

A grouping matrix X merges N configurations into n < N groups; a dispatch
matrix Y is a stochastic right-inverse of X that spreads each group back over
its members.  Coarse graining maps large dynamics to X @ G @ Y(0); dilation
maps small dynamics to Y(t) @ G @ X, which is always degenerate (grouped
columns coincide).  Dilation preserves divisibility with the explicit
transition Y(t) @ M @ X; coarse graining in general does not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DEFAULT_TOL, StochasticMatrix, validate
from .divisibility import DynamicsCurve, divide
from .errors import (
    NotRightInverseError,
    ShapeMismatchError,
    TimeGridMismatchError,
    WeightError,
)

__all__ = [
    "GroupingMatrix",
    "DispatchCurve",
    "UncertainGrouping",
    "right_inverse",
    "coarse_grain",
    "coarse_grain_curve",
    "dilate",
    "cg_uncertain",
    "dilate_uncertain",
    "is_dilation_through",
    "TransferReport",
    "divisibility_transfer_check",
    "grouping_from_json",
]

#: exact-law tolerance for X @ Y = identity
RIGHT_INVERSE_TOL = 1e-12


@dataclass(frozen=True)
class GroupingMatrix:
    """Deterministic n x N column-stochastic grouping with no empty group.

    ``groups[i]`` lists the large-system indices merged into small index i.
    """

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(j) for j in g) for g in self.groups)
        flat = [j for g in groups for j in g]
        if not groups or any(len(g) == 0 for g in groups):
            raise ShapeMismatchError("every group must be nonempty")
        if sorted(flat) != list(range(len(flat))):
            raise ShapeMismatchError("groups must partition 0..N-1")
        if len(groups) >= len(flat):
            raise ShapeMismatchError("a proper grouping needs n < N")
        object.__setattr__(self, "groups", groups)

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def big_n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def matrix(self) -> np.ndarray:
        x = np.zeros((self.n, self.big_n))
        for i, g in enumerate(self.groups):
            x[i, list(g)] = 1.0
        return x

    def group_of(self, j: int) -> int:
        for i, g in enumerate(self.groups):
            if j in g:
                return i
        raise IndexError(j)


def right_inverse(x: GroupingMatrix, weights: Sequence[Sequence[float]] | str = "uniform") -> np.ndarray:
    """Stochastic right-inverse of the grouping; one simplex per group.

    ``weights[i]`` distributes group i over its members; the named default
    spreads each group uniformly.
    """
    y = np.zeros((x.big_n, x.n))
    for i, g in enumerate(x.groups):
        if weights == "uniform":
            w = np.full(len(g), 1.0 / len(g))
        else:
            w = np.asarray(weights[i], dtype=float)
            if w.size != len(g):
                raise ShapeMismatchError(f"group {i} has {len(g)} members, got {w.size} weights")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise WeightError(f"group {i} weights must be a probability vector")
        y[list(g), i] = w
    return y


def _check_right_inverse(x: GroupingMatrix, y: np.ndarray) -> None:
    y = np.asarray(y, dtype=float)
    if y.shape != (x.big_n, x.n):
        raise ShapeMismatchError(f"dispatch shape {y.shape}, expected {(x.big_n, x.n)}")
    if np.max(np.abs(x.matrix @ y - np.eye(x.n))) > RIGHT_INVERSE_TOL:
        raise NotRightInverseError("X @ Y != identity")


@dataclass(frozen=True)
class DispatchCurve:
    """A curve of right-inverses of one grouping matrix."""

    grouping: GroupingMatrix
    times: np.ndarray
    dispatches: tuple[np.ndarray, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size != len(self.dispatches):
            raise TimeGridMismatchError("one dispatch per time sample required")
        ys = []
        for y in self.dispatches:
            arr = np.asarray(y, dtype=float).copy()
            _check_right_inverse(self.grouping, arr)
            arr.setflags(write=False)
            ys.append(arr)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "dispatches", tuple(ys))

    @classmethod
    def constant(cls, grouping: GroupingMatrix, times, y) -> "DispatchCurve":
        times = np.asarray(times, dtype=float)
        return cls(grouping, times, tuple(y for _ in range(times.size)))


@dataclass(frozen=True)
class UncertainGrouping:
    """Convex mixture of deterministic groupings with chosen dispatches."""

    weights: tuple[float, ...]
    components: tuple[tuple[GroupingMatrix, np.ndarray], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.components) or w.size == 0:
            raise WeightError("one weight per component required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise WeightError("weights must form a probability vector")
        dims = {(x.n, x.big_n) for x, _ in self.components}
        if len(dims) != 1:
            raise ShapeMismatchError("all components must share the same shape")
        for x, y in self.components:
            _check_right_inverse(x, y)
        object.__setattr__(self, "weights", tuple(float(v) for v in w))


def coarse_grain(
    x: GroupingMatrix, y0, g_large: StochasticMatrix, tol: float = DEFAULT_TOL
) -> StochasticMatrix:
    """Reduced dynamics X @ G @ Y(0); the result depends on the dispatch choice."""
    _check_right_inverse(x, y0)
    if g_large.dim != x.big_n:
        raise ShapeMismatchError(f"matrix dim {g_large.dim}, grouping expects {x.big_n}")
    return validate(x.matrix @ g_large.entries @ np.asarray(y0, dtype=float), tol)


def coarse_grain_curve(
    x: GroupingMatrix, y0, curve: DynamicsCurve, tol: float = DEFAULT_TOL
) -> DynamicsCurve:
    """Coarse-grain every sample of a curve with a fixed dispatch Y(0)."""
    mats = tuple(coarse_grain(x, y0, m, tol) for m in curve.matrices)
    identity_start = bool(curve.times[0] == 0.0 and curve.identity_start)
    return DynamicsCurve(curve.times.copy(), mats, curve.flags.copy(), identity_start, tol)


def dilate(
    x: GroupingMatrix, y: DispatchCurve, g_small: DynamicsCurve, tol: float = DEFAULT_TOL
) -> DynamicsCurve:
    """Dilated dynamics Y(t) @ G(t) @ X on the large system.

    Every sample is degenerate (columns within one group coincide), so the
    curve does not start at the identity even at t = 0.
    """
    if y.grouping.groups != x.groups:
        raise ShapeMismatchError("dispatch curve belongs to a different grouping")
    if g_small.dim != x.n:
        raise ShapeMismatchError(f"small curve dim {g_small.dim}, grouping expects {x.n}")
    if y.times.shape != g_small.times.shape or np.any(y.times != g_small.times):
        raise TimeGridMismatchError("dispatch and small-curve time grids differ")
    mats = tuple(
        validate(yk @ mk.entries @ x.matrix, tol)
        for yk, mk in zip(y.dispatches, g_small.matrices)
    )
    return DynamicsCurve(
        g_small.times.copy(), mats, g_small.flags.copy(), identity_start=False, tol=tol
    )


def cg_uncertain(
    u: UncertainGrouping, g_large: StochasticMatrix, tol: float = DEFAULT_TOL
) -> StochasticMatrix:
    """Coarse graining under uncertainty: sum_k alpha_k X_k @ G @ Y_k."""
    if g_large.dim != u.components[0][0].big_n:
        raise ShapeMismatchError("matrix dimension does not match the grouping components")
    acc = sum(
        a * (x.matrix @ g_large.entries @ y)
        for a, (x, y) in zip(u.weights, u.components)
    )
    return validate(acc, tol)


def dilate_uncertain(
    u: UncertainGrouping, g_small: StochasticMatrix, tol: float = DEFAULT_TOL
) -> StochasticMatrix:
    """Dilation under uncertainty: sum_k alpha_k Y_k @ G @ X_k.

    Unlike proper dilation this need not preserve divisibility.
    """
    if g_small.dim != u.components[0][0].n:
        raise ShapeMismatchError("matrix dimension does not match the grouping components")
    acc = sum(
        a * (y @ g_small.entries @ x.matrix)
        for a, (x, y) in zip(u.weights, u.components)
    )
    return validate(acc, tol)


def is_dilation_through(
    x: GroupingMatrix, m: StochasticMatrix, tol: float = 1e-9
) -> tuple[bool, np.ndarray | None, np.ndarray | None]:
    """Does m factor as Ytilde @ small @ X for the given grouping?

    Requires (i) columns constant within each group and (ii) within each
    group's row block, all columns proportional to one shape vector.  On
    success returns the witnesses (Ytilde, small) with m = Ytilde @ small @ X.
    """
    if m.dim != x.big_n:
        raise ShapeMismatchError(f"matrix dim {m.dim}, grouping expects {x.big_n}")
    e = m.entries
    reps = [g[0] for g in x.groups]
    for i, g in enumerate(x.groups):
        block = e[:, list(g)]
        if np.max(np.abs(block - block[:, :1])) > tol:
            return False, None, None
    reduced = e[:, reps]  # one column per group
    small = np.zeros((x.n, x.n))
    ytilde = np.zeros((x.big_n, x.n))
    for gi, g in enumerate(x.groups):
        rows = list(g)
        block = reduced[rows, :]  # |g| x n
        col_mass = block.sum(axis=0)
        small[gi, :] = col_mass
        carriers = col_mass > tol
        if np.any(carriers):
            shapes = block[:, carriers] / col_mass[carriers]
            if np.max(np.abs(shapes - shapes[:, :1])) > tol:
                return False, None, None
            ytilde[rows, gi] = shapes[:, 0]
        else:
            ytilde[rows, gi] = 1.0 / len(rows)
    if np.max(np.abs(ytilde @ small @ x.matrix - e)) > max(tol, 1e-9):
        return False, None, None
    return True, ytilde, small


@dataclass(frozen=True)
class TransferReport:
    """Whether a division event of the large dynamics survives coarse graining.

    ``candidate_results[i]`` states whether inserting the i-th dispatch at the
    division time leaves the reduced product unchanged; ``sufficient_dilation``
    reports the structural condition that settles the question for every
    dispatch at once.
    """

    original_divisible: bool | None
    transition: StochasticMatrix | None
    candidate_results: tuple[bool, ...]
    sufficient_dilation: bool
    residuals: tuple[float, ...]


def divisibility_transfer_check(
    x: GroupingMatrix,
    y0,
    g_large_curve: DynamicsCurve,
    t_index: int,
    tprime_index: int,
    y_candidates: Sequence[np.ndarray] = (),
    tol: float = DEFAULT_TOL,
) -> TransferReport:
    """Check inheritance of a division event by the coarse-grained dynamics.

    The large curve is divided at the given sample indices; for each supplied
    dispatch candidate (the uniform one is always appended) the reduced-side
    identity X M G(t') Y(0) = X M Y(t') X G(t') Y(0) is evaluated, and the
    sufficient condition that the large transition is itself a dilation
    through the grouping is tested.
    """
    later = g_large_curve.matrices[t_index]
    earlier = g_large_curve.matrices[tprime_index]
    verdict = divide(later, earlier, tol)
    if not verdict.divisible:
        return TransferReport(verdict.divisible, None, (), False, ())

    m = verdict.transition.entries
    xe = x.matrix
    y0 = np.asarray(y0, dtype=float)
    _check_right_inverse(x, y0)
    lhs = xe @ m @ earlier.entries @ y0

    candidates = [np.asarray(c, dtype=float) for c in y_candidates]
    candidates.append(right_inverse(x, "uniform"))
    results = []
    residuals = []
    for cand in candidates:
        _check_right_inverse(x, cand)
        rhs = xe @ m @ cand @ xe @ earlier.entries @ y0
        residual = float(np.max(np.abs(lhs - rhs)))
        residuals.append(residual)
        results.append(residual <= max(tol, 1e-9))

    sufficient, _, _ = is_dilation_through(x, verdict.transition, max(tol, 1e-9))
    return TransferReport(
        verdict.divisible, verdict.transition, tuple(results), sufficient, tuple(residuals)
    )


def grouping_from_json(text: str) -> tuple[GroupingMatrix, np.ndarray, np.ndarray | None]:
    """Parse the grouping document: groups, dispatch weights, optional times.

    Schema: {"groups": [[large indices], ...],
             "dispatch": "uniform" | [[weights per group], ...],
             "times": [...]}  (times optional).
    """
    doc = json.loads(text)
    x = GroupingMatrix(tuple(tuple(g) for g in doc["groups"]))
    dispatch = doc.get("dispatch", "uniform")
    y = right_inverse(x, dispatch if dispatch == "uniform" else dispatch)
    times = np.asarray(doc["times"], dtype=float) if "times" in doc else None
    return x, y, times
