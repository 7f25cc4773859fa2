"""Permutation actions on stochastic matrices and divisor pairs.

Relabeling inputs (right action) and outputs (left action) by permutations
preserves stochasticity, and a divisor pair (transition, past) spawns a full
orbit of N! pairs with the same product.  Continuous dynamics admit only the
diagonal actions (same relabel on both sides).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PermutationMatrix, StochasticMatrix, all_permutations
from .errors import DimensionMismatchError

__all__ = ["PermAction", "act", "divisor_orbit", "orbit_pairs", "continuity_constraint"]


@dataclass(frozen=True)
class PermAction:
    """Relabeling map g -> sigma_out @ g @ inverse(sigma_in)."""

    sigma_in: PermutationMatrix
    sigma_out: PermutationMatrix

    def __post_init__(self):
        if self.sigma_in.dim != self.sigma_out.dim:
            raise DimensionMismatchError(
                f"sigma_in dim {self.sigma_in.dim} != sigma_out dim {self.sigma_out.dim}"
            )

    def compose(self, other: "PermAction") -> "PermAction":
        """Action equal to applying ``other`` first, then ``self``."""
        return PermAction(
            self.sigma_in.compose(other.sigma_in),
            self.sigma_out.compose(other.sigma_out),
        )


def act(action: PermAction, g: StochasticMatrix) -> StochasticMatrix:
    """Apply a relabeling; exact index shuffles, no floating arithmetic."""
    if g.dim != action.sigma_in.dim:
        raise DimensionMismatchError(f"matrix dim {g.dim} != action dim {action.sigma_in.dim}")
    arr = action.sigma_out.apply_left(g.entries.copy())
    arr = action.sigma_in.inverse.apply_right(arr)
    return StochasticMatrix(arr, g.tol)


def orbit_pairs(transition: np.ndarray, past: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """All (transition @ inv(sigma), sigma @ past) pairs, lexicographic in sigma.

    Works on raw arrays of any dtype (object arrays of Fractions included) so
    exact-arithmetic checks stay exact; entries are only moved, never combined.
    """
    n = transition.shape[0]
    out = []
    for sigma in all_permutations(n):
        out.append((sigma.inverse.apply_right(transition), sigma.apply_left(past.copy())))
    return out


def divisor_orbit(
    transition: StochasticMatrix, past: StochasticMatrix
) -> list[tuple[StochasticMatrix, StochasticMatrix]]:
    """The N! divisor pairs generated from one pair; all share the same product."""
    if transition.dim != past.dim:
        raise DimensionMismatchError(f"dim {transition.dim} != {past.dim}")
    tol = max(transition.tol, past.tol)
    return [
        (StochasticMatrix(t, tol), StochasticMatrix(p, tol))
        for t, p in orbit_pairs(transition.entries, past.entries)
    ]


def continuity_constraint(action: PermAction) -> bool:
    """True when the action maps continuous curves to continuous curves.

    Off-diagonal relabelings either break the identity start or force a jump,
    so only the conjugations survive.
    """
    return action.sigma_in.perm == action.sigma_out.perm
