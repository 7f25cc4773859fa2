"""Cone-region geometry in the unit square and divisor sampling.

Every 2x2 stochastic matrix is a point (p, q) of the unit square via its
diagonal.  Given an anchor matrix, the stochastic pasts compatible with
divisibility form two convex regions: a cone containing the identity (pasts
with positive determinant) and a cone containing the swap matrix (negative
determinant).  Each cone is bounded by rays through the absorbing projectors
at (1, 0) and (0, 1) and its apex lies at the anchor or its point reflection,
depending on the sign of the anchor's determinant.  Transition matrices live
in two axis-aligned rectangles anchored at the corners (1, 1) and (0, 0);
futures fill a parallelogram; the image of the whole square under the anchor
is an axis-aligned rectangle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, DiagCoord
from .divisibility import NEAR_SINGULAR_DET, _candidate2
from .errors import DegenerateAnchorError, SamplingBudgetError

#: hard cap on rejection-sampling proposals
PROPOSAL_BUDGET = 10_000_000

__all__ = [
    "RegionKind",
    "Region",
    "DivisorSample",
    "past_membership",
    "transition_membership",
    "future_membership",
    "image_membership",
    "past_regions",
    "transition_regions",
    "future_square",
    "image_square",
    "sample_divisors",
    "orbit_regions",
    "sigma_left",
    "sigma_right",
    "sigma_both",
]


class RegionKind(enum.Enum):
    PAST_CONE_UPPER = "past_cone_upper"  # pasts with positive determinant (identity side)
    PAST_CONE_LOWER = "past_cone_lower"  # pasts with negative determinant (swap side)
    TRANSITION_RECT_UPPER = "transition_rect_upper"
    TRANSITION_RECT_LOWER = "transition_rect_lower"
    FUTURE_SET = "future_set"
    IMAGE_PARALLELOGRAM = "image_parallelogram"


@dataclass(frozen=True)
class Region:
    """A named convex region of the unit square generated by an anchor point.

    ``lines`` holds the bounding inequalities as (a, b, c, op) meaning
    ``a*x + b*y  op  c``; ``polygon`` is the vertex list, counterclockwise,
    starting at the region's generating vertex (the cone apex or rectangle
    corner produced by the anchor).
    """

    kind: RegionKind
    anchor: DiagCoord
    lines: tuple[tuple[float, float, float, str], ...]
    polygon: tuple[tuple[float, float], ...]

    def contains(self, point: DiagCoord, tol: float = DEFAULT_TOL) -> bool:
        x, y = point.p, point.q
        k = self.kind
        if k is RegionKind.PAST_CONE_UPPER:
            return bool(_past_side(self.anchor, x, y, tol, upper=True))
        if k is RegionKind.PAST_CONE_LOWER:
            return bool(_past_side(self.anchor, x, y, tol, upper=False))
        if k is RegionKind.TRANSITION_RECT_UPPER:
            return bool(transition_membership(self.anchor, x, y, tol, upper=True))
        if k is RegionKind.TRANSITION_RECT_LOWER:
            return bool(transition_membership(self.anchor, x, y, tol, upper=False))
        if k is RegionKind.FUTURE_SET:
            return bool(future_membership(self.anchor, x, y, tol))
        return bool(image_membership(self.anchor, x, y, tol))


@dataclass(frozen=True)
class DivisorSample:
    """A uniformly drawn past point and its computed transition point."""

    past: DiagCoord
    transition: DiagCoord


# ---------------------------------------------------------------------------
# membership predicates (published inequality route, no matrix inversion)
# ---------------------------------------------------------------------------


def _past_side(anchor: DiagCoord, r, s, tol: float, upper: bool):
    """One past cone only; cross-multiplied so the p, q in {0, 1} edges work."""
    p, q = anchor.p, anchor.q
    if anchor.is_degenerate(tol):
        return np.broadcast_to(True, np.broadcast(np.asarray(r), np.asarray(s)).shape).copy()
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    d = r + s - 1.0
    slack = tol * np.abs(d)
    if upper:
        ok = (
            (d > 0.0)
            & ((1.0 - p) * s >= np.maximum(1.0 - p, q) - q * r - slack)
            & (p * s >= np.maximum(p, 1.0 - q) - (1.0 - q) * r - slack)
        )
    else:
        ok = (
            (d < 0.0)
            & ((1.0 - p) * s <= np.minimum(1.0 - p, q) - q * r + slack)
            & (p * s <= np.minimum(p, 1.0 - q) - (1.0 - q) * r + slack)
        )
    return ok


def past_membership(anchor: DiagCoord, r, s, tol: float = DEFAULT_TOL):
    """Inequality-based membership in the union of the two past cones.

    Vectorized over ``r`` and ``s``.  This is the line-system route; it is
    kept independent of the matrix-inversion route used by ``divide`` so the
    two can cross-check each other.
    """
    return _past_side(anchor, r, s, tol, upper=True) | _past_side(anchor, r, s, tol, upper=False)


def transition_membership(anchor: DiagCoord, u, v, tol: float = DEFAULT_TOL, upper: bool = True):
    p, q = anchor.p, anchor.q
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if upper:
        return (u >= max(p, 1.0 - q) - tol) & (v >= max(q, 1.0 - p) - tol)
    return (u <= min(p, 1.0 - q) + tol) & (v <= min(q, 1.0 - p) + tol)


def future_membership(anchor: DiagCoord, a, b, tol: float = DEFAULT_TOL):
    """Membership of the point (a, b) in the reachable-future parallelogram."""
    p, q = anchor.p, anchor.q
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    slack = tol * abs(p + q - 1.0) + 1e-15
    lhs1 = (1.0 - p) * b + q * a
    lhs2 = p * b + (1.0 - q) * a
    return (
        (lhs1 <= max(1.0 - p, q) + slack)
        & (lhs2 <= max(p, 1.0 - q) + slack)
        & (lhs1 >= min(1.0 - p, q) - slack)
        & (lhs2 >= min(p, 1.0 - q) - slack)
    )


def image_membership(anchor: DiagCoord, a, b, tol: float = DEFAULT_TOL):
    p, q = anchor.p, anchor.q
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (
        (a >= min(p, 1.0 - q) - tol)
        & (a <= max(p, 1.0 - q) + tol)
        & (b >= min(q, 1.0 - p) - tol)
        & (b <= max(q, 1.0 - p) + tol)
    )


# ---------------------------------------------------------------------------
# polygon construction
# ---------------------------------------------------------------------------

_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


def _clip(poly, a, b, c):
    """Sutherland-Hodgman clip of a convex polygon by {a*x + b*y >= c}."""
    if not poly:
        return []
    out = []
    n = len(poly)
    eps = 1e-14
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        h1 = a * x1 + b * y1 - c
        h2 = a * x2 + b * y2 - c
        if h1 >= -eps:
            out.append((x1, y1))
        if (h1 > eps and h2 < -eps) or (h1 < -eps and h2 > eps):
            t = h1 / (h1 - h2)
            out.append((x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
    return out


def _dedupe(poly, eps=1e-9):
    out = []
    for pt in poly:
        if not any(abs(pt[0] - o[0]) <= eps and abs(pt[1] - o[1]) <= eps for o in out):
            out.append(pt)
    return out


def _ccw_from(poly, start):
    """Orient counterclockwise and rotate so the vertex nearest start is first."""
    if len(poly) >= 3:
        area = sum(
            poly[i][0] * poly[(i + 1) % len(poly)][1] - poly[(i + 1) % len(poly)][0] * poly[i][1]
            for i in range(len(poly))
        )
        if area < 0:
            poly = [poly[0]] + poly[1:][::-1]
    if poly:
        i0 = min(
            range(len(poly)),
            key=lambda i: (poly[i][0] - start[0]) ** 2 + (poly[i][1] - start[1]) ** 2,
        )
        poly = poly[i0:] + poly[:i0]
    return tuple((float(x), float(y)) for x, y in poly)


def past_regions(anchor: DiagCoord, tol: float = DEFAULT_TOL) -> tuple[Region, Region]:
    """The two past cones of an anchor: identity side first, swap side second.

    For a degenerate anchor the cones fuse and fill the entire square, so
    both returned regions carry the full-square polygon.
    """
    p, q = anchor.p, anchor.q
    if anchor.is_degenerate(tol):
        square = tuple(_SQUARE)
        return (
            Region(RegionKind.PAST_CONE_UPPER, anchor, (), square),
            Region(RegionKind.PAST_CONE_LOWER, anchor, (), square),
        )

    hi_a = (q, 1.0 - p, max(1.0 - p, q))  # ray through (1, 0) for det > 0 anchors
    hi_b = (1.0 - q, p, max(p, 1.0 - q))  # ray through (0, 1)
    lo_a = (q, 1.0 - p, min(1.0 - p, q))
    lo_b = (1.0 - q, p, min(p, 1.0 - q))

    upper_poly = list(_SQUARE)
    for a, b, c in (hi_a, hi_b, (1.0, 1.0, 1.0)):
        upper_poly = _clip(upper_poly, a, b, c)
    lower_poly = list(_SQUARE)
    for a, b, c in (lo_a, lo_b, (1.0, 1.0, 1.0)):
        lower_poly = _clip(lower_poly, -a, -b, -c)

    if p + q > 1.0:
        apex_upper, apex_lower = (p, q), (1.0 - p, 1.0 - q)
    else:
        apex_upper, apex_lower = (1.0 - p, 1.0 - q), (p, q)

    upper = Region(
        RegionKind.PAST_CONE_UPPER,
        anchor,
        (hi_a + (">=",), hi_b + (">=",), (1.0, 1.0, 1.0, ">")),
        _ccw_from(_dedupe(upper_poly), apex_upper),
    )
    lower = Region(
        RegionKind.PAST_CONE_LOWER,
        anchor,
        (lo_a + ("<=",), lo_b + ("<=",), (1.0, 1.0, 1.0, "<")),
        _ccw_from(_dedupe(lower_poly), apex_lower),
    )
    return upper, lower


def transition_regions(anchor: DiagCoord, tol: float = DEFAULT_TOL) -> tuple[Region, Region]:
    """The two transition rectangles; their inner corners are the anchor and
    its column swap, and for a degenerate anchor they meet at (p, 1-p)."""
    p, q = anchor.p, anchor.q
    u0, v0 = max(p, 1.0 - q), max(q, 1.0 - p)
    u1, v1 = min(p, 1.0 - q), min(q, 1.0 - p)
    upper = Region(
        RegionKind.TRANSITION_RECT_UPPER,
        anchor,
        ((1.0, 0.0, u0, ">="), (0.0, 1.0, v0, ">=")),
        ((u0, v0), (1.0, v0), (1.0, 1.0), (u0, 1.0)),
    )
    lower = Region(
        RegionKind.TRANSITION_RECT_LOWER,
        anchor,
        ((1.0, 0.0, u1, "<="), (0.0, 1.0, v1, "<=")),
        ((u1, v1), (u1, 0.0), (0.0, 0.0), (0.0, v1)),
    )
    return upper, lower


def future_square(anchor: DiagCoord, tol: float = DEFAULT_TOL) -> Region:
    """All stochastic points reachable from the anchor by one division step."""
    p, q = anchor.p, anchor.q
    poly = _ccw_from(
        _dedupe([(p, q), (1.0, 0.0), (1.0 - p, 1.0 - q), (0.0, 1.0)]), (p, q)
    )
    lines = (
        (q, 1.0 - p, max(1.0 - p, q), "<="),
        (1.0 - q, p, max(p, 1.0 - q), "<="),
        (q, 1.0 - p, min(1.0 - p, q), ">="),
        (1.0 - q, p, min(p, 1.0 - q), ">="),
    )
    return Region(RegionKind.FUTURE_SET, anchor, lines, poly)


def image_square(anchor: DiagCoord, tol: float = DEFAULT_TOL) -> Region:
    """The image of the whole square under left multiplication by the anchor."""
    p, q = anchor.p, anchor.q
    poly = _ccw_from(
        _dedupe([(p, q), (1.0 - q, q), (1.0 - q, 1.0 - p), (p, 1.0 - p)]), (p, q)
    )
    lines = (
        (1.0, 0.0, min(p, 1.0 - q), ">="),
        (1.0, 0.0, max(p, 1.0 - q), "<="),
        (0.0, 1.0, min(q, 1.0 - p), ">="),
        (0.0, 1.0, max(q, 1.0 - p), "<="),
    )
    return Region(RegionKind.IMAGE_PARALLELOGRAM, anchor, lines, poly)


# ---------------------------------------------------------------------------
# divisor sampling
# ---------------------------------------------------------------------------


def sample_divisors(
    anchor: DiagCoord, n: int, seed: int, tol: float = DEFAULT_TOL
) -> list[DivisorSample]:
    """Draw pasts uniformly in the union of past cones and compute transitions.

    Uses a counter-based generator (Philox) so draws are reproducible and
    the same seed yields the same multiset under any chunking.  Raises
    ``DegenerateAnchorError`` for degenerate anchors, whose transitions are
    not unique, and ``SamplingBudgetError`` past ``PROPOSAL_BUDGET`` proposals.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if anchor.is_degenerate(tol):
        raise DegenerateAnchorError(
            f"anchor ({anchor.p}, {anchor.q}) is degenerate; its divisors are not unique"
        )
    upper, lower = past_regions(anchor, tol)
    pts = [v for v in upper.polygon] + [v for v in lower.polygon]
    xs = [v[0] for v in pts]
    ys = [v[1] for v in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)

    rng = np.random.Generator(np.random.Philox(seed))
    accepted_r: list[np.ndarray] = []
    accepted_s: list[np.ndarray] = []
    got = 0
    proposed = 0
    batch = max(4 * n, 1024)
    while got < n:
        if proposed >= PROPOSAL_BUDGET:
            raise SamplingBudgetError(
                f"accepted {got}/{n} after {proposed} proposals; region too thin"
            )
        r = rng.uniform(x0, x1, batch)
        s = rng.uniform(y0, y1, batch)
        proposed += batch
        keep = past_membership(anchor, r, s, tol)
        accepted_r.append(r[keep])
        accepted_s.append(s[keep])
        got += int(np.count_nonzero(keep))

    r = np.concatenate(accepted_r)[:n]
    s = np.concatenate(accepted_s)[:n]
    det_e = r + s - 1.0
    u, c12, c21, v = _candidate2(anchor.p, anchor.q, r, s, det_e)

    # internal consistency: every transition must reproduce the anchor
    t11, t21 = u, 1.0 - u
    prod11 = t11 * r + (1.0 - v) * (1.0 - r)
    prod22 = v * s + t21 * (1.0 - s)
    err = np.maximum(np.abs(prod11 - anchor.p), np.abs(prod22 - anchor.q))
    bad = err > 1e-9
    if np.any(bad):
        raise SamplingBudgetError(
            f"{int(np.count_nonzero(bad))} sampled transitions failed the product check"
        )

    return [
        DivisorSample(DiagCoord(float(ri), float(si)), DiagCoord(float(ui), float(vi)))
        for ri, si, ui, vi in zip(r, s, u, v)
    ]


# ---------------------------------------------------------------------------
# swap-action orbit of regions
# ---------------------------------------------------------------------------


def sigma_left(point: DiagCoord) -> DiagCoord:
    """Chart image of left multiplication by the swap matrix."""
    return DiagCoord(1.0 - point.p, 1.0 - point.q)


def sigma_right(point: DiagCoord) -> DiagCoord:
    """Chart image of right multiplication by the swap matrix."""
    return DiagCoord(1.0 - point.q, 1.0 - point.p)


def sigma_both(point: DiagCoord) -> DiagCoord:
    """Chart image of conjugation by the swap matrix."""
    return DiagCoord(point.q, point.p)


_PAST = {RegionKind.PAST_CONE_UPPER, RegionKind.PAST_CONE_LOWER}
_TRANS = {RegionKind.TRANSITION_RECT_UPPER, RegionKind.TRANSITION_RECT_LOWER}

_FLIP = {
    RegionKind.PAST_CONE_UPPER: RegionKind.PAST_CONE_LOWER,
    RegionKind.PAST_CONE_LOWER: RegionKind.PAST_CONE_UPPER,
    RegionKind.TRANSITION_RECT_UPPER: RegionKind.TRANSITION_RECT_LOWER,
    RegionKind.TRANSITION_RECT_LOWER: RegionKind.TRANSITION_RECT_UPPER,
}


def _build(kind: RegionKind, anchor: DiagCoord, tol: float) -> Region:
    if kind in _PAST:
        upper, lower = past_regions(anchor, tol)
    elif kind in _TRANS:
        upper, lower = transition_regions(anchor, tol)
    elif kind is RegionKind.FUTURE_SET:
        return future_square(anchor, tol)
    else:
        return image_square(anchor, tol)
    return upper if kind.value.endswith("upper") else lower


def orbit_regions(region: Region, tol: float = DEFAULT_TOL) -> dict[str, Region]:
    """Images of a region under the left, right and two-sided swap actions.

    Pasts transform on the left within the divisor pair, transitions on the
    right, so a single swap flips each region onto its partner; the returned
    regions are rebuilt canonically from the transformed anchor and kind.
    """
    kind, anchor = region.kind, region.anchor
    if kind in _PAST:
        spec = {
            "left": (_FLIP[kind], anchor),
            "right": (_FLIP[kind], sigma_right(anchor)),
            "both": (kind, sigma_both(anchor)),
        }
    elif kind in _TRANS:
        spec = {
            "left": (_FLIP[kind], sigma_left(anchor)),
            "right": (_FLIP[kind], anchor),
            "both": (kind, sigma_both(anchor)),
        }
    else:
        spec = {
            "left": (kind, sigma_left(anchor)),
            "right": (kind, sigma_right(anchor)),
            "both": (kind, sigma_both(anchor)),
        }
    return {name: _build(k, a, tol) for name, (k, a) in spec.items()}
