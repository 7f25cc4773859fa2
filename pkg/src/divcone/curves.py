"""Built-in dynamics families and sampled curves from CSV.

Families:

* ``oscillator``: bistochastic diag cos^2(freq * t); crosses the degenerate
  line whenever cos(2 freq t) changes sign.
* ``decay``: [[1, 1 - e^{-rate t}], [0, e^{-rate t}]], divisible at every
  pair of times.
* ``cadlag_cycle``: decays from a permutation toward the flat matrix on each
  unit interval and jumps to the next permutation at integer times (right
  continuous with left limits).
* ``three_config_block``: 3x3 block oscillator, one frozen configuration.
* ``constant`` and ``sampled`` for user-supplied matrices.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, StochasticMatrix, validate
from .divisibility import DynamicsCurve
from .errors import InvalidGridError, ShapeMismatchError

__all__ = [
    "TimeGrid",
    "CurveSpec",
    "generate",
    "oscillator_matrix",
    "decay_matrix",
    "cadlag_matrix",
    "three_config_matrix",
    "read_curve_csv",
    "write_curve_csv",
    "parse_curve_spec",
]

#: fraction of the grid step used for the sample just before a jump
JUMP_EPS_DIVISOR = 1024.0


@dataclass(frozen=True)
class TimeGrid:
    start: float
    end: float
    step: float
    jumps: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.step > 0 and self.end > self.start):
            raise InvalidGridError(f"bad grid [{self.start}, {self.end}] step {self.step}")

    def sample_times(self) -> tuple[np.ndarray, np.ndarray]:
        """Regular samples plus a left-adjacent sample before every jump.

        Returns (times, jump_flags); flags mark the jump instants themselves.
        """
        count = int(round((self.end - self.start) / self.step))
        times = self.start + self.step * np.arange(count + 1)
        if times[-1] > self.end + 1e-12:
            times = times[:-1]
        eps = self.step / JUMP_EPS_DIVISOR
        extra = []
        for j in self.jumps:
            if self.start < j <= times[-1] + 1e-12:
                extra.append(j - eps)
                extra.append(j)
        merged = np.unique(np.concatenate([times, np.asarray(extra)])) if extra else times
        flags = np.zeros(merged.size, dtype=bool)
        for j in self.jumps:
            hit = np.isclose(merged, j, rtol=0.0, atol=eps / 4.0)
            flags |= hit
        return merged, flags


@dataclass(frozen=True)
class CurveSpec:
    """Recipe for a dynamics curve: a named family plus its grid."""

    kind: str
    grid: TimeGrid
    frequency: float = math.pi / 2.0
    rate: float = 1.0
    omega: float = 1.0
    matrix: StochasticMatrix | None = None
    samples: tuple[StochasticMatrix, ...] | None = None


def oscillator_matrix(t: float, frequency: float = math.pi / 2.0) -> StochasticMatrix:
    c = math.cos(frequency * t) ** 2
    return validate([[c, 1.0 - c], [1.0 - c, c]], DEFAULT_TOL)


def decay_matrix(t: float, rate: float = 1.0) -> StochasticMatrix:
    e = math.exp(-rate * t)
    return validate([[1.0, 1.0 - e], [0.0, e]], DEFAULT_TOL)


def cadlag_matrix(t: float) -> StochasticMatrix:
    m = t - 2.0 * math.floor(t / 2.0)
    if m < 1.0:
        a = 2.0 ** (-m)
        return validate([[a, 1.0 - a], [1.0 - a, a]], DEFAULT_TOL)
    a = 2.0 ** (-(m - 1.0))
    return validate([[1.0 - a, a], [a, 1.0 - a]], DEFAULT_TOL)


def three_config_matrix(t: float, omega: float = 1.0) -> StochasticMatrix:
    c = math.cos(omega * t) ** 2
    s = 1.0 - c
    return validate(
        [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, c]],
        DEFAULT_TOL,
    )


def generate(spec: CurveSpec, tol: float = DEFAULT_TOL) -> DynamicsCurve:
    """Evaluate a curve family on its grid, inserting jump-adjacent samples."""
    kind = spec.kind
    grid = spec.grid
    if kind == "cadlag_cycle":
        first = math.floor(grid.start) + 1.0
        jumps = tuple(np.arange(first, grid.end + 1e-12))
        grid = TimeGrid(grid.start, grid.end, grid.step, jumps)

    times, flags = grid.sample_times()

    if kind == "oscillator":
        if spec.frequency <= 0:
            raise InvalidGridError("frequency must be positive")
        mats = tuple(oscillator_matrix(t, spec.frequency) for t in times)
    elif kind == "decay":
        if spec.rate <= 0:
            raise InvalidGridError("rate must be positive")
        mats = tuple(decay_matrix(t, spec.rate) for t in times)
    elif kind == "cadlag_cycle":
        mats = tuple(cadlag_matrix(t) for t in times)
    elif kind == "three_config_block":
        if spec.omega <= 0:
            raise InvalidGridError("omega must be positive")
        mats = tuple(three_config_matrix(t, spec.omega) for t in times)
    elif kind == "constant":
        if spec.matrix is None:
            raise InvalidGridError("constant curves need a matrix")
        mats = tuple(spec.matrix for _ in times)
    elif kind == "sampled":
        if spec.samples is None or len(spec.samples) != times.size:
            raise InvalidGridError("sampled curves need one matrix per grid time")
        mats = tuple(spec.samples)
    else:
        raise InvalidGridError(f"unknown curve kind {kind!r}")

    identity_start = True
    if times[0] == 0.0:
        first = mats[0].entries
        identity_start = bool(
            np.max(np.abs(first - np.eye(first.shape[0]))) <= max(tol, 1e-9)
        )
    return DynamicsCurve(times, mats, flags, identity_start, tol)


# ---------------------------------------------------------------------------
# CSV interface: columns t, g11, g12, ..., gNN (row-major), header required
# ---------------------------------------------------------------------------


def _header_names(n: int) -> list[str]:
    return ["t"] + [f"g{i + 1}{j + 1}" for i in range(n) for j in range(n)]


def read_curve_csv(text_or_path, tol: float = DEFAULT_TOL) -> DynamicsCurve:
    """Read a sampled curve; dimension is inferred from the column count."""
    if hasattr(text_or_path, "read"):
        rows = list(csv.reader(text_or_path))
    elif "\n" in str(text_or_path) or "," in str(text_or_path):
        rows = list(csv.reader(io.StringIO(str(text_or_path))))
    else:
        with open(text_or_path, newline="") as fh:
            rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise InvalidGridError("curve CSV needs a header and at least one sample")
    header = [c.strip() for c in rows[0]]
    n_sq = len(header) - 1
    n = int(round(math.sqrt(n_sq)))
    if header[0] != "t" or n * n != n_sq or header != _header_names(n):
        raise ShapeMismatchError(f"expected header {_header_names(n)}, got {header}")
    times = []
    mats = []
    for row in rows[1:]:
        vals = [float(v) for v in row]
        times.append(vals[0])
        mats.append(validate(np.asarray(vals[1:], dtype=float).reshape(n, n), tol))
    times_arr = np.asarray(times)
    identity_start = bool(
        times_arr[0] == 0.0
        and np.max(np.abs(mats[0].entries - np.eye(n))) <= max(tol, 1e-9)
    )
    return DynamicsCurve(
        times_arr, tuple(mats), np.zeros(times_arr.size, dtype=bool), identity_start, tol
    )


def write_curve_csv(curve: DynamicsCurve, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_header_names(curve.dim))
    for t, m in zip(curve.times, curve.matrices):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in m.entries.ravel()])


def parse_curve_spec(text: str) -> CurveSpec:
    """Parse a compact spec string: kind:key=value,key=value.

    Recognized keys: start, end, step, freq, rate, omega, p, q.
    Example: ``oscillator:freq=1.5707963267948966,start=0,end=1,step=0.01``.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    params: dict[str, float] = {}
    if rest:
        for chunk in rest.split(","):
            key, _, value = chunk.partition("=")
            if not value:
                raise InvalidGridError(f"bad curve parameter {chunk!r}")
            params[key.strip()] = float(value)
    grid = TimeGrid(params.get("start", 0.0), params.get("end", 1.0), params.get("step", 0.01))
    matrix = None
    if kind == "constant":
        p = params.get("p", 1.0)
        q = params.get("q", 1.0)
        matrix = validate([[p, 1.0 - q], [1.0 - p, q]])
    return CurveSpec(
        kind=kind,
        grid=grid,
        frequency=params.get("freq", math.pi / 2.0),
        rate=params.get("rate", 1.0),
        omega=params.get("omega", 1.0),
        matrix=matrix,
    )
