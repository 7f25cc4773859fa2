"""Command-line front end emitting JSON documents, CSV tables and SVG figures.

Exit codes: 0 on success (for ``divide``: the pair is divisible), 1 when
``divide`` finds the pair indivisible, 2 on errors or undecidable input.
The tolerance defaults to 1e-9 and can be overridden per call with ``--tol``
or globally with the ``DIVCONE_TOL`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import coarse as coarse_mod
from . import curves as curves_mod
from . import geometry, information, sqc
from .core import DEFAULT_TOL, DiagCoord, ProbabilityVector, StochasticMatrix, to_xt, validate
from .divisibility import DIVISIBLE, analyze_curve, divide
from .errors import DivconeError

SCHEMA_VERSION = "1"


def _document(command: str, echo: dict, payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "echo": echo, "payload": payload}
    return json.dumps(doc, sort_keys=True) + "\n"


def _matrix_payload(m: StochasticMatrix) -> list:
    return [[float(v) for v in row] for row in m.entries]


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise DivconeError(f"expected 'p,q', got {text!r}")
    return float(parts[0]), float(parts[1])


def _load_matrix(text: str, tol: float) -> StochasticMatrix:
    """Inline 'p,q' shorthand (dim 2) or a column-major CSV matrix file."""
    if os.path.exists(text):
        with open(text) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        cols = [[float(v) for v in ln.split(",")] for ln in lines]
        arr = np.asarray(cols, dtype=float).T
        return validate(arr, tol)
    p, q = _parse_pair(text)
    return DiagCoord(p, q).to_matrix(tol)


def _load_curve(args, tol: float):
    if getattr(args, "curve_csv", None):
        return curves_mod.read_curve_csv(args.curve_csv, tol)
    if getattr(args, "curve", None):
        return curves_mod.generate(curves_mod.parse_curve_spec(args.curve), tol)
    raise DivconeError("provide --curve or --curve-csv")


# ---------------------------------------------------------------------------
# SVG rendering of the region figure
# ---------------------------------------------------------------------------

_MARGIN = 40.0
_SIDE = 432.0


def _px(x: float, y: float) -> tuple[float, float]:
    return (_MARGIN + x * _SIDE, _MARGIN + (1.0 - y) * _SIDE)


def _svg_polygon(polygon, fill: str, opacity: float) -> str:
    if len(polygon) == 1:
        cx, cy = _px(*polygon[0])
        return f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3.0" fill="{fill}" fill-opacity="{opacity}"/>'
    pts = " ".join("{:.3f},{:.3f}".format(*_px(x, y)) for x, y in polygon)
    if len(polygon) == 2:
        return f'<polyline points="{pts}" stroke="{fill}" stroke-width="3" fill="none" stroke-opacity="{opacity}"/>'
    return f'<polygon points="{pts}" fill="{fill}" fill-opacity="{opacity}"/>'


def _svg_regions(anchor: DiagCoord, tol: float) -> str:
    past_up, past_lo = geometry.past_regions(anchor, tol)
    trans_up, trans_lo = geometry.transition_regions(anchor, tol)
    future = geometry.future_square(anchor, tol)
    image = geometry.image_square(anchor, tol)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 512 512">',
        '<rect width="512" height="512" fill="white"/>',
    ]
    parts.append(_svg_polygon(past_up.polygon, "#b0b0b0", 0.55))
    parts.append(_svg_polygon(past_lo.polygon, "#b0b0b0", 0.55))
    parts.append(_svg_polygon(future.polygon, "#f2e33a", 0.45))
    parts.append(_svg_polygon(image.polygon, "#e548e5", 0.45))
    parts.append(_svg_polygon(trans_up.polygon, "#39d3e6", 0.5))
    parts.append(_svg_polygon(trans_lo.polygon, "#39d3e6", 0.5))
    x0, y0 = _px(0.0, 0.0)
    x1, y1 = _px(1.0, 1.0)
    parts.append(
        f'<rect x="{min(x0, x1):.3f}" y="{min(y0, y1):.3f}" width="{abs(x1 - x0):.3f}" '
        f'height="{abs(y1 - y0):.3f}" fill="none" stroke="black" stroke-width="1.5"/>'
    )
    dx0, dy0 = _px(1.0, 0.0)
    dx1, dy1 = _px(0.0, 1.0)
    parts.append(
        f'<line x1="{dx0:.3f}" y1="{dy0:.3f}" x2="{dx1:.3f}" y2="{dy1:.3f}" '
        'stroke="#e89b2d" stroke-width="1.5"/>'
    )
    ax, ay = _px(anchor.p, anchor.q)
    parts.append(f'<circle cx="{ax:.3f}" cy="{ay:.3f}" r="4.0" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _region_payload(region: geometry.Region) -> dict:
    return {
        "kind": region.kind.value,
        "anchor": [region.anchor.p, region.anchor.q],
        "lines": [[a, b, c, op] for a, b, c, op in region.lines],
        "polygon": [[x, y] for x, y in region.polygon],
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_divide(args, tol: float) -> int:
    later = _load_matrix(args.later, tol)
    earlier = _load_matrix(args.earlier, tol)
    verdict = divide(later, earlier, tol)
    payload = {
        "divisible": verdict.divisible,
        "branch": verdict.branch.value,
        "max_violation": verdict.max_violation
        if verdict.max_violation == verdict.max_violation
        else None,
        "det_later": later.det,
        "det_earlier": earlier.det,
        "transition": _matrix_payload(verdict.transition) if verdict.transition else None,
    }
    sys.stdout.write(
        _document("divide", {"later": args.later, "earlier": args.earlier, "tol": tol}, payload)
    )
    if verdict.divisible is None:
        return 2
    return 0 if verdict.divisible else 1


def _cmd_regions(args, tol: float) -> int:
    p, q = _parse_pair(args.anchor)
    anchor = DiagCoord(p, q)
    past_up, past_lo = geometry.past_regions(anchor, tol)
    trans_up, trans_lo = geometry.transition_regions(anchor, tol)
    regions = [
        past_up,
        past_lo,
        trans_up,
        trans_lo,
        geometry.future_square(anchor, tol),
        geometry.image_square(anchor, tol),
    ]
    payload = {"anchor": [anchor.p, anchor.q], "regions": [_region_payload(r) for r in regions]}
    doc = _document("regions", {"anchor": args.anchor, "tol": tol}, payload)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(_svg_regions(anchor, tol))
    return 0


def _cmd_analyze(args, tol: float) -> int:
    curve = _load_curve(args, tol)
    report = analyze_curve(curve, tol)
    k_count = len(curve)
    fully_divisible = [
        k
        for k in range(k_count)
        if bool(np.all(report.table[: k + 1, k] == DIVISIBLE))
    ]
    payload = {
        "dim": curve.dim,
        "times": [float(t) for t in curve.times],
        "jump_flags": [bool(f) for f in curve.flags],
        "dets": [float(d) for d in report.dets],
        "table": [[int(c) for c in row] for row in report.table],
        "proper_events": list(report.proper_events),
        "det_sign_changes": [list(pair) for pair in report.det_sign_changes],
        "last_fully_divisible_time": float(curve.times[fully_divisible[-1]])
        if fully_divisible
        else None,
    }
    if curve.dim == 2:
        mono = information.monotonicity_report(curve, tol)
        payload["information_recovery_steps"] = list(mono.recovery_steps)
        payload["monotonicity_violations"] = list(mono.violations)
    echo = {"curve": args.curve or args.curve_csv, "tol": tol}
    doc = _document("analyze", echo, payload)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(doc)
        summary = {
            "cells": int(k_count * (k_count + 1) // 2),
            "proper_events": len(report.proper_events),
            "last_fully_divisible_time": payload["last_fully_divisible_time"],
        }
        sys.stdout.write(_document("analyze", echo, summary))
    else:
        sys.stdout.write(doc)
    return 0


def _cmd_sample(args, tol: float) -> int:
    p, q = _parse_pair(args.anchor)
    samples = geometry.sample_divisors(DiagCoord(p, q), args.n, args.seed, tol)
    lines = ["r,s,u,v"]
    for smp in samples:
        lines.append(
            f"{smp.past.p!r},{smp.past.q!r},{smp.transition.p!r},{smp.transition.q!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
        sys.stdout.write(
            _document(
                "sample",
                {"anchor": args.anchor, "n": args.n, "seed": args.seed, "tol": tol},
                {"written": args.csv, "count": len(samples)},
            )
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_info(args, tol: float) -> int:
    m = _load_matrix(args.matrix, tol)
    payload: dict = {"matrix": _matrix_payload(m), "det": m.det}
    if m.dim == 2:
        xt = to_xt(m.diag_coord)
        payload["xt"] = {"x": xt.x, "t": xt.t}
        payload["dobrushin"] = information.dobrushin_coefficient(m)
        payload["unistochastic"] = sqc.is_unistochastic2(m, tol)
    try:
        payload["birkhoff"] = information.birkhoff_coefficient(m)
    except DivconeError as exc:
        payload["birkhoff"] = None
        payload["birkhoff_error"] = type(exc).__name__
    if args.pi and args.pihat:
        pi = ProbabilityVector(np.asarray([float(v) for v in args.pi.split(",")]))
        pihat = ProbabilityVector(np.asarray([float(v) for v in args.pihat.split(",")]))
        payload["phi_entropy_kl"] = information.phi_entropy(
            information.PhiKernel.KL, pi, pihat, base_two=args.bits
        )
        if m.dim == 2:
            lhs, rhs, holds = information.check_contraction(m, pi, pihat)
            payload["contraction"] = {"lhs": lhs, "rhs": rhs, "holds": holds}
        if pi.strictly_positive and pihat.strictly_positive:
            payload["hilbert"] = information.hilbert_metric(pi, pihat)
    echo = {"matrix": args.matrix, "pi": args.pi, "pihat": args.pihat, "bits": args.bits, "tol": tol}
    sys.stdout.write(_document("info", echo, payload))
    return 0


def _cmd_sqc(args, tol: float) -> int:
    m = _load_matrix(args.matrix, tol)
    theta = sqc.sh_sqrt(m, args.theta, args.phi)
    kraus = sqc.kraus_from_theta(theta, tol)
    back = sqc.channel_to_stochastic(kraus, tol)
    payload = {
        "matrix": _matrix_payload(m),
        "theta": [[[v.real, v.imag] for v in row] for row in theta],
        "abs_det_theta": sqc.unitarity_deviation(theta),
        "unistochastic": sqc.is_unistochastic2(m, tol),
        "roundtrip_max_error": float(np.max(np.abs(back.entries - m.entries))),
    }
    try:
        ratio = sqc.birkhoff_ratio_check(m)
        payload["birkhoff_ratio"] = {
            "det_gamma": ratio.det_gamma,
            "abs_det_theta_sq": ratio.abs_det_theta_sq,
            "ratio": ratio.ratio,
        }
    except DivconeError:
        payload["birkhoff_ratio"] = None
    if args.p0:
        p0 = ProbabilityVector(np.asarray([float(v) for v in args.p0.split(",")]))
        rho = sqc.evolve_density(theta, p0)
        payload["rho"] = [[[v.real, v.imag] for v in row] for row in rho.entries]
        payload["rho_diag"] = [float(v) for v in rho.diagonal.entries]
        payload["coherence"] = [rho.entries[0, 1].real, rho.entries[0, 1].imag]
    echo = {
        "matrix": args.matrix,
        "theta": args.theta,
        "phi": args.phi,
        "p0": args.p0,
        "tol": tol,
    }
    sys.stdout.write(_document("sqc", echo, payload))
    return 0


def _cmd_coarse(args, tol: float) -> int:
    with open(args.grouping) as fh:
        grouping_text = fh.read()
    x, y, _ = coarse_mod.grouping_from_json(grouping_text)
    curve = _load_curve(args, tol)
    echo = {
        "grouping": args.grouping,
        "curve": args.curve or args.curve_csv,
        "mode": args.mode,
        "tol": tol,
    }
    if args.mode == "cg":
        reduced = coarse_mod.coarse_grain_curve(x, y, curve, tol)
        return _write_curve(reduced, args.out, echo)
    if args.mode == "dilate":
        dispatch = coarse_mod.DispatchCurve.constant(x, curve.times, y)
        dilated = coarse_mod.dilate(x, dispatch, curve, tol)
        return _write_curve(dilated, args.out, echo)
    # transfer
    if args.t is None or args.tprime is None:
        raise DivconeError("transfer mode needs --t and --tprime")
    t_idx = int(np.argmin(np.abs(curve.times - args.t)))
    tp_idx = int(np.argmin(np.abs(curve.times - args.tprime)))
    report = coarse_mod.divisibility_transfer_check(x, y, curve, t_idx, tp_idx, [y], tol)
    payload = {
        "t": float(curve.times[t_idx]),
        "tprime": float(curve.times[tp_idx]),
        "original_divisible": report.original_divisible,
        "transfer_holds": list(report.candidate_results),
        "residuals": list(report.residuals),
        "sufficient_dilation": report.sufficient_dilation,
    }
    sys.stdout.write(_document("coarse", echo, payload))
    return 0


def _write_curve(curve, out: str | None, echo: dict) -> int:
    if out:
        with open(out, "w") as fh:
            curves_mod.write_curve_csv(curve, fh)
        sys.stdout.write(
            _document("coarse", echo, {"written": out, "dim": curve.dim, "samples": len(curve)})
        )
    else:
        curves_mod.write_curve_csv(curve, sys.stdout)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divcone",
        description="divisibility analysis of stochastic dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divide", help="test a (later, earlier) pair")
    p.add_argument("--later", required=True, help="'p,q' pair or matrix CSV path")
    p.add_argument("--earlier", required=True, help="'p,q' pair or matrix CSV path")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("regions", help="cone regions of an anchor point")
    p.add_argument("--anchor", required=True, help="'p,q' pair")
    p.add_argument("--svg", default=None, help="write the region figure here")
    p.add_argument("--json", default=None, help="write the region document here")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("analyze", help="division-event table of a curve")
    p.add_argument("--curve", default=None, help="spec, e.g. oscillator:end=1,step=0.05")
    p.add_argument("--curve-csv", default=None, help="sampled curve CSV path")
    p.add_argument("--report", default=None, help="write the full report here")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("sample", help="sample divisor pairs of an anchor")
    p.add_argument("--anchor", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--csv", default=None, help="write samples here instead of stdout")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("info", help="information and ergodicity coefficients")
    p.add_argument("--matrix", required=True)
    p.add_argument("--pi", default=None)
    p.add_argument("--pihat", default=None)
    p.add_argument("--bits", action="store_true", help="report entropies in bits")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("sqc", help="quantum conversion of a 2x2 matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--p0", default=None, help="initial probabilities 'a,b'")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("coarse", help="coarse-grain, dilate, or check transfer")
    p.add_argument("--grouping", required=True, help="grouping JSON path")
    p.add_argument("--curve", default=None)
    p.add_argument("--curve-csv", default=None)
    p.add_argument("--mode", choices=["cg", "dilate", "transfer"], required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--tprime", type=float, default=None)
    p.add_argument("--out", default=None, help="output CSV path for cg/dilate")
    p.add_argument("--tol", type=float, default=None)

    return parser


_COMMANDS = {
    "divide": _cmd_divide,
    "regions": _cmd_regions,
    "analyze": _cmd_analyze,
    "sample": _cmd_sample,
    "info": _cmd_info,
    "sqc": _cmd_sqc,
    "coarse": _cmd_coarse,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    tol = args.tol
    if tol is None:
        tol = float(os.environ.get("DIVCONE_TOL", DEFAULT_TOL))
    try:
        return _COMMANDS[args.command](args, tol)
    except (DivconeError, OSError, ValueError) as exc:
        print(f"divcone: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
