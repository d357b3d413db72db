"""Command-line front end.

    annuli weld DIFFEO [--steps K]
    annuli compose ANNULUS ANNULUS [ANNULUS ...]
    annuli exp LIEPATH [--framing]
    annuli cocycle FIELD FIELD
    annuli verify FILE
    annuli render FILE --format svg|csv

Exit status: 0 ok, 1 verification failed, 2 bad input, 3 solver error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import io
from .annulus import NormalizedAnnulus, compose
from .errors import AnnuliError
from .exponential import Framing, LiePath, exp_univ, lagrange_in_time
from .fourier import FourierSeries, analyze, grid
from .geometry import CircleDiffeo, JordanCurve, diffeo_invert
from .virasoro import VirasoroElement, cocycle
from .welding import WeldingSolution, equation_residual, weld, weld_far

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if v <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modes", type=_positive(int), help="truncation order N")
    common.add_argument("--tsteps", type=_positive(int), help="number of time steps M")
    common.add_argument("--tol", type=_positive(float), default=1e-8, help="solver tolerance")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "svg", "csv"], default="json")

    p = argparse.ArgumentParser(prog="annuli", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    w = sub.add_parser("weld", parents=[common], help="weld a circle diffeomorphism")
    w.add_argument("input")
    w.add_argument("--steps", type=_positive(int), default=1, help="continuation steps")
    c = sub.add_parser("compose", parents=[common], help="compose annuli left to right")
    c.add_argument("inputs", nargs="+")
    e = sub.add_parser("exp", parents=[common], help="exponentiate a path")
    e.add_argument("input")
    e.add_argument("--framing", action="store_true",
                   help="write the framing (which embeds the annulus) instead")
    k = sub.add_parser("cocycle", parents=[common], help="Virasoro cocycle of two fields")
    k.add_argument("inputs", nargs=2)
    v = sub.add_parser("verify", parents=[common], help="run invariant checks")
    v.add_argument("input")
    r = sub.add_parser("render", parents=[common], help="draw boundary curves")
    r.add_argument("input")
    return p


def _load(path, kinds=None):
    try:
        obj = io.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except (io.FormatError, ValueError, AnnuliError) as exc:
        # a document that decodes into an invalid object is an input error
        raise InputError(f"{path}: {exc}") from exc
    if kinds and not isinstance(obj, kinds):
        raise InputError(f"{path}: unexpected object {type(obj).__name__}")
    return obj


def _resample_time(path: LiePath, M: int) -> LiePath:
    if M == path.M:
        return path
    taus = np.linspace(0, path.M, M + 1)
    X = np.stack([lagrange_in_time(path.X, t, 6) for t in taus], axis=1)
    return LiePath(X, path.t0, max(path.cone_tol, 1e-9))


def _pad_path(path: LiePath, N: int) -> LiePath:
    c = path.coefficients()
    series = [FourierSeries(row).padded(N).coeffs for row in c]
    return LiePath.from_modes(np.array(series), path.t0, cone_tol=max(path.cone_tol, 1e-9))


# ---------------------------------------------------------------------
# checks

def _check(name, ok, residual):
    return {"name": name, "pass": bool(ok), "residual": float(residual)}


def checks_for(obj) -> list:
    out = []
    if isinstance(obj, FourierSeries):
        rt = analyze(obj.samples()).distance(obj)
        out.append(_check("round_trip", rt <= 1e-12 * max(1.0, obj.norm()), rt))
        out.append(_check("resolved", obj.is_resolved(), obj.tail_mass()))
    elif isinstance(obj, JordanCurve):
        v = float(np.min(np.abs(obj.velocity())))
        out.append(_check("velocity", v > 0, v))
        r = obj.injectivity_ratio()
        out.append(_check("injective", r >= obj.injectivity_tol, r))
        wn = obj.winding_number(obj.interior_point()) if r >= obj.injectivity_tol else 0.0
        out.append(_check("winding", abs(wn - 1) < 1e-6, abs(wn - 1)))
    elif isinstance(obj, CircleDiffeo):
        d = float(np.min(obj.derivative(grid(obj.N))))
        out.append(_check("orientation", d > 0, d))
        inv = diffeo_invert(obj)
        th = grid(obj.N)
        r = float(np.max(np.abs(obj(inv(th)) - th)))
        out.append(_check("invertible", r <= 1e-10, r))
    elif isinstance(obj, WeldingSolution):
        fm, fp = obj.f_minus, obj.f_plus
        N = fm.N
        hardy = max(float(np.max(np.abs(fp.coeffs[:fp.N]), initial=0.0)),
                    float(np.max(np.abs(fm.coeffs[N + 2:]), initial=0.0)))
        out.append(_check("hardy", hardy <= 1e-12, hardy))
        norm = max(abs(fm[1] - 1), abs(fm[0]))
        out.append(_check("normalization", norm <= 1e-12, norm))
        if obj.phi is not None:
            mm = obj.boundary_mismatch(4 * N + 1)
            out.append(_check("boundary_match", mm <= 1e-8, mm))
            er = equation_residual(obj)
            out.append(_check("equation", er <= 1e-8, er))
    elif isinstance(obj, NormalizedAnnulus):
        out.extend(_check(*c) for c in obj.checks())
    elif isinstance(obj, LiePath):
        low = float(np.min(obj.X.imag))
        out.append(_check("cone", low >= -1e-12, max(0.0, -low)))
        tail = max(obj.slice(k).tail_mass() for k in range(obj.M + 1))
        out.append(_check("resolved", obj.is_resolved(), tail))
    elif isinstance(obj, Framing):
        out.extend(_check(*c) for c in obj.checks())
    elif isinstance(obj, VirasoroElement):
        out.extend(_check(*c) for c in obj.annulus.checks())
        low = float(np.min(obj.path.X.imag))
        out.append(_check("cone", low >= -1e-12, max(0.0, -low)))
        out.append(_check("sitting_instants", obj.path.has_sitting_instants(),
                          float(np.max(np.abs(obj.path.X[:, [0, -1]])))))
        if obj.path.is_univ():
            d = exp_univ(obj.path)[0].distance(obj.annulus)
            out.append(_check("exp_matches_annulus", d <= 1e-6, d))
    else:
        raise InputError(f"nothing to verify for {type(obj).__name__}")
    return out


# ---------------------------------------------------------------------
# rendering

def _curves_of(obj, N=None):
    """(class name, samples) pairs of closed curves to draw."""
    if isinstance(obj, NormalizedAnnulus):
        return [("inner", obj.psi_plus.samples()), ("outer", obj.psi_minus.samples())]
    if isinstance(obj, WeldingSolution):
        return [("inner", obj.f_plus.samples()), ("outer", obj.f_minus.samples())]
    if isinstance(obj, JordanCurve):
        return [("curve", obj.samples())]
    if isinstance(obj, FourierSeries):
        return [("curve", obj.samples())]
    if isinstance(obj, Framing):
        ks = np.unique(np.linspace(0, obj.M, min(obj.M + 1, 11)).astype(int))
        out = [("inner", obj.h[:, 0])]
        out += [("slice", obj.h[:, k]) for k in ks[1:-1]]
        out.append(("outer", obj.h[:, -1]))
        return out
    if isinstance(obj, VirasoroElement):
        return _curves_of(obj.annulus)
    raise InputError(f"cannot render {type(obj).__name__}")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_svg(curves, size=400) -> str:
    pts = np.concatenate([c for _, c in curves])
    lo = np.array([pts.real.min(), pts.imag.min()])
    hi = np.array([pts.real.max(), pts.imag.max()])
    span = max(hi - lo) or 1.0
    pad = 0.05 * span
    scale = size / (span + 2 * pad)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             "<style>.inner{stroke:#c03;fill:none;stroke-width:1.5}"
             ".outer{stroke:#03c;fill:none;stroke-width:1.5}"
             ".slice{stroke:#999;fill:none;stroke-width:0.5}"
             ".curve{stroke:#000;fill:none;stroke-width:1}</style>"]
    for cls, c in curves:
        x = (c.real - lo[0] + pad) * scale
        y = size - (c.imag - lo[1] + pad) * scale
        d = "M " + " L ".join(f"{_fmt(a)} {_fmt(b)}" for a, b in zip(x, y)) + " Z"
        lines.append(f'<path class="{cls}" d="{d}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_csv(curves) -> str:
    rows = ["curve,index,theta,re,im"]
    counts = {}
    for cls, c in curves:
        idx = counts.get(cls, 0)
        counts[cls] = idx + 1
        name = cls if cls != "slice" else f"slice{idx}"
        th = 2 * np.pi * np.arange(c.size) / c.size
        for j, (t, v) in enumerate(zip(th, c)):
            rows.append(f"{name},{j},{float(t)!r},{float(v.real)!r},{float(v.imag)!r}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------

def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _doc_text(doc, fmt):
    if fmt != "json":
        raise InputError(f"--format {fmt} is only available for render")
    return io.dumps(doc)


def run(args) -> int:
    cmd = args.command
    if cmd == "weld":
        phi = _load(args.input, CircleDiffeo)
        N = args.modes or phi.N
        phi = CircleDiffeo(phi.p.padded(N))
        sol = weld(phi, N, args.tol) if args.steps == 1 else weld_far(phi, args.steps, N, args.tol)
        _emit(_doc_text(io.to_dict(sol), args.format), args.out)
        return EXIT_OK
    if cmd == "compose":
        anns = [_load(p, NormalizedAnnulus) for p in args.inputs]
        N = args.modes or max(a.N for a in anns)
        acc = anns[-1].padded(N)
        for a in reversed(anns[:-1]):
            acc = compose(a.padded(N), acc, N, args.tol)
        _emit(_doc_text(acc.to_dict(), args.format), args.out)
        return EXIT_OK
    if cmd == "exp":
        path = _load(args.input, LiePath)
        if args.modes and args.modes != path.N:
            path = _pad_path(path, args.modes)
        if args.tsteps:
            path = _resample_time(path, args.tsteps)
        ann, fr = exp_univ(path)
        doc = fr.to_dict() if args.framing else ann.to_dict()
        _emit(_doc_text(doc, args.format), args.out)
        return EXIT_OK
    if cmd == "cocycle":
        f, g = (_load(p, FourierSeries) for p in args.inputs)
        v = cocycle(f, g)
        _emit(_doc_text({"kind": "cocycle", "value": [v.real, v.imag]}, args.format), args.out)
        return EXIT_OK
    if cmd == "verify":
        obj = _load(args.input)
        checks = checks_for(obj)
        _emit(_doc_text({"checks": checks}, args.format), args.out)
        return EXIT_OK if all(c["pass"] for c in checks) else EXIT_VERIFY
    if cmd == "render":
        obj = _load(args.input)
        curves = _curves_of(obj)
        if args.format == "svg":
            text = render_svg(curves)
        elif args.format == "csv":
            text = render_csv(curves)
        else:
            text = io.dumps({"kind": "render", "curves": [
                {"class": cls, "points": [[float(v.real), float(v.imag)] for v in c]}
                for cls, c in curves]})
        _emit(text, args.out)
        return EXIT_OK
    raise InputError(f"unknown command {cmd}")


def _diagnostic(kind, stage, message):
    sys.stderr.write(json.dumps({"error": {"kind": kind, "stage": stage, "message": message}},
                                sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run(args)
    except InputError as exc:
        _diagnostic("input", "parse", str(exc))
        return EXIT_INPUT
    except AnnuliError as exc:
        _diagnostic("solver", exc.stage, str(exc))
        return EXIT_SOLVER
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _diagnostic("solver", "numeric", str(exc))
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
