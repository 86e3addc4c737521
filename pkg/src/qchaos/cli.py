"""Command line interface: ``qchaos {julia,orbit,cycles,lyapunov,purify}``.

Exit status: 0 success, 1 usage error, 2 degenerate-measurement halt,
3 no attracting cycle found.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys

from . import __version__
from .density import DensityMatrix
from .dynamics import (
    CYCLE_EPS,
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    angle_doubling_orbit,
    find_attracting_cycles,
    iterate_orbit,
    lyapunov_estimate,
)
from .exceptions import InvalidDensityMatrix, NoCycleFound
from .julia import GridSpec, render, to_grayscale, write_pgm
from .purification import (
    BREAKDOWN_TOL,
    DEFAULT_PHASE_SCALE,
    ProtocolParams,
    detect_transient_breakdown,
    make_initial_rho0,
    make_target,
    run_protocol,
)
from .sphere import INF, point_to_json

EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_NO_CYCLE = 3

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_REAL_RE = re.compile(rf"^([+-]?{_NUM})$")
_IMAG_RE = re.compile(rf"^([+-]?{_NUM})i$")
_CPLX_RE = re.compile(rf"^([+-]?{_NUM})([+-]{_NUM})i$")
_ANGLE_RE = re.compile(rf"^([+-]?{_NUM})(pi)?$")


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (decimal reals) to a finite complex."""
    t = text.strip()
    if m := _REAL_RE.match(t):
        return complex(float(m.group(1)), 0.0)
    if m := _IMAG_RE.match(t):
        return complex(0.0, float(m.group(1)))
    if m := _CPLX_RE.match(t):
        return complex(float(m.group(1)), float(m.group(2)))
    raise ValueError(f"cannot parse complex number from {text!r}")


def parse_point(text: str):
    """A sphere point: ``inf`` or anything :func:`parse_complex` accepts."""
    if text.strip().lower() == "inf":
        return INF
    return parse_complex(text)


def parse_angle(text: str) -> float:
    """Radians; a ``pi`` suffix multiplies by pi (``0.293pi``)."""
    m = _ANGLE_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse angle from {text!r}")
    v = float(m.group(1))
    return v * math.pi if m.group(2) else v


def parse_size(text: str):
    m = re.match(r"^(\d+)[xX](\d+)$", text.strip())
    if not m or int(m.group(1)) < 1 or int(m.group(2)) < 1:
        raise ValueError(f"size must look like WxH with positive integers, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"expected a positive real, got {text!r}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return v


def _typed(fn, name):
    # argparse reports the type's __name__ in its error message
    def wrapper(text):
        try:
            return fn(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    wrapper.__name__ = name
    return wrapper


COMPLEX = _typed(parse_complex, "complex")
POINT = _typed(parse_point, "point")
ANGLE = _typed(parse_angle, "angle")
SIZE = _typed(parse_size, "size")
POS_FLOAT = _typed(_positive_float, "positive real")
POS_INT = _typed(_positive_int, "positive integer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="qchaos", formatter_class=fmt,
                     description="Measurement-conditioned nonlinear qubit maps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    j = sub.add_parser("julia", formatter_class=fmt,
                       help="render convergence speed to the attracting cycles as a PGM")
    j.add_argument("--p", type=COMPLEX, required=True, help="map parameter, e.g. 1+0.5i")
    j.add_argument("--center", type=COMPLEX, default=0j, help="viewport center")
    j.add_argument("--half-width", type=POS_FLOAT, default=2.0, help="viewport half width")
    j.add_argument("--size", type=SIZE, default=(400, 400), help="image size WxH")
    j.add_argument("--eps", type=POS_FLOAT, default=DEFAULT_EPS, help="chordal convergence radius")
    j.add_argument("--max-iter", type=POS_INT, default=DEFAULT_MAX_ITER, help="iterations per pixel")
    j.add_argument("--gamma", type=POS_FLOAT, default=1.0, help="gray-level curve exponent")
    j.add_argument("--out", required=True, help="output .pgm path")
    j.add_argument("--dump-grid", help="also write per-pixel step counts as JSON")
    j.add_argument("--threads", type=POS_INT, default=1, help="worker threads")

    o = sub.add_parser("orbit", formatter_class=fmt, help="print a forward orbit as JSON")
    o.add_argument("--p", type=COMPLEX, required=True)
    o.add_argument("--z0", type=POINT, required=True, help="start point (complex or inf)")
    o.add_argument("--steps", type=POS_INT, default=10)
    o.add_argument("--out", help="write JSON here instead of stdout")

    c = sub.add_parser("cycles", formatter_class=fmt,
                       help="attracting cycles found from the critical orbits, as JSON")
    c.add_argument("--p", type=COMPLEX, required=True)
    c.add_argument("--max-iter", type=POS_INT, default=DEFAULT_MAX_ITER)
    c.add_argument("--eps", type=POS_FLOAT, default=CYCLE_EPS)
    c.add_argument("--out", help="write JSON here instead of stdout")

    ly = sub.add_parser("lyapunov", formatter_class=fmt,
                        help="orbit average of the log spherical derivative")
    ly.add_argument("--p", type=COMPLEX, required=True)
    ly.add_argument("--z0", type=POINT, default=2 + 0j)
    ly.add_argument("--steps", type=POS_INT, default=200)
    ly.add_argument("--doubling", action="store_true",
                    help="use the exact angle-doubling orbit on the unit circle (meaningful for p=0)")
    ly.add_argument("--seed", type=int, default=0, help="seed for --doubling")
    ly.add_argument("--out", help="write JSON here instead of stdout")

    pu = sub.add_parser("purify", formatter_class=fmt,
                        help="run the two-qubit purification protocol, write CSV")
    for name in ("x1", "x2", "phi1", "phi2"):
        pu.add_argument(f"--{name}", type=ANGLE, required=True,
                        help="angle in radians, or with a pi suffix (0.25pi)")
    pu.add_argument("--rho0", default="paper",
                    help="initial state: 'paper' or a density-matrix JSON file")
    pu.add_argument("--target", default="bell", choices=["bell"])
    pu.add_argument("--steps", type=POS_INT, required=True)
    pu.add_argument("--phase-scale", type=float, default=DEFAULT_PHASE_SCALE,
                    help="off-diagonal phase of each local unitary is exp(i*scale*phi)")
    pu.add_argument("--breakdown-tol", type=POS_FLOAT, default=BREAKDOWN_TOL)
    pu.add_argument("--out", required=True, help="output .csv path")
    return parser


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sidecar(path, command, params, **extra):
    _write_json({"command": command, "parameters": params, **extra}, f"{path}.json")


def _cmd_julia(args):
    w, h = args.size
    grid = GridSpec(args.center, args.half_width, w, h)
    cycles = find_attracting_cycles(args.p)
    conv = render(args.p, grid, args.eps, args.max_iter, n_jobs=args.threads, cycles=cycles)
    write_pgm(to_grayscale(conv, args.max_iter, args.gamma), args.out)
    params = {"p": point_to_json(args.p), "center": point_to_json(args.center),
              "half_width": args.half_width, "size": [w, h], "eps": args.eps,
              "max_iter": args.max_iter, "gamma": args.gamma}
    _sidecar(args.out, "julia", params, cycles=[c.to_json() for c in cycles])
    if args.dump_grid:
        _write_json(conv.to_json(), args.dump_grid)
    return 0


def _cmd_orbit(args):
    orbit = iterate_orbit(args.p, args.z0, args.steps)
    _write_json({"p": point_to_json(args.p), **orbit.to_json()}, args.out)
    return 0


def _cmd_cycles(args):
    cycles = find_attracting_cycles(args.p, args.max_iter, args.eps)
    _write_json({"p": point_to_json(args.p), "cycles": [c.to_json() for c in cycles]},
                args.out)
    return 0


def _cmd_lyapunov(args):
    if args.doubling:
        orbit = angle_doubling_orbit(args.steps, args.seed)
    else:
        orbit = iterate_orbit(args.p, args.z0, args.steps).points
    est = lyapunov_estimate(args.p, orbit)
    _write_json({"p": point_to_json(args.p), **est.to_json()}, args.out)
    return 0


def _cmd_purify(args):
    if args.rho0 == "paper":
        rho0 = make_initial_rho0()
    else:
        rho0 = DensityMatrix.load(args.rho0)
        if rho0.dim != 4:
            raise InvalidDensityMatrix(f"{args.rho0}: need a 4x4 state, got dim {rho0.dim}",
                                       ["dimension"])
    params = ProtocolParams(args.x1, args.phi1, args.x2, args.phi2, args.phase_scale)
    traj = run_protocol(rho0, params, args.steps, target=make_target())
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(traj.to_csv())
    breakdown = detect_transient_breakdown(traj, args.breakdown_tol) if len(traj) >= 4 else None
    _sidecar(args.out, "purify",
             {"x1": args.x1, "x2": args.x2, "phi1": args.phi1, "phi2": args.phi2,
              "phase_scale": args.phase_scale, "rho0": args.rho0, "target": args.target,
              "steps": args.steps, "breakdown_tol": args.breakdown_tol},
             degenerate=traj.degenerate, breakdown_step=breakdown)
    if traj.degenerate:
        print(f"degenerate measurement: halted after step {traj.records[-1].step}",
              file=sys.stderr)
        return EXIT_DEGENERATE
    return 0


COMMANDS = {"julia": _cmd_julia, "orbit": _cmd_orbit, "cycles": _cmd_cycles,
            "lyapunov": _cmd_lyapunov, "purify": _cmd_purify}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except NoCycleFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CYCLE
    except (InvalidDensityMatrix, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
