"""Orbits, attracting cycles and convergence classification for F_p."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import NoCycleFound
from .pure_map import (
    apply_map,
    apply_map_arrays,
    as_param,
    chart_derivative,
    critical_points,
    spherical_derivative_arrays,
)
from .sphere import (
    INF,
    as_point,
    chordal_distance,
    chordal_distance_arrays,
    points_to_json,
    to_arrays,
)

DEFAULT_EPS = 1e-6
DEFAULT_MAX_ITER = 500
CYCLE_EPS = 1e-10
#: longest period the trailing-window cycle detector looks for
MAX_PERIOD = 64
LOG_FLOOR = -745.0


@dataclass
class OrbitRecord:
    points: list
    escaped_to_cycle: Optional[int] = None
    steps_to_converge: Optional[int] = None

    def to_json(self):
        return {"points": points_to_json(self.points),
                "cycle": self.escaped_to_cycle,
                "steps_to_converge": self.steps_to_converge}


@dataclass
class CycleRecord:
    points: list
    multiplier: complex
    period: int = field(init=False)

    def __post_init__(self):
        self.period = len(self.points)

    @property
    def multiplier_magnitude(self) -> float:
        return abs(self.multiplier)

    def to_json(self):
        return {"period": self.period,
                "points": points_to_json(self.points),
                "multiplier_magnitude": self.multiplier_magnitude}


class Classification(NamedTuple):
    cycle: Optional[int]
    steps: Optional[int]

    @property
    def converged(self) -> bool:
        return self.cycle is not None


NOT_CONVERGED = Classification(None, None)


def iterate_orbit(p, z0, n: int) -> OrbitRecord:
    """Forward orbit ``[z0, F(z0), ..., F^n(z0)]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = as_param(p)
    pts = [as_point(z0)]
    for _ in range(n):
        pts.append(apply_map(p, pts[-1]))
    return OrbitRecord(pts)


def _canonical_rotation(points):
    # finite points ordered by (re, im) come before INF
    def key(z):
        return (1, 0.0, 0.0) if z is INF else (0, z.real, z.imag)
    start = min(range(len(points)), key=lambda k: key(points[k]))
    # adding 0.0 turns -0.0 into 0.0 so printed cycles look canonical too
    out = points[start:] + points[:start]
    return [z if z is INF else complex(z.real + 0.0, z.imag + 0.0) for z in out]


def cycle_multiplier(p, points: Sequence) -> complex:
    """Product of chart-local derivatives around a cycle.

    Each point is read in the chart z (|z| <= 1) or 1/z (otherwise), so a
    cycle through INF never meets the singular chart.
    """
    p = as_param(p)
    pts = [as_point(z) for z in points]
    m = 1 + 0j
    for k, z in enumerate(pts):
        nxt = pts[(k + 1) % len(pts)]
        m *= chart_derivative(p, z, dst_inverted=(nxt is INF or abs(nxt) > 1.0))
    return m


def _minimal_period(pts, tol):
    # the window can close on a multiple of the true period first
    k = len(pts)
    for d in range(1, k):
        if k % d == 0 and all(chordal_distance(pts[i], pts[(i + d) % k]) < tol
                              for i in range(k)):
            return pts[:d]
    return pts


def _detect_cycle(p, z0, max_iter, eps, polish_tol=1e-14, polish_steps=4096,
                  period_tol=1e-8):
    """Follow one orbit until a trailing window closes up; return its cycle."""
    window = [as_point(z0)]
    for _ in range(max_iter):
        window.append(apply_map(p, window[-1]))
        window = window[-(MAX_PERIOD + 1):]
        # distances from the newest point back to each earlier one, k = 1, 2, ...
        re, im, inf = to_arrays(window[::-1])
        d = chordal_distance_arrays(re[0], im[0], inf[0], re[1:], im[1:], inf[1:])
        hits = np.flatnonzero(d < eps)
        if hits.size == 0:
            continue
        k = int(hits[0]) + 1
        # polish: keep iterating, one full period at a time
        pts = window[-k:]
        z = pts[-1]
        for _ in range(polish_steps // k):
            new = []
            for _ in range(k):
                z = apply_map(p, z)
                new.append(z)
            moved = max(chordal_distance(a, b) for a, b in zip(pts, new))
            pts = new
            if moved < polish_tol:
                break
        pts = _minimal_period(pts, period_tol)
        mult = cycle_multiplier(p, pts)
        if abs(mult) < 1.0:
            return CycleRecord(_canonical_rotation(pts), mult)
    return None


def find_attracting_cycles(p, max_iter: int = DEFAULT_MAX_ITER,
                           eps: float = CYCLE_EPS, same_tol: float = 1e-6) -> list:
    """Attracting cycles of F_p found by following both critical orbits.

    Every attracting cycle attracts a critical point, and F_p has exactly two
    (0 and INF), so at most two cycles are returned. Raises
    :class:`NoCycleFound` when neither critical orbit settles.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    p = as_param(p)
    cycles = []
    for c in critical_points(p):
        cyc = _detect_cycle(p, c, max_iter, eps)
        if cyc is None:
            continue
        dup = any(cyc.period == old.period and
                  min(chordal_distance(cyc.points[0], q) for q in old.points) < same_tol
                  for old in cycles)
        if not dup:
            cycles.append(cyc)
    if not cycles:
        raise NoCycleFound(
            f"no attracting cycle found for p={p} within {max_iter} iterations")
    return cycles


def _cycle_arrays(cycles):
    pts, ids, members = [], [], []
    for cid, cyc in enumerate(cycles):
        pts.extend(cyc.points)
        ids.extend([cid] * len(cyc.points))
        members.extend(range(len(cyc.points)))
    re, im, inf = to_arrays(pts)
    return re, im, inf, np.array(ids, dtype=np.int16), np.array(members, dtype=np.int16)


def classify_arrays(p, re, im, inf, cycles, eps: float = DEFAULT_EPS,
                    max_iter: int = DEFAULT_MAX_ITER):
    """Vectorized convergence classification.

    Returns ``(cycle_id, steps, member)`` int arrays; ``-1`` marks points that
    do not come within ``eps`` (chordal) of a cycle point after ``max_iter``
    steps. Step ``k`` means ``F^k(z0)`` is the first iterate that is close,
    and ``member`` is the index of the cycle point it is close to.
    Each element only ever sees elementwise IEEE operations, so results are
    independent of how the input is batched.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    p = as_param(p)
    re = np.array(re, dtype=float).ravel()
    im = np.array(im, dtype=float).ravel()
    inf = np.array(inf, dtype=bool).ravel()
    n = re.size
    cyc_id = np.full(n, -1, dtype=np.int16)
    steps = np.full(n, -1, dtype=np.int32)
    member = np.full(n, -1, dtype=np.int16)
    cre, cim, cinf, cids, cmembers = _cycle_arrays(cycles)
    if cids.size == 0:
        return cyc_id, steps, member
    active = np.arange(n)
    zr, zi, zf = re, im, inf
    for k in range(max_iter + 1):
        d = chordal_distance_arrays(zr[:, None], zi[:, None], zf[:, None],
                                    cre[None, :], cim[None, :], cinf[None, :])
        close = d < eps
        hit = close.any(axis=1)
        if hit.any():
            first = np.argmax(close[hit], axis=1)
            cyc_id[active[hit]] = cids[first]
            steps[active[hit]] = k
            member[active[hit]] = cmembers[first]
            keep = ~hit
            active, zr, zi, zf = active[keep], zr[keep], zi[keep], zf[keep]
        if active.size == 0 or k == max_iter:
            break
        zr, zi, zf = apply_map_arrays(p, zr, zi, zf)
    return cyc_id, steps, member


def classify_point(p, z0, cycles, eps: float = DEFAULT_EPS,
                   max_iter: int = DEFAULT_MAX_ITER) -> Classification:
    cyc_id, steps, _ = classify_arrays(p, *to_arrays(as_point(z0)), cycles, eps, max_iter)
    if cyc_id[0] < 0:
        return NOT_CONVERGED
    return Classification(int(cyc_id[0]), int(steps[0]))


@dataclass
class LyapunovEstimate:
    value: float
    n: int
    clamped: bool
    attracting: bool

    def __float__(self):
        return self.value

    def to_json(self):
        return {"value": self.value, "n": self.n,
                "clamped": self.clamped, "attracting": self.attracting}


def lyapunov_estimate(p, orbit, floor: float = LOG_FLOOR) -> LyapunovEstimate:
    """Mean of ``ln F#(z_k)`` over the supplied orbit points.

    ``F#`` is the spherical derivative. Only for p = 0 does this coincide with
    the classical exponent on the invariant unit circle; for other p it is
    the natural chart-free generalization. Log terms are floored at ``floor``
    (a superattracting point has F# = 0) and the result is flagged.
    """
    if isinstance(orbit, OrbitRecord):
        orbit = orbit.points
    if isinstance(orbit, np.ndarray) and orbit.dtype != object:
        re, im, inf = to_arrays(orbit)
    else:
        re, im, inf = to_arrays(list(orbit))
    if re.size < 2:
        raise ValueError("orbit must have at least 2 points")
    fs = spherical_derivative_arrays(p, re, im, inf)
    with np.errstate(divide="ignore"):
        logs = np.log(fs)
    clamped = bool((logs < floor).any())
    value = float(np.mean(np.maximum(logs, floor)))
    return LyapunovEstimate(value, int(re.size), clamped, value < 0)


def angle_doubling_orbit(n: int, seed: int = 0) -> np.ndarray:
    """Exact orbit of z -> z**2 on the unit circle, as a complex array.

    theta_k / 2 pi is the binary fraction read from bit ``k`` of a seeded random
    bit stream, so the doubling is a shift and no precision is lost along
    the orbit (unlike iterating ``2 theta mod 2 pi`` in floating point, which
    collapses to 0 within ~53 steps).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=n + 52).astype(float)
    weights = 0.5 ** np.arange(1, 53)
    frac = np.lib.stride_tricks.sliding_window_view(bits, 52)[:n] @ weights
    return np.exp(2j * math.pi * frac)
