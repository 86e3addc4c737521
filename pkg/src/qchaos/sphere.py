"""Extended complex numbers on the Riemann sphere.

A point is either a finite Python ``complex`` or the singleton :data:`INF`.
Array kernels work on the split representation ``(re, im, inf)`` of three
numpy arrays, which keeps every floating-point operation an elementwise IEEE
operation (so results do not depend on how a grid is chunked) and keeps the
point at infinity explicit instead of leaking ``float('inf')`` through.
"""
from __future__ import annotations

import math
from typing import Iterable, Union

import numpy as np


class _PointAtInfinity:
    """The point at infinity. There is exactly one instance, :data:`INF`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_PointAtInfinity, ())

    def __hash__(self):
        return hash("qchaos.INF")


INF = _PointAtInfinity()

SpherePoint = Union[complex, _PointAtInfinity]


def is_inf(z) -> bool:
    return z is INF


def as_point(z) -> SpherePoint:
    """Coerce a number (or ``INF``) into a sphere point.

    Non-finite real or imaginary parts are mapped to :data:`INF` on purpose;
    NaN is rejected.
    """
    if z is INF:
        return INF
    if isinstance(z, str):
        if z.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        raise ValueError(f"not a sphere point: {z!r}")
    c = complex(z)
    if math.isnan(c.real) or math.isnan(c.imag):
        raise ValueError("NaN is not a point of the Riemann sphere")
    if math.isinf(c.real) or math.isinf(c.imag):
        return INF
    return c


def invert(z) -> SpherePoint:
    """The map z -> 1/z on the sphere (0 <-> INF)."""
    z = as_point(z)
    if z is INF:
        return 0j
    if z == 0:
        return INF
    return as_point(1 / z)


def conjugate(z) -> SpherePoint:
    z = as_point(z)
    return INF if z is INF else z.conjugate()


# ---------------------------------------------------------------------------
# split-array representation

def to_arrays(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split points into ``(re, im, inf)`` arrays.

    Accepts a single point, an iterable of points, or a complex ndarray
    (whose non-finite entries become INF).
    """
    if isinstance(points, np.ndarray) and points.dtype != object:
        z = np.asarray(points, dtype=complex)
        if np.isnan(z).any():
            raise ValueError("NaN is not a point of the Riemann sphere")
        inf = ~np.isfinite(z)
        re = np.where(inf, 0.0, z.real)
        im = np.where(inf, 0.0, z.imag)
        return re, im, inf
    if points is INF or np.isscalar(points):
        points = [points]
    pts = [as_point(p) for p in points]
    inf = np.array([p is INF for p in pts], dtype=bool)
    re = np.array([0.0 if p is INF else p.real for p in pts], dtype=float)
    im = np.array([0.0 if p is INF else p.imag for p in pts], dtype=float)
    return re, im, inf


def from_arrays(re, im, inf) -> list:
    return [INF if f else complex(a, b) for a, b, f in zip(
        np.ravel(re).tolist(), np.ravel(im).tolist(), np.ravel(inf).tolist())]


def _reciprocal(re, im):
    # Smith's algorithm; exact under conjugation (im -> -im gives -result.im)
    big = np.abs(re) >= np.abs(im)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        r1 = im / re
        d1 = re + im * r1
        r2 = re / im
        d2 = im + re * r2
        out_re = np.where(big, 1.0 / d1, r2 / d2)
        out_im = np.where(big, -r1 / d1, -1.0 / d2)
    return out_re, out_im


def lift(re, im, inf):
    """Homogeneous coordinates ``(a, b)`` with z = a/b and max(|a|, |b|) = 1.

    Points with |z| <= 1 use the standard chart ``(z, 1)``; the rest use the
    inversion chart ``(1, 1/z)``, with INF -> ``(1, 0)``.
    """
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    inf = np.asarray(inf, dtype=bool)
    with np.errstate(over="ignore"):
        outer = inf | (re * re + im * im > 1.0)
    safe_re = np.where(outer & ~inf, re, 1.0)
    safe_im = np.where(outer & ~inf, im, 0.0)
    wr, wi = _reciprocal(safe_re, safe_im)
    wr = np.where(inf, 0.0, wr)
    wi = np.where(inf, 0.0, wi)
    one = np.ones_like(re)
    zero = np.zeros_like(re)
    ar = np.where(outer, one, re)
    ai = np.where(outer, zero, im)
    br = np.where(outer, wr, one)
    bi = np.where(outer, wi, zero)
    return ar, ai, br, bi, outer


def chordal_distance_arrays(re1, im1, inf1, re2, im2, inf2) -> np.ndarray:
    """Elementwise chordal distance between two point arrays (broadcasting)."""
    a1r, a1i, b1r, b1i, _ = lift(re1, im1, inf1)
    a2r, a2i, b2r, b2i, _ = lift(re2, im2, inf2)
    # |a1 b2 - a2 b1|
    cr = (a1r * b2r - a1i * b2i) - (a2r * b1r - a2i * b1i)
    ci = (a1r * b2i + a1i * b2r) - (a2r * b1i + a2i * b1r)
    n1 = a1r * a1r + a1i * a1i + b1r * b1r + b1i * b1i
    n2 = a2r * a2r + a2i * a2i + b2r * b2r + b2i * b2i
    d = 2.0 * np.sqrt(cr * cr + ci * ci) / np.sqrt(n1 * n2)
    return np.minimum(d, 2.0)


def chordal_distance(a, b) -> float:
    """Chordal distance on the unit sphere (values in ``[0, 2]``).

    ``d(a, b) = 2|a - b| / sqrt((1 + |a|^2)(1 + |b|^2))`` and
    ``d(a, INF) = 2 / sqrt(1 + |a|^2)``.
    """
    ra, ia, fa = to_arrays(a)
    rb, ib, fb = to_arrays(b)
    return float(chordal_distance_arrays(ra, ia, fa, rb, ib, fb)[0])


def is_close(a, b, eps: float) -> bool:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return chordal_distance(a, b) < eps


# ---------------------------------------------------------------------------
# JSON

def point_to_json(z):
    z = as_point(z)
    if z is INF:
        return "inf"
    return [z.real, z.imag]


def point_from_json(obj) -> SpherePoint:
    if isinstance(obj, str):
        if obj == "inf":
            return INF
        raise ValueError(f"invalid point encoding {obj!r}")
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return as_point(complex(float(obj[0]), float(obj[1])))
    raise ValueError(f"invalid point encoding {obj!r}")


def points_to_json(points: Iterable) -> list:
    return [point_to_json(z) for z in points]
