"""Pure-state reduction of the one-qubit dynamics.

A pure state ``N (z|0> + |1>)`` is identified with the coordinate ``z`` on the
Riemann sphere. One step of the conditional dynamics then acts as the
degree-two rational map

    F_p(z) = (z**2 + p) / (1 - conj(p) z**2),     p = tan(x) exp(i phi).
"""
from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

from .exceptions import SingularRotation
from .sphere import INF, SpherePoint, as_point, from_arrays, lift, to_arrays

#: below this ratio |denominator| / |numerator| the image is taken to be INF
POLE_TOL = 1e-150


def as_param(p) -> complex:
    """Validate a map parameter: a finite complex number."""
    if p is INF:
        raise ValueError("p = INF (x = pi/2) is not supported")
    c = complex(p)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"map parameter must be finite, got {p!r}")
    return c


def param_from_rotation(x: float, phi: float = 0.0, *, cos_tol: float = 1e-12) -> complex:
    """``p = tan(x) exp(i phi)`` for the rotation angles of a qubit step.

    Raises :class:`SingularRotation` when ``cos x`` vanishes (x = pi/2 mod pi),
    where the coordinate chart breaks down.
    """
    c = math.cos(x)
    if abs(c) <= cos_tol:
        raise SingularRotation(f"cos(x) = {c:.3g}: x is too close to pi/2 mod pi")
    return math.tan(x) * cmath.exp(1j * phi)


# ---------------------------------------------------------------------------
# array kernels

def apply_map_arrays(p, re, im, inf, pole_tol: float = POLE_TOL):
    """Apply ``F_p`` elementwise to a split point array.

    Evaluation happens in homogeneous coordinates, (a, b) -> (a^2 + p b^2,
    b^2 - conj(p) a^2), so z = INF and the poles need no special casing.
    """
    p = as_param(p)
    pr, pi = p.real, p.imag
    ar, ai, br, bi, _ = lift(re, im, inf)
    a2r = ar * ar - ai * ai
    a2i = 2.0 * ar * ai
    b2r = br * br - bi * bi
    b2i = 2.0 * br * bi
    # A = a^2 + p b^2
    Ar = a2r + (pr * b2r - pi * b2i)
    Ai = a2i + (pr * b2i + pi * b2r)
    # B = b^2 - conj(p) a^2
    Br = b2r - (pr * a2r + pi * a2i)
    Bi = b2i - (pr * a2i - pi * a2r)
    nA = Ar * Ar + Ai * Ai
    nB = Br * Br + Bi * Bi
    pole = nB < (pole_tol * pole_tol) * nA
    q = np.where(pole, 1.0, nB)
    out_re = np.where(pole, 0.0, (Ar * Br + Ai * Bi) / q)
    out_im = np.where(pole, 0.0, (Ai * Br - Ar * Bi) / q)
    return out_re, out_im, pole


def spherical_derivative_arrays(p, re, im, inf):
    """``|F_p'(z)| (1 + |z|^2) / (1 + |F_p(z)|^2)`` elementwise.

    F_p is squaring followed by a rotation of the sphere, so this reduces to
    ``2 s (1 + s^2) / (1 + s^4)`` with ``s`` the modulus of z in whichever
    chart (z or 1/z) contains it. ``p`` is validated but does not enter.
    """
    as_param(p)
    ar, ai, br, bi, outer = lift(re, im, inf)
    s2 = np.where(outer, br * br + bi * bi, ar * ar + ai * ai)
    s = np.sqrt(s2)
    return 2.0 * s * (1.0 + s2) / (1.0 + s2 * s2)


# ---------------------------------------------------------------------------
# scalar API

def apply_map(p, z, pole_tol: float = POLE_TOL) -> SpherePoint:
    """``F_p(z)`` on the sphere; F_p(INF) = -1/conj(p), or INF when p = 0."""
    re, im, inf = to_arrays(as_point(z))
    return from_arrays(*apply_map_arrays(p, re, im, inf, pole_tol))[0]


def spherical_derivative(p, z) -> float:
    return float(spherical_derivative_arrays(p, *to_arrays(as_point(z)))[0])


def chart_derivative(p, z, dst_inverted: bool) -> complex:
    """Complex derivative of F_p read in local charts.

    The source chart is ``z`` when |z| <= 1 and ``1/z`` otherwise; the target
    chart is ``1/F`` when ``dst_inverted``. Products of these around a cycle
    give its multiplier without ever touching the singular chart at INF.
    """
    p = as_param(p)
    z = as_point(z)
    src_inverted = z is INF or abs(z) > 1.0
    u = 0j if z is INF else (1 / z if src_inverted else z)
    k = 2.0 * u * (1.0 + abs(p) ** 2)
    if not src_inverted and not dst_inverted:
        return k / (1 - p.conjugate() * u * u) ** 2
    if not src_inverted and dst_inverted:
        return -k / (u * u + p) ** 2
    if src_inverted and dst_inverted:
        return k / (1 + p * u * u) ** 2
    return -k / (u * u - p.conjugate()) ** 2


def critical_points(p) -> tuple:
    """Critical points of F_p.

    F_p'(z) = 2z(1 + |p|^2) / (1 - conj(p) z^2)^2 vanishes only at z = 0, and in
    the inversion chart only at w = 0, for every finite p.
    """
    as_param(p)
    return (0j, INF)


# ---------------------------------------------------------------------------
# pure states

class PureState(NamedTuple):
    """Amplitudes on |0>, |1>. The global phase is not constrained."""

    amplitude0: complex
    amplitude1: complex

    def validate(self, tol: float = 1e-12) -> "PureState":
        n = abs(self.amplitude0) ** 2 + abs(self.amplitude1) ** 2
        if abs(n - 1.0) > tol:
            raise ValueError(f"pure state is not normalized (norm^2 = {n!r})")
        return self

    def vector(self) -> np.ndarray:
        return np.array([self.amplitude0, self.amplitude1], dtype=complex)


def coordinate_to_state(z) -> PureState:
    """``N (z|0> + |1>)`` with ``N = (1 + |z|^2)**-0.5``; INF gives |0>."""
    z = as_point(z)
    if z is INF:
        return PureState(1 + 0j, 0j)
    if abs(z) <= 1.0:
        n = 1.0 / math.sqrt(1.0 + abs(z) ** 2)
        return PureState(complex(z * n), complex(n))
    # divide through by z to avoid overflow; this only changes the global phase
    w = 1 / z
    n = 1.0 / math.sqrt(1.0 + abs(w) ** 2)
    return PureState(complex(n), complex(w * n))


def state_to_coordinate(psi) -> SpherePoint:
    a0, a1 = complex(psi[0]), complex(psi[1])
    if a1 == 0:
        return INF
    return as_point(a0 / a1)
