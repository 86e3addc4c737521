"""Density-matrix level maps: entry squaring, local rotations, one qubit step.

The squaring map conditions two identical copies on a measurement outcome::

    rho_ij -> N rho_ij**2,   N = 1 / sum_i rho_ii**2

Entries are squared as complex numbers, so off-diagonal phases double.
"""
from __future__ import annotations

import json
import math
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateMeasurement, InvalidDensityMatrix

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
#: sum_i rho_ii**2 at or below this means the conditioning outcome never happens
DEGENERATE_TOL = 1e-15


def check_invariants(m, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_tol=PSD_TOL):
    """Names of the density-matrix invariants that ``m`` violates."""
    m = np.asarray(m, dtype=complex)
    failures = []
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return ["square"]
    if not np.isfinite(m).all():
        return ["finite"]
    if np.abs(m - m.conj().T).max() > herm_tol:
        failures.append("hermitian")
    if abs(np.trace(m) - 1.0) > trace_tol:
        failures.append("unit_trace")
    herm = 0.5 * (m + m.conj().T)
    if np.linalg.eigvalsh(herm)[0] < -psd_tol:
        failures.append("positive_semidefinite")
    return failures


class DensityMatrix:
    """Immutable D x D density matrix.

    Construction validates Hermiticity, unit trace and positive
    semidefiniteness and raises :class:`InvalidDensityMatrix` naming every
    invariant that failed. Pass ``validate=False`` to skip the checks.
    """

    __slots__ = ("_m",)

    def __init__(self, entries, validate: bool = True):
        m = np.array(entries, dtype=complex)
        if validate:
            failures = check_invariants(m)
            if failures:
                raise InvalidDensityMatrix(
                    "invalid density matrix: " + ", ".join(failures), failures)
        m.setflags(write=False)
        self._m = m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._m

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})\n{self._m!r}"

    def purity(self) -> float:
        return float(np.real(np.trace(self._m @ self._m)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self._m + self._m.conj().T))[0])

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.abs(self._m - np.asarray(other)).max() <= atol)

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "entries": [[float(c.real), float(c.imag)] for c in self._m.ravel()]}

    @classmethod
    def from_json(cls, obj) -> "DensityMatrix":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        try:
            dim = int(obj["dim"])
            flat = [complex(float(re), float(im)) for re, im in obj["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidDensityMatrix(f"malformed density-matrix JSON: {exc}", ["format"]) from exc
        if dim < 1 or len(flat) != dim * dim:
            raise InvalidDensityMatrix(
                f"expected {dim}x{dim} = {dim * dim} entries, got {len(flat)}", ["format"])
        return cls(np.array(flat).reshape(dim, dim))

    @classmethod
    def load(cls, path) -> "DensityMatrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def as_density_matrix(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def diagonal(*probs) -> DensityMatrix:
    return DensityMatrix(np.diag(np.asarray(probs, dtype=complex)))


def measurement_probability(rho) -> float:
    """Probability ``sum_i rho_ii**2`` of the conditioning outcome."""
    d = np.real(np.diagonal(np.asarray(rho)))
    return float(np.sum(d * d))


def squaring_map(rho, degenerate_tol: float = DEGENERATE_TOL) -> DensityMatrix:
    m = np.asarray(rho, dtype=complex)
    prob = measurement_probability(m)
    if prob <= degenerate_tol:
        raise DegenerateMeasurement(
            f"conditioning outcome has probability {prob:.3g} <= {degenerate_tol:g}")
    return DensityMatrix(m * m / prob, validate=False)


def xor_protocol_oracle(rho, degenerate_tol: float = DEGENERATE_TOL) -> DensityMatrix:
    """Squaring map derived from the protocol itself.

    Builds rho (x) rho, applies the XOR permutation |i>|j> -> |i>|i-j mod D>,
    projects the second copy onto |0> and renormalizes.
    """
    m = np.asarray(rho, dtype=complex)
    D = m.shape[0]
    pair = np.kron(m, m)
    # index map on the product basis; XOR is an involution so perm^-1 = perm
    i, j = np.divmod(np.arange(D * D), D)
    perm = i * D + (i - j) % D
    after = np.empty_like(pair)
    after[np.ix_(perm, perm)] = pair
    keep = np.arange(D) * D  # |i>|0>
    block = after[np.ix_(keep, keep)]
    prob = float(np.real(np.trace(block)))
    if prob <= degenerate_tol:
        raise DegenerateMeasurement(
            f"conditioning outcome has probability {prob:.3g} <= {degenerate_tol:g}")
    return DensityMatrix(block / prob, validate=False)


class RotationParams(NamedTuple):
    x: float
    phi: float = 0.0


def build_unitary(x: float, phi: float = 0.0) -> np.ndarray:
    """``[[cos x, sin x e^{i phi}], [-sin x e^{-i phi}, cos x]]``."""
    c, s = math.cos(x), math.sin(x)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, s * e], [-s * e.conjugate(), c]], dtype=complex)


def rotate(rho, u) -> DensityMatrix:
    m = np.asarray(rho, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if u.shape != m.shape:
        raise ValueError(f"unitary of shape {u.shape} cannot act on a {m.shape} state")
    out = u @ m @ u.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), validate=False)


def qubit_step(rho, x: float, phi: float = 0.0) -> DensityMatrix:
    """One step rho -> U S(rho) U^dagger of the single-qubit dynamics."""
    m = np.asarray(rho)
    if m.shape != (2, 2):
        raise ValueError(f"qubit_step needs a 2x2 state, got {m.shape}")
    return rotate(squaring_map(m), build_unitary(x, phi))


def tensor_product(a, b) -> DensityMatrix:
    return DensityMatrix(np.kron(np.asarray(a), np.asarray(b)), validate=False)


def pure_density(psi) -> DensityMatrix:
    v = np.asarray(psi, dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()), validate=False)


def dominant_state(rho) -> np.ndarray:
    """Eigenvector of the largest eigenvalue (the state of a pure rho)."""
    w, v = np.linalg.eigh(np.asarray(rho))
    return v[:, -1]
