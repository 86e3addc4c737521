"""Two-qubit conditional purification: rho -> R1 R2 S rho on 4x4 states.

The product basis is ordered |00>, |01>, |10>, |11> (qubit 1 is the left
tensor factor). Against that ordering the state from ``make_initial_rho0`` has
fidelity 0.895 with the target (|01> + |10>)/sqrt(2).

Phase convention
----------------
Each local unitary is ``build_unitary(x, phase_scale * phi)``. The default
``phase_scale=2`` puts the phase ``e^{2 i phi}`` on the off-diagonal, which is
U(x, 0) conjugated by the z-rotation diag(e^{i phi}, e^{-i phi}). With it,
x = phi = pi/4 makes the target a period-2 point and x = 0.293 pi, phi = pi/4
shows a long period-two transient before irregular dynamics. With
``phase_scale=1`` (phase ``e^{i phi}``) neither happens; phi = pi/2 plays the
role of pi/4 there.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from .density import (
    PSD_TOL,
    DensityMatrix,
    build_unitary,
    check_invariants,
    measurement_probability,
    squaring_map,
)
from .exceptions import DegenerateMeasurement, InvalidDensityMatrix

logger = logging.getLogger(__name__)

DEFAULT_PHASE_SCALE = 2.0
BREAKDOWN_TOL = 1e-3
BREAKDOWN_SETTLE = 5


class ProtocolParams(NamedTuple):
    x1: float
    phi1: float
    x2: float
    phi2: float
    phase_scale: float = DEFAULT_PHASE_SCALE

    @classmethod
    def uniform(cls, x, phi, phase_scale=DEFAULT_PHASE_SCALE):
        return cls(x, phi, x, phi, phase_scale)

    def unitary(self) -> np.ndarray:
        for v in self[:4]:
            if not math.isfinite(v):
                raise ValueError("rotation angles must be finite")
        u1 = build_unitary(self.x1, self.phase_scale * self.phi1)
        u2 = build_unitary(self.x2, self.phase_scale * self.phi2)
        return np.kron(u1, u2)


def make_target() -> DensityMatrix:
    psi = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
    return DensityMatrix(np.outer(psi, psi.conj()))


def make_initial_rho0() -> DensityMatrix:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 0.1
    m[1, 1] = m[2, 2] = 0.45
    m[1, 2] = m[2, 1] = 0.445
    return DensityMatrix(m)


def fidelity(rho, target) -> float:
    """``Tr(rho target)``; its imaginary part must vanish (< 1e-12)."""
    a, b = np.asarray(rho), np.asarray(target)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    f = np.trace(a @ b)
    if abs(f.imag) >= 1e-12:
        raise ValueError(f"fidelity has imaginary part {f.imag:.3g}")
    return float(f.real)


def two_qubit_step(rho, params: ProtocolParams) -> DensityMatrix:
    m = np.asarray(rho)
    if m.shape != (4, 4):
        raise ValueError(f"two_qubit_step needs a 4x4 state, got {m.shape}")
    v = params.unitary()
    s = np.asarray(squaring_map(m))
    out = v @ s @ v.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), validate=False)


class StepRecord(NamedTuple):
    step: int
    fidelity: float
    purity: float
    success_probability: float


@dataclass
class Trajectory:
    """Per-step records; step 0 is the initial state.

    ``success_probability`` at step k is the conditioning probability of the
    step that produced state k (1.0 for step 0). ``degenerate`` is set when
    the run stopped early on a zero-probability measurement.
    """

    records: List[StepRecord]
    degenerate: bool = False
    final_state: Optional[DensityMatrix] = None

    def __len__(self):
        return len(self.records)

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.records])

    @property
    def purities(self) -> np.ndarray:
        return np.array([r.purity for r in self.records])

    def to_csv(self) -> str:
        lines = ["step,fidelity,purity,success_probability"]
        for r in self.records:
            lines.append(f"{r.step},{r.fidelity!r},{r.purity!r},{r.success_probability!r}")
        return "\n".join(lines) + "\n"


def run_protocol(rho0, params: ProtocolParams, steps: int, target=None,
                 check: bool = True) -> Trajectory:
    """Iterate :func:`two_qubit_step` and record fidelity, purity and
    success probability.

    With ``check`` the density-matrix invariants are re-verified after every
    step; a violation raises :class:`InvalidDensityMatrix` carrying the step
    number and the offending matrix in its message.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    target = make_target() if target is None else target
    rho = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    records = [StepRecord(0, fidelity(rho, target), rho.purity(), 1.0)]
    for k in range(1, steps + 1):
        prob = measurement_probability(rho)
        try:
            rho = two_qubit_step(rho, params)
        except DegenerateMeasurement:
            logger.warning("degenerate measurement at step %d", k)
            return Trajectory(records, degenerate=True, final_state=rho)
        if check:
            failures = check_invariants(rho.entries, psd_tol=PSD_TOL)
            if failures:
                raise InvalidDensityMatrix(
                    f"step {k}: {', '.join(failures)}\n{rho.entries!r}", failures)
        records.append(StepRecord(k, fidelity(rho, target), rho.purity(), prob))
    return Trajectory(records, final_state=rho)


def detect_transient_breakdown(traj, tol: float = BREAKDOWN_TOL,
                               settle: int = BREAKDOWN_SETTLE) -> Optional[int]:
    """First step at which an established period-2 fidelity pattern breaks.

    The pattern counts as established once ``settle`` consecutive
    same-parity differences ``|f(k) - f(k-2)|`` are within ``tol``; the
    breakdown is the first later step whose difference exceeds ``tol``.
    Returns ``None`` if the pattern holds to the end, and 2 if it is never
    established at all.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = traj.fidelities if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if f.size < 4:
        raise ValueError("trajectory needs at least 4 steps")
    diff = np.abs(f[2:] - f[:-2])
    settle = min(settle, diff.size)
    streak = 0
    established = False
    for i, d in enumerate(diff):
        if d <= tol:
            streak += 1
            if streak >= settle:
                established = True
        elif established:
            return i + 2
        else:
            streak = 0
    return None if established else 2
