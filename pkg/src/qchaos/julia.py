"""Convergence-speed renders of the Julia set of F_p.

Each pixel center z0 is iterated until it comes within ``eps`` (chordal) of a
point of an attracting cycle; the step count becomes the gray level (dark is
fast, white is "no convergence within max_iter").
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dynamics import (
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    classify_arrays,
    find_attracting_cycles,
)
from .pure_map import as_param
from .sphere import to_arrays


@dataclass(frozen=True)
class GridSpec:
    """A width x height viewport of square pixels.

    The pixel size is ``2 * half_width / width_px``; pixel (i, j) (row i from the
    top, column j from the left) samples its center::

        re = center.real + (j + 0.5 - width_px / 2) * size
        im = center.imag + (height_px / 2 - i - 0.5) * size

    For a center on the real axis, rows i and height_px - 1 - i sample exact
    complex conjugates.
    """

    center: complex = 0j
    half_width: float = 2.0
    width_px: int = 400
    height_px: int = 400

    def __post_init__(self):
        c = complex(self.center)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("center must be finite")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("half_width must be a positive real")
        if int(self.width_px) < 1 or int(self.height_px) < 1:
            raise ValueError("grid dimensions must be >= 1")
        object.__setattr__(self, "center", c)

    @property
    def pixel_size(self) -> float:
        return 2.0 * self.half_width / self.width_px

    @property
    def shape(self):
        return (self.height_px, self.width_px)

    def row_coordinates(self, rows):
        rows = np.asarray(rows)
        s = self.pixel_size
        cols = np.arange(self.width_px)
        re = self.center.real + (cols + 0.5 - self.width_px / 2) * s
        im = self.center.imag + (self.height_px / 2 - rows - 0.5) * s
        RE = np.broadcast_to(re[None, :], (rows.size, self.width_px))
        IM = np.broadcast_to(im[:, None], (rows.size, self.width_px))
        return RE, IM

    def coordinates(self) -> np.ndarray:
        RE, IM = self.row_coordinates(np.arange(self.height_px))
        return RE + 1j * IM


@dataclass
class ConvergenceGrid:
    """Per-pixel ``steps`` (-1 = not converged), ``cycle`` id and the cycle
    ``member`` first approached (both -1 likewise)."""

    steps: np.ndarray
    cycle: np.ndarray
    member: np.ndarray
    periods: tuple = ()

    @property
    def converged(self) -> np.ndarray:
        return self.steps >= 0

    @property
    def phase(self) -> np.ndarray:
        """Cycle member approached by the iterates F^(k*period)(z0), i.e. the
        attracting fixed point of F^period whose basin holds the pixel."""
        period = np.array(self.periods, dtype=np.int32)[np.maximum(self.cycle, 0)]
        return np.where(self.converged, (self.member - self.steps) % period, -1)

    def to_json(self):
        return {"height": int(self.steps.shape[0]), "width": int(self.steps.shape[1]),
                "steps": self.steps.tolist(), "cycle": self.cycle.tolist()}


class JuliaSetClassifier(TransformerMixin, BaseEstimator):
    """Classify starting points of F_p by the attracting cycle they reach.

    ``fit`` discovers the attracting cycles from the critical orbits;
    ``predict`` returns the cycle index reached by each point (-1 when it does
    not converge) and ``transform`` the number of steps needed (-1 likewise).
    Inputs are complex arrays of any shape; non-finite entries stand for the
    point at infinity.

    Parameters
    ----------
    p : complex
        Map parameter.
    eps : float
        Chordal distance at which an orbit counts as converged.
    max_iter : int
        Iteration budget per point.
    cycle_max_iter : int
        Budget for following each critical orbit during ``fit``.
    n_jobs : int
        Worker threads for large inputs. Output never depends on it.
    """

    def __init__(self, p=1.0, eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER,
                 cycle_max_iter=DEFAULT_MAX_ITER, n_jobs=1):
        self.p = p
        self.eps = eps
        self.max_iter = max_iter
        self.cycle_max_iter = cycle_max_iter
        self.n_jobs = n_jobs

    def _validate_params(self):
        as_param(self.p)
        if not (self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if int(self.max_iter) < 1 or int(self.cycle_max_iter) < 1:
            raise ValueError("iteration budgets must be >= 1")
        if int(self.n_jobs) < 1:
            raise ValueError("n_jobs must be >= 1")

    def fit(self, X=None, y=None):
        self._validate_params()
        self.cycles_ = find_attracting_cycles(complex(self.p), int(self.cycle_max_iter))
        self.n_cycles_ = len(self.cycles_)
        return self

    def _classify(self, X):
        check_is_fitted(self, "cycles_")
        Z = np.asarray(X)
        shape = Z.shape
        re, im, inf = to_arrays(Z.astype(complex).ravel())
        cyc, steps, _ = _parallel_classify(complex(self.p), re, im, inf, self.cycles_,
                                           self.eps, int(self.max_iter), int(self.n_jobs))
        return cyc.reshape(shape), steps.reshape(shape)

    def predict(self, X):
        return self._classify(X)[0]

    def transform(self, X):
        return self._classify(X)[1]


def _parallel_classify(p, re, im, inf, cycles, eps, max_iter, n_jobs, chunk=4096):
    n = re.size
    if n_jobs <= 1 or n <= chunk:
        return classify_arrays(p, re, im, inf, cycles, eps, max_iter)
    cyc = np.empty(n, dtype=np.int16)
    steps = np.empty(n, dtype=np.int32)
    member = np.empty(n, dtype=np.int16)

    def work(lo):
        hi = min(lo + chunk, n)
        cyc[lo:hi], steps[lo:hi], member[lo:hi] = classify_arrays(
            p, re[lo:hi], im[lo:hi], inf[lo:hi], cycles, eps, max_iter)

    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        list(pool.map(work, range(0, n, chunk)))
    return cyc, steps, member


def render(p, grid: GridSpec = GridSpec(), eps: float = DEFAULT_EPS,
           max_iter: int = DEFAULT_MAX_ITER, n_jobs: int = 1,
           rows_per_task: int = 8, cycles=None) -> ConvergenceGrid:
    """Classify every pixel of ``grid``; rows are split into independent tasks.

    Raises :class:`~qchaos.exceptions.NoCycleFound` if F_p has no attracting
    cycle to converge to.
    """
    if n_jobs < 1:
        raise ValueError("n_jobs must be >= 1")
    p = as_param(p)
    if cycles is None:
        cycles = find_attracting_cycles(p)
    H, W = grid.shape
    steps = np.empty((H, W), dtype=np.int32)
    cycle = np.empty((H, W), dtype=np.int16)
    member = np.empty((H, W), dtype=np.int16)

    def work(r0):
        rows = np.arange(r0, min(r0 + rows_per_task, H))
        RE, IM = grid.row_coordinates(rows)
        inf = np.zeros(RE.size, dtype=bool)
        c, s, m = classify_arrays(p, RE.ravel(), IM.ravel(), inf, cycles, eps, max_iter)
        cycle[rows] = c.reshape(rows.size, W)
        steps[rows] = s.reshape(rows.size, W)
        member[rows] = m.reshape(rows.size, W)

    starts = range(0, H, rows_per_task)
    if n_jobs == 1:
        for r0 in starts:
            work(r0)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(work, starts))
    return ConvergenceGrid(steps, cycle, member, tuple(c.period for c in cycles))


def to_grayscale(grid, max_iter: int, gamma: float = 1.0) -> np.ndarray:
    """Gray levels: not converged -> 255, ``s`` steps -> round(254 (s/max_iter)^gamma)."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    steps = grid.steps if isinstance(grid, ConvergenceGrid) else np.asarray(grid)
    frac = np.clip(steps / max_iter, 0.0, 1.0)
    level = np.floor(254.0 * frac ** gamma + 0.5)
    img = np.where(steps < 0, 255, np.clip(level, 0, 254))
    return img.astype(np.uint8)


def pgm_bytes(image) -> bytes:
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise ValueError("pixel values must lie in [0, 255]")
        img = img.astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def write_pgm(image, path) -> None:
    """Write a binary (P5, maxval 255) PGM file."""
    data = pgm_bytes(image)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write PGM image: {exc.strerror}",
                      os.fspath(path)) from exc
