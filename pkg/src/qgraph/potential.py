"""Hermitian-matrix-valued potentials on a single edge.

Every kind is evaluated vectorised: ``q(x)`` returns an array of shape
``x.shape + (m, m)``. Coordinates are edge-local; Q vanishes outside the
kind's support.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, NonHermitianMatrix
from .linalg import HERMITIAN_RTOL, frozen, hermitian_defect

KINDS = ("zero", "constant", "piecewise_constant", "gaussian_bumps", "sampled")

# a Gaussian bump is treated as zero beyond this many widths (exp(-72) ~ 5e-32)
GAUSS_CUTOFF = 12.0


def _stack(values, m: int | None) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 1 or (arr.ndim == 2 and arr.shape[1] == 1):  # list of scalars
        arr = arr.reshape(-1, 1, 1)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch(f"expected a stack of square matrices, got shape {arr.shape}")
    if m is not None and arr.shape[1] != m:
        raise DimensionMismatch(f"matrix size {arr.shape[1]} != m={m}")
    for k, a in enumerate(arr):
        if hermitian_defect(a) > HERMITIAN_RTOL * float(np.linalg.norm(a)):
            raise NonHermitianMatrix(f"potential matrix #{k} is not Hermitian")
    return arr


@dataclass(frozen=True, eq=False)
class EdgePotential:
    kind: str
    m: int
    grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 1, 1), complex))
    widths: np.ndarray = field(default_factory=lambda: np.zeros(0))
    is_L1: bool = True
    is_xL1: bool = True
    window: tuple = (-np.inf, np.inf)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, m: int = 1) -> "EdgePotential":
        return cls("zero", m, frozen(np.zeros(0)), frozen(np.zeros((0, m, m), complex)))

    @classmethod
    def constant(cls, value, end: float | None, start: float = 0.0) -> "EdgePotential":
        """Q = value on [start, end]; ``end=None`` means unbounded support."""
        vals = _stack([np.atleast_2d(value)], None)
        m = vals.shape[1]
        if end is None:
            return cls("constant", m, frozen(np.array([start, np.inf])), frozen(vals), is_L1=False, is_xL1=False)
        return cls("constant", m, frozen(np.array([float(start), float(end)])), frozen(vals))

    @classmethod
    def piecewise_constant(cls, breaks, values) -> "EdgePotential":
        breaks = np.asarray(breaks, dtype=float)
        vals = _stack(values, None)
        if breaks.ndim != 1 or len(breaks) != len(vals) + 1:
            raise DimensionMismatch("need len(breaks) == len(values) + 1")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("break points must be strictly increasing")
        return cls("piecewise_constant", vals.shape[1], frozen(breaks), frozen(vals))

    @classmethod
    def gaussian_bumps(cls, centers, widths, amplitudes) -> "EdgePotential":
        centers = np.atleast_1d(np.asarray(centers, dtype=float))
        widths = np.atleast_1d(np.asarray(widths, dtype=float))
        vals = _stack(amplitudes, None)
        if not (len(centers) == len(widths) == len(vals)):
            raise DimensionMismatch("centers, widths and amplitudes must have equal length")
        if np.any(widths <= 0):
            raise ValueError("bump widths must be positive")
        return cls("gaussian_bumps", vals.shape[1], frozen(centers), frozen(vals), frozen(widths))

    @classmethod
    def sampled(cls, x, values) -> "EdgePotential":
        x = np.asarray(x, dtype=float)
        vals = _stack(values, None)
        if x.ndim != 1 or len(x) != len(vals) or len(x) < 2:
            raise DimensionMismatch("need at least two samples and one matrix per sample")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sample grid must be strictly increasing")
        return cls("sampled", vals.shape[1], frozen(x), frozen(vals))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self._raw(x)
        lo, hi = self.window
        if lo > -np.inf or hi < np.inf:
            out[(x < lo) | (x > hi)] = 0.0
        return out

    def _raw(self, x: np.ndarray) -> np.ndarray:
        m = self.m
        out = np.zeros(x.shape + (m, m), dtype=complex)
        if self.kind == "zero":
            return out
        if self.kind in ("constant", "piecewise_constant"):
            idx = np.searchsorted(self.grid, x, side="right") - 1
            inside = (idx >= 0) & (idx < len(self.values))
            out[inside] = self.values[idx[inside]]
            return out
        if self.kind == "gaussian_bumps":
            for c, w, a in zip(self.grid, self.widths, self.values):
                g = np.exp(-0.5 * ((x - c) / w) ** 2)
                g = np.where(np.abs(x - c) <= GAUSS_CUTOFF * w, g, 0.0)
                out += g[..., None, None] * a
            return out
        if self.kind == "sampled":
            xs = self.grid
            inside = (x >= xs[0]) & (x <= xs[-1])
            xi = x[inside]
            j = np.clip(np.searchsorted(xs, xi, side="right") - 1, 0, len(xs) - 2)
            t = (xi - xs[j]) / (xs[j + 1] - xs[j])
            out[inside] = (1 - t)[:, None, None] * self.values[j] + t[:, None, None] * self.values[j + 1]
            return out
        raise ValueError(f"unknown potential kind {self.kind!r}")

    # -- geometry -----------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or not np.any(self.values)

    @property
    def support(self) -> tuple[float, float]:
        if self.is_zero:
            return (0.0, 0.0)
        if self.kind == "gaussian_bumps":
            s0 = float(np.min(self.grid - GAUSS_CUTOFF * self.widths))
            s1 = float(np.max(self.grid + GAUSS_CUTOFF * self.widths))
        else:
            s0, s1 = float(self.grid[0]), float(self.grid[-1])
        return (max(s0, self.window[0]), min(s1, self.window[1]))

    @property
    def support_end(self) -> float:
        """Coordinate R >= 0 beyond which Q is zero on an edge [0, inf)."""
        return max(0.0, self.support[1])

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Points in (lo, hi) where Q or its derivative jumps."""
        if self.kind in ("constant", "piecewise_constant", "sampled"):
            pts = self.grid
        elif self.kind == "gaussian_bumps":
            pts = np.concatenate([self.grid - GAUSS_CUTOFF * self.widths, self.grid + GAUSS_CUTOFF * self.widths])
        else:
            pts = np.zeros(0)
        pts = np.concatenate([pts, self.window])
        pts = np.unique(pts[np.isfinite(pts)])
        return pts[(pts > lo) & (pts < hi)]

    def lower_bound(self) -> float:
        """A number below min_x lambda_min(Q(x))."""
        if self.is_zero:
            return 0.0
        mins = np.array([np.linalg.eigvalsh(a)[0] for a in self.values])
        if self.kind == "gaussian_bumps":
            return float(min(0.0, np.sum(np.minimum(mins, 0.0))))
        return float(min(0.0, mins.min()))

    def norm_integrals(self, end: float | None = None) -> tuple[float, float]:
        """(int ||Q||, int x ||Q||) over [0, end], by adaptive quadrature."""
        if self.is_zero:
            return 0.0, 0.0
        hi = self.support_end if end is None else min(end, self.support_end)
        if not np.isfinite(hi):
            return np.inf, np.inf
        lo = max(0.0, self.support[0])
        if hi <= lo:
            return 0.0, 0.0
        pts = self.breakpoints(lo, hi)
        norm = lambda x: float(np.linalg.norm(self(np.array([x]))[0], 2))
        i0 = integrate.quad(norm, lo, hi, points=pts if len(pts) else None, limit=400)[0]
        i1 = integrate.quad(lambda x: x * norm(x), lo, hi, points=pts if len(pts) else None, limit=400)[0]
        return i0, i1

    # -- transformations ----------------------------------------------------
    def transformed(self, origin: float, reflect: bool = False) -> "EdgePotential":
        """The potential s -> Q(origin + s), or Q(origin - s) if ``reflect``."""
        if self.kind == "zero":
            return self
        sign = -1.0 if reflect else 1.0
        grid = sign * (self.grid - origin)
        values = self.values
        if reflect and self.kind != "gaussian_bumps":
            grid, values = grid[::-1], values[::-1]
        lo, hi = sorted(sign * (np.array(self.window) - origin))
        return replace(self, grid=frozen(grid), values=frozen(values), window=(float(lo), float(hi)))

    def restricted(self, lo: float, hi: float) -> "EdgePotential":
        """Q times the indicator of [lo, hi]."""
        if self.kind == "zero":
            return self
        window = (max(lo, self.window[0]), min(hi, self.window[1]))
        s0, s1 = EdgePotential(self.kind, self.m, self.grid, self.values, self.widths).support
        if s1 <= window[0] or s0 >= window[1]:
            return EdgePotential.zero(self.m)
        finite = bool(np.isfinite(min(s1, window[1])))
        return replace(self, window=(float(window[0]), float(window[1])), is_L1=finite, is_xL1=finite)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgePotential):
            return NotImplemented
        return (self.kind == other.kind and self.m == other.m
                and np.array_equal(self.grid, other.grid)
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.widths, other.widths)
                and tuple(self.window) == tuple(other.window))

    __hash__ = None
