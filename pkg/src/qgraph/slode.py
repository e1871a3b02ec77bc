"""Fundamental system of -Y'' + Q Y = z Y at complex z.

The first-order form Y = [[C, S], [C', S']] obeys Y' = [[0, I], [Q - z, 0]] Y
with Y(0) = I. It is integrated with scipy's DOP853 (adaptive 8(5,3) pair,
complex arithmetic) piece by piece between the potential's break points;
stretches where Q vanishes are propagated with the closed-form free
transfer matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import OutOfRange, StepSizeUnderflow, ToleranceNotMet
from .graph import SpectralPoint
from .potential import EdgePotential

DEFAULT_RTOL = 1e-10


def _sin_over(k: complex, s: float) -> complex:
    """sin(k s) / k, continuous at k = 0."""
    ks = k * s
    if abs(ks) < 1e-6:
        return s * (1 - ks * ks / 6 + ks ** 4 / 120)
    return np.sin(ks) / k


def free_transfer(k: complex, s: float, m: int) -> np.ndarray:
    """Transfer matrix of Y' = [[0, I], [-k^2, 0]] Y over a distance s."""
    c = np.cos(k * s)
    so = _sin_over(k, s)
    eye = np.eye(m)
    return np.block([[c * eye, so * eye], [-(k * k) * so * eye, c * eye]])


@dataclass
class _Piece:
    a: float
    b: float
    free_k: complex | None = None   # closed-form piece
    start: np.ndarray | None = None  # Y(a) for a closed-form piece
    sol: object = None              # OdeSolution for an integrated piece

    def __call__(self, x: float) -> np.ndarray:
        if self.free_k is not None:
            m = self.start.shape[0] // 2
            return free_transfer(self.free_k, x - self.a, m) @ self.start
        n = int(round(np.sqrt(len(self.sol(self.a)))))
        return self.sol(x).reshape(n, n)


@dataclass
class FundamentalSystem:
    edge_id: str
    z: SpectralPoint
    m: int
    x_end: float
    samples: list = field(default_factory=list)   # (x, C, S, C', S')
    achieved_tolerance: float = DEFAULT_RTOL
    pieces: list = field(default_factory=list, repr=False)

    def matrix(self, x: float) -> np.ndarray:
        """The 2m x 2m matrix Y(x) = [[C, S], [C', S']]."""
        if x < -1e-14 or x > self.x_end * (1 + 1e-14) + 1e-14:
            raise OutOfRange(f"x={x} outside [0, {self.x_end}]")
        x = min(max(x, 0.0), self.x_end)
        if x == 0.0:
            return np.eye(2 * self.m, dtype=complex)
        for piece in self.pieces:
            if piece.a <= x <= piece.b:
                return piece(x)
        raise OutOfRange(f"x={x} not covered")  # pragma: no cover


def _split(y: np.ndarray, m: int):
    return y[:m, :m], y[:m, m:], y[m:, :m], y[m:, m:]


def _segments(potential: EdgePotential, x_end: float):
    """(a, b, is_free) pieces covering [0, x_end]."""
    cuts = np.concatenate([[0.0], potential.breakpoints(0.0, x_end), [x_end]])
    out = []
    s0, s1 = potential.support
    for a, b in zip(cuts[:-1], cuts[1:]):
        free = potential.is_zero or b <= s0 or a >= s1
        if not free and potential.kind in ("constant", "piecewise_constant"):
            free = not np.any(potential(np.array([(a + b) / 2]))[0])
        out.append((float(a), float(b), bool(free)))
    return out


def _rhs_factory(potential: EdgePotential, z: complex, m: int, sqrt_z: complex | None):
    n = 2 * m
    eye_z = z * np.eye(m)

    def rhs(t, y):
        q = potential(np.array([t]))[0]
        Y = y[: n * n].reshape(n, n)
        dY = np.empty_like(Y)
        dY[:m] = Y[m:]
        dY[m:] = (q - eye_z) @ Y[:m]
        if sqrt_z is None:
            return dY.ravel()
        w = np.exp(1j * t * sqrt_z) * q
        # moments int e^{it sqrt z} Q C and int e^{it sqrt z} Q S
        return np.concatenate([dY.ravel(), (w @ Y[:m, :m]).ravel(), (w @ Y[:m, m:]).ravel()])

    return rhs


def _integrate(rhs, a, b, y0, rel_tol, dense=False):
    sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=rel_tol, atol=rel_tol * 1e-3,
                    dense_output=dense)
    if sol.status != 0:
        msg = str(sol.message)
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise ToleranceNotMet(msg)
    return sol


def _check_args(x_end, rel_tol):
    if not x_end > 0:
        raise OutOfRange("x_end must be positive")
    if not (1e-14 <= rel_tol <= 1e-4):
        raise ValueError("rel_tol must lie in [1e-14, 1e-4]")


def fundamental_system(potential: EdgePotential, z, x_end: float, rel_tol: float = DEFAULT_RTOL,
                       edge_id: str = "") -> FundamentalSystem:
    """Dense fundamental system (C, S, C', S') on [0, x_end]."""
    _check_args(x_end, rel_tol)
    z = SpectralPoint.of(z)
    m = potential.m
    k = np.sqrt(complex(z.z))
    fs = FundamentalSystem(edge_id, z, m, float(x_end), achieved_tolerance=rel_tol)
    rhs = _rhs_factory(potential, z.z, m, None)
    Y = np.eye(2 * m, dtype=complex)
    fs.samples.append((0.0,) + _split(Y, m))
    for a, b, free in _segments(potential, x_end):
        if free:
            piece = _Piece(a, b, free_k=k, start=Y.copy())
            Y = piece(b)
            fs.samples.append((b,) + _split(Y, m))
        else:
            sol = _integrate(rhs, a, b, Y.ravel(), rel_tol, dense=True)
            piece = _Piece(a, b, sol=sol.sol)
            for t, y in zip(sol.t[1:], sol.y.T[1:]):
                fs.samples.append((float(t),) + _split(y.reshape(2 * m, 2 * m), m))
            Y = sol.y[:, -1].reshape(2 * m, 2 * m)
        fs.pieces.append(piece)
    return fs


def endpoint_values(fs: FundamentalSystem, x: float):
    """(C, S, C', S') at x by dense interpolation."""
    return _split(fs.matrix(float(x)), fs.m)


def transfer_at(potential: EdgePotential, z, x_end: float, rel_tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Y(x_end) only, without keeping dense output."""
    _check_args(x_end, rel_tol)
    z = SpectralPoint.of(z)
    m = potential.m
    k = np.sqrt(complex(z.z))
    rhs = _rhs_factory(potential, z.z, m, None)
    Y = np.eye(2 * m, dtype=complex)
    for a, b, free in _segments(potential, x_end):
        if free:
            Y = free_transfer(k, b - a, m) @ Y
        else:
            Y = _integrate(rhs, a, b, Y.ravel(), rel_tol).y[:, -1].reshape(2 * m, 2 * m)
    return Y


def jost_moments(potential: EdgePotential, z: SpectralPoint, x_end: float, rel_tol: float = DEFAULT_RTOL):
    """Y(x_end) together with int_0^x_end e^{it sqrt z} Q(t) C(t,z) dt and the same with S.

    Used for the N1/N2 integrals; only the pieces where Q is nonzero contribute.
    """
    m = potential.m
    sz = z.sqrt
    k = np.sqrt(complex(z.z))
    rhs = _rhs_factory(potential, z.z, m, sz)
    n = 2 * m
    Y = np.eye(n, dtype=complex)
    ic = np.zeros((m, m), complex)
    is_ = np.zeros((m, m), complex)
    if x_end <= 0:
        return Y, ic, is_
    for a, b, free in _segments(potential, x_end):
        if free:
            Y = free_transfer(k, b - a, m) @ Y
            continue
        y0 = np.concatenate([Y.ravel(), ic.ravel(), is_.ravel()])
        y = _integrate(rhs, a, b, y0, rel_tol).y[:, -1]
        Y = y[: n * n].reshape(n, n)
        ic = y[n * n: n * n + m * m].reshape(m, m)
        is_ = y[n * n + m * m:].reshape(m, m)
    return Y, ic, is_
