"""Negative spectrum of star graphs: inertia of the matrix T, its Q = 0 form T1,
and the Bargmann-type and alpha-sum upper bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import oracle, weyl
from .errors import (CountMismatch, IntegralNotConverged, MissingBlock, NonnegativityFailed,
                     NonnegativityNotEstablished, NonzeroPotential, NotAStar)
from .graph import FiniteEdge, MetricGraph
from .linalg import check_hermitian, inertia_eig, inertia_ldl
from .potential import EdgePotential

EPS_INERTIA = 1e-9
FLOOR_GUARD = 1e-9


@dataclass
class KappaReport:
    kappa_weyl: int | None = None
    kappa_oracle: int | None = None
    bargmann_bound: int | None = None
    alpha_sum_bound: int | None = None
    T: np.ndarray | None = None
    boundary_eigenvalue_count: int = 0
    nonnegativity_verified: bool = False

    def to_dict(self) -> dict:
        T = None
        if self.T is not None:
            T = [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(self.T)]
        return {"kappa_weyl": self.kappa_weyl, "kappa_oracle": self.kappa_oracle,
                "bargmann_bound": self.bargmann_bound, "alpha_sum_bound": self.alpha_sum_bound,
                "T": T, "boundary_eigenvalue_count": self.boundary_eigenvalue_count,
                "nonnegativity_verified": self.nonnegativity_verified}


def kappa_minus_matrix(H, eps_inertia: float = EPS_INERTIA) -> tuple[int, int]:
    """(negative count, near-zero count) with threshold eps_inertia * max(1, ||H||).

    Eigenvalue signs are cross-checked against a Bunch-Kaufman factorisation.
    """
    H = check_hermitian(np.atleast_2d(H))
    neg, zero, _ = inertia_eig(H, eps_inertia)
    if zero == 0:
        neg2, zero2, _ = inertia_ldl(H, eps_inertia)
        # the LDL pivots are only congruent, not equal, to eigenvalues: a
        # disagreement here means a pivot sits at round-off level
        if zero2 == 0 and neg2 != neg:
            raise CountMismatch(f"eigenvalue inertia {neg} != LDL inertia {neg2}")
    return neg, zero


def negative_part(Q) -> np.ndarray:
    """Q_- = -P_- Q P_- (positive semidefinite), so that Q = Q_+ - Q_-."""
    Q = check_hermitian(np.atleast_2d(Q))
    w, v = np.linalg.eigh(Q)
    return (v * np.clip(-w, 0, None)) @ v.conj().T


def _require_star(g: MetricGraph):
    if not g.is_star:
        raise NotAStar("this computation is defined for star graphs only")


def assemble_T(g: MetricGraph, blocks: dict, waive_nonnegativity: bool | None = None) -> np.ndarray:
    """T from M(0) data: ``blocks`` maps edge id -> M(0) (2m x 2m for finite edges).

    ``waive_nonnegativity`` must be True when the caller has not checked the
    minimal operator; False means the check was done. None means unknown.
    """
    _require_star(g)
    if waive_nonnegativity is None:
        raise NonnegativityNotEstablished("pass waive_nonnegativity=False after checking, or True to waive")
    m, p2 = g.m, g.p2
    n = (p2 + 1) * m
    T = np.zeros((n, n), complex)
    for e in g.edges:
        if e.id not in blocks:
            raise MissingBlock(f"no M(0) for edge {e.id}")
    T[:m, :m] = g.alpha(g.central_vertex)
    for e in g.leads:
        T[:m, :m] -= blocks[e.id]
    for k, e in enumerate(g.finite_edges, start=1):
        B = np.asarray(blocks[e.id])
        sl = slice(k * m, (k + 1) * m)
        T[:m, :m] -= B[:m, :m]
        T[:m, sl] = -B[:m, m:]
        T[sl, :m] = -B[m:, :m]
        T[sl, sl] = g.alpha(e.end) - B[m:, m:]
    return T


def assemble_T1(g: MetricGraph) -> np.ndarray:
    """T for Q = 0: a_k = I/|e_k| couples the hub to the outer vertex v_k."""
    _require_star(g)
    if not g.all_zero_potential:
        raise NonzeroPotential("T1 is the matrix of the potential-free star")
    m, p2 = g.m, g.p2
    T = np.zeros(((p2 + 1) * m, (p2 + 1) * m), complex)
    T[:m, :m] = g.alpha(g.central_vertex)
    eye = np.eye(m)
    for k, e in enumerate(g.finite_edges, start=1):
        a = eye / e.length
        sl = slice(k * m, (k + 1) * m)
        T[:m, :m] += a
        T[:m, sl] = -a
        T[sl, :m] = -a
        T[sl, sl] = g.alpha(e.end) + a
    return T


def weyl_zero_blocks(g: MetricGraph) -> dict:
    return {e.id: weyl.weyl_at_zero(e).value for e in g.edges}


# -- Bargmann-type bound ------------------------------------------------------

def _piecewise_moment(q: EdgePotential, end: float) -> float:
    """int_0^end x tr Q_-(x) dx exactly, for piecewise constant kinds."""
    lo_w, hi_w = q.window
    total = 0.0
    for a, b, val in zip(q.grid[:-1], q.grid[1:], q.values):
        a, b = max(a, lo_w, 0.0), min(b, hi_w, end)
        if b > a:
            total += float(np.trace(negative_part(val)).real) * (b * b - a * a) / 2
    return total


def edge_moment(q: EdgePotential, end: float = np.inf) -> float:
    """int_0^end x tr Q_-(x) dx (edge-local x)."""
    if q.is_zero:
        return 0.0
    if not q.is_xL1:
        raise IntegralNotConverged("x Q is not integrable on this edge")
    if q.kind in ("constant", "piecewise_constant"):
        return _piecewise_moment(q, end)
    lo = max(0.0, q.support[0])
    hi = min(end, q.support_end)
    if hi <= lo:
        return 0.0
    pts = q.breakpoints(lo, hi)

    def f(x):
        return x * float(np.trace(negative_part(q(np.array([x]))[0])).real)

    val, err = integrate.quad(f, lo, hi, points=pts if len(pts) else None, limit=500, epsabs=1e-12, epsrel=1e-11)
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise IntegralNotConverged(f"quadrature error estimate {err:.3g}")
    return val


def _guarded_floor(x: float) -> int:
    r = round(x)
    if abs(x - r) <= FLOOR_GUARD * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def bargmann_bound(g: MetricGraph) -> int:
    """sum_e floor(int_e x tr Q_{e,-}) + m |V|, the floor taken edge by edge."""
    total = 0
    for e in g.edges:
        end = e.length if isinstance(e, FiniteEdge) else np.inf
        total += _guarded_floor(edge_moment(e.potential, end))
    return total + g.m * len(g.vertices)


def alpha_sum_bound(g: MetricGraph, kappa_kirchhoff: int) -> int:
    return int(kappa_kirchhoff) + sum(g.coupling.kappa_minus(v) for v in g.vertices)


# -- orchestration ------------------------------------------------------------

def _potentials_nonnegative(g: MetricGraph) -> bool:
    return all(e.potential.lower_bound() >= 0 for e in g.edges)


def kappa_weyl(g: MetricGraph, eps_inertia: float = EPS_INERTIA, blocks: dict | None = None):
    """(kappa, boundary count, T) from the Weyl-function route."""
    blocks = weyl_zero_blocks(g) if blocks is None else blocks
    T = assemble_T(g, blocks, waive_nonnegativity=False)
    T = (T + T.conj().T) / 2
    neg, zero = kappa_minus_matrix(T, eps_inertia)
    return neg, zero, T


def kappa_star(g: MetricGraph, method: str = "weyl", params: oracle.DiscretizationParams | None = None,
               waive_nonnegativity: bool = False, eps_inertia: float = EPS_INERTIA) -> KappaReport:
    """Negative count of the star by the inertia of T, the FEM oracle, or both, with bounds.

    The Weyl route needs the all-Dirichlet operator to be nonnegative; that
    is automatic for Q >= 0 and otherwise checked on the oracle mesh.
    ``method='both'`` raises CountMismatch when the two counts differ.
    """
    if method not in ("weyl", "oracle", "both"):
        raise ValueError("method must be 'weyl', 'oracle' or 'both'")
    _require_star(g)
    params = params or oracle.DiscretizationParams()
    rep = KappaReport()
    if all(e.potential.is_xL1 for e in g.edges):
        rep.bargmann_bound = bargmann_bound(g)
    use_oracle = method in ("oracle", "both")
    if use_oracle:
        rep.kappa_oracle = oracle.kappa_oracle(g, params)
    if method in ("weyl", "both"):
        if _potentials_nonnegative(g):
            rep.nonnegativity_verified = True
        elif not waive_nonnegativity:
            ok, est = oracle.nonnegativity_check(g, params)
            rep.nonnegativity_verified = ok
            if not ok:
                if rep.kappa_oracle is None:
                    rep.kappa_oracle = oracle.kappa_oracle(g, params)
                rep.alpha_sum_bound = alpha_sum_bound(g, oracle.kappa_oracle(g.kirchhoff(), params))
                exc = NonnegativityFailed(f"Dirichlet operator has an eigenvalue near {est:.6g} < 0")
                exc.report = rep
                raise exc
        blocks = weyl_zero_blocks(g)
        rep.kappa_weyl, rep.boundary_eigenvalue_count, rep.T = kappa_weyl(g, eps_inertia, blocks)
        kir = kappa_weyl(g.kirchhoff(), eps_inertia, blocks)[0]
    else:
        kir = oracle.kappa_oracle(g.kirchhoff(), params)
    rep.alpha_sum_bound = alpha_sum_bound(g, kir)
    if method == "both" and rep.kappa_weyl != rep.kappa_oracle:
        exc = CountMismatch(f"inertia of T gives {rep.kappa_weyl}, the FEM oracle {rep.kappa_oracle}")
        exc.report = rep
        raise exc
    return rep
