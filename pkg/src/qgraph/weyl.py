"""Weyl functions of leads and finite edges.

Leads use the triplet {C^m, f(0), f'(0)}: M(z) = N1(z)^{-1} N2(z) with

    N1(z) = I/(2i sqrt z) + (1/(2i sqrt z)) int_0^inf e^{it sqrt z} Q(t) S(t,z) dt,
    N2(z) = I/2          - (1/(2i sqrt z)) int_0^inf e^{it sqrt z} Q(t) C(t,z) dt.

Finite edges come in two flavours: the Dirichlet triplet on both ends
(a 2m x 2m block) and the Dirichlet/Neumann triplet with trace at 0 only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import slode
from .errors import (DirichletEigenvalueHit, ExtrapolationDiverged, IntegralNotConverged, NearSingularN1,
                     NeumannTripletPole, QGraphError, ZeroSpectralPoint)
from .graph import FiniteEdge, LeadEdge, MetricGraph, SpectralPoint
from .linalg import scaled_condition
from .potential import EdgePotential

POLE_COND = 1e10
DEFAULT_TOL = 1e-10


@dataclass
class WeylBlock:
    edge_id: str
    z: SpectralPoint
    value: np.ndarray
    kind: str  # "lead" | "edge_dirichlet" | "edge_dn"
    condition_number: float
    error_estimate: float = 0.0

    @property
    def m(self) -> int:
        return self.value.shape[0] // (2 if self.kind == "edge_dirichlet" else 1)

    def block(self, i: int, j: int) -> np.ndarray:
        """M^{ij} (1-based) of a Dirichlet-triplet edge block."""
        if self.kind != "edge_dirichlet":
            raise ValueError("only Dirichlet-triplet edge blocks have sub-blocks")
        m = self.m
        return self.value[(i - 1) * m: i * m, (j - 1) * m: j * m]

    def to_dict(self) -> dict:
        return {"edge": self.edge_id, "kind": self.kind, "z": [self.z.z.real, self.z.z.imag],
                "boundary_value": self.z.boundary, "sqrt_z": [self.z.sqrt.real, self.z.sqrt.imag],
                "condition_number": self.condition_number, "error_estimate": self.error_estimate}


def _potential(obj) -> tuple[str, EdgePotential]:
    if isinstance(obj, (LeadEdge, FiniteEdge)):
        return obj.id, obj.potential
    return "", obj


def _lead_point(z) -> SpectralPoint:
    z = SpectralPoint.of(z)
    if z.z == 0:
        raise ZeroSpectralPoint("N1, N2 and the lead Weyl function are undefined at z = 0")
    return z


def n1_n2(lead, z, tail_tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(N1(z), N2(z)) from one integration over the support of Q."""
    _, q = _potential(lead)
    z = _lead_point(z)
    m = q.m
    sz = z.sqrt
    eye = np.eye(m, dtype=complex)
    pref = 1.0 / (2j * sz)
    if q.is_zero:
        return pref * eye, 0.5 * eye
    R = q.support_end
    if not np.isfinite(R) or not q.is_L1:
        raise IntegralNotConverged("lead potential has no finite support; the N-integrals cannot be truncated")
    rtol = min(max(tail_tol, 1e-14), 1e-4)
    _, ic, is_ = slode.jost_moments(q, z, R, rtol)
    return pref * (eye + is_), 0.5 * eye - pref * ic


def n1(lead, z, tail_tol: float = DEFAULT_TOL) -> np.ndarray:
    return n1_n2(lead, z, tail_tol)[0]


def n2(lead, z, tail_tol: float = DEFAULT_TOL) -> np.ndarray:
    return n1_n2(lead, z, tail_tol)[1]


def _n1_condition(N1, N2, z: SpectralPoint) -> float:
    return scaled_condition(N1, N2 / abs(z.sqrt))


def lead_weyl(lead, z, tol: float = DEFAULT_TOL) -> WeylBlock:
    """M(z) = N1^{-1} N2 as a linear solve; boundary points use sqrt(lambda) >= 0."""
    eid, _ = _potential(lead)
    z = _lead_point(z)
    N1, N2 = n1_n2(lead, z, tol)
    cond = _n1_condition(N1, N2, z)
    if not cond < POLE_COND:
        raise NearSingularN1(f"N1 is near-singular at z={z.z} (scaled condition {cond:.3g})")
    return WeylBlock(eid, z, np.linalg.solve(N1, N2), "lead", cond)


def im_lead_weyl_boundary(lead, lam: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Im M(lambda + i0) = (1/(4 sqrt lambda)) (N1(lambda)^* N1(lambda))^{-1}."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    z = SpectralPoint(lam, boundary=True)
    N1, N2 = n1_n2(lead, z, tol)
    cond = _n1_condition(N1, N2, z)
    if not cond < POLE_COND:
        raise NearSingularN1(f"N1 is near-singular at lambda={lam}")
    g = N1.conj().T @ N1
    out = np.linalg.solve(g, np.eye(len(g))) / (4 * np.sqrt(lam))
    return (out + out.conj().T) / 2


def _edge_transfer(edge: FiniteEdge, z: SpectralPoint, tol: float) -> np.ndarray:
    return slode.transfer_at(edge.potential, z, edge.length, min(max(tol, 1e-14), 1e-4))


def _kappa(z: SpectralPoint, length: float) -> float:
    return max(abs(z.sqrt), 1.0 / length)


def finite_edge_weyl_dirichlet(edge: FiniteEdge, z, tol: float = DEFAULT_TOL) -> WeylBlock:
    """2m x 2m Weyl function of the edge for the traces (f(0), f(l)), (f'(0), -f'(l))."""
    z = SpectralPoint.of(z)
    m = edge.potential.m
    Y = _edge_transfer(edge, z, tol)
    C, S, Cp, Sp = Y[:m, :m], Y[:m, m:], Y[m:, :m], Y[m:, m:]
    kap = _kappa(z, edge.length)
    cond = scaled_condition(kap * S, C, Sp)
    if not cond < POLE_COND:
        raise DirichletEigenvalueHit(f"S(|e|, z) is near-singular on edge {edge.id} at z={z.z} "
                                     f"(scaled condition {cond:.3g})")
    m11 = -np.linalg.solve(S, C)
    m12 = np.linalg.inv(S)
    # Lagrange identity: S(l, conj z)^* is minus the (1,2) block of Y(l, z)^{-1}
    yinv = np.linalg.inv(Y)
    m21 = np.linalg.inv(-yinv[:m, m:])
    m22 = -Sp @ m12
    return WeylBlock(edge.id, z, np.block([[m11, m12], [m21, m22]]), "edge_dirichlet", cond)


def finite_edge_weyl_dn(edge: FiniteEdge, z, tol: float = DEFAULT_TOL) -> WeylBlock:
    """M(z) = -C'(|e|, z) C(|e|, z)^{-1} (Dirichlet at 0 as A_0, Neumann at the loose end)."""
    z = SpectralPoint.of(z)
    m = edge.potential.m
    Y = _edge_transfer(edge, z, tol)
    C, Cp = Y[:m, :m], Y[m:, :m]
    cond = scaled_condition(C, Cp / _kappa(z, edge.length))
    if not cond < POLE_COND:
        raise NeumannTripletPole(f"C(|e|, z) is near-singular on edge {edge.id} at z={z.z} "
                                 f"(scaled condition {cond:.3g})")
    value = -np.linalg.solve(C.T, Cp.T).T
    return WeylBlock(edge.id, z, value, "edge_dn", cond)


def _richardson(values: list[np.ndarray], ratio: float = 2.0) -> tuple[np.ndarray, float]:
    """Extrapolate h -> 0 from samples at h, h/ratio, ... assuming powers h, h^2, ..."""
    table = [list(values)]
    for j in range(1, len(values)):
        f = ratio ** j
        prev = table[-1]
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    err = float(np.linalg.norm(best - table[-2][-1], 2)) if len(table) > 1 else np.inf
    return best, err


def weyl_at_zero(edge, eps0: float = 1e-2, levels: int = 4, tol: float = DEFAULT_TOL,
                 target: float = 1e-6, max_levels: int = 8) -> WeylBlock:
    """M(0) = lim_{eps -> 0+} M(-eps).

    Leads: Richardson extrapolation in h = sqrt(eps) over eps_k = eps0 4^{-k}.
    Starts with ``levels`` samples and keeps adding levels (up to ``max_levels``)
    while the tableau error exceeds ``target`` relative to ||M(0)||.
    Finite edges: the Dirichlet-triplet block is entire away from the Dirichlet
    spectrum, so it is evaluated at z = 0 directly.
    """
    if isinstance(edge, FiniteEdge):
        return finite_edge_weyl_dirichlet(edge, SpectralPoint(0.0), tol)
    eid, q = _potential(edge)
    m = q.m
    if q.is_zero:
        return WeylBlock(eid, SpectralPoint(0.0), np.zeros((m, m), complex), "lead", 1.0, 0.0)
    if not q.is_xL1:
        raise ExtrapolationDiverged(f"lead {eid}: M(0) needs x Q in L1")
    vals, conds = [], []
    k = 0
    while True:
        try:
            blk = lead_weyl(edge, SpectralPoint(-eps0 * 4.0 ** (-k)), tol)
        except QGraphError as exc:
            raise ExtrapolationDiverged(f"lead {eid}: M(-eps) unavailable near 0 ({exc})") from exc
        vals.append(blk.value)
        conds.append(blk.condition_number)
        k += 1
        if k < levels:
            continue
        best, err = _richardson(vals)
        scale = 1 + float(np.linalg.norm(best, 2)) if np.all(np.isfinite(best)) else np.inf
        if err <= target * scale or k >= max_levels:
            break
    if not (np.isfinite(scale) and err <= 1e-3 * scale):
        raise ExtrapolationDiverged(f"lead {eid}: Richardson tableau not converging (err {err:.3g})")
    best = (best + best.conj().T) / 2
    return WeylBlock(eid, SpectralPoint(0.0), best, "lead", max(conds), err)


def direct_sum_weyl(g: MetricGraph, z, triplet_choice: str = "dirichlet_edges", tol: float = DEFAULT_TOL):
    """Block-diagonal M(z): leads first, then finite edges in the chosen triplet."""
    if triplet_choice not in ("dirichlet_edges", "dn_edges"):
        raise ValueError("triplet_choice must be 'dirichlet_edges' or 'dn_edges'")
    z = SpectralPoint.of(z)
    blocks = []
    for e in g.edges:
        try:
            if isinstance(e, LeadEdge):
                blocks.append(lead_weyl(e, z, tol).value)
            elif triplet_choice == "dirichlet_edges":
                blocks.append(finite_edge_weyl_dirichlet(e, z, tol).value)
            else:
                blocks.append(finite_edge_weyl_dn(e, z, tol).value)
        except QGraphError as exc:
            raise type(exc)(f"edge {e.id}: {exc}") from exc
    return sla.block_diag(*blocks)
