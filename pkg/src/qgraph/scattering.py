"""Scattering matrix of the star graph against the decoupled Dirichlet operator,
its one-lead and equal-scalar-lead forms, and perturbation determinants.

Finite edges enter through the Weyl function -C'(|e|) C(|e|)^{-1} of the
triplet (f(0), f'(0)) with a Neumann condition at the loose end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import weyl
from .errors import (NeumannTripletPole, NotAStar, PoleHit, SingularAlphaMinusK, SingularAtZeta, SingularFactor,
                     ZeroWeylValue)
from .graph import LeadEdge, MetricGraph, SpectralPoint
from .linalg import ones_block, scaled_condition

SINGULAR_COND = 1e12
K_SUMS = ("all", "leads-only")


@dataclass
class ScatteringResult:
    lam: float
    S: np.ndarray
    unitarity_defect: float
    K_lambda: np.ndarray
    N1_block: np.ndarray

    def to_dict(self) -> dict:
        enc = lambda a: [[[float(v.real), float(v.imag)] for v in row] for row in a]
        return {"lambda": self.lam, "S": enc(self.S), "unitarity_defect": self.unitarity_defect,
                "K": enc(self.K_lambda)}


def _require_star(g: MetricGraph):
    if not g.is_star:
        raise NotAStar("scattering is implemented for star graphs")


def _boundary(lam: float) -> SpectralPoint:
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return SpectralPoint(lam, boundary=True)


def _edge_dn(e, z: SpectralPoint) -> np.ndarray:
    try:
        return weyl.finite_edge_weyl_dn(e, z).value
    except NeumannTripletPole as exc:
        raise PoleHit(f"edge {e.id}: {exc}") from exc


def k_matrix(g: MetricGraph, lam, k_sum: str = "all") -> np.ndarray:
    """K = sum of lead M_j(lambda + i0), plus the finite-edge DN values unless leads-only.

    ``lam`` may also be any SpectralPoint off the real axis.
    """
    if k_sum not in K_SUMS:
        raise ValueError(f"k_sum must be one of {K_SUMS}")
    _require_star(g)
    z = lam if isinstance(lam, SpectralPoint) else _boundary(lam)
    K = sum(weyl.lead_weyl(e, z).value for e in g.leads)
    if k_sum == "all":
        for e in g.finite_edges:
            K = K + _edge_dn(e, z)
    return K


def n1_block(g: MetricGraph, lam: float) -> np.ndarray:
    _require_star(g)
    z = _boundary(lam)
    return sla.block_diag(*[weyl.n1(e, z) for e in g.leads])


def scattering_matrix(g: MetricGraph, lam: float, k_sum: str = "all") -> ScatteringResult:
    """S = I + (i / (2 sqrt lam)) (N1^*)^{-1} ((alpha(0) - K)^{-1} (x) E_{p1}) N1^{-1}.

    Lead-major layout: the (j, k) block of size m x m is
    (N1_j^*)^{-1} (alpha(0) - K)^{-1} N1_k^{-1}.
    """
    if k_sum not in K_SUMS:
        raise ValueError(f"k_sum must be one of {K_SUMS}")
    _require_star(g)
    z = _boundary(lam)
    m, p1 = g.m, g.p1
    n1s, K = [], np.zeros((m, m), complex)
    for e in g.leads:
        N1, N2 = weyl.n1_n2(e, z)
        cond = scaled_condition(N1, N2 / z.sqrt.real)
        if not cond < weyl.POLE_COND:
            raise weyl.NearSingularN1(f"lead {e.id}: N1 near-singular at lambda={lam}")
        n1s.append(N1)
        K = K + np.linalg.solve(N1, N2)
    if k_sum == "all":
        for e in g.finite_edges:
            K = K + _edge_dn(e, z)
    A = np.asarray(g.alpha(g.central_vertex)) - K
    if not scaled_condition(A, K) < SINGULAR_COND:
        raise SingularAlphaMinusK(f"alpha(0) - K(lambda) is singular at lambda={lam}")
    X = np.linalg.solve(A, np.eye(m))
    # right factors X N1_k^{-1} and left solves with N1_j^*
    right = [np.linalg.solve(N1.T, X.T).T for N1 in n1s]
    S = np.eye(m * p1, dtype=complex)
    c = 1j / (2 * np.sqrt(z.z.real))
    for j, Nj in enumerate(n1s):
        for k in range(p1):
            S[j * m:(j + 1) * m, k * m:(k + 1) * m] += c * np.linalg.solve(Nj.conj().T, right[k])
    defect = float(np.linalg.norm(S.conj().T @ S - np.eye(m * p1), 2))
    return ScatteringResult(float(lam), S, defect, K, sla.block_diag(*n1s))


def scattering_kron(g: MetricGraph, lam: float, k_sum: str = "all") -> np.ndarray:
    """The same matrix assembled literally from the Kronecker product (reference path)."""
    z = _boundary(lam)
    K = k_matrix(g, z, k_sum)
    N1 = n1_block(g, lam)
    X = np.linalg.inv(np.asarray(g.alpha(g.central_vertex)) - K)
    mid = np.kron(ones_block(g.p1), X)
    return np.eye(len(N1)) + 1j / (2 * np.sqrt(lam)) * np.linalg.inv(N1.conj().T) @ mid @ np.linalg.inv(N1)


def scattering_one_lead(lead, alpha0, lam: float) -> np.ndarray:
    """S = I + (i / (2 sqrt lam)) (N1 (alpha0 - N1^{-1} N2) N1^*)^{-1} for a single lead."""
    z = _boundary(lam)
    N1, N2 = weyl.n1_n2(lead, z)
    m = N1.shape[0]
    alpha0 = np.asarray(alpha0, dtype=complex) * (np.eye(m) if np.ndim(alpha0) == 0 else 1)
    F = N1 @ (alpha0 - np.linalg.solve(N1, N2)) @ N1.conj().T
    if not scaled_condition(F) < SINGULAR_COND:
        raise SingularFactor(f"N1 (alpha0 - M) N1^* is singular at lambda={lam}")
    return np.eye(m) + 1j / (2 * np.sqrt(lam)) * np.linalg.solve(F, np.eye(m))


def scattering_scalar_equal(p1: int, q, lam: float) -> np.ndarray:
    """S = I - 2i Im m / (p1 m) E_{p1} for p1 identical scalar leads and alpha = 0."""
    if p1 < 1:
        raise ValueError("p1 must be positive")
    mval = weyl.lead_weyl(q, _boundary(lam)).value
    if mval.shape != (1, 1):
        raise ValueError("scalar leads only (m = 1)")
    mval = complex(mval[0, 0])
    if abs(mval) < 1e-14:
        raise ZeroWeylValue(f"m(lambda + i0) vanishes at lambda={lam}")
    return np.eye(p1) - 2j * mval.imag / (p1 * mval) * ones_block(p1)


# -- perturbation determinants --------------------------------------------------

def direct_sum_dn(g: MetricGraph, z) -> list[np.ndarray]:
    """Per-edge Weyl values: leads, then finite edges in the (f(0), f'(0)) triplet."""
    z = SpectralPoint.of(z)
    out = []
    for e in g.edges:
        out.append(weyl.lead_weyl(e, z).value if isinstance(e, LeadEdge) else _edge_dn(e, z))
    return out


def lambda_matrix(g: MetricGraph, z) -> np.ndarray:
    """C - D M(z): first block row alpha(0) - M_1, -M_2, ..., -M_p; below it rows [I, 0.., -I, ..]."""
    _require_star(g)
    m, p = g.m, g.p
    Ms = direct_sum_dn(g, z)
    L = np.zeros((m * p, m * p), complex)
    L[:m, :m] = np.asarray(g.alpha(g.central_vertex))
    for j, Mj in enumerate(Ms):
        L[:m, j * m:(j + 1) * m] -= Mj
    eye = np.eye(m)
    for j in range(1, p):
        L[j * m:(j + 1) * m, :m] = eye
        L[j * m:(j + 1) * m, j * m:(j + 1) * m] = -eye
    return L


def perturbation_determinant(g: MetricGraph, zeta, z, method: str = "schur") -> complex:
    """det(Lambda(zeta)^{-1} Lambda(z)).

    'schur' uses that the Schur complement of the constant -I block is
    alpha(0) - sum_j M_j, so the ratio is det(alpha(0) - K(z)) / det(alpha(0) - K(zeta)).
    'full' factorises the mp x mp matrices directly.
    """
    _require_star(g)
    zeta, z = SpectralPoint.of(zeta), SpectralPoint.of(z)
    if method == "full":
        Lz, Lzeta = lambda_matrix(g, z), lambda_matrix(g, zeta)
        if not scaled_condition(Lzeta) < SINGULAR_COND:
            raise SingularAtZeta(f"Lambda(zeta) is singular at zeta={zeta.z}")
        return complex(np.linalg.det(np.linalg.solve(Lzeta, Lz)))
    if method != "schur":
        raise ValueError("method must be 'schur' or 'full'")
    a0 = np.asarray(g.alpha(g.central_vertex))
    Az = a0 - sum(direct_sum_dn(g, z))
    Azeta = a0 - sum(direct_sum_dn(g, zeta))
    if not scaled_condition(Azeta) < SINGULAR_COND:
        raise SingularAtZeta(f"alpha(0) - K(zeta) is singular at zeta={zeta.z}")
    return complex(np.linalg.det(np.linalg.solve(Azeta, Az)))
