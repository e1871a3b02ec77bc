"""Independent discretisations used to cross-check the Weyl-function route.

* A P1 finite-element discretisation of the quadratic form
      t[f] = sum_e int |f'|^2 + <Q f, f> + sum_v <alpha(v) f(v), f(v)>
  with shared vertex unknowns (continuity) and leads cut at L with a
  Dirichlet far end. Both approximations shrink the trial space, so the
  negative count is a lower bound that is confirmed by refinement.
* A Nystrom discretisation of the Birman-Schwinger kernel
  Q_-^{1/2}(x) min(x, t) Q_-^{1/2}(t) for half-line Dirichlet problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CountUnstable, MeshTooCoarse, NotNegativePotential, SolverFailure
from .graph import FiniteEdge, MetricGraph
from .potential import EdgePotential

VERTEX_BCS = ("delta", "dirichlet", "neumann")

_GAUSS_X = np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class DiscretizationParams:
    h: float = 1e-3
    L_trunc: float = 50.0
    far_bc: str = "dirichlet"
    inertia_tol: float = 1e-9
    max_doublings: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.L_trunc >= 10:
            raise ValueError("L_trunc must be at least 10")
        n = self.L_trunc / self.h
        if abs(n - round(n)) > 1e-6 * n:
            raise ValueError("L_trunc / h must be an integer")
        if self.far_bc != "dirichlet":
            raise ValueError("only a Dirichlet far end is supported")


@dataclass
class FormMatrices:
    """Sparse form and mass matrices.

    DOF layout: m unknowns per node, node blocks ordered as the shared
    vertex nodes (graph vertex order, omitted under Dirichlet vertex
    conditions), then per-edge-end vertex nodes (Neumann only), then the
    interior nodes of each edge in edge order, running away from the
    attachment vertex.
    """

    A_form: sp.csc_matrix
    M_mass: sp.csc_matrix
    m: int
    n_nodes: int
    edge_nodes: dict = field(default_factory=dict)  # edge id -> (node coordinates, global node indices)

    @property
    def shape(self):
        return self.A_form.shape


def _edge_mesh(length: float, h: float, exact: bool) -> tuple[int, float]:
    n = int(round(length / h)) if exact else int(np.ceil(length / h - 1e-9))
    n = max(n, 4)
    return n, length / n


def fem_assemble(g: MetricGraph, params: DiscretizationParams = DiscretizationParams(),
                 vertex_bc: str = "delta", include_leads: bool = True) -> FormMatrices:
    """P1 assembly of the form; vertex_bc chooses the vertex conditions.

    'delta' shares vertex unknowns and adds alpha(v); 'dirichlet' removes
    them; 'neumann' gives every edge end its own unknown and drops alpha.
    """
    if vertex_bc not in VERTEX_BCS:
        raise ValueError(f"vertex_bc must be one of {VERTEX_BCS}")
    if g.finite_edges and params.h > min(e.length for e in g.finite_edges) / 4:
        raise MeshTooCoarse(f"h={params.h} exceeds a quarter of the shortest edge")
    m = g.m
    node = 0
    vnode = {}
    if vertex_bc == "delta":
        for v in g.vertices:
            vnode[v] = node
            node += 1
    edges = [e for e in g.edges if include_leads or isinstance(e, FiniteEdge)]
    rows, cols, avals, mvals = [], [], [], []
    edge_nodes = {}
    for e in edges:
        finite = isinstance(e, FiniteEdge)
        length = e.length if finite else params.L_trunc
        n, he = _edge_mesh(length, params.h, exact=not finite)
        x = np.linspace(0.0, length, n + 1)
        gidx = np.full(n + 1, -1)
        gidx[1:n] = node + np.arange(n - 1)
        node += n - 1
        start = e.start if finite else e.vertex
        if vertex_bc == "delta":
            gidx[0] = vnode[start]
            if finite:
                gidx[n] = vnode[e.end]
        elif vertex_bc == "neumann":
            gidx[0] = node
            node += 1
            if finite:
                gidx[n] = node
                node += 1
        edge_nodes[e.id] = (x, gidx)
        # element matrices, vectorised over elements
        xg = x[:-1, None] + he * _GAUSS_X[None, :]
        qg = e.potential(xg)  # (n, 3, m, m)
        phi = np.stack([1 - _GAUSS_X, _GAUSS_X])  # (2, 3)
        qloc = he * np.einsum("g,ag,bg,ngij->nabij", _GAUSS_W, phi, phi, qg)
        kloc = np.array([[1.0, -1.0], [-1.0, 1.0]]) / he
        mloc = he / 6 * np.array([[2.0, 1.0], [1.0, 2.0]])
        eye = np.eye(m)
        aloc = qloc + kloc[None, :, :, None, None] * eye
        mmat = np.broadcast_to(mloc[None, :, :, None, None] * eye, aloc.shape)
        ends = np.stack([gidx[:-1], gidx[1:]], axis=1)  # (n, 2)
        for a in range(2):
            for b in range(2):
                ok = (ends[:, a] >= 0) & (ends[:, b] >= 0)
                ga, gb = ends[ok, a], ends[ok, b]
                r = (ga[:, None, None] * m + np.arange(m)[None, :, None]) + 0 * np.arange(m)[None, None, :]
                c = (gb[:, None, None] * m + np.arange(m)[None, None, :]) + 0 * np.arange(m)[None, :, None]
                rows.append(r.ravel())
                cols.append(c.ravel())
                avals.append(aloc[ok, a, b].ravel())
                mvals.append(mmat[ok, a, b].ravel())
    if vertex_bc == "delta":
        for v, k in vnode.items():
            al = np.asarray(g.alpha(v))
            r, c = np.meshgrid(k * m + np.arange(m), k * m + np.arange(m), indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
            avals.append(al.ravel())
            mvals.append(np.zeros(m * m))
    size = node * m
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    avals, mvals = np.concatenate(avals), np.concatenate(mvals).real
    if not np.any(np.abs(avals.imag) > 0):
        avals = avals.real
    A = sp.csc_matrix((avals, (rows, cols)), shape=(size, size))
    M = sp.csc_matrix((mvals, (rows, cols)), shape=(size, size))
    return FormMatrices(A, M, m, node, edge_nodes)


def sparse_inertia(A: sp.spmatrix) -> tuple[int, int]:
    """(negative, total) pivot counts of a sparse Hermitian matrix.

    SuperLU in symmetric mode with diagonal pivoting computes P A P^T = L U
    without row interchanges; then U = D L^* and Sylvester's law gives the
    inertia of A from the signs of diag(U).
    """
    A = sp.csc_matrix(A)
    try:
        lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options=dict(SymmetricMode=True))
    except RuntimeError as exc:  # exactly singular
        raise SolverFailure(f"sparse factorisation failed: {exc}") from exc
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise SolverFailure("factorisation pivoted off the diagonal; inertia not available")
    d = lu.U.diagonal()
    # complex Hermitian input leaves round-off in Im(pivot), growing with the mesh size
    if np.any(np.abs(d.imag) > 1e-6 * np.maximum(np.abs(d), 1e-300)):
        raise SolverFailure("pivots are not real")
    return int(np.sum(d.real < 0)), len(d)


def negative_count(g: MetricGraph, params: DiscretizationParams, vertex_bc: str = "delta") -> int:
    """Negative eigenvalues of the discretised pencil (A + tol M) x = mu M x."""
    fm = fem_assemble(g, params, vertex_bc)
    return sparse_inertia(fm.A_form + params.inertia_tol * fm.M_mass)[0]


@dataclass
class OracleCount:
    kappa: int
    history: list  # (h, L_trunc, count)

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "history": [list(r) for r in self.history]}


def kappa_oracle_report(g: MetricGraph, params: DiscretizationParams = DiscretizationParams(),
                        vertex_bc: str = "delta") -> OracleCount:
    """Count confirmed by refinement: double L until two successive counts agree,
    then halve h at the accepted L."""
    hist = []
    p = params
    count = negative_count(g, p, vertex_bc)
    hist.append((p.h, p.L_trunc, count))
    if g.p1 == 0:
        stable = True
    else:
        stable = False
        for _ in range(p.max_doublings):
            q = replace(p, L_trunc=2 * p.L_trunc)
            c2 = negative_count(g, q, vertex_bc)
            hist.append((q.h, q.L_trunc, c2))
            if c2 == count:
                stable = True
                break
            p, count = q, c2
    if not stable:
        raise CountUnstable(f"count did not settle under lead doubling: {hist}")
    fine = replace(p, h=p.h / 2)
    c3 = negative_count(g, fine, vertex_bc)
    hist.append((fine.h, fine.L_trunc, c3))
    if c3 != count:
        raise CountUnstable(f"count changed under mesh halving: {hist}")
    return OracleCount(count, hist)


def kappa_oracle(g: MetricGraph, params: DiscretizationParams = DiscretizationParams(),
                 vertex_bc: str = "delta") -> int:
    return kappa_oracle_report(g, params, vertex_bc).kappa


def _spectral_floor(g: MetricGraph) -> float:
    """A number strictly below the bottom of every discretised spectrum."""
    qmin = min([e.potential.lower_bound() for e in g.edges] + [0.0])
    return qmin - 1.0


def eigen_bottom(g: MetricGraph, params: DiscretizationParams = DiscretizationParams(), k: int = 1,
                 vertex_bc: str = "delta", include_leads: bool = True) -> np.ndarray:
    """k smallest pencil eigenvalues, ascending (shift-invert Lanczos).

    The shift starts below min Q and is pushed further down until no pivot of
    A - sigma M is negative, so the Lanczos targets the bottom of the spectrum.
    """
    fm = fem_assemble(g, params, vertex_bc, include_leads)
    n = fm.A_form.shape[0]
    if k > n:
        raise SolverFailure(f"k={k} exceeds the matrix dimension {n}")
    sigma = _spectral_floor(g)
    for _ in range(60):
        if sparse_inertia(fm.A_form - sigma * fm.M_mass)[0] == 0:
            break
        sigma = 2 * sigma - 1
    else:
        raise SolverFailure("no shift below the spectrum found")
    if n <= 200:
        import scipy.linalg as sla
        ev = sla.eigh(fm.A_form.toarray(), fm.M_mass.toarray(), eigvals_only=True)
        return np.sort(ev)[:k]
    try:
        ev = spla.eigsh(fm.A_form, k=k, M=fm.M_mass, sigma=sigma, which="LM", return_eigenvectors=False)
    except (spla.ArpackNoConvergence, spla.ArpackError) as exc:
        raise SolverFailure(str(exc)) from exc
    return np.sort(ev.real)


def nonnegativity_check(g: MetricGraph, params: DiscretizationParams = DiscretizationParams()) -> tuple[bool, float]:
    """Is the all-Dirichlet form nonnegative? Returns (verdict, smallest eigenvalue estimate)."""
    fm = fem_assemble(g, params, "dirichlet")
    if fm.A_form.shape[0] == 0:
        return True, np.inf
    neg = sparse_inertia(fm.A_form + 10 * params.inertia_tol * fm.M_mass)[0]
    est = float(eigen_bottom(g, params, 1, "dirichlet")[0])
    return neg == 0, est


# -- Birman-Schwinger ---------------------------------------------------------

def _sqrt_psd(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def birman_schwinger_count(q: EdgePotential, n: int = 400, tol: float = 1e-10) -> int:
    """#{eigenvalues > 1} of the kernel Q_-^{1/2}(x) min(x, t) Q_-^{1/2}(t), Q = -Q_- on [0, R]."""
    if q.is_zero:
        return 0
    vals = np.linalg.eigvalsh(q.values) if q.kind != "gaussian_bumps" else None
    lo, hi = max(0.0, q.support[0]), q.support_end
    if not np.isfinite(hi):
        raise NotNegativePotential("the well must have compact support")
    cuts = np.concatenate([[lo], q.breakpoints(lo, hi), [hi]])
    probe = q(np.linspace(lo, hi, 2001))
    if (vals is not None and np.max(vals) > tol) or np.max(np.linalg.eigvalsh(probe)) > tol:
        raise NotNegativePotential("potential has a positive part")
    lens = np.diff(cuts)
    per = np.maximum(8, np.round(n * lens / lens.sum()).astype(int))
    xs, ws = [], []
    for a, b, k in zip(cuts[:-1], cuts[1:], per):
        t, w = np.polynomial.legendre.leggauss(int(k))
        xs.append(a + (b - a) * (t + 1) / 2)
        ws.append(w * (b - a) / 2)
    x, w = np.concatenate(xs), np.concatenate(ws)
    m = q.m
    B = np.array([_sqrt_psd(-qq) for qq in q(x)])  # Q_-^{1/2} at the nodes
    Bw = B * np.sqrt(w)[:, None, None]
    G = np.minimum.outer(x, x)
    K = np.einsum("iab,ij,jbc->iajc", Bw, G, Bw).reshape(len(x) * m, len(x) * m)
    ev = np.linalg.eigvalsh((K + K.conj().T) / 2)
    return int(np.sum(ev > 1.0))
