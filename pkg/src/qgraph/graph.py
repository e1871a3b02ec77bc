"""Metric graph data model: star graphs and the line with delta interactions.

Every edge is parameterised from its attachment vertex at 0. Leads live on
[0, inf); a finite edge runs over [0, length] from ``start`` to ``end``.
Vertex conditions use outgoing derivatives, so nothing downstream has to
care about orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyLeads, NonHermitianMatrix, NonpositiveLength, UnsortedPoints
from .linalg import HERMITIAN_RTOL, as_matrix, frozen, hermitian_defect
from .potential import EdgePotential


@dataclass(frozen=True, eq=False)
class VertexCoupling:
    """Map vertex id -> m x m Hermitian delta strength alpha(v)."""

    entries: dict = field(default_factory=dict)

    def __getitem__(self, v):
        return self.entries[v]

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexCoupling):
            return NotImplemented
        return (list(self.entries) == list(other.entries)
                and all(np.array_equal(self.entries[k], other.entries[k]) for k in self.entries))

    __hash__ = None

    def kappa_minus(self, v) -> int:
        return int(np.sum(np.linalg.eigvalsh((self.entries[v] + self.entries[v].conj().T) / 2) < 0))


@dataclass(frozen=True, eq=False)
class LeadEdge:
    id: str
    vertex: str
    potential: EdgePotential

    def __eq__(self, other):
        return (isinstance(other, LeadEdge) and self.id == other.id
                and self.vertex == other.vertex and self.potential == other.potential)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FiniteEdge:
    id: str
    start: str
    end: str
    length: float
    potential: EdgePotential

    def __eq__(self, other):
        return (isinstance(other, FiniteEdge) and self.id == other.id and self.start == other.start
                and self.end == other.end and self.length == other.length and self.potential == other.potential)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MetricGraph:
    m: int
    vertices: tuple
    leads: tuple
    finite_edges: tuple
    coupling: VertexCoupling

    @property
    def central_vertex(self) -> str:
        return self.vertices[0]

    @property
    def p1(self) -> int:
        return len(self.leads)

    @property
    def p2(self) -> int:
        return len(self.finite_edges)

    @property
    def p(self) -> int:
        return self.p1 + self.p2

    @property
    def edges(self) -> tuple:
        return tuple(self.leads) + tuple(self.finite_edges)

    @property
    def is_star(self) -> bool:
        v0 = self.central_vertex
        ends = [e.end for e in self.finite_edges]
        return (all(e.vertex == v0 for e in self.leads)
                and all(e.start == v0 for e in self.finite_edges)
                and len(set(ends)) == len(ends) and v0 not in ends)

    def alpha(self, v) -> np.ndarray:
        return self.coupling[v]

    def edge(self, edge_id: str):
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def with_coupling(self, entries: dict) -> "MetricGraph":
        return MetricGraph(self.m, self.vertices, self.leads, self.finite_edges,
                           VertexCoupling({v: frozen(as_matrix(entries[v], self.m)) for v in self.vertices}))

    def kirchhoff(self) -> "MetricGraph":
        return self.with_coupling({v: np.zeros((self.m, self.m)) for v in self.vertices})

    @property
    def all_zero_potential(self) -> bool:
        return all(e.potential.is_zero for e in self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return (self.m == other.m and tuple(self.vertices) == tuple(other.vertices)
                and tuple(self.leads) == tuple(other.leads)
                and tuple(self.finite_edges) == tuple(other.finite_edges)
                and self.coupling == other.coupling)

    __hash__ = None


@dataclass(frozen=True)
class SpectralPoint:
    """A point of the cut plane, or a boundary value lambda + i0 (lambda > 0).

    The square-root branch has Im sqrt(z) > 0 off [0, inf); on the boundary
    sqrt(lambda) >= 0.
    """

    z: complex
    boundary: bool = False

    def __post_init__(self):
        z = complex(self.z)
        if self.boundary and (z.imag != 0 or z.real <= 0):
            raise ValueError("boundary points must be real and positive")
        object.__setattr__(self, "z", z)
        # a real positive z lies on the cut: read it as the upper boundary value
        if z.imag == 0 and z.real > 0 and not self.boundary:
            object.__setattr__(self, "boundary", True)

    @classmethod
    def of(cls, z) -> "SpectralPoint":
        return z if isinstance(z, SpectralPoint) else cls(complex(z))

    @property
    def sqrt(self) -> complex:
        if self.boundary:
            return complex(np.sqrt(self.z.real))
        s = complex(np.sqrt(self.z))
        if s.imag < 0 or (s.imag == 0 and s.real < 0):
            s = -s
        return s

    def conj(self) -> "SpectralPoint":
        return SpectralPoint(self.z.conjugate(), self.boundary)


def _checked_alpha(a, m: int, name) -> np.ndarray:
    a = as_matrix(a, m)
    if a.shape != (m, m):
        raise DimensionMismatch(f"alpha({name}) has shape {a.shape}, expected {(m, m)}")
    if hermitian_defect(a) > HERMITIAN_RTOL * float(np.linalg.norm(a)):
        raise NonHermitianMatrix(f"alpha({name}) is not Hermitian")
    return frozen(a)


def _checked_potential(q: EdgePotential | None, m: int, name: str) -> EdgePotential:
    if q is None:
        return EdgePotential.zero(m)
    if q.m != m:
        raise DimensionMismatch(f"potential on {name} has m={q.m}, expected {m}")
    return q


def build_star(m: int, lead_potentials, finite_edges=(), coupling=None) -> MetricGraph:
    """Star graph with hub ``v0``, leads ``l1..``, finite edges ``e1..`` ending at ``v1..``.

    ``finite_edges`` is a sequence of (length, potential) pairs. ``coupling``
    maps vertex ids to alpha matrices, or is a sequence [alpha(v0), alpha(v1), ...];
    missing entries default to zero (Kirchhoff).
    """
    if m < 1:
        raise DimensionMismatch("m must be a positive integer")
    lead_potentials = list(lead_potentials)
    if not lead_potentials:
        raise EmptyLeads("a star graph needs at least one lead")
    vertices = ("v0",) + tuple(f"v{k + 1}" for k in range(len(finite_edges)))
    leads = tuple(LeadEdge(f"l{j + 1}", "v0", _checked_potential(q, m, f"l{j + 1}"))
                  for j, q in enumerate(lead_potentials))
    fins = []
    for k, (length, q) in enumerate(finite_edges):
        length = float(length)
        if not (np.isfinite(length) and length > 0):
            raise NonpositiveLength(f"edge e{k + 1} has length {length}")
        q = _checked_potential(q, m, f"e{k + 1}")
        fins.append(FiniteEdge(f"e{k + 1}", "v0", vertices[k + 1], length, q))
    return MetricGraph(m, vertices, leads, tuple(fins), _coupling(coupling, vertices, m))


def _coupling(coupling, vertices, m) -> VertexCoupling:
    if coupling is None:
        coupling = {}
    elif isinstance(coupling, VertexCoupling):
        coupling = coupling.entries
    elif not isinstance(coupling, dict):
        coupling = dict(zip(vertices, coupling))
    unknown = set(coupling) - set(vertices)
    if unknown:
        raise DimensionMismatch(f"coupling given for unknown vertices {sorted(unknown)}")
    return VertexCoupling({v: _checked_alpha(coupling.get(v, np.zeros((m, m))), m, v) for v in vertices})


def build_line_with_deltas(m: int, points, strengths, potential: EdgePotential | None = None) -> MetricGraph:
    """The line with delta interactions at x_0 < ... < x_N as a graph.

    Vertices ``x0..xN``; leads (-inf, x_0) and (x_N, inf) are parameterised
    outward from their vertex (the left one by reflection); finite edges
    (x_{n-1}, x_n) start at x_{n-1}.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or len(points) == 0:
        raise UnsortedPoints("need at least one interaction point")
    if np.any(np.diff(points) <= 0):
        raise UnsortedPoints("points must be strictly increasing")
    strengths = list(strengths)
    if len(strengths) != len(points):
        raise DimensionMismatch("one strength per point is required")
    q = _checked_potential(potential, m, "line")
    vertices = tuple(f"x{n}" for n in range(len(points)))
    x0, xn = points[0], points[-1]
    leads = (LeadEdge("left", vertices[0], q.restricted(-np.inf, x0).transformed(x0, reflect=True)),
             LeadEdge("right", vertices[-1], q.restricted(xn, np.inf).transformed(xn)))
    fins = tuple(FiniteEdge(f"e{n}", vertices[n - 1], vertices[n], float(points[n] - points[n - 1]),
                            q.restricted(points[n - 1], points[n]).transformed(points[n - 1]))
                 for n in range(1, len(points)))
    return MetricGraph(m, vertices, leads, fins, _coupling(dict(zip(vertices, strengths)), vertices, m))


def validate(g: MetricGraph) -> list[str]:
    """Every violated invariant, one message each; empty iff valid."""
    report = []
    if g.p1 < 1:
        report.append("graph has no leads")
    vset = set(g.vertices)
    if len(vset) != len(g.vertices):
        report.append("duplicate vertex ids")
    ids = [e.id for e in g.edges]
    if len(set(ids)) != len(ids):
        report.append("duplicate edge ids")
    for v in g.vertices:
        if v not in g.coupling.entries:
            report.append(f"vertex {v}: no coupling matrix")
            continue
        a = np.asarray(g.coupling[v])
        if a.shape != (g.m, g.m):
            report.append(f"vertex {v}: alpha has shape {a.shape}, expected {(g.m, g.m)}")
        elif hermitian_defect(a) > HERMITIAN_RTOL * float(np.linalg.norm(a)):
            report.append(f"vertex {v}: alpha is not Hermitian (||a - a*|| = {hermitian_defect(a):.3g})")
    extra = set(g.coupling.entries) - vset
    if extra:
        report.append(f"coupling given for unknown vertices {sorted(extra)}")
    for e in g.leads:
        if e.vertex not in vset:
            report.append(f"lead {e.id}: unknown vertex {e.vertex}")
    for e in g.finite_edges:
        if not (np.isfinite(e.length) and e.length > 0):
            report.append(f"edge {e.id}: length {e.length} is not positive and finite")
        for v in (e.start, e.end):
            if v not in vset:
                report.append(f"edge {e.id}: unknown vertex {v}")
        if e.start == e.end:
            report.append(f"edge {e.id}: loop at {e.start}")
    for e in g.edges:
        q = e.potential
        if q.m != g.m:
            report.append(f"edge {e.id}: potential has m={q.m}, expected {g.m}")
            continue
        for k, a in enumerate(q.values):
            if hermitian_defect(a) > HERMITIAN_RTOL * float(np.linalg.norm(a)):
                report.append(f"edge {e.id}: potential matrix #{k} is not Hermitian")
        if isinstance(e, FiniteEdge) and not q.is_zero and np.isfinite(e.length):
            s0, s1 = q.support
            if s0 < -1e-12 or s1 > e.length + 1e-12:
                # only a violation if Q is actually nonzero outside [0, |e|]
                probe = np.concatenate([np.linspace(s0, 0, 50)[:-1] if s0 < 0 else [],
                                        np.linspace(e.length, s1, 50)[1:] if s1 > e.length else []])
                if len(probe) and np.any(np.abs(q(probe)) > 0):
                    report.append(f"edge {e.id}: potential support exceeds [0, {e.length}]")
        if q.is_L1 or q.is_xL1:
            i0, i1 = q.norm_integrals()
            if q.is_L1 and not np.isfinite(i0):
                report.append(f"edge {e.id}: declared L1 but int ||Q|| diverges")
            if q.is_xL1 and not np.isfinite(i1):
                report.append(f"edge {e.id}: declared xL1 but int x||Q|| diverges")
    return report
