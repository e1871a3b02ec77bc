import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from qgraph import EdgePotential, build_star
from qgraph import oracle
from qgraph.errors import MeshTooCoarse, NotNegativePotential
from qgraph.oracle import DiscretizationParams
from qgraph.samples import random_bumps, random_hermitian, random_star

COARSE = DiscretizationParams(h=1e-2, L_trunc=20)


def well(c, m=1):
    return EdgePotential.constant(-c * np.eye(m), 1.0)


def interval(length=1.0, q=None):
    return build_star(1, [None], [(length, q)])


def test_params_validation():
    with pytest.raises(ValueError):
        DiscretizationParams(L_trunc=5)
    with pytest.raises(ValueError):
        DiscretizationParams(h=0.3, L_trunc=10)
    with pytest.raises(ValueError):
        DiscretizationParams(h=-1)


def test_free_lead_stiffness():
    p = DiscretizationParams(h=0.5, L_trunc=10)
    fm = oracle.fem_assemble(build_star(1, [None]), p)
    n = fm.shape[0]
    A = fm.A_form.toarray()
    # hub node first, then interior nodes 0.5 .. 9.5; far end removed
    ref = (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / 0.5
    ref[0, 0] = 1 / 0.5
    assert np.allclose(A, ref)
    assert oracle.eigen_bottom(build_star(1, [None]), COARSE)[0] >= -1e-6


def test_mass_positive_and_form_hermitian(rng):
    g = build_star(2, [random_bumps(rng, 2, 3.0, sign="any")], [(1.0, random_bumps(rng, 2, 1.0, sign="any"))],
                   [random_hermitian(rng, 2, 2.0), random_hermitian(rng, 2, 2.0)])
    fm = oracle.fem_assemble(g, COARSE)
    A = fm.A_form
    assert abs(A - A.conj().T).max() <= 1e-14 * abs(A).max()
    M = fm.M_mass.toarray()
    assert np.linalg.eigvalsh(M).min() > 0


def test_interval_dirichlet_eigenvalues():
    errs = []
    for h in (2e-2, 1e-2, 5e-3):
        p = DiscretizationParams(h=h, L_trunc=10)
        ev = oracle.eigen_bottom(interval(), p, 2, "dirichlet", include_leads=False)
        errs.append(ev[0] - np.pi ** 2)
        assert np.allclose(ev, [np.pi ** 2, 4 * np.pi ** 2], rtol=5e-3)
    # P1 with consistent mass: error O(h^2) from above
    assert all(e > 0 for e in errs)
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_sparse_inertia_matches_eigvalsh(rng):
    for _ in range(20):
        n = int(rng.integers(3, 30))
        H = random_hermitian(rng, n, 1.0) + np.diag(rng.uniform(-2, 2, n))
        H = H + 4 * np.diag(np.sign(np.diag(H.real)))  # keep diagonal pivots away from zero
        neg, tot = oracle.sparse_inertia(sp.csc_matrix(H))
        assert tot == n
        assert neg == int(np.sum(np.linalg.eigvalsh(H) < 0))


def test_kappa_oracle_examples():
    assert oracle.kappa_oracle(build_star(1, [None, None], [(1.0, None)]), COARSE) == 0
    r66 = build_star(2, [None], [(0.5, None)], [np.diag([-1.0, 5.0]), np.diag([6.0, -1.0])])
    r69 = build_star(1, [None], [(0.5, None)], [-1.0, -1.0])
    assert oracle.kappa_oracle(r66, COARSE) == 0
    rep = oracle.kappa_oracle_report(r69, COARSE)
    assert rep.kappa == 1
    assert rep.history[0] == (COARSE.h, COARSE.L_trunc, 1)
    assert rep.to_dict()["kappa"] == 1


def test_eigen_bottom_r69():
    r69 = build_star(1, [None], [(0.5, None)], [-1.0, -1.0])
    ev = oracle.eigen_bottom(r69, COARSE, 3)
    assert np.sum(ev < 0) == 1
    assert np.all(np.diff(ev) >= 0)


def test_mesh_too_coarse():
    with pytest.raises(MeshTooCoarse):
        oracle.fem_assemble(interval(0.1), DiscretizationParams(h=0.05, L_trunc=10))


def test_nonnegativity_examples():
    ok, est = oracle.nonnegativity_check(build_star(1, [EdgePotential.constant(np.eye(1), 2.0)]), COARSE)
    assert ok
    ok, est = oracle.nonnegativity_check(build_star(1, [well(5.0)]), COARSE)
    assert not ok and est < 0
    ok, est = oracle.nonnegativity_check(build_star(1, [None]), COARSE)
    assert ok and abs(est) < 0.1


def test_birman_schwinger_examples():
    assert oracle.birman_schwinger_count(EdgePotential.zero(1)) == 0
    assert oracle.birman_schwinger_count(well(5.0)) == 1
    assert oracle.birman_schwinger_count(well(25.0)) == 2
    with pytest.raises(NotNegativePotential):
        oracle.birman_schwinger_count(EdgePotential.constant(np.eye(1), 1.0))


def test_birman_schwinger_matrix_channels():
    # decoupled channels add
    q = EdgePotential.constant(-np.diag([5.0, 25.0]), 1.0)
    assert oracle.birman_schwinger_count(q) == 3


def matching_count(c):
    """Dirichlet half-line bound states of -c on [0, 1]: zeros of sqrt(c - k^2) cot sqrt(c - k^2) = -k."""
    return int(np.floor(np.sqrt(c) / np.pi + 0.5))


@pytest.mark.parametrize("c", [1.0, 5.0, 10.0, 25.0])
def test_birman_schwinger_vs_fem(c):
    g = build_star(1, [well(c)])
    assert oracle.birman_schwinger_count(well(c)) == oracle.kappa_oracle(g, COARSE, "dirichlet") == matching_count(c)


@settings(max_examples=8)
@given(st.integers(0, 100_000))
def test_form_monotonicity(seed):
    rng = np.random.default_rng(seed)
    g = random_star(rng, lengths=(0.5, 2.0), alpha_scale=0.0)
    bottoms = [oracle.eigen_bottom(g, COARSE, 1, bc)[0] for bc in ("neumann", "delta", "dirichlet")]
    assert bottoms[0] <= bottoms[1] + 1e-9 and bottoms[1] <= bottoms[2] + 1e-9


@settings(max_examples=8)
@given(st.integers(0, 100_000))
def test_alpha_sum_validity(seed):
    rng = np.random.default_rng(seed)
    g = random_star(rng, lengths=(0.5, 2.0))
    k = oracle.kappa_oracle(g, COARSE)
    k0 = oracle.kappa_oracle(g.kirchhoff(), COARSE)
    assert k <= k0 + sum(g.coupling.kappa_minus(v) for v in g.vertices)
