import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgraph import EdgePotential, build_star, weyl
from qgraph import scattering as sc
from qgraph.errors import PoleHit, SingularAtZeta
from qgraph.graph import LeadEdge, SpectralPoint
from qgraph.linalg import ones_block
from qgraph.samples import random_bumps, random_hermitian, random_star


def free_star(p1, p2=0, m=1, lengths=None):
    lengths = lengths or [1.0] * p2
    return build_star(m, [None] * p1, [(l, None) for l in lengths])


def bump_star(rng, m, p1, p2):
    leads = [random_bumps(rng, m, 3.0, sign="any") for _ in range(p1)]
    fins = [(float(rng.uniform(0.3, 1.5)), random_bumps(rng, m, 1.0, sign="any")) for _ in range(p2)]
    return build_star(m, leads, [(l, q.restricted(0, l)) for l, q in fins],
                      [random_hermitian(rng, m, 2.0) for _ in range(p2 + 1)])


def test_ones_block_algebra():
    for p in (1, 2, 5):
        E = ones_block(p)
        assert np.array_equal(E @ E, p * E)


def test_k_matrix_examples():
    assert np.allclose(sc.k_matrix(free_star(3, m=2), 2.0), 3j * np.sqrt(2) * np.eye(2))
    assert np.isclose(sc.k_matrix(free_star(2, 1), 1.0)[0, 0], 2j + np.tan(1))
    assert np.isclose(sc.k_matrix(free_star(2, 1), 1.0, "leads-only")[0, 0], 2j)
    with pytest.raises(ValueError):
        sc.k_matrix(free_star(1), 1.0, "some")


def test_k_matrix_compositional(rng):
    g = bump_star(rng, 2, 3, 0)
    K = sc.k_matrix(g, 1.7)
    ref = sum(weyl.lead_weyl(e, SpectralPoint(1.7, True)).value for e in g.leads)
    assert np.allclose(K, ref)


def test_n1_block():
    assert np.allclose(sc.n1_block(free_star(3), 1.0), np.eye(3) / 2j)
    assert np.allclose(sc.n1_block(free_star(2, m=2), 4.0), np.eye(4) / 4j)
    rng = np.random.default_rng(2)
    g = bump_star(rng, 2, 2, 0)
    B = sc.n1_block(g, 0.8)
    assert np.allclose(B[:2, :2], weyl.n1(g.leads[0], SpectralPoint(0.8, True)))
    assert np.allclose(B[2:, 2:], weyl.n1(g.leads[1], SpectralPoint(0.8, True)))
    assert np.allclose(B[:2, 2:], 0)


@pytest.mark.parametrize("p1", [1, 2, 3, 5])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_free_star(p1, lam):
    S = sc.scattering_matrix(free_star(p1), lam).S
    assert np.abs(S - (np.eye(p1) - 2 / p1 * ones_block(p1))).max() <= 1e-12


def test_free_two_leads_swap():
    assert np.allclose(sc.scattering_matrix(free_star(2), 3.3).S, [[0, -1], [-1, 0]])


def test_one_lead_examples():
    z = EdgePotential.zero(1)
    assert np.isclose(sc.scattering_one_lead(z, 0.0, 1.0)[0, 0], -1)
    S = sc.scattering_one_lead(EdgePotential.zero(2), 1e6 * np.eye(2), 2.0)
    assert np.abs(S - np.eye(2)).max() <= 1e-4


@given(st.integers(0, 100_000), st.floats(0.1, 10))
def test_one_lead_matches_general(seed, lam):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 3))
    q = random_bumps(rng, m, 3.0, sign="any")
    a0 = random_hermitian(rng, m, 2.0)
    g = build_star(m, [q], coupling=[a0])
    S1 = sc.scattering_one_lead(q, a0, lam)
    S = sc.scattering_matrix(g, lam).S
    assert np.abs(S - S1).max() <= 1e-9


def test_scalar_equal_examples():
    z = EdgePotential.zero(1)
    assert np.allclose(sc.scattering_scalar_equal(2, z, 1.0), [[0, -1], [-1, 0]])
    assert np.allclose(sc.scattering_scalar_equal(3, z, 1.0), np.eye(3) - 2 / 3 * ones_block(3))


@given(st.integers(0, 100_000), st.integers(1, 4), st.floats(0.1, 10))
def test_scalar_equal_matches_general(seed, p1, lam):
    rng = np.random.default_rng(seed)
    q = random_bumps(rng, 1, 3.0, sign="any")
    g = build_star(1, [q] * p1)
    assert np.abs(sc.scattering_matrix(g, lam).S - sc.scattering_scalar_equal(p1, q, lam)).max() <= 1e-8


@settings(max_examples=15)
@given(st.integers(0, 100_000), st.sampled_from(sc.K_SUMS))
def test_unitarity_and_rank(seed, k_sum):
    rng = np.random.default_rng(seed)
    m, p1, p2 = int(rng.integers(1, 3)), int(rng.integers(1, 4)), int(rng.integers(0, 2))
    g = bump_star(rng, m, p1, p2)
    lam = float(rng.uniform(0.1, 10))
    try:
        r = sc.scattering_matrix(g, lam, k_sum)
    except PoleHit:
        return
    assert r.unitarity_defect <= 1e-7
    D = r.S - np.eye(m * p1)
    s = np.linalg.svd(D, compute_uv=False)
    assert np.sum(s > 1e-8 * max(s[0], 1e-300)) <= m
    assert np.abs(r.S - sc.scattering_kron(g, lam, k_sum)).max() <= 1e-9


def test_pole_hit():
    g = free_star(1, 1)
    with pytest.raises(PoleHit):
        sc.scattering_matrix(g, (np.pi / 2) ** 2)
    sc.scattering_matrix(g, (np.pi / 2) ** 2, "leads-only")


def test_result_serialises():
    d = sc.scattering_matrix(free_star(2), 1.0).to_dict()
    assert np.allclose(d["S"][0][1], [-1.0, 0.0], atol=1e-15)
    assert set(d) == {"lambda", "S", "unitarity_defect", "K"}


# -- perturbation determinants -----------------------------------------------------

def test_pdet_examples():
    g = free_star(1)
    assert np.isclose(sc.perturbation_determinant(g, -1.0, -4.0), 2.0)
    for method in ("schur", "full"):
        assert np.isclose(sc.perturbation_determinant(g, -1.0, -4.0, method), 2.0)
    rng = np.random.default_rng(8)
    h = random_star(rng, m=2, p1=2, p2=1)
    assert np.isclose(sc.perturbation_determinant(h, 0.3 - 1j, 0.3 - 1j), 1.0)


def test_pdet_singular_zeta():
    # alpha(0) - i sqrt(zeta) = 0 at zeta = -1 for alpha = -1
    g = build_star(1, [None], coupling=[-1.0])
    with pytest.raises(SingularAtZeta):
        sc.perturbation_determinant(g, -1.0, -4.0)


def lower_point(rng):
    return complex(rng.uniform(-5, 5), -rng.uniform(0.1, 3))


@settings(max_examples=10)
@given(st.integers(0, 100_000))
def test_pdet_cocycle_and_routes(seed):
    rng = np.random.default_rng(seed)
    g = random_star(rng)
    a, b, c = (lower_point(rng) for _ in range(3))
    d = lambda x, y, meth="schur": sc.perturbation_determinant(g, x, y, meth)
    assert abs(d(a, b) * d(b, a) - 1) <= 1e-8
    assert abs(d(a, c) - d(a, b) * d(b, c)) <= 1e-8 * max(1, abs(d(a, c)))
    assert abs(d(a, b) - d(a, b, "full")) <= 1e-8 * max(1, abs(d(a, b)))


def test_lambda_matrix_layout():
    g = build_star(1, [None], [(1.0, None)], [2.0, 0.0])
    L = sc.lambda_matrix(g, -1.0)
    # lead: i sqrt(-1) = -1; edge: sqrt z tan(sqrt z) = -tanh(1)
    assert np.allclose(L, [[3, np.tanh(1)], [1, -1]])
    M_lead, M_edge = sc.direct_sum_dn(g, -1.0)
    assert np.allclose(L[0], [2 - M_lead[0, 0], -M_edge[0, 0]])
    assert np.allclose(L[1], [1, -1])
