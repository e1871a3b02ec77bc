"""Random test instances: Hermitian matrices, bump potentials and star graphs."""

from __future__ import annotations

import numpy as np

from .graph import MetricGraph, build_star
from .potential import EdgePotential


def random_hermitian(rng: np.random.Generator, m: int, scale: float = 1.0, real: bool = False) -> np.ndarray:
    """Hermitian matrix with entries (real and imaginary parts) uniform in [-scale, scale]."""
    a = rng.uniform(-scale, scale, (m, m))
    if not real:
        a = a + 1j * rng.uniform(-scale, scale, (m, m))
    return _herm(a)


def _herm(a: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle; keep the real part of the diagonal."""
    h = np.triu(a, 1)
    return h + h.conj().T + np.diag(np.diag(a).real)


def random_psd(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    a = b @ b.conj().T
    return scale * a / np.linalg.norm(a, 2)


def random_bumps(rng: np.random.Generator, m: int, support: float, n: int | None = None,
                 sign: str = "psd", amp: float = 2.0) -> EdgePotential:
    """Gaussian bumps inside [0, support]; sign 'psd' (Q >= 0) or 'any' (Hermitian)."""
    n = int(rng.integers(1, 3)) if n is None else n
    widths = rng.uniform(0.04, 0.12, n) * max(support, 0.5)
    widths = np.minimum(widths, support / 30)
    centers = rng.uniform(0.0, 1.0, n) * (support - 24 * widths) + 12 * widths
    if sign == "psd":
        amps = [random_psd(rng, m, amp * rng.uniform(0.3, 1.0)) for _ in range(n)]
    else:
        amps = [random_hermitian(rng, m, amp) for _ in range(n)]
    return EdgePotential.gaussian_bumps(centers, widths, amps)


def random_star(rng: np.random.Generator, m: int | None = None, p1: int | None = None, p2: int | None = None,
                potentials: str = "mixed", alpha_scale: float = 3.0, lengths=(0.2, 3.0),
                lead_support: float = 3.0) -> MetricGraph:
    """Random star: Hermitian alpha with entries in [-alpha_scale, alpha_scale],
    lengths uniform in ``lengths``, potentials zero or PSD bumps ('zero', 'psd', 'mixed')."""
    m = int(rng.integers(1, 3)) if m is None else m
    p1 = int(rng.integers(1, 4)) if p1 is None else p1
    p2 = int(rng.integers(0, 3)) if p2 is None else p2

    def pot(support):
        use = potentials == "psd" or (potentials == "mixed" and rng.random() < 0.5)
        return random_bumps(rng, m, support) if use else EdgePotential.zero(m)

    leads = [pot(lead_support) for _ in range(p1)]
    fins = []
    for _ in range(p2):
        length = float(rng.uniform(*lengths))
        fins.append((length, pot(length)))
    coupling = [random_hermitian(rng, m, alpha_scale) for _ in range(p2 + 1)]
    return build_star(m, leads, fins, coupling)
