"""Small dense helpers shared by the spectral modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import NotHermitian

HERMITIAN_RTOL = 1e-12


def as_matrix(a, m: int | None = None) -> np.ndarray:
    """Coerce scalars / nested lists to a complex 2-D array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
        if m is not None and m != 1:
            arr = arr[0, 0] * np.eye(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermitian_defect(a) <= rtol * float(np.linalg.norm(a))


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def inertia_eig(h: np.ndarray, eps: float = 1e-9) -> tuple[int, int, int]:
    """(negative, near-zero, positive) eigenvalue counts, threshold eps*max(1, ||h||)."""
    ev = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    tol = eps * scale
    neg = int(np.sum(ev < -tol))
    zero = int(np.sum(np.abs(ev) <= tol))
    return neg, zero, len(ev) - neg - zero


def inertia_ldl(h: np.ndarray, eps: float = 1e-9) -> tuple[int, int, int]:
    """Inertia from a Bunch-Kaufman factorization h = L D L^*.

    D is block diagonal with 1x1 and 2x2 blocks; Sylvester's law makes its
    inertia that of h.
    """
    h = np.asarray(h)
    _, d, _ = sla.ldl(h, hermitian=True)
    ev = np.linalg.eigvalsh((d + d.conj().T) / 2)
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    tol = eps * scale
    neg = int(np.sum(ev < -tol))
    zero = int(np.sum(np.abs(ev) <= tol))
    return neg, zero, len(ev) - neg - zero


def check_hermitian(h: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitian(f"not a square matrix: shape {h.shape}")
    if hermitian_defect(h) > rtol * max(float(np.linalg.norm(h)), 1e-300):
        raise NotHermitian(f"||H - H*|| = {hermitian_defect(h):.3e}")
    return (h + h.conj().T) / 2


def ones_block(p: int) -> np.ndarray:
    """All-ones p x p matrix."""
    return np.ones((p, p))


def scaled_condition(factor: np.ndarray, *companions: np.ndarray) -> float:
    """||F^{-1}|| times the largest norm among F and its companion blocks.

    Plain cond(F) is blind for 1x1 factors; measuring F^{-1} against the size
    of the whole solution data detects near-singularity in every dimension.
    """
    try:
        inv_norm = float(np.linalg.norm(np.linalg.inv(factor), 2))
    except np.linalg.LinAlgError:
        return np.inf
    scale = max([float(np.linalg.norm(factor, 2))] + [float(np.linalg.norm(c, 2)) for c in companions])
    return inv_norm * scale
