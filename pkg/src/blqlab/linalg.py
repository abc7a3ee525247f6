"""Small dense linear-algebra helpers used by the solvers."""

from __future__ import annotations

import numpy as np


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return the symmetric part (m + m.T) / 2."""
    return 0.5 * (m + m.T)


def asymmetry(m: np.ndarray) -> float:
    """Frobenius norm of the antisymmetric part."""
    return float(np.linalg.norm(m - m.T))


def min_eig_sym(m: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix (symmetrized first)."""
    return float(np.linalg.eigvalsh(symmetrize(m))[0])


def max_eig_sym(m: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix (symmetrized first)."""
    return float(np.linalg.eigvalsh(symmetrize(m))[-1])


def spectral_abscissa(a: np.ndarray) -> float:
    """max Re(lambda) over the spectrum of a general square matrix."""
    return float(np.max(np.real(np.linalg.eigvals(a))))


def solve_msd_lyapunov(acal: np.ndarray, ccal: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve P*Acal + Acal.T*P + Ccal.T*P*Ccal = rhs for symmetric P.

    The equation is vectorized into an n^2 x n^2 linear system via
    vec(P*A) = (A.T kron I) vec(P), vec(A.T*P) = (I kron A.T) vec(P) and
    vec(C.T*P*C) = (C.T kron C.T) vec(P).  Raises numpy.linalg.LinAlgError
    when the system is singular.
    """
    n = acal.shape[0]
    eye = np.eye(n)
    lhs = np.kron(acal.T, eye) + np.kron(eye, acal.T) + np.kron(ccal.T, ccal.T)
    p = np.linalg.solve(lhs, rhs.reshape(-1, order="F"))
    return symmetrize(p.reshape((n, n), order="F"))


def numerical_rank(m: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Rank by singular values with a threshold relative to the largest one."""
    svals = np.linalg.svd(m, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rel_tol * svals[0]))


def random_spd(rng: np.random.Generator, n: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """Random symmetric positive definite matrix with spectrum in [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(lo, hi, size=n)
    return symmetrize(q @ np.diag(eigs) @ q.T)
