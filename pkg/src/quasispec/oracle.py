"""Reference dense Hermitian eigensolver: cyclic complex Jacobi rotations.

This module is the ground truth against which the filter pipeline is
verified, so it deliberately shares no machinery with the code under test.
Convergence is explicit: sweeps stop when the off-diagonal Frobenius mass
drops below 1e-13 * ||A||_F, and failure to converge within 60 sweeps
raises instead of returning a silently bad decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .matlin import canonical_phase, check_hermitian

__all__ = [
    "EigenDecomposition",
    "JacobiConvergenceError",
    "jacobi_eigh",
    "spectral_norm",
    "is_delta_separated",
]

# Desk-scale cap; spectral_norm dilations double the size, hence 1024.
_MAX_DIM = 1024

_OFF_TOL = 1e-13
_MAX_SWEEPS = 60


class JacobiConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration fails to reach the off-diagonal
    tolerance within the sweep cap."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with matching orthonormal columns."""

    values: np.ndarray   # (n,) float64, descending
    vectors: np.ndarray  # (n, n) complex128, column i pairs with values[i]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


@njit(cache=True)
def _jacobi_sweeps(A, V, tol, max_sweeps):  # pragma: no cover - jitted
    n = A.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += (A[i, j].real ** 2 + A[i, j].imag ** 2)
        if (2.0 * off) ** 0.5 <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                aapq = abs(apq)
                if aapq == 0.0:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                alpha = apq / aapq
                tau = (aqq - app) / (2.0 * aapq)
                if tau >= 0.0:
                    t = 1.0 / (tau + (1.0 + tau * tau) ** 0.5)
                else:
                    t = -1.0 / (-tau + (1.0 + tau * tau) ** 0.5)
                c = 1.0 / (1.0 + t * t) ** 0.5
                s = t * c
                sa = s * alpha
                sac = s * np.conj(alpha)
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - sac * aiq
                    A[i, q] = sa * aip + c * aiq
                for i in range(n):
                    api = A[p, i]
                    aqi = A[q, i]
                    A[p, i] = c * api - sa * aqi
                    A[q, i] = sac * api + c * aqi
                for i in range(n):
                    vip = V[i, p]
                    viq = V[i, q]
                    V[i, p] = c * vip - sac * viq
                    V[i, q] = sa * vip + c * viq
    return max_sweeps


def jacobi_eigh(A: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix by cyclic-by-row complex
    Jacobi rotations.

    Returns eigenvalues sorted descending with phase-canonicalized
    eigenvectors (largest coordinate real positive).  Raises
    :class:`JacobiConvergenceError` after 60 sweeps without convergence.
    """
    A = check_hermitian(A)
    n = A.shape[0]
    if n > _MAX_DIM:
        raise ValueError(f"jacobi_eigh supports n <= {_MAX_DIM}, got {n}")
    if n == 1:
        return EigenDecomposition(
            values=np.array([A[0, 0].real]),
            vectors=np.ones((1, 1), dtype=np.complex128),
        )
    work = A.copy()
    V = np.eye(n, dtype=np.complex128)
    fro = float(np.linalg.norm(A))
    tol = _OFF_TOL * fro
    sweeps = _jacobi_sweeps(work, V, tol, _MAX_SWEEPS)
    off = _offdiag_norm(work)
    if off > tol and sweeps >= _MAX_SWEEPS:
        raise JacobiConvergenceError(
            f"off-diagonal mass {off:.3e} above tolerance {tol:.3e} "
            f"after {_MAX_SWEEPS} sweeps (n={n})"
        )
    lam = work.diagonal().real.copy()
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    V = V[:, order]
    for i in range(n):
        V[:, i] = canonical_phase(V[:, i])
    return EigenDecomposition(values=lam, vectors=V)


def _offdiag_norm(A: np.ndarray) -> float:
    """Frobenius mass of the off-diagonal part."""
    off = A - np.diag(A.diagonal())
    return float(np.linalg.norm(off))


def spectral_norm(X: np.ndarray) -> float:
    """Operator (spectral) norm: largest singular value.

    Hermitian inputs diagonalize directly; general matrices go through the
    Hermitian dilation [[0, X], [X^H, 0]], whose largest eigenvalue is the
    largest singular value of X.
    """
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 2:
        raise ValueError("spectral_norm expects a matrix")
    r, c = X.shape
    if max(r, c) > _MAX_DIM // 2:
        raise ValueError(f"spectral_norm supports dimensions <= {_MAX_DIM // 2}")
    if r == c:
        scale = 1.0 + np.abs(X).max() if X.size else 1.0
        if np.abs(X - X.conj().T).max() <= 1e-12 * scale:
            H = (X + X.conj().T) / 2.0
            dec = jacobi_eigh(H)
            return float(np.abs(dec.values).max())
    D = np.zeros((r + c, r + c), dtype=np.complex128)
    D[:r, r:] = X
    D[r:, :r] = X.conj().T
    dec = jacobi_eigh(D)
    return float(dec.values[0]) if dec.values[0] > 0 else 0.0


def is_delta_separated(A: np.ndarray, delta: float) -> bool:
    """True iff consecutive oracle eigenvalues differ by at least delta and
    the top eigenvalue is at most 1 - delta."""
    dec = jacobi_eigh(A)
    lam = dec.values
    if lam[0] > 1.0 - delta:
        return False
    if lam.shape[0] == 1:
        return True
    return bool(np.min(lam[:-1] - lam[1:]) >= delta)
