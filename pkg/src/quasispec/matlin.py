"""Dense complex linear algebra for the eigenphase-filter pipeline.

Hermitian matrix validation, GUE and unit-vector sampling, the unitary
exponential exp(2*pi*i*A) via truncated Taylor series with scaling and
squaring, integer matrix powers by repeated squaring, and the affine
spectrum rescaling used to bring arbitrary Hermitian input into [0.05, 0.85].

Everything is plain numpy: matrices are (n, n) complex128 arrays, vectors
are (n,) complex128 arrays.  All sampling is driven by an explicit
:class:`RngSeed` so identical seeds reproduce identical values bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngSeed",
    "SpectrumTransform",
    "check_hermitian",
    "gue_sample",
    "sample_unit_vector",
    "unitary_exp",
    "mat_power",
    "op_norm_upper",
    "rescale_to_range",
    "canonical_phase",
    "phase_dist",
]

# Entry-wise Hermitian symmetry tolerance, relative to the largest entry.
HERMITIAN_TOL = 1e-12

# A unit-vector draw below this norm is resampled (probability ~ 0).
_RESAMPLE_NORM = 1e-30


@dataclass(frozen=True)
class RngSeed:
    """Master/stream pair identifying one reproducible random stream.

    Identical (master, stream) pairs yield identical sample sequences
    across runs and platforms (PCG64 seeded through SeedSequence).
    """

    master: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.master & (2**64 - 1), self.stream & (2**64 - 1)])

    def with_stream(self, stream: int) -> "RngSeed":
        return RngSeed(self.master, stream)


@dataclass(frozen=True)
class SpectrumTransform:
    """Affine eigenvalue map lam' = scale * lam + shift with scale > 0.

    Eigenvectors are unchanged; `invert` recovers original eigenvalues.
    """

    scale: float
    shift: float

    def apply(self, lam):
        return self.scale * np.asarray(lam) + self.shift

    def invert(self, lam):
        return (np.asarray(lam) - self.shift) / self.scale


def check_hermitian(A: np.ndarray, name: str = "A") -> np.ndarray:
    """Validate a square Hermitian complex matrix and return it as complex128.

    Raises ValueError when the matrix is non-square, non-finite, or violates
    |A[i,j] - conj(A[j,i])| <= 1e-12 * (1 + max|entry|).
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if A.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(A.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    scale = 1.0 + (np.abs(A).max() if A.size else 0.0)
    sym_err = np.abs(A - A.conj().T).max()
    if sym_err > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} is not Hermitian: max asymmetry {sym_err:.3e}")
    diag_imag = np.abs(A.diagonal().imag).max()
    if diag_imag > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} has non-real diagonal: max imag {diag_imag:.3e}")
    return A


def gue_sample(n: int, seed: RngSeed) -> np.ndarray:
    """Sample one GUE matrix: real N(0,1) diagonal, off-diagonal complex
    entries with independent real/imaginary parts of variance 1/2 each
    (so E|E_ij|^2 = 1).  Hermitian by construction, not by symmetrization.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return gue_from_generator(n, seed.generator())


def gue_from_generator(n: int, rng: np.random.Generator) -> np.ndarray:
    """GUE draw from an already-derived generator (for callers managing
    their own sub-streams)."""
    diag = rng.standard_normal(n)
    A = np.zeros((n, n), dtype=np.complex128)
    if n > 1:
        iu, ju = np.triu_indices(n, 1)
        re = rng.standard_normal(iu.size)
        im = rng.standard_normal(iu.size)
        A[iu, ju] = (re + 1j * im) * math.sqrt(0.5)
        A = A + A.conj().T
    A[np.diag_indices(n)] = diag
    return A


def sample_unit_vector(n: int, seed: RngSeed) -> np.ndarray:
    """Sample a Haar-uniform complex unit vector (normalized standard
    complex Gaussian).  Resamples on the measure-zero event of a draw with
    norm below 1e-30.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rng = seed.generator()
    while True:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nrm = np.linalg.norm(v)
        if nrm >= _RESAMPLE_NORM:
            return v / nrm


# Fixed scaling depth: with spectrum in [0, 0.9] the scaled argument norm
# 2*pi*0.9/8 < 1 keeps the 2^-s Taylor tail bound valid.
_SCALING_SQUARINGS = 3


def unitary_exp(A: np.ndarray, eps: float) -> np.ndarray:
    """Truncated-Taylor approximation of exp(2*pi*i*A) with scaling and squaring.

    The caller must supply A with spectrum in [0, 0.9] (see
    :func:`rescale_to_range`).  A is scaled by 2*pi/2^3, expanded to
    s = ceil(log2(1/eps)) + 4 Taylor terms, and squared three times; the
    result U satisfies ||exp(2*pi*i*A) - U|| <= eps.
    """
    A = check_hermitian(A)
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n = A.shape[0]
    s = math.ceil(math.log2(1.0 / eps)) + 4
    G = (2.0j * math.pi / 2**_SCALING_SQUARINGS) * A
    U = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, s):
            term = term @ G / k
            U += term
        for _ in range(_SCALING_SQUARINGS):
            U = U @ U
        # unitarity check on construction; trips (also via NaN/inf) when the
        # caller's spectrum is out of range and the truncated series diverges
        unit_err = float(np.linalg.norm(U.conj().T @ U - np.eye(n)))
    if not (unit_err <= max(4.0 * eps * math.sqrt(n), n * 1e-10)):
        raise ValueError(
            f"exponential lost unitarity (||U^H U - I||_F = {unit_err:.3e}); "
            f"is the spectrum outside [0, 0.9]?"
        )
    return U


def mat_power(U: np.ndarray, m: int) -> np.ndarray:
    """Integer power of a square matrix by binary (repeated-squaring)
    exponentiation; m = 0 gives the identity.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("matrix must be square")
    m = int(m)
    if m < 0:
        raise ValueError("exponent must be non-negative")
    n = U.shape[0]
    out = np.eye(n, dtype=np.complex128)
    base = U
    while m > 0:
        if m & 1:
            out = out @ base
        m >>= 1
        if m:
            base = base @ base
    return out


def op_norm_upper(A: np.ndarray) -> float:
    """Gershgorin-style upper bound on the operator norm: the maximum
    absolute row sum.  Always >= ||A|| for Hermitian A.
    """
    A = check_hermitian(A)
    return float(np.abs(A).sum(axis=1).max())


def rescale_to_range(A: np.ndarray) -> tuple[np.ndarray, SpectrumTransform]:
    """Affinely map a Hermitian matrix so its spectrum lands in [0.05, 0.85].

    Returns (A', transform) with A' = (A + r*I) * (0.8 / (2r)) + 0.05*I for
    r = op_norm_upper(A) (r = 1 for the zero matrix), and transform such
    that transform.apply(lam) gives the eigenvalues of A'.  Eigenvectors
    are unchanged.
    """
    A = check_hermitian(A)
    n = A.shape[0]
    r = op_norm_upper(A)
    if r == 0.0:
        r = 1.0
    scale = 0.4 / r
    out = A * scale
    out[np.diag_indices(n)] += 0.45
    # keep the diagonal exactly real after the shift
    out[np.diag_indices(n)] = out.diagonal().real
    return out, SpectrumTransform(scale=scale, shift=0.45)


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector by a global phase so its largest-magnitude coordinate
    (lowest index on ties) is real and positive.
    """
    v = np.asarray(v, dtype=np.complex128)
    i0 = int(np.argmax(np.abs(v)))
    a = v[i0]
    if a == 0:
        return v.copy()
    return v * (np.conj(a) / abs(a))


def phase_dist(w: np.ndarray, v: np.ndarray) -> float:
    """min over unit phases eta of ||w - eta*v||, for unit vectors.

    Evaluated as the norm of the optimally phase-aligned difference, which
    stays accurate even when the vectors agree to machine precision.
    """
    ip = np.vdot(v, w)
    eta = ip / abs(ip) if ip != 0 else 1.0
    return float(np.linalg.norm(np.asarray(w) - eta * np.asarray(v)))
