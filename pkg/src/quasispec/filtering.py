"""The eigenvector-extraction filter.

Given a Hermitian matrix A with spectrum in [0, 0.9], a multiplier m and a
target accuracy delta, the filter builds B = ((I + U^m) / 2)^p for
U ~ exp(2*pi*i*A), pushes a random unit vector through B, and accepts the
normalized result when its Rayleigh-quotient residual is at most
3 * delta * sqrt(n).  When m isolates one eigenphase near 0 mod 1 while
all others stay away, B attenuates every other eigencomponent and the
surviving vector approximates the matching eigenvector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .matlin import RngSeed, canonical_phase, check_hermitian, mat_power, sample_unit_vector, unitary_exp
from .quasirandom import Bands, nominal_bands, proof_bands

__all__ = [
    "FilterParams",
    "EigenEstimate",
    "DecideResult",
    "compute_filter_params",
    "build_filter_matrix",
    "filter_run",
    "decide",
    "accept_threshold",
]

# A filtered vector with norm below this is treated as fully attenuated;
# far below the guaranteed survivor mass for any separating multiplier.
SURVIVOR_FLOOR = 1e-280


@dataclass(frozen=True)
class FilterParams:
    """Derived parameters of one filter instance.

    p = 24 n^2 ceil(ln(1/delta)), zeta = delta^2 / (2 p m),
    alpha = sqrt(ln(1/delta)); bands hold the circular acceptance widths
    used by the separating-integer analysis.
    """

    n: int
    m: int
    delta: float
    p: int
    zeta: float
    alpha: float
    bands: Bands


class DecideResult(NamedTuple):
    accept: bool
    lambda_hat: float
    residual: float


@dataclass(frozen=True)
class EigenEstimate:
    """An accepted filter output: unit vector, eigenvalue estimate and its
    recomputable residual, plus provenance (copy id and multiplier)."""

    w: np.ndarray
    lambda_hat: float
    residual: float
    copy_id: int = 0
    m_used: int = 0


def accept_threshold(n: int, delta: float) -> float:
    return 3.0 * delta * math.sqrt(n)


def compute_filter_params(
    n: int,
    m: int,
    delta: float,
    bands: Optional[Bands] = None,
    band_mode: str = "proof",
) -> FilterParams:
    """Evaluate the filter parameter formulas for dimension n, multiplier m
    and accuracy delta (0 < delta < 1/e so ln(1/delta) > 1).

    Default bands use the phase half-widths 1/(2 n alpha) and 1/(2 n)
    expressed as fractions of the circle; band_mode="nominal" selects the
    wider 1/(alpha n), 1/(4 n) variant (needs alpha > 4).
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if m < 1:
        raise ValueError("multiplier m must be >= 1")
    if not (0.0 < delta < 1.0 / math.e):
        raise ValueError(f"delta must lie in (0, 1/e), got {delta}")
    p = 24 * n * n * math.ceil(math.log(1.0 / delta))
    zeta = delta * delta / (2.0 * p * m)
    alpha = math.sqrt(math.log(1.0 / delta))
    if bands is None:
        if band_mode == "proof":
            bands = proof_bands(n, alpha)
        elif band_mode == "nominal":
            bands = nominal_bands(n, alpha)
        else:
            raise ValueError(f"unknown band_mode {band_mode!r}")
    return FilterParams(n=n, m=int(m), delta=delta, p=p, zeta=zeta, alpha=alpha, bands=bands)


def build_filter_matrix(A: np.ndarray, params: FilterParams) -> np.ndarray:
    """B = ((I + U^m) / 2)^p with U = unitary_exp(A, zeta), all powers by
    repeated squaring.  B shares eigenvectors with A up to the zeta
    exponential error and has norm at most 1 + 2 p m zeta."""
    A = check_hermitian(A)
    if A.shape[0] != params.n:
        raise ValueError("params.n does not match the matrix dimension")
    U = unitary_exp(A, params.zeta)
    Um = mat_power(U, params.m)
    C = (np.eye(params.n, dtype=np.complex128) + Um) / 2.0
    return mat_power(C, params.p)


def decide(A: np.ndarray, w: np.ndarray, delta: float) -> DecideResult:
    """Rayleigh-quotient acceptance test for a candidate unit vector.

    lambda_hat is the real part of z_{i0}/w_{i0} at the largest-magnitude
    coordinate i0 (lowest index on ties); the vector is accepted when both
    ||A w - lambda_hat w|| and the quotient's imaginary part are at most
    3 * delta * sqrt(n).
    """
    A = check_hermitian(A)
    w = np.asarray(w, dtype=np.complex128)
    n = A.shape[0]
    z = A @ w
    i0 = int(np.argmax(np.abs(w)))
    c = z[i0] / w[i0]
    lam = float(c.real)
    residual = float(np.linalg.norm(z - lam * w))
    thr = accept_threshold(n, delta)
    accept = residual <= thr and abs(c.imag) <= thr
    return DecideResult(accept=accept, lambda_hat=lam, residual=residual)


def filter_run(
    A: np.ndarray,
    m: int,
    delta: float,
    seed: RngSeed,
    params: Optional[FilterParams] = None,
    copy_id: int = 0,
) -> Optional[EigenEstimate]:
    """One full filter pass: sample w0, apply B, accept or reject.

    Returns an :class:`EigenEstimate` (vector phase-canonicalized) on
    acceptance, None on rejection.  Rejection is the normal outcome for a
    non-separating multiplier; a filtered norm below 1e-280 also rejects.
    """
    A = check_hermitian(A)
    n = A.shape[0]
    if params is None:
        params = compute_filter_params(n, m, delta)
    elif params.m != m or params.n != n:
        raise ValueError("params do not match (n, m)")
    w0 = sample_unit_vector(n, seed)
    if n == 1:
        # B is scalar: filtering never changes a 1-dimensional direction,
        # and every unit scalar is an exact eigenvector
        w = w0
    else:
        B = build_filter_matrix(A, params)
        bw = B @ w0
        nrm = float(np.linalg.norm(bw))
        if nrm < SURVIVOR_FLOOR:
            return None
        w = bw / nrm
    res = decide(A, w, delta)
    if not res.accept:
        return None
    return EigenEstimate(
        w=canonical_phase(w),
        lambda_hat=res.lambda_hat,
        residual=res.residual,
        copy_id=copy_id,
        m_used=int(m),
    )
