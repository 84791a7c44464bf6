"""End-to-end approximate spectral decomposition (ASD).

Pipeline: derive run parameters from (n, delta), perturb the rescaled
input with a small GUE matrix so its eigenphase residuals behave
quasi-randomly, run T independent filter copies with multipliers drawn
uniformly from {1..M}, bin the accepted eigenvalue estimates, and check
the resulting database against the decomposition contract
(per-vector residual <= delta, reconstruction within delta * ||A||).

The run is Las-Vegas: when fewer than n bins survive the result is marked
incomplete and carries the partial database plus per-copy statistics;
retrying with a fresh master seed is the caller's decision.

Copies are executed in vectorized batches: the unitary exponential of the
perturbed matrix is computed once at the tightest per-copy tolerance
(every copy's accuracy requirement is met or exceeded) and each copy then
raises it to its own multiplier via shared powers-of-two factors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import oracle
from .filtering import SURVIVOR_FLOOR, EigenEstimate, accept_threshold, compute_filter_params
from .matlin import (
    RngSeed,
    SpectrumTransform,
    canonical_phase,
    check_hermitian,
    gue_from_generator,
    gue_sample,
    unitary_exp,
)
from .quasirandom import Bands, proof_bands

__all__ = [
    "AsdParams",
    "AsdDatabase",
    "AsdRunResult",
    "CopyStats",
    "VerifyResult",
    "compute_asd_params",
    "perturb",
    "asd_run",
    "bin_eigenvalues",
    "verify_asd",
    "min_gap",
]

# The accuracy cascade (min(delta, B))^13 / 4 underflows any practical
# double-precision budget; the filter runs at this floor instead, with the
# unclamped value kept for reporting.
DELTA_PRIME_FLOOR = 1e-12

_THEORETICAL_M_CAP = 10**8

# Sub-stream tags hashed together with the caller's (master, stream) pair.
_TAG_PERTURB = 1
_TAG_MDRAW = 2
_TAG_COPY = 3


def _sub_rng(seed: RngSeed, *ids: int) -> np.random.Generator:
    return np.random.default_rng([seed.master & (2**64 - 1), seed.stream & (2**64 - 1), *ids])


@dataclass(frozen=True)
class AsdParams:
    """Derived parameters of one ASD run.

    delta_prime is the exact cascade value (min(delta, B))^13 / 4;
    delta_prime_eff = max(delta_prime, 1e-12) is what the filter copies
    actually run at.  alpha, T and the bands derive from the effective
    value.  mode "empirical" uses M = n^5; "theoretical" evaluates the
    ceil(min(delta_prime, n^-50)^-1.6) sequence length and refuses runs
    beyond 10^8.
    """

    n: int
    delta: float
    B: float
    delta_prime: float
    delta_prime_eff: float
    alpha: float
    M: int
    T: int
    sigma: float
    mode: str
    bands: Bands
    t_overridden: bool = False
    m_overridden: bool = False

    @property
    def clamped(self) -> bool:
        return self.delta_prime_eff > self.delta_prime

    @property
    def bin_width(self) -> float:
        return self.B / 4.0


class VerifyResult(NamedTuple):
    ok: bool
    residual_max: float
    reconstruction_error: float


class CopyStats(NamedTuple):
    copies: int
    accepted: int
    rejected: int
    m_hist_log2: tuple  # count of drawn multipliers per bit-length bucket

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.copies if self.copies else 0.0


@dataclass(frozen=True)
class AsdDatabase:
    """Deduplicated eigenvalue estimates: pairwise lambda separation is
    enforced by the binning scan; transform maps stored eigenvalues back
    to the caller's original spectrum."""

    entries: tuple
    bin_width: float
    transform: SpectrumTransform = SpectrumTransform(1.0, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def lambdas(self) -> np.ndarray:
        return np.array([e.lambda_hat for e in self.entries])

    def lambdas_original(self) -> np.ndarray:
        return self.transform.invert(self.lambdas())

    def vectors(self) -> np.ndarray:
        return np.column_stack([e.w for e in self.entries]) if self.entries else np.zeros((0, 0))


@dataclass(frozen=True)
class AsdRunResult:
    """Outcome of one ASD run; `complete` False marks a retryable
    Las-Vegas failure carrying the partial database."""

    database: AsdDatabase
    complete: bool
    stats: CopyStats
    params: AsdParams
    verify: Optional[VerifyResult]
    perturbed: np.ndarray  # the matrix the copies actually filtered


def compute_asd_params(
    n: int,
    delta: float,
    B_config: Optional[float] = None,
    mode: str = "empirical",
    copies: Optional[int] = None,
    M_override: Optional[int] = None,
) -> AsdParams:
    """Evaluate the run-parameter formulas for dimension n and accuracy
    delta (0 < delta <= 1/n).

    B defaults to delta when no separation estimate is supplied (the
    minimal-gap quantity it stands for has no constructive formula; see
    the min-gap calibration command).  `copies` and `M_override` replace
    the derived T and M and are flagged in the result.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if not (0.0 < delta <= 1.0 / n):
        raise ValueError(f"delta must lie in (0, 1/n], got {delta} at n={n}")
    if mode not in ("empirical", "theoretical"):
        raise ValueError(f"mode must be 'empirical' or 'theoretical', got {mode!r}")
    B = delta if B_config is None else min(delta, float(B_config))
    if B <= 0.0:
        raise ValueError("B must be positive")
    base = min(delta, B)
    delta_prime = base**13 / 4.0
    delta_prime_eff = max(delta_prime, DELTA_PRIME_FLOOR)
    alpha = math.sqrt(math.log(1.0 / delta_prime_eff))
    if M_override is not None:
        if M_override < 1:
            raise ValueError("M override must be >= 1")
        M = int(M_override)
    elif mode == "empirical":
        M = n**5
    else:
        # evaluate ceil(min(delta_prime, n^-50)^-1.6) in log space
        log_zeta = min(13.0 * math.log(base) - math.log(4.0), -50.0 * math.log(n))
        log_m = -1.6 * log_zeta
        if log_m > math.log(_THEORETICAL_M_CAP):
            raise ValueError(
                f"theoretical-mode sequence length exp({log_m:.1f}) exceeds the "
                f"{_THEORETICAL_M_CAP:.0e} cap; use empirical mode"
            )
        M = int(math.ceil(math.exp(log_m)))
    if copies is not None:
        if copies < 1:
            raise ValueError("copies override must be >= 1")
        T = int(copies)
    else:
        T = max(1, math.ceil(60.0 * n * alpha * math.log2(n))) if n > 1 else 1
    sigma = math.sqrt(delta_prime**2 + delta**2 / (9.0 * n))
    return AsdParams(
        n=n,
        delta=delta,
        B=B,
        delta_prime=delta_prime,
        delta_prime_eff=delta_prime_eff,
        alpha=alpha,
        M=M,
        T=T,
        sigma=sigma,
        mode=mode,
        bands=proof_bands(n, alpha),
        t_overridden=copies is not None,
        m_overridden=M_override is not None,
    )


def perturb(A: np.ndarray, sigma: float, seed: RngSeed) -> np.ndarray:
    """A + sigma * GUE draw; Hermitian by construction."""
    A = check_hermitian(A)
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return A.copy()
    return A + sigma * gue_sample(A.shape[0], seed)


def _shared_power_factors(U: np.ndarray, max_exp: int) -> list:
    """U^(2^j) for j = 0..bit_length(max_exp)-1."""
    factors = [U]
    for _ in range(1, int(max_exp).bit_length()):
        factors.append(factors[-1] @ factors[-1])
    return factors


def _batched_power_from_factors(factors: list, ms: np.ndarray) -> np.ndarray:
    """Per-copy powers U^m for a vector of exponents, composed from shared
    powers-of-two factors by bit masking."""
    t = ms.shape[0]
    n = factors[0].shape[0]
    out = np.broadcast_to(np.eye(n, dtype=np.complex128), (t, n, n)).copy()
    mm = ms.astype(np.int64).copy()
    for j in range(len(factors)):
        if not mm.any():
            break
        mask = (mm & 1).astype(bool)
        if mask.any():
            out[mask] = out[mask] @ factors[j]
        mm >>= 1
    return out


def _batched_matrix_power(C: np.ndarray, p: int) -> np.ndarray:
    """(t, n, n) stack raised to one shared integer exponent by repeated
    squaring."""
    if p < 1:
        raise ValueError("exponent must be >= 1")
    out = None
    base = C
    while p > 0:
        if p & 1:
            out = base.copy() if out is None else out @ base
        p >>= 1
        if p:
            base = base @ base
    return out


def _run_chunk(
    A1: np.ndarray,
    factors: list,
    p: int,
    delta_eff: float,
    ms: np.ndarray,
    seed: RngSeed,
    copy_start: int,
) -> list:
    """Filter one chunk of copies; returns accepted EigenEstimates."""
    n = A1.shape[0]
    t = ms.shape[0]
    w0 = np.empty((t, n), dtype=np.complex128)
    for i in range(t):
        rng = _sub_rng(seed, _TAG_COPY, copy_start + i)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w0[i] = v / np.linalg.norm(v)
    if n == 1:
        # scalar filtering never changes a 1-dimensional direction
        alive = np.ones(t, dtype=bool)
        w = w0
    else:
        Um = _batched_power_from_factors(factors, ms)
        C = (np.eye(n, dtype=np.complex128)[None, :, :] + Um) / 2.0
        B = _batched_matrix_power(C, p)
        bw = np.einsum("tij,tj->ti", B, w0)
        nrm = np.linalg.norm(bw, axis=1)
        alive = nrm >= SURVIVOR_FLOOR
        w = np.where(alive[:, None], bw, 1.0) / np.where(alive, nrm, 1.0)[:, None]
    z = w @ A1.T
    i0 = np.argmax(np.abs(w), axis=1)
    rows = np.arange(t)
    c = z[rows, i0] / w[rows, i0]
    lam = c.real
    resid = np.linalg.norm(z - lam[:, None] * w, axis=1)
    thr = accept_threshold(n, delta_eff)
    accepted = alive & (resid <= thr) & (np.abs(c.imag) <= thr)
    out = []
    for i in np.flatnonzero(accepted):
        out.append(
            EigenEstimate(
                w=canonical_phase(w[i]),
                lambda_hat=float(lam[i]),
                residual=float(resid[i]),
                copy_id=copy_start + int(i),
                m_used=int(ms[i]),
            )
        )
    return out


def asd_run(
    A: np.ndarray,
    delta: float,
    seed: RngSeed,
    params: Optional[AsdParams] = None,
    transform: SpectrumTransform = SpectrumTransform(1.0, 0.0),
    chunk_size: int = 4096,
    threads: int = 1,
) -> AsdRunResult:
    """Run the full decomposition on a matrix whose spectrum already lies
    in [0.05, 0.85] (see matlin.rescale_to_range).

    Draws one perturbation and T (multiplier, start-vector) pairs from
    sub-streams of `seed`, filters all copies, bins the accepted estimates
    at width B/4 and, when exactly n bins survive, verifies the
    decomposition contract against A.  The result is bit-reproducible for
    a fixed seed and parameter set, independent of chunking or threads.
    """
    A = check_hermitian(A)
    n = A.shape[0]
    if params is None:
        params = compute_asd_params(n, delta)
    if params.n != n:
        raise ValueError("params.n does not match the matrix dimension")
    if params.sigma > 0.0:
        A1 = A + params.sigma * gue_from_generator(n, _sub_rng(seed, _TAG_PERTURB))
    else:
        A1 = A.copy()
    d_eff = params.delta_prime_eff
    fp = compute_filter_params(n, 1, d_eff)
    zeta_tight = d_eff * d_eff / (2.0 * fp.p * params.M)
    U = unitary_exp(A1, zeta_tight)
    factors = _shared_power_factors(U, params.M)
    ms = _sub_rng(seed, _TAG_MDRAW).integers(1, params.M + 1, size=params.T)

    chunks = [
        (lo, min(params.T, lo + chunk_size)) for lo in range(0, params.T, chunk_size)
    ]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_run_chunk, A1, factors, fp.p, d_eff, ms[lo:hi], seed, lo)
                for lo, hi in chunks
            ]
            estimates = [e for f in futures for e in f.result()]
    else:
        estimates = []
        for lo, hi in chunks:
            estimates.extend(_run_chunk(A1, factors, fp.p, d_eff, ms[lo:hi], seed, lo))

    bits = np.array([int(m).bit_length() for m in ms])
    hist = tuple(int(c) for c in np.bincount(bits, minlength=int(params.M).bit_length() + 1))
    stats = CopyStats(
        copies=params.T,
        accepted=len(estimates),
        rejected=params.T - len(estimates),
        m_hist_log2=hist,
    )
    if estimates:
        db = bin_eigenvalues(estimates, params.bin_width, transform=transform)
    else:
        db = AsdDatabase(entries=(), bin_width=params.bin_width, transform=transform)
    complete = len(db) == n
    verify = verify_asd(A, db, delta) if complete else None
    return AsdRunResult(
        database=db,
        complete=complete,
        stats=stats,
        params=params,
        verify=verify,
        perturbed=A1,
    )


def bin_eigenvalues(
    estimates: Sequence[EigenEstimate],
    bin_width: float,
    transform: SpectrumTransform = SpectrumTransform(1.0, 0.0),
) -> AsdDatabase:
    """Deduplicate estimates by scanning them in eigenvalue order.

    The first estimate opens the first bin; each later estimate whose
    lambda exceeds the current bin opener by at least bin_width opens a new
    bin.  Within a bin the smallest-residual member (lowest copy id on
    ties) represents it.
    """
    if not estimates:
        raise ValueError("estimates must be non-empty")
    order = sorted(estimates, key=lambda e: (e.lambda_hat, e.copy_id))
    groups = [[order[0]]]
    opener = order[0].lambda_hat
    for e in order[1:]:
        if e.lambda_hat - opener >= bin_width:
            groups.append([e])
            opener = e.lambda_hat
        else:
            groups[-1].append(e)
    reps = tuple(min(g, key=lambda e: (e.residual, e.copy_id)) for g in groups)
    return AsdDatabase(entries=reps, bin_width=bin_width, transform=transform)


def verify_asd(A: np.ndarray, db: AsdDatabase, delta: float) -> VerifyResult:
    """Check the decomposition contract of a size-n database against A:
    max_i ||A w_i - lambda_i w_i|| <= delta and
    ||sum_i lambda_i w_i w_i^H - A|| <= delta ||A|| (spectral norms from
    the reference eigensolver)."""
    A = check_hermitian(A)
    n = A.shape[0]
    if len(db) != n:
        raise ValueError(f"database holds {len(db)} entries, expected {n}")
    V = db.vectors()
    lam = db.lambdas()
    residual_max = float(max(np.linalg.norm(A @ V[:, i] - lam[i] * V[:, i]) for i in range(n)))
    recon = (V * lam) @ V.conj().T
    diff = recon - A
    diff = (diff + diff.conj().T) / 2.0
    err = oracle.spectral_norm(diff)
    norm_a = oracle.spectral_norm(A)
    ok = residual_max <= delta and err <= delta * norm_a
    return VerifyResult(ok=ok, residual_max=residual_max, reconstruction_error=err)


def min_gap(A: np.ndarray) -> float:
    """Smallest spacing between adjacent (sorted) oracle eigenvalues;
    diagnostic input for choosing the separation parameter B."""
    dec = oracle.jacobi_eigh(A)
    if dec.n == 1:
        return math.inf
    lam = dec.values
    return float(np.min(lam[:-1] - lam[1:]))
