"""Residual sequences mod 1 and their discrepancy machinery.

The central object is the sequence of fractional parts {m * lam_i} for a
vector of seed values lam and multipliers m = 1..M.  This module measures
how uniformly such sequences fill [0,1)^s: an exact 1-D star-discrepancy
routine, a grid estimator for (wrap-around) interval-product boxes in one
and two dimensions, the Niederreiter R(g, P) lattice sum, the
band-membership predicate for separating integers, and the van der Corput
sequence used as a known-good fixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matlin import RngSeed

__all__ = [
    "Bands",
    "proof_bands",
    "nominal_bands",
    "DiscrepancyReport",
    "ResidualSequence",
    "frac",
    "residual_sequence",
    "circ_dist",
    "separates",
    "separation_probability",
    "star_discrepancy_1d",
    "box_discrepancy",
    "box_discrepancy_points",
    "r_sum",
    "van_der_corput",
    "good_seed_test",
]

# Default grid resolution for the box estimator.
DEFAULT_GRID_K = 128

# Sequences longer than this are never materialized in one array.
_MATERIALIZE_CAP = 10**7

# Exhaustive enumeration cap for separation_probability.
_EXHAUSTIVE_CAP = 10**6


def frac(x):
    """Fractional part in [0, 1) for any real input, negative included.

    np.mod(x, 1.0) can round up to exactly 1.0 for tiny negative inputs;
    those are folded back to 0.0 so the [0, 1) contract always holds.
    """
    r = np.mod(np.asarray(x, dtype=np.float64), 1.0)
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True)
class Bands:
    """Circular acceptance/rejection bands around 0 mod 1.

    r_in is the fractional half-width of the inner (target) band, r_out of
    the outer (exclusion) band; a multiplier separates index k when
    {m lam_k} lies within r_in of 0 while every other {m lam_j} stays at
    circular distance at least r_out.
    """

    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0.0 < self.r_in < self.r_out < 0.5):
            raise ValueError(
                f"bands must satisfy 0 < r_in < r_out < 1/2, got "
                f"r_in={self.r_in}, r_out={self.r_out}"
            )


def proof_bands(n: int, alpha: float) -> Bands:
    """Default bands: phase half-widths 1/(2*n*alpha) and 1/(2*n) radians,
    i.e. fractions 1/(4*pi*n*alpha) and 1/(4*pi*n)."""
    return Bands(r_in=1.0 / (4.0 * math.pi * n * alpha), r_out=1.0 / (4.0 * math.pi * n))


def nominal_bands(n: int, alpha: float) -> Bands:
    """Alternative band widths 1/(alpha*n) and 1/(4*n) as plain fractions;
    requires alpha > 4 so the inner band stays inside the outer one."""
    if alpha <= 4.0:
        raise ValueError("nominal bands require alpha > 4")
    return Bands(r_in=1.0 / (alpha * n), r_out=1.0 / (4.0 * n))


@dataclass(frozen=True)
class DiscrepancyReport:
    """A discrepancy estimate plus its estimator error allowance.

    For the grid estimator the true discrepancy lies in
    [estimate, estimate + dimension/resolution]; the exact 1-D star routine
    reports upper_error = 0.
    """

    estimate: float
    resolution: int
    upper_error: float
    dimension: int
    length: int


class ResidualSequence:
    """Lazy view of the sequence ({m lam_1}, ..., {m lam_s}) for m = 1..M.

    Elements are generated on demand; sequences longer than 10^7 are never
    materialized as a single array.
    """

    def __init__(self, seed_values, M: int):
        vals = np.atleast_1d(np.asarray(seed_values, dtype=np.float64))
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("seed_values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("seed_values must be finite")
        M = int(M)
        if M < 1:
            raise ValueError("M must be >= 1")
        self.seed_values = vals
        self.length = M

    @property
    def dimension(self) -> int:
        return int(self.seed_values.size)

    def element(self, m: int) -> np.ndarray:
        if not (1 <= m <= self.length):
            raise IndexError(f"m must lie in 1..{self.length}")
        return frac(m * self.seed_values)

    def block(self, start: int, stop: int) -> np.ndarray:
        """Rows for multipliers start..stop-1 (1-based, stop exclusive)."""
        if not (1 <= start <= stop <= self.length + 1):
            raise IndexError("block range out of bounds")
        ms = np.arange(start, stop, dtype=np.float64)
        return frac(ms[:, None] * self.seed_values[None, :])

    def materialize(self) -> np.ndarray:
        if self.length > _MATERIALIZE_CAP:
            raise ValueError(f"refusing to materialize M={self.length} > {_MATERIALIZE_CAP}")
        return self.block(1, self.length + 1)


def residual_sequence(lams, M: int) -> ResidualSequence:
    """Sequence of per-multiplier fractional parts of integer multiples of
    the seed values lams."""
    return ResidualSequence(lams, M)


def circ_dist(x, y):
    """Distance on the unit circle: min(|x-y|, 1-|x-y|) in [0, 1/2]."""
    d = np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))
    return np.minimum(d, 1.0 - d)


def separates(lams, k: int, m: int, bands: Bands) -> bool:
    """True iff multiplier m isolates entry k of lams: {m lam_k} lies within
    r_in of 0 while every other {m lam_j} is at circular distance >= r_out.

    k indexes lams (0-based).
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=np.float64))
    if not (0 <= k < lams.size):
        raise IndexError(f"k={k} out of range for {lams.size} values")
    if m < 1:
        raise ValueError("m must be >= 1")
    d = circ_dist(frac(m * lams), 0.0)
    if d[k] > bands.r_in:
        return False
    others = np.delete(d, k)
    return bool(others.size == 0 or np.min(others) >= bands.r_out)


def _separating_mask(lams: np.ndarray, k: int, ms: np.ndarray, bands: Bands) -> np.ndarray:
    """Vectorized `separates` over an array of multipliers."""
    res = frac(ms[:, None].astype(np.float64) * lams[None, :])
    d = np.minimum(res, 1.0 - res)  # circular distance to 0
    ok_in = d[:, k] <= bands.r_in
    d_others = np.delete(d, k, axis=1)
    if d_others.shape[1] == 0:
        return ok_in
    return ok_in & (d_others.min(axis=1) >= bands.r_out)


def separation_probability(
    lams,
    k: int,
    M: int,
    bands: Bands,
    trials: int,
    seed: RngSeed,
) -> float:
    """Probability that m ~ U{1..M} separates entry k (0-based) of lams.

    When trials >= M and M <= 10^6 the probability is computed exactly by
    full enumeration; otherwise it is a seeded Monte-Carlo estimate over
    `trials` draws.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=np.float64))
    if trials < 1:
        raise ValueError("trials must be >= 1")
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    if trials >= M and M <= _EXHAUSTIVE_CAP:
        count = 0
        for lo in range(1, M + 1, 2**20):
            hi = min(M + 1, lo + 2**20)
            count += int(_separating_mask(lams, k, np.arange(lo, hi), bands).sum())
        return count / M
    rng = seed.generator()
    count = 0
    done = 0
    while done < trials:
        chunk = min(trials - done, 2**20)
        ms = rng.integers(1, M + 1, size=chunk)
        count += int(_separating_mask(lams, k, ms, bands).sum())
        done += chunk
    return count / trials


def star_discrepancy_1d(seq: ResidualSequence | np.ndarray) -> DiscrepancyReport:
    """Exact 1-D star discrepancy D* = max_i max(x_(i) - (i-1)/M, i/M - x_(i))
    over the sorted points."""
    if isinstance(seq, ResidualSequence):
        if seq.dimension != 1:
            raise ValueError("star_discrepancy_1d requires a 1-D sequence")
        pts = seq.materialize()[:, 0]
    else:
        pts = np.asarray(seq, dtype=np.float64).ravel()
        if pts.size < 1:
            raise ValueError("empty sequence")
    M = pts.size
    x = np.sort(pts)
    i = np.arange(1, M + 1, dtype=np.float64)
    d_plus = np.max(i / M - x)
    d_minus = np.max(x - (i - 1.0) / M)
    return DiscrepancyReport(
        estimate=float(max(d_plus, d_minus)),
        resolution=M,
        upper_error=0.0,
        dimension=1,
        length=M,
    )


def _circular_interval_counts(prefix: np.ndarray, k: int):
    """All (start, length) circular interval sums from a doubled prefix array.

    prefix has length 2k+1 over the doubled cell array; returns a (k, k)
    matrix whose (s, l-1) entry counts cells s..s+l-1 (mod k).
    """
    starts = np.arange(k)[:, None]
    lengths = np.arange(1, k + 1)[None, :]
    return prefix[starts + lengths] - prefix[starts]


def box_discrepancy_points(points: np.ndarray, k: int = DEFAULT_GRID_K) -> DiscrepancyReport:
    """Grid estimator of the (wrap-around) box discrepancy of raw points.

    points: (M,) or (M, s) array in [0,1)^s with s in {1, 2}.  Maximizes
    |empirical fraction - volume| over all boxes whose corners lie on the
    k-grid, wrap-around included; the true discrepancy lies within
    [estimate, estimate + s/k].
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    M, s = pts.shape
    if s not in (1, 2):
        raise ValueError("box_discrepancy supports dimension 1 or 2 only")
    k = int(k)
    if not (1 <= k <= 512):
        raise ValueError("grid resolution k must lie in 1..512")
    if s == 2 and k > 256:
        raise ValueError("2-D box enumeration budget: k must be <= 256")
    if M < 1:
        raise ValueError("empty sequence")
    cells = np.clip((pts * k).astype(np.int64), 0, k - 1)
    if s == 1:
        counts = np.bincount(cells[:, 0], minlength=k).astype(np.float64)
        prefix = np.concatenate([[0.0], np.cumsum(np.concatenate([counts, counts]))])
        win = _circular_interval_counts(prefix, k) / M
        vol = np.arange(1, k + 1, dtype=np.float64)[None, :] / k
        best = float(np.abs(win - vol).max())
    else:
        grid = np.zeros((k, k), dtype=np.float64)
        np.add.at(grid, (cells[:, 0], cells[:, 1]), 1.0)
        best = 0.0
        lengths = np.arange(1, k + 1, dtype=np.float64)
        # row-range sums for every (start1, len1), then sweep dim 2
        doubled = np.concatenate([grid, grid], axis=0)
        row_prefix = np.concatenate([np.zeros((1, k)), np.cumsum(doubled, axis=0)], axis=0)
        for l1 in range(1, k + 1):
            # (k starts1, k cells2) counts of l1 consecutive rows
            rows = row_prefix[l1 : l1 + k] - row_prefix[:k]
            dbl2 = np.concatenate([rows, rows], axis=1)
            pref2 = np.concatenate([np.zeros((k, 1)), np.cumsum(dbl2, axis=1)], axis=1)
            starts2 = np.arange(k)[:, None]
            len2 = np.arange(1, k + 1)[None, :]
            win = (pref2[:, starts2 + len2] - pref2[:, starts2]) / M
            vol = (l1 / k) * lengths[None, None, :] / k
            dev = np.abs(win - vol).max()
            if dev > best:
                best = float(dev)
    return DiscrepancyReport(
        estimate=best,
        resolution=k,
        upper_error=s / k,
        dimension=s,
        length=M,
    )


def box_discrepancy(seq: ResidualSequence, k: int = DEFAULT_GRID_K) -> DiscrepancyReport:
    """Grid box-discrepancy estimator for a residual sequence (s in {1, 2})."""
    if seq.dimension > 2:
        raise ValueError("box_discrepancy supports dimension 1 or 2 only")
    return box_discrepancy_points(seq.materialize(), k)


def r_sum(g, P: int) -> float:
    """Niederreiter lattice sum R(g, P): over nonzero integer vectors h in
    [-P/2, P/2)^s with h . g = 0 (mod P), sum of prod_i max(1, |h_i|)^-1.
    """
    g = np.atleast_1d(np.asarray(g, dtype=np.int64))
    s = g.size
    P = int(P)
    if P < 2:
        raise ValueError("P must be >= 2")
    if s not in (1, 2, 3):
        raise ValueError("r_sum supports s in {1, 2, 3}")
    if (s <= 2 and P > 4096) or (s == 3 and P > 128):
        raise ValueError(f"r_sum budget exceeded for s={s}, P={P}")
    lo, hi = -(P // 2), (P - 1) // 2  # integer range [-P/2, P/2)
    h1 = np.arange(lo, hi + 1, dtype=np.int64)
    if s == 1:
        mask = (h1 * g[0]) % P == 0
        mask &= h1 != 0
        return float(np.sum(1.0 / np.maximum(1, np.abs(h1[mask]))))
    if s == 2:
        total = 0.0
        g2 = int(g[1]) % P
        d = math.gcd(g2, P)
        step = P // d
        for a in h1:
            rhs = (-int(a) * int(g[0])) % P
            if rhs % d != 0:
                continue
            # solutions h2 mod P of h2*g2 = rhs: h2 = h0 + t*(P/d)
            h0 = (rhs // d) * pow(g2 // d, -1, step) % step if d != P else 0
            if d == P:
                # g2 = 0 mod P: any h2 works iff rhs == 0
                if rhs != 0:
                    continue
                h2s = h1
            else:
                h2s = np.arange(h0, hi + 1, step, dtype=np.int64)
                h2s = np.concatenate([np.arange(h0 - step, lo - 1, -step, dtype=np.int64), h2s])
            w1 = 1.0 / max(1, abs(int(a)))
            nz = (h2s != 0) | (a != 0)
            total += w1 * np.sum(1.0 / np.maximum(1, np.abs(h2s[nz])))
        return float(total)
    # s == 3: direct enumeration over the budgeted cube
    hh = np.stack(np.meshgrid(h1, h1, h1, indexing="ij"), axis=-1).reshape(-1, 3)
    mask = (hh @ g) % P == 0
    mask &= np.any(hh != 0, axis=1)
    hsel = hh[mask]
    return float(np.sum(1.0 / np.prod(np.maximum(1, np.abs(hsel)), axis=1)))


def van_der_corput(count: int) -> np.ndarray:
    """First `count` van der Corput points: x_n is the binary expansion of n
    mirrored across the radix point, n = 1..count."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = np.empty(count, dtype=np.float64)
    for idx in range(1, count + 1):
        n = idx
        x = 0.0
        w = 0.5
        while n:
            if n & 1:
                x += w
            n >>= 1
            w /= 2.0
        out[idx - 1] = x
    return out


def good_seed_test(
    N: int,
    s: int,
    trials: int,
    seed: RngSeed,
    k: int | None = None,
) -> float:
    """Empirical check that random lattice seeds give low discrepancy.

    Draws g ~ U([0..N-1]^s) per trial, builds the length-N sequence
    {m g / N} and measures its box discrepancy on a k-grid; a trial passes
    when the estimate is at most log2(N)^s / N + s/k.  Returns the fraction
    of passing trials.
    """
    if s not in (1, 2):
        raise ValueError("good_seed_test supports s in {1, 2}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if k is None:
        k = min(DEFAULT_GRID_K, N) if s == 2 else min(N, 512)
    threshold = math.log2(N) ** s / N + s / k
    rng = seed.generator()
    passed = 0
    for _ in range(trials):
        g = rng.integers(0, N, size=s)
        seq = residual_sequence(g / N, N)
        rep = box_discrepancy(seq, k)
        if rep.estimate <= threshold:
            passed += 1
    return passed / trials
