"""Command-line surface.

Subcommands
-----------
asd          full decomposition of a matrix file, JSON output + report
filter       one filter pass (multiplier, accuracy) on a matrix file
sweep-m      collection probability vs sequence length M, CSV output
discrepancy  residual-sequence discrepancy reports
min-gap      empirical minimal eigenvalue spacing under perturbation

Exit codes: 0 success, 1 usage or input error, 2 incomplete/rejected
(retryable with a fresh seed).  Output files are deterministic for fixed
flags and seed; wall-clock timing goes to stdout only.  The environment
variable QUASISPEC_SEED supplies the master seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .driver import asd_run, compute_asd_params, min_gap, perturb
from .filtering import compute_filter_params, filter_run
from .matio import MatrixFileError, read_matrix, write_json
from .matlin import RngSeed, rescale_to_range
from .oracle import jacobi_eigh
from .quasirandom import box_discrepancy, residual_sequence, star_discrepancy_1d

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCOMPLETE = 2


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (argparse defaults to 2, which is reserved for
    # retryable incompleteness here)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("QUASISPEC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise MatrixFileError(f"QUASISPEC_SEED must be an integer, got {env!r}")
    return 0


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _vector_doc(w: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in w]


def _parse_floats(text: str, flag: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise MatrixFileError(f"{flag}: {exc}")
    if not vals:
        raise MatrixFileError(f"{flag}: empty list")
    return vals


def _parse_ints(text: str, flag: str) -> list:
    try:
        vals = [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise MatrixFileError(f"{flag}: {exc}")
    if not vals:
        raise MatrixFileError(f"{flag}: empty list")
    return vals


# ---------------------------------------------------------------- asd


def cmd_asd(args) -> int:
    try:
        A = read_matrix(args.input)
        master = _resolve_seed(args.seed)
        rescaled, transform = rescale_to_range(A)
        params = compute_asd_params(
            rescaled.shape[0],
            args.delta,
            B_config=args.B,
            mode=args.mode,
            copies=args.copies,
        )
    except (MatrixFileError, ValueError) as exc:
        return _fail(str(exc))

    t0 = time.perf_counter()
    result = asd_run(
        rescaled,
        args.delta,
        RngSeed(master),
        params=params,
        transform=transform,
        threads=args.threads,
    )
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    db = result.database
    doc = {
        "kind": "asd-result",
        "version": __version__,
        "complete": result.complete,
        "verified": (result.verify.ok if result.verify is not None else None),
        "delta": args.delta,
        "mode": params.mode,
        "seed": {"master": master, "stream": 0},
        "params": {
            "n": params.n,
            "B": params.B,
            "delta_prime": params.delta_prime,
            "delta_prime_eff": params.delta_prime_eff,
            "delta_prime_clamped": params.clamped,
            "alpha": params.alpha,
            "M": params.M,
            "T": params.T,
            "sigma": params.sigma,
            "bands": {"r_in": params.bands.r_in, "r_out": params.bands.r_out},
            "copies_overridden": params.t_overridden,
            "m_overridden": params.m_overridden,
        },
        "transform": {"scale": transform.scale, "shift": transform.shift},
        "copies": {
            "total": result.stats.copies,
            "accepted": result.stats.accepted,
            "rejected": result.stats.rejected,
            "m_hist_log2": list(result.stats.m_hist_log2),
        },
        "verify": (
            {
                "ok": result.verify.ok,
                "residual_max": result.verify.residual_max,
                "reconstruction_error": result.verify.reconstruction_error,
            }
            if result.verify is not None
            else None
        ),
        "eigenvalues": [float(x) for x in db.lambdas_original()],
        "eigenvalues_filtered": [float(x) for x in db.lambdas()],
        "residuals": [e.residual for e in db.entries],
        "multipliers": [e.m_used for e in db.entries],
        "vectors": [_vector_doc(e.w) for e in db.entries],
    }
    if args.out:
        write_json(args.out, doc)
    else:
        print(json.dumps(doc, sort_keys=True, indent=1))

    status = "verified" if (result.verify and result.verify.ok) else (
        "complete-unverified" if result.complete else "incomplete"
    )
    print(
        f"asd: n={params.n} delta={args.delta:g} mode={params.mode} "
        f"copies={result.stats.copies} accepted={result.stats.accepted} "
        f"bins={len(db)} status={status} wall_ms={elapsed_ms:.0f}"
    )
    if params.clamped:
        print(
            f"asd: note: accuracy cascade {params.delta_prime:.3e} clamped to "
            f"{params.delta_prime_eff:.3e} for floating-point feasibility"
        )
    if result.verify is not None:
        print(
            f"asd: residual_max={result.verify.residual_max:.3e} "
            f"reconstruction_error={result.verify.reconstruction_error:.3e}"
        )
    return EXIT_OK if (result.complete and result.verify and result.verify.ok) else EXIT_INCOMPLETE


# ---------------------------------------------------------------- filter


def cmd_filter(args) -> int:
    try:
        A = read_matrix(args.input)
        master = _resolve_seed(args.seed)
        if args.m < 1:
            raise ValueError(f"--m must be >= 1, got {args.m}")
        params = compute_filter_params(A.shape[0], args.m, args.delta)
    except (MatrixFileError, ValueError) as exc:
        return _fail(str(exc))

    estimate = filter_run(A, args.m, args.delta, RngSeed(master), params=params)
    if estimate is None:
        doc = {
            "kind": "filter-result",
            "accepted": False,
            "m": args.m,
            "delta": args.delta,
            "seed": master,
        }
        exit_code = EXIT_INCOMPLETE
    else:
        doc = {
            "kind": "filter-result",
            "accepted": True,
            "m": args.m,
            "delta": args.delta,
            "seed": master,
            "lambda_hat": estimate.lambda_hat,
            "residual": estimate.residual,
            "vector": _vector_doc(estimate.w),
        }
        exit_code = EXIT_OK
    if args.out:
        write_json(args.out, doc)
    print(json.dumps(doc, sort_keys=True, indent=1))
    return exit_code


# ---------------------------------------------------------------- sweep-m


def cmd_sweep_m(args) -> int:
    try:
        A = read_matrix(args.input)
        master = _resolve_seed(args.seed)
        n = A.shape[0]
        if args.m_values:
            m_list = _parse_ints(args.m_values, "--m-values")
        elif args.m_powers:
            m_list = [n**k for k in _parse_ints(args.m_powers, "--m-powers")]
        else:
            raise MatrixFileError("one of --m-values or --m-powers is required")
        if any(m < 1 for m in m_list):
            raise MatrixFileError("all M values must be >= 1")
        if args.trials < 1:
            raise MatrixFileError("--trials must be >= 1")
        rescaled, transform = rescale_to_range(A)
    except (MatrixFileError, ValueError) as exc:
        return _fail(str(exc))

    rows = []
    for mi, M in enumerate(m_list):
        t0 = time.perf_counter()
        completes = 0
        accept_rates = []
        for trial in range(args.trials):
            try:
                params = compute_asd_params(
                    n,
                    args.delta,
                    mode="empirical",
                    copies=args.copies,
                    M_override=M,
                )
            except ValueError as exc:
                return _fail(str(exc))
            seed = RngSeed(master, (mi << 20) | trial)
            result = asd_run(
                rescaled, args.delta, seed, params=params, transform=transform, threads=args.threads
            )
            completes += int(result.complete)
            accept_rates.append(result.stats.accept_rate)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        row = {
            "M": M,
            "n": n,
            "trials": args.trials,
            "collection_probability": completes / args.trials,
            "accept_rate": float(np.mean(accept_rates)),
            "wall_time_ms": wall_ms,
        }
        rows.append(row)
        print(
            f"sweep-m: M={M} collection_probability={row['collection_probability']:.3f} "
            f"accept_rate={row['accept_rate']:.4f} wall_ms={wall_ms:.0f}"
        )

    header = "M,n,trials,collection_probability,accept_rate,wall_time_ms"
    lines = [header]
    for row in rows:
        lines.append(
            f"{row['M']},{row['n']},{row['trials']},{row['collection_probability']!r},"
            f"{row['accept_rate']!r},{row['wall_time_ms']:.1f}"
        )
    csv_text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        print(csv_text, end="")
    return EXIT_OK


# ---------------------------------------------------------------- discrepancy


def cmd_discrepancy(args) -> int:
    try:
        master = _resolve_seed(args.seed)
        if args.k < 1:
            raise MatrixFileError(f"--k must be >= 1, got {args.k}")
        if args.M < 1:
            raise MatrixFileError(f"--M must be >= 1, got {args.M}")
        if (args.seed_values is None) == (args.matrix is None):
            raise MatrixFileError("exactly one of --seed-values or --matrix is required")
        if args.seed_values is not None:
            values = np.array(_parse_floats(args.seed_values, "--seed-values"))
        else:
            A = read_matrix(args.matrix)
            if args.perturb_sigma > 0.0:
                A = perturb(A, args.perturb_sigma, RngSeed(master, 1))
            values = jacobi_eigh(A).values
        if args.dims:
            idx = _parse_ints(args.dims, "--dims")
            if any(d < 1 or d > values.size for d in idx):
                raise MatrixFileError(f"--dims entries must lie in 1..{values.size}")
            values = values[[d - 1 for d in idx]]
        if values.size > 2:
            raise MatrixFileError(
                f"discrepancy reports cover 1 or 2 coordinates; select with --dims "
                f"(got {values.size})"
            )
    except (MatrixFileError, ValueError) as exc:
        return _fail(str(exc))

    seq = residual_sequence(values, args.M)
    if seq.dimension == 1:
        rep = star_discrepancy_1d(seq)
        method = "exact-star"
    else:
        rep = box_discrepancy(seq, args.k)
        method = "grid-box"
    doc = {
        "kind": "discrepancy-report",
        "method": method,
        "estimate": rep.estimate,
        "upper_error": rep.upper_error,
        "resolution": rep.resolution,
        "dimension": rep.dimension,
        "length": rep.length,
        "seed_values": [float(v) for v in values],
    }
    if args.out:
        write_json(args.out, doc)
    print(json.dumps(doc, sort_keys=True, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------- min-gap


def cmd_min_gap(args) -> int:
    try:
        A = read_matrix(args.input)
        master = _resolve_seed(args.seed)
        sigmas = _parse_floats(args.sigma_values, "--sigma-values")
        if args.trials < 1:
            raise MatrixFileError("--trials must be >= 1")
    except (MatrixFileError, ValueError) as exc:
        return _fail(str(exc))

    rows = []
    for si, sigma in enumerate(sigmas):
        gaps = []
        for trial in range(args.trials):
            A1 = perturb(A, sigma, RngSeed(master, (si << 20) | trial))
            gaps.append(min_gap(A1))
        gaps = np.array(gaps)
        rows.append(
            {
                "sigma": sigma,
                "trials": args.trials,
                "min": float(gaps.min()),
                "q10": float(np.quantile(gaps, 0.10)),
                "median": float(np.quantile(gaps, 0.50)),
            }
        )
    doc = {"kind": "min-gap-report", "seed": master, "rows": rows}
    print(json.dumps(doc, sort_keys=True, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasispec", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"quasispec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (fallback: QUASISPEC_SEED, then 0)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="cap on copy-level concurrency")

    p = sub.add_parser("asd", parents=[], help="full approximate spectral decomposition",
                       description="Decompose a Hermitian matrix file; exit 0 when the "
                                   "database verifies, 2 when incomplete (retry with a new seed).")
    p.add_argument("input", help="matrix file (JSON or plain text)")
    p.add_argument("--delta", type=float, required=True, help="target accuracy (0 < delta <= 1/n)")
    p.add_argument("--mode", choices=("empirical", "theoretical"), default="empirical",
                   help="sequence-length regime: M = n^5 or the theoretical cascade")
    p.add_argument("--B", type=float, default=None,
                   help="separation parameter (default: delta; calibrate via min-gap)")
    p.add_argument("--copies", type=int, default=None, help="override the derived copy count T")
    p.add_argument("--out", default=None, help="write the result document to this path")
    add_common(p)
    p.set_defaults(func=cmd_asd)

    p = sub.add_parser("filter", help="single filter pass",
                       description="Run one filter copy with a chosen multiplier; exit 0 on "
                                   "acceptance, 2 on rejection.")
    p.add_argument("input", help="matrix file with spectrum already in [0, 0.9]")
    p.add_argument("--m", type=int, required=True, help="integer multiplier (>= 1)")
    p.add_argument("--delta", type=float, required=True, help="accuracy (0 < delta < 1/e)")
    p.add_argument("--out", default=None, help="write the result document to this path")
    add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("sweep-m", help="collection probability vs sequence length",
                       description="For each M, run repeated decompositions and record the "
                                   "fraction that collect all n eigenvalues. CSV columns: "
                                   "M,n,trials,collection_probability,accept_rate,wall_time_ms "
                                   "('.' decimal separator, no grouping).")
    p.add_argument("input", help="matrix file")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--m-values", default=None, help="comma-separated M values")
    p.add_argument("--m-powers", default=None, help="comma-separated exponents k meaning M = n^k")
    p.add_argument("--trials", type=int, required=True, help="trials per M value")
    p.add_argument("--copies", type=int, default=None, help="copy count per trial (default: derived T)")
    p.add_argument("--csv", default=None, help="write the CSV table to this path")
    add_common(p)
    p.set_defaults(func=cmd_sweep_m)

    p = sub.add_parser("discrepancy", help="residual-sequence discrepancy report",
                       description="Measure the discrepancy of {m*lam} sequences from explicit "
                                   "seed values or a matrix's eigenvalues; 1-D reports use the "
                                   "exact star-discrepancy, 2-D the grid box estimator.")
    p.add_argument("--seed-values", default=None, help="comma-separated seed values")
    p.add_argument("--matrix", default=None, help="take seed values from this matrix's spectrum")
    p.add_argument("--perturb-sigma", type=float, default=0.0,
                   help="GUE perturbation scale applied to --matrix before eigensolving")
    p.add_argument("--M", type=int, required=True, help="sequence length")
    p.add_argument("--dims", default=None, help="1-based coordinate selection, e.g. '1,2'")
    p.add_argument("--k", type=int, default=128, help="grid resolution for 2-D estimates")
    p.add_argument("--out", default=None, help="write the report to this path")
    add_common(p)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("min-gap", help="empirical minimal eigenvalue spacing",
                       description="Estimate achievable eigenvalue separation under GUE "
                                   "perturbation; informs the --B parameter of asd.")
    p.add_argument("input", help="matrix file")
    p.add_argument("--sigma-values", required=True, help="comma-separated perturbation scales")
    p.add_argument("--trials", type=int, default=50)
    add_common(p)
    p.set_defaults(func=cmd_min_gap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
