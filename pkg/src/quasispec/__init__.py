"""quasispec: quasi-random spectral decomposition of Hermitian matrices.

An eigenphase filter extracts approximate eigenvectors by powering the
unitary exponential of the input with quasi-randomly chosen multipliers;
a parallel driver collects a full approximate spectral decomposition and
verifies it against a built-in Jacobi reference eigensolver.
"""

__version__ = "0.1.0"

from .driver import (
    AsdDatabase,
    AsdParams,
    AsdRunResult,
    asd_run,
    bin_eigenvalues,
    compute_asd_params,
    min_gap,
    perturb,
    verify_asd,
)
from .filtering import (
    EigenEstimate,
    FilterParams,
    build_filter_matrix,
    compute_filter_params,
    decide,
    filter_run,
)
from .matlin import (
    RngSeed,
    SpectrumTransform,
    canonical_phase,
    gue_sample,
    mat_power,
    op_norm_upper,
    phase_dist,
    rescale_to_range,
    sample_unit_vector,
    unitary_exp,
)
from .oracle import EigenDecomposition, is_delta_separated, jacobi_eigh, spectral_norm
from .quasirandom import (
    Bands,
    DiscrepancyReport,
    box_discrepancy,
    circ_dist,
    frac,
    good_seed_test,
    nominal_bands,
    proof_bands,
    r_sum,
    residual_sequence,
    separates,
    separation_probability,
    star_discrepancy_1d,
    van_der_corput,
)

__all__ = [
    "__version__",
    "AsdDatabase",
    "AsdParams",
    "AsdRunResult",
    "Bands",
    "DiscrepancyReport",
    "EigenDecomposition",
    "EigenEstimate",
    "FilterParams",
    "RngSeed",
    "SpectrumTransform",
    "asd_run",
    "bin_eigenvalues",
    "box_discrepancy",
    "build_filter_matrix",
    "canonical_phase",
    "circ_dist",
    "compute_asd_params",
    "compute_filter_params",
    "decide",
    "filter_run",
    "frac",
    "good_seed_test",
    "gue_sample",
    "is_delta_separated",
    "jacobi_eigh",
    "mat_power",
    "min_gap",
    "nominal_bands",
    "op_norm_upper",
    "perturb",
    "phase_dist",
    "proof_bands",
    "r_sum",
    "rescale_to_range",
    "residual_sequence",
    "sample_unit_vector",
    "separates",
    "separation_probability",
    "spectral_norm",
    "star_discrepancy_1d",
    "unitary_exp",
    "van_der_corput",
    "verify_asd",
]
