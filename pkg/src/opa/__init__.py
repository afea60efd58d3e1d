"""Optimal polynomial approximants to ``1/f`` in weighted Hardy spaces."""

from .boundary import (
    Arc,
    CompactSampler,
    Disc,
    Points,
    RateReport,
    Union,
    rate_sweep,
    residual_at,
    sup_on_compact,
    wiener_norm,
)
from .errors import (
    DivergentKernel,
    EmptyCompact,
    InconsistentResidual,
    InvalidZeroSet,
    NotHermitian,
    NotInterior,
    NotUnimodular,
    OPAError,
    OutOfDomain,
    OutOfRange,
    PrecisionExhausted,
    SingularMatrix,
    ZeroAtOrigin,
)
from .estimator import OptimalApproximant
from .gram import (
    GramSystem,
    b_matrix,
    build_gram,
    interior_distance,
    inverse_entry_bounds,
    normalized_determinant,
    optimal_approximant,
    project,
    solve_optimal,
)
from .linalg import (
    ExtendedFloat,
    Float64,
    Rational,
    determinant,
    inverse_entry,
    min_eigenvalue_hermitian,
    parse_backend,
    solve,
)
from .multiplicity import (
    HankelSystem,
    asymptotic_check,
    build_hankel,
    cauchy_inverse_entry,
    limit_constant,
    multiplicity_approximant,
    solve_multiplicity,
)
from .oracle import oracle_project, oracle_solve
from .polynomials import ComplexPolynomial, ZeroSet, from_zeros, recover_pn
from .solution import ApproximantSolution, ProjectionResult
from .weights import (
    Bergman,
    CustomTable,
    Dirichlet,
    Hardy,
    PowerWeight,
    WeightSequence,
    full_kernel,
    kernel_closed_form,
    kernel_partial_sum,
    reciprocal_weight_sum,
    weight,
)

__version__ = "0.1.0"
