"""otk: norms, scalar-shift distances, joint numerical ranges, and
orthogonality certificates for tuples of complex matrices."""

from ._kernels import backend
from .errors import (
    ConfigError,
    ConsistencyError,
    ConvergenceFailure,
    EmptyInput,
    LengthMismatch,
    NotHermitian,
    NotNormalCommuting,
    NotUnitVector,
    OtkError,
    SizeOverflow,
    UnknownName,
)
from .linalg import Ball, EigenDecomposition, hermitian_eig, hull_distance, kron, smallest_enclosing_ball
from .ranges import (
    Certificate,
    MembershipResult,
    RangeSample,
    TopEigenspace,
    compress,
    membership_zero_in_V,
    membership_zero_in_convV,
    sample_V,
    sample_W,
    top_eigenspace,
    v_block_formula_check,
    v_product_check,
)
from .solvers import (
    DistanceResult,
    DistOptions,
    VarianceOptions,
    VarianceResult,
    chebyshev_radius_normal,
    dist_to_scalars,
    max_variance,
    orthopair_sup,
)
from .tuples import (
    BlockSpec,
    FactorSpec,
    OperatorTuple,
    gallery,
    gen_commuting_normal,
    gen_doubly,
    gen_toeplitz,
    gram,
    is_doubly_commuting,
    shift,
    tuple_norm,
    variance,
)
from .verify import (
    EqualityReport,
    SuiteConfig,
    check_equality,
    check_inequality,
    run_suite,
    toeplitz_section_sweep,
)

__version__ = "0.1.0"
