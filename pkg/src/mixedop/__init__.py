"""Algebra of mixed multidimensional integral operators with staircase kernels."""
from .algebra import (
    MixedOperator,
    apply,
    compose,
    exp_operator,
    identity_operator,
    linear_combine,
    multiplication_operator,
    norm_L,
    operator_equal,
    power,
    refine_operator,
    scale,
    to_common_resolution,
    zero_operator,
)
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EmptySubset,
    MalformedInput,
    MixedOpError,
    NormTooLarge,
    NotASubset,
    NotConverged,
    NotInvertible,
    OverlappingSubsets,
    ResidueNotIdentity,
    SingularBlock,
    SingularE,
    SingularMatrix,
    SizeCapExceeded,
)
from .factorization import (
    EMatrixField,
    Factorization,
    SeparatedKernel,
    build_E,
    elementary_inverse,
    factorize,
    inverse,
    separate_variables,
)
from .oracle import FullMatrixRep, full_matrix, oracle_det, oracle_eigenvalues, oracle_inverse
from .spectral import SpectrumReport, resolvent, spectrum_scan
from .staircase import (
    CellIndex,
    StaircaseFunction,
    diamond_merge,
    refine_function,
    restrict,
    subsets_ascending,
)
from .tracedet import (
    CElement,
    c_exp,
    c_multiply,
    det_elementary,
    det_fredholm,
    det_log_series,
    det_plemelj_smithies,
    determinant,
    determinant_fredholm,
    trace,
)

__version__ = "0.1.0"
