"""Perturbation expansions for Hermitian eigendecompositions.

The package predicts how the eigenvalues and eigenvectors of a Hermitian
matrix move under a perturbation, to first or second order, and checks
every prediction against a self-contained cyclic Jacobi eigensolver.
"""

from .errors import (
    ConvergenceError,
    DegenerateDirectionError,
    GapTooSmallError,
    MatrixParseError,
    ModeError,
    PreconditionError,
    StudyError,
)
from .matrices import (
    dense,
    format_matrix,
    hermitian,
    operator_norm,
    parse_hermitian,
    parse_matrix,
)
from .jacobi import SpectralDecomposition, eigh, normalize_column_phases, residual
from .alignment import (
    MODE_BLOCKWISE,
    MODE_RAW,
    AlignedPerturbation,
    BlockStructure,
    VcReport,
    align_columns,
    aligned_perturbation,
    blockwise_diagonalize,
    conjugate_to_eigenbasis,
    group_eigenvalues,
    m_matrix,
    scaled,
    vc_membership,
)
from .first_order import (
    FirstOrderPrediction,
    approx_decomposition_residual,
    first_order_eigenvalues,
    first_order_prediction,
    gershgorin_intervals,
    u_approx,
)
from .schur import (
    SchurData,
    SimilarityDiagnostic,
    diag_pseudo_inverse,
    refined_eigenvalues,
    schur_data,
    schur_similarity_diagnostic,
)
from .rayleigh import (
    EigensystemPrediction,
    LineExpansion,
    eigenvector_derivative,
    line_expansion,
    n_matrix,
    predict_eigensystem,
    rs_coefficients,
)
from .harness import (
    DEFAULT_T_GRID,
    EXAMPLE_A,
    EXAMPLE_F,
    EXAMPLE_N,
    EXAMPLE_U_PRIME,
    PREDICTORS,
    ClauseResult,
    ConvergenceReport,
    EnsembleConfig,
    LoglogFit,
    RegressionReport,
    SplitMix64,
    StudyRow,
    convergence_study,
    fit_loglog,
    generate_instance,
    paper_example_regression,
    random_hermitian,
    random_unitary,
    report_to_csv,
)

__version__ = "0.1.0"
