"""Projection of 2n-vectors onto the Klein quadric ``x.y = 0`` (Plücker correction)."""
from .bs import BsIntermediates, correct_bs, correct_bs_lsvd, svd_thin_n2
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    InvalidInputError,
    InvariantViolation,
    NotApplicableError,
    PluckerError,
    PoleError,
    RngError,
)
from .geometry import (
    Branch,
    CorrectionResult,
    Method,
    PluckerLine,
    VecPair,
    klein_residual,
    objective,
)
from .lmpc import DEGENERACY_TOL, LmpcIntermediates, correct_lmpc, g_value, lambda_roots
from .oracle import (
    OracleReport,
    OrthonormalPair,
    check_candidate_ordering,
    frobenius_identity_gap,
    global_min_search,
    kkt_residuals,
    projected_objective,
    sample_orthonormal_pair,
)

__version__ = "0.1.0"
