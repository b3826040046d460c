"""Oscillation-theory spectral computations for 2x2 canonical systems."""

from .hamiltonian import (
    ConstantAngle,
    ConstantMatrix,
    Hamiltonian,
    MatrixH,
    NotRankOne,
    PhiPiece,
    PhiProfile,
    PhiRamp,
    PhiTable,
    Segment,
    SingularHalfLine,
    extract_phi,
    rotate,
    truncate_with_tail,
    validate,
)
from .pruefer import PrueferTrajectory, integrate, step_singular, theta_at
from .spectra import (
    Classification,
    CountResult,
    EssBounds,
    HalfLineCount,
    SpectralWindow,
    classify_semibounded,
    classify_wholeline,
    count_bounded,
    ess_spectrum_bounds,
    halfline_count,
    locate_eigenvalues,
    m_endpoints,
    m_halfline_real,
    zero_eigenvalue_check,
)
from .transforms import (
    DiagonalSegment,
    DiagonalSystem,
    SchrodingerProblem,
    canonical_to_diagonal,
    debranges_type,
    diagonal_to_hamiltonian,
    molchanov_classic,
    molchanov_new,
    schrodinger_to_canonical,
)
from .entire import (
    TransferMatrix,
    hadamard_a,
    hadamard_c,
    order_fit,
    transfer_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantAngle",
    "ConstantMatrix",
    "Hamiltonian",
    "MatrixH",
    "NotRankOne",
    "PhiPiece",
    "PhiProfile",
    "PhiRamp",
    "PhiTable",
    "Segment",
    "SingularHalfLine",
    "extract_phi",
    "rotate",
    "truncate_with_tail",
    "validate",
    "PrueferTrajectory",
    "integrate",
    "step_singular",
    "theta_at",
    "Classification",
    "CountResult",
    "EssBounds",
    "HalfLineCount",
    "SpectralWindow",
    "classify_semibounded",
    "classify_wholeline",
    "count_bounded",
    "ess_spectrum_bounds",
    "halfline_count",
    "locate_eigenvalues",
    "m_endpoints",
    "m_halfline_real",
    "zero_eigenvalue_check",
    "DiagonalSegment",
    "DiagonalSystem",
    "SchrodingerProblem",
    "canonical_to_diagonal",
    "debranges_type",
    "diagonal_to_hamiltonian",
    "molchanov_classic",
    "molchanov_new",
    "schrodinger_to_canonical",
    "TransferMatrix",
    "hadamard_a",
    "hadamard_c",
    "order_fit",
    "transfer_matrix",
]
