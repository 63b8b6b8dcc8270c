"""Commutator factorizations and the de la Harpe-Skandalis determinant in M_n."""

from .blocklu import (
    StdFactors,
    block_ldu,
    projection_bounds,
    recursive_std,
    schur_condition,
    schur_std,
    select_projection,
    two_class_ranks,
    unitriangular_commutator,
)
from .dhsdet import (
    DhsValue,
    TraceFunctional,
    continuity_radius,
    homotopy_defect,
    matrix_determinant_value,
    path_determinant,
    path_value,
)
from .diagfact import (
    IntervalCover,
    PartitionOfUnity,
    build_cover,
    factor_diag_path_gl4,
    factor_diag_path_u4,
    factor_diag_path_u16,
    general_diag_commutators,
    prefix_sum_permutation,
)
from .exceptions import CommFactorError, DeterminantObstruction
from .factorization import Certificate, CommutatorFactorization
from .matcore import BlockDecomposition, Projection, commutator, polar
from .pathfun import EigenFunctions, MatrixPath, concatenate, track_eigenfunctions
from .pipeline import descent_demo, factor_matrix, factor_unitary_path, polar_split
from .su2fact import (
    CommutatorPair,
    invertible_diag_commutator,
    su2_diag_commutator,
    swap_trick_commutator,
)

__all__ = [
    "StdFactors",
    "block_ldu",
    "projection_bounds",
    "recursive_std",
    "schur_condition",
    "schur_std",
    "select_projection",
    "two_class_ranks",
    "unitriangular_commutator",
    "DhsValue",
    "TraceFunctional",
    "continuity_radius",
    "homotopy_defect",
    "matrix_determinant_value",
    "path_determinant",
    "path_value",
    "IntervalCover",
    "PartitionOfUnity",
    "build_cover",
    "factor_diag_path_gl4",
    "factor_diag_path_u4",
    "factor_diag_path_u16",
    "general_diag_commutators",
    "prefix_sum_permutation",
    "CommFactorError",
    "DeterminantObstruction",
    "Certificate",
    "CommutatorFactorization",
    "BlockDecomposition",
    "Projection",
    "commutator",
    "polar",
    "EigenFunctions",
    "MatrixPath",
    "concatenate",
    "track_eigenfunctions",
    "descent_demo",
    "factor_matrix",
    "factor_unitary_path",
    "polar_split",
    "CommutatorPair",
    "invertible_diag_commutator",
    "su2_diag_commutator",
    "swap_trick_commutator",
]

__version__ = "0.1.0"
