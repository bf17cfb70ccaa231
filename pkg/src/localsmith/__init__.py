"""Exact diagonalization of matrix families at a parameter singularity.

Given a polynomial or truncated-series family L(eps) of rational matrices,
the package computes near-identity transformations phi(eps), psi(eps) and a
diagonal polynomial Delta(eps) with psi^{-1} L phi = Delta exactly, along
with the subspace decompositions behind it, Jordan chain generators, the
local Smith form, and the generalized inverse of L as a Laurent series.
Everything runs over exact rationals and ships with independent brute-force
oracles for cross-checking.
"""

from .diagonalize import (
    DiagonalizationResult,
    SmithFactorization,
    delta_terms,
    diagonalize,
    phi_series,
    psi_series,
)
from .errors import (
    InputError,
    InternalConsistencyError,
    LocalSmithError,
    StageBudgetError,
    TruncationError,
)
from .family_io import (
    FamilySpec,
    family_from_series,
    parse_complement_plan,
    parse_family,
    serialize_family,
    spec_to_series,
)
from .matrix import Mat, Rational, format_rat, rat, rref
from .oracles import (
    AugmentedPencil,
    ToeplitzBlock,
    direct_laurent_inverse,
    linearize_polynomial,
    resolvent_recurrence_check,
    toeplitz_block,
    toeplitz_nullspace,
)
from .recursion import (
    ComplementPlan,
    JordanChain,
    JordanChainFamily,
    RecursionState,
    Stage,
    generic_rank,
)
from .series import MatLaurent, MatSeries, series_inverse
from .subspaces import (
    Subspace,
    choose_complement,
    image,
    kernel_basis,
    projection_matrix,
    restrict_and_split,
    restricted_inverse,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedPencil",
    "ComplementPlan",
    "DiagonalizationResult",
    "FamilySpec",
    "InputError",
    "InternalConsistencyError",
    "JordanChain",
    "JordanChainFamily",
    "LocalSmithError",
    "Mat",
    "MatLaurent",
    "MatSeries",
    "Rational",
    "RecursionState",
    "SmithFactorization",
    "Stage",
    "StageBudgetError",
    "Subspace",
    "ToeplitzBlock",
    "TruncationError",
    "choose_complement",
    "delta_terms",
    "diagonalize",
    "direct_laurent_inverse",
    "family_from_series",
    "format_rat",
    "generic_rank",
    "image",
    "kernel_basis",
    "linearize_polynomial",
    "parse_complement_plan",
    "parse_family",
    "phi_series",
    "projection_matrix",
    "psi_series",
    "rat",
    "resolvent_recurrence_check",
    "restrict_and_split",
    "restricted_inverse",
    "rref",
    "serialize_family",
    "series_inverse",
    "spec_to_series",
    "toeplitz_block",
    "toeplitz_nullspace",
]
