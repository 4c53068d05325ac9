"""skewrank: noncommutative rational identity testing and noncommutative
rank over prime fields.

Formulas over free noncommuting variables (with inversion gates) are
tested for identity by randomized matrix substitution, reduced to
logarithmic depth, embedded rank-honestly into two variables, linearized
with verifiable certificates, and realized as linear pencils whose
singularity encodes the zero test; a randomized blow-up engine supplies
the noncommutative rank oracle underneath.
"""

from .depth_reduction import (
    B_RAT,
    C_POLY,
    C_RAT,
    EvalOracle,
    OracleInconsistencyError,
    ZNormalForm,
    depth_reduce_polynomial,
    depth_reduce_rational,
    normal_form,
)
from .embedding import (
    commutator_image,
    commutator_image_recursive,
    embed_formula,
    embed_pencil,
    monomial_embed,
)
from .field import (
    BACKEND,
    DEFAULT_FIELD,
    DEFAULT_PRIME,
    FieldMatrix,
    PrimeField,
    inverse,
    random_matrix,
    rank,
)
from .formula import (
    Add,
    Const,
    Formula,
    Inv,
    Mul,
    NoSplitterError,
    ParseError,
    Var,
    depth,
    find_splitter,
    format_formula,
    metrics,
    parse_formula,
    size,
)
from .higman import HigmanCertificate, linearize_formula, linearize_polymatrix, verify_certificate
from .oracles import (
    EvalOutcome,
    MatrixTuple,
    TrialPolicy,
    ZeroVerdict,
    check_correct,
    equivalent,
    evaluate,
    rit_eval,
)
from .pencil import LinearPencil, PolyMatrix, blowup_matrix, pencil_from_affine_matrix
from .ncrank import (
    RankPolicy,
    RankReport,
    blowup_rank,
    make_rit_oracle,
    ncrank_bivariate,
    ncrank_pencil,
    ncrank_polymatrix,
    ncrank_to_singular,
    pencil_singular,
    rit_bivariate,
    rit_full,
)
from .realization import (
    realization_dimension,
    realize_formula,
    singularity_pencil,
    verify_realization,
)

__version__ = "0.1.0"
