"""tensorcert: exact certification and probing of tensor border rank.

Flattening-minor certificates (complete for border rank <= 2), a
randomised contraction test for higher order, symbolic minors in
word-indexed variables with the substitution-monoid action, determinantal
completion from boundary data, a sampling probe for vanishing-ideal
dimensions, and general-Markov-model membership tests on trees.
"""

from .certify import (
    CertReport,
    TestConfig,
    cp_als,
    default_p0,
    flattening_rank_bound,
    random_contraction_test,
    raw_p0,
    reduce_all_same,
    strassen_bound,
    test_brank_le_2,
    test_rank_le_1,
)
from .completion import (
    BoundaryData,
    Pivot,
    ZeroPivotError,
    complete_entry,
    complete_entry_symbolic,
    complete_tensor,
    extract_boundary,
    validate_boundary,
    verify_on_variety,
)
from .phylo import (
    ModelParams,
    PhyloReport,
    Tree,
    check_membership,
    model_tensor,
    parse_newick,
    random_params,
)
from .polynomials import (
    MinorSpec,
    Rank222,
    SparsePoly,
    enumerate_minors,
    eval_poly,
    hyperdet_222,
    minor_matrix,
    minor_orbit_witness,
    minor_poly,
    rank_222_classify,
    strassen_eval,
    subs_act_poly,
)
from .probe import ideal_degree_dim, membership_check, monomial_basis
from .tensor import (
    FLOAT64,
    RATIONAL,
    PureFactorization,
    Tensor,
    contract,
    contract_pure,
    coord,
    embed_tau,
    flatten,
    load_tensor,
    matrix_rank,
    mode_apply,
    permute_modes,
    project_pi,
    pure,
    random_rank,
    save_tensor,
    tensor,
    zero_tensor,
)
from .words import (
    IncMap,
    SubsElement,
    Word,
    canonical_minor_words,
    higman_embed,
    inc_act,
    subs_act,
    subs_mul,
    subs_witness,
    word,
    word_from_text,
    word_order_key,
    word_support,
)

__version__ = "0.1.0"
