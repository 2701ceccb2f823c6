"""Exact-arithmetic toolkit for quadratic and Pfister forms over F_p and Z/p^k.

Capabilities: Gram-matrix quadratic spaces with diagonalization, direct
sums, tensor products and Pfister expansion; echelon linear algebra over
F_p and free-summand machinery over Z/p^k; Witt decomposition, reflection
factorization and isometry lifting along the residue map; construction of
maximal totally isotropic summands meeting a fixed summand in rank one; a
solver deciding and witnessing Q = c; and exact censuses of flag and
isotropic-subspace families over small prime fields.
"""

from .errors import IsoformError
from .ring import Ring, RingElem, fp, parse_ring_token, ring_from_json, zpk
from .quadform import (
    GramForm,
    PfisterSpec,
    diagonalize,
    direct_sum,
    form_from_json,
    from_diagonal,
    hyperbolic_plane,
    hyperbolic_space,
    pfister_expand,
    tensor,
)
from .linalg import (
    FreeSummand,
    Subspace,
    certify_free_summand,
    echelonize,
    intersect,
    is_invertible_matrix,
    kernel_generator,
)
from .witt import (
    HyperbolicBasis,
    Isometry,
    WittDecomposition,
    cartan_dieudonne,
    find_isotropic_vector,
    hensel_lift_isotropic,
    lift_isometry,
    reflection,
    split_hyperbolic,
    witt_decompose,
    witt_decompose_local,
)
from .lagrangian import (
    LagrangianResult,
    complete_hyperbolic_dual,
    find_meeting_lagrangian,
    lift_meeting_lagrangian,
)
from .solver import (
    RepresentationProblem,
    SolutionCertificate,
    affine_to_isotropic,
    check_group_law,
    isotropic_to_affine,
    solve_pfister,
)
from .census import (
    CensusReport,
    build_census,
    count_flags,
    enumerate_isotropic_subspaces,
    fit_degree,
    predicted_dimension,
    split_gram,
    z_strata,
)

__version__ = "0.1.0"
