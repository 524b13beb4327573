"""Interaction algebras, central MPOs and witness verification for 2D commuting-projector Hamiltonians."""

from .algebra import (
    OperatorAlgebra,
    center,
    commutant,
    generate_algebra,
    interaction_algebra,
    minimal_central_projectors,
    tensor_factorize,
)
from .breakability import (
    boundary_of,
    break_three,
    break_two,
    ext_int_factorization,
    holes_split,
    obstruction_witness_toric,
    synthetic_factorizable_model,
)
from .four_site import (
    FourSiteProblem,
    bound_campaign,
    bound_check,
    boundary_algebra,
    four_site_from_column,
    mps_perp_decompose,
    random_four_site,
    theorem3_witness,
)
from .lattice import LatticeModel, build_toric_code, random_commuting_model, validate
from .levin_wen import FSymbolTable, b_loop_dense, b_loop_mpo, fibonacci_table, pentagon_check, z2_table
from .mpo import MPO, compress, multiply, propagate
from .operators import LocalOperator, ResourceError
from .verifier import Witness, brute_force_zero_count, is_mask, propagation_equivalence, verify_witness

__version__ = "0.1.0"
