"""Confluent primary fields of the WZNW model from free-field realizations."""

from .correlators import (
    ConvergenceError,
    CorrelatorValue,
    InsertionConfig,
    IntegrationResult,
    MasterFunctionValue,
    PrimaryInsertion,
    Ray,
    Segment,
    SingularConfigurationError,
    index_partitions,
    integrate,
    omega_sl2_closed,
    omega_ward,
    omega_wick,
    psi_eval,
)
from .diffreal import (
    DiffOp,
    compute_dP,
    compute_P,
    constant_term,
    jet_lift,
    jet_rule,
    realize,
    rep_check,
    screening_constant_term,
    screening_op,
)
from .fields import Field, OPEResult, contract, normal_ordered_product, ope
from .lie import (
    LieAlgebraData,
    TruncatedElement,
    UnsupportedAlgebraError,
    build_algebra,
    parse_algebra,
    parse_element,
    truncated_basis,
    truncated_bracket,
)
from .poly import MultiPoly
from .verma import VermaModule, WeightTuple, matrix_element, normal_order
from .wakimoto import (
    Currents,
    MissingRCoefficientsError,
    RSolution,
    build_currents,
    dbar,
    free_field_T,
    mode_action,
    primary_field,
    solve_r_coeffs,
    solved_currents,
    sugawara_T,
    t_phi_ope,
    virasoro_by_residue,
    virasoro_commutator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
