"""QFI engine, closed forms, bounds and compatibility checks."""
from .bounds import VarianceBounds, rot_diff_bounds, variance_bounds
from .closed import (
    AXIS_CONVENTION,
    closed_offdiag,
    closed_qfi_axis,
    closed_qfi_axis_half_turn,
    closed_qfi_matrix,
    closed_qfi_sru1_gamma,
    closed_qfi_sru2_gamma,
    fit_axis_convention,
    mu_max,
    numeric_qfi_axis,
    numeric_qfi_sru1_gamma,
    numeric_qfi_sru2_gamma,
    numeric_qfi_two_rotations,
    sum_rule,
    to_formula_axis,
)
from .compat import b_comm, b_comm_limit, numeric_xy_commutator, sld_commutator_gamma_phi, sld_sign_map
from .qfi import (
    QfiMatrix,
    derivative_fd,
    numeric_qfi,
    numeric_qfi_matrix,
    partial_derivatives,
    qfi_matrix,
    qfi_pure,
    sld_pure,
)
from .superchannel import superchannel_max, superchannel_qfi
