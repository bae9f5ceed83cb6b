"""splitflow: spectral flow, Maslov and Hormander indices for split systems.

A numerical laboratory around an exactly solvable rank-2 selfadjoint system
on the circle, cut into two arcs: finite-dimensional symplectic index
calculus (Maslov index by crossing forms and by unitary winding, Hormander
index of four Lagrangians), boundary-condition machinery (Cauchy data
spaces, transmission and spectral boundary conditions), a truncated
sequence model of the boundary trace spaces with its weighted reduction,
and end-to-end exact-integer verification of the splitting identities for
spectral flow.
"""

from .conventions import CONVENTIONS, DEFAULT_CONVENTION
from .errors import (
    ConfigError,
    DiagnosticError,
    MaslovError,
    RejectedInstance,
    SolverError,
    SplitflowError,
    TrackingError,
)
from .families import (
    OperatorFamily,
    builtin_family,
    constant_family,
    family_from_config,
    family_to_config,
    mirror_symmetric_family,
    ramp_family,
    random_loop_family,
    random_pwc_family,
    random_smooth_family,
    reflection_even_family,
)
from .formulas import (
    SplittingReport,
    asymmetry_index,
    asymmetry_report,
    maslov_form_of_sf,
    vanishing_certificate,
    verify_aps_splitting,
    verify_splitting,
)
from .galerkin import spectral_flow_circle_galerkin
from .modes import (
    ModeVector,
    ReductionSetup,
    TangentialSpectrum,
    TraceSpace,
    aps_projector,
    block_rotation_path,
    choose_finite_correction,
    circle_spectrum,
    mode_cauchy_lagrangian,
    projection_difference_report,
    reduce_lagrangian,
    reduce_path,
    reduction_setup,
    sobolev_norm,
    spectrum_from_json,
    spectrum_to_json,
    split_and_reduce,
    stabilization_table,
)
from .operators import (
    BoundaryData,
    aps_boundary_lagrangian,
    boundary_data,
    cauchy_data_space,
    cauchy_path,
    circle_eigenvalues,
    domain_lagrangian_D0,
    domain_lagrangian_D1,
    eigenvalues_on_arc,
    green_form_residual,
    spectral_flow_arc,
    spectral_flow_circle,
    transfer_solution,
    unique_continuation_check,
)
from .symplectic import (
    IndexReport,
    LagrangianFrame,
    LagrangianPath,
    SymplecticSpace,
    connecting_path,
    gap_distance,
    graph_lagrangian,
    hormander_index,
    intersection_basis,
    intersection_dim,
    lagrangian_from_span,
    maslov_crossing,
    maslov_unitary,
    orthonormal_columns,
    random_lagrangian,
    random_path,
    standard_space,
    transversal_connecting_path,
)

__version__ = "0.1.0"
