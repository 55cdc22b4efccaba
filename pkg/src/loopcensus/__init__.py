"""Geodesic loop census and boundary dynamics on compact hyperbolic surfaces.

The package enumerates orbit points of a cocompact surface group acting on
the Poincare disk, counts geodesic loops by length, direction sector, and
homology class, fits the exponential growth law, and numerically verifies
the boundary-measure and flow-box lemmas behind the counting asymptotics.
"""

__version__ = "0.1.0"

from .boundary import (
    Arc,
    BoxParameters,
    FlowBox,
    arc_separation,
    b_gamma,
    b_gamma_range,
    box_mass,
    direct_membership_sample,
    future_past_arcs,
    gamma_star_box_members,
    gamma_star_box_membership,
    gamma_star_membership,
    gamma_star_t_membership,
    gamma_t_members,
    gamma_t_membership,
    gamma_t_witness,
    mobius_image_arc,
    mu_bar,
    ps_mass,
    ps_rule_quadrature,
    standard_parameters,
    tangent_in_box,
    theta_one,
    transformed_arc_mass,
    verify_full_branch,
    verify_inclusion_lemmas,
    verify_scaling_lemma,
)
from .census import (
    CensusBudgetError,
    CensusSnapshot,
    OrbitRecord,
    enumerate_orbit,
    equivalent_census,
    export_csv,
    extend_census,
    load_census,
    save_census,
)
from .geometry import (
    MoebiusMap,
    UnitTangent,
    angular_distance,
    busemann,
    busemann_rel,
    direction_angles,
    geodesic_between,
    geodesic_endpoints,
    geodesic_flow,
    hopf_coordinates,
    horocycle_gap,
    hyperbolic_distance,
    normalize_angle,
    tangent_from_hopf,
    tangent_pushforward,
)
from .groups import (
    CosetScheme,
    GroupPresentation,
    build_surface_group,
    word_from_string,
    word_to_string,
)
from .kernels import active_kernel_name, compiled_available, get_kernel
from .statistics import (
    FULL_SECTOR,
    AsymptoticFit,
    CountSeries,
    ProportionSeries,
    SectorSpec,
    coset_shares,
    count_arcs,
    count_by_coset,
    count_sector,
    cover_lift_proportion,
    fit_asymptotics,
    sector_constant_profile,
    write_columns,
    write_series_csv,
)

__all__ = [
    "Arc",
    "AsymptoticFit",
    "BoxParameters",
    "CensusBudgetError",
    "CensusSnapshot",
    "CosetScheme",
    "CountSeries",
    "FULL_SECTOR",
    "FlowBox",
    "GroupPresentation",
    "MoebiusMap",
    "OrbitRecord",
    "ProportionSeries",
    "SectorSpec",
    "UnitTangent",
    "__version__",
    "active_kernel_name",
    "angular_distance",
    "arc_separation",
    "b_gamma",
    "b_gamma_range",
    "box_mass",
    "build_surface_group",
    "busemann",
    "busemann_rel",
    "compiled_available",
    "coset_shares",
    "count_arcs",
    "count_by_coset",
    "count_sector",
    "cover_lift_proportion",
    "direct_membership_sample",
    "direction_angles",
    "enumerate_orbit",
    "equivalent_census",
    "export_csv",
    "extend_census",
    "fit_asymptotics",
    "future_past_arcs",
    "gamma_star_box_members",
    "gamma_star_box_membership",
    "gamma_star_membership",
    "gamma_star_t_membership",
    "gamma_t_members",
    "gamma_t_membership",
    "gamma_t_witness",
    "geodesic_between",
    "geodesic_endpoints",
    "geodesic_flow",
    "get_kernel",
    "hopf_coordinates",
    "horocycle_gap",
    "hyperbolic_distance",
    "load_census",
    "mobius_image_arc",
    "mu_bar",
    "normalize_angle",
    "ps_mass",
    "ps_rule_quadrature",
    "save_census",
    "sector_constant_profile",
    "standard_parameters",
    "tangent_from_hopf",
    "tangent_in_box",
    "tangent_pushforward",
    "theta_one",
    "transformed_arc_mass",
    "verify_full_branch",
    "verify_inclusion_lemmas",
    "verify_scaling_lemma",
    "word_from_string",
    "word_to_string",
    "write_columns",
    "write_series_csv",
]
