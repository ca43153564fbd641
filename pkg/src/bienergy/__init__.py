"""Numerical checks of bi-conformal energy: map zoo, distortion kernel, shell quadrature, experiments."""
from .diffgeo import (
    adjugate,
    det,
    differential,
    distortion_batch,
    distortion_sample,
    fd_differential,
    op_norm,
    pointwise_identity,
    sandwich_residual,
)
from .domains import DomainSpec, ball_section, make_domain
from .errors import (
    BiEnergyError,
    ConfigError,
    DomainViolation,
    FDUnstable,
    InsufficientShells,
    MaxDepthExceeded,
    NonFiniteIntegrand,
    OrientationViolation,
    ScaleOutOfDomain,
)
from .experiments import (
    ExperimentReport,
    ModulusProfile,
    cusp_threshold,
    energy_identity,
    exponent_sweep,
    modulus_profile,
    qc_witness,
)
from .mapzoo import (
    MapSpec,
    evaluate,
    image_region,
    make_cusp_pair,
    make_cut_pair,
    make_identity_map,
    make_radial_map,
    make_slit_pair,
    parse_map_id,
)
from .points import PointN
from .quad import (
    EnergyResult,
    Verdict,
    change_of_variables,
    classify,
    energy,
    shell_integrate,
    sphere_integral,
)

__version__ = "0.1.0"

__all__ = [
    "DomainSpec",
    "ball_section",
    "make_domain",
    "BiEnergyError",
    "ConfigError",
    "DomainViolation",
    "EnergyResult",
    "ExperimentReport",
    "FDUnstable",
    "InsufficientShells",
    "MapSpec",
    "MaxDepthExceeded",
    "ModulusProfile",
    "NonFiniteIntegrand",
    "OrientationViolation",
    "PointN",
    "ScaleOutOfDomain",
    "Verdict",
    "adjugate",
    "change_of_variables",
    "classify",
    "cusp_threshold",
    "det",
    "differential",
    "distortion_batch",
    "distortion_sample",
    "energy",
    "energy_identity",
    "evaluate",
    "exponent_sweep",
    "fd_differential",
    "image_region",
    "make_cusp_pair",
    "make_cut_pair",
    "make_identity_map",
    "make_radial_map",
    "make_slit_pair",
    "modulus_profile",
    "op_norm",
    "parse_map_id",
    "pointwise_identity",
    "qc_witness",
    "sandwich_residual",
    "shell_integrate",
    "sphere_integral",
]
