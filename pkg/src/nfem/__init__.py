"""Interior electromagnetic near-field simulation and sampling-method imaging.

A dipole source inside a penetrable spherical cavity generates measurable
tangential near fields on a sphere inside the cavity; the linear sampling
machinery in this package turns such measurements back into an image of the
cavity boundary.
"""

from .errors import (
    ChecksumError,
    ConfigError,
    DataFormatError,
    DegenerateConfigError,
    DimensionMismatchError,
    InvalidArgumentError,
    MalformedHeaderError,
    NfemError,
    SingularPointError,
    UnsupportedGeometryError,
)
from .green import (
    Dipole,
    curl_incident_field,
    grad_phi,
    green_apply,
    green_tensor,
    incident_field,
    phi,
)
from .forward import (
    LayeredCavityConfig,
    ModeCoefficients,
    Shell,
    data_truncation_order,
    effective_wavenumber,
    interface_residual,
    maxwell_eigenvalue_margin,
    scattered_field,
    solve_modes,
    source_expansion,
    truncation_order,
)
from .measurement import (
    NearFieldMatrix,
    NoiseSpec,
    SphereGrid,
    add_noise,
    assemble_nearfield,
    build_sphere_grid,
    read_nearfield,
    write_manifest,
    write_nearfield,
)
from .lsm import (
    ImagingField,
    SamplingGrid,
    SvdFactorization,
    TikhonovSolution,
    build_sampling_grid,
    indicator_at,
    morozov_alpha,
    rhs_matrix,
    rhs_vector,
    run_imaging,
    single_layer_eval,
    svd_factorize,
    tikhonov_solve,
)
from .config import RunConfig, default_config_text, load_config
from .output import (
    read_vtk_scalars,
    write_cross_sections,
    write_imaging_csv,
    write_imaging_vtk,
)

__version__ = "0.1.0"

__all__ = [
    "ChecksumError",
    "ConfigError",
    "DataFormatError",
    "DegenerateConfigError",
    "DimensionMismatchError",
    "InvalidArgumentError",
    "MalformedHeaderError",
    "NfemError",
    "SingularPointError",
    "UnsupportedGeometryError",
    "Dipole",
    "curl_incident_field",
    "grad_phi",
    "green_apply",
    "green_tensor",
    "incident_field",
    "phi",
    "LayeredCavityConfig",
    "ModeCoefficients",
    "Shell",
    "data_truncation_order",
    "effective_wavenumber",
    "interface_residual",
    "maxwell_eigenvalue_margin",
    "scattered_field",
    "solve_modes",
    "source_expansion",
    "truncation_order",
    "NearFieldMatrix",
    "NoiseSpec",
    "SphereGrid",
    "add_noise",
    "assemble_nearfield",
    "build_sphere_grid",
    "read_nearfield",
    "write_manifest",
    "write_nearfield",
    "ImagingField",
    "SamplingGrid",
    "SvdFactorization",
    "TikhonovSolution",
    "build_sampling_grid",
    "indicator_at",
    "morozov_alpha",
    "rhs_matrix",
    "rhs_vector",
    "run_imaging",
    "single_layer_eval",
    "svd_factorize",
    "tikhonov_solve",
    "RunConfig",
    "default_config_text",
    "load_config",
    "read_vtk_scalars",
    "write_cross_sections",
    "write_imaging_csv",
    "write_imaging_vtk",
]
