"""Relativistic Levy process simulation: sampler, Feynman-Kac estimator, reference solvers."""

from ._core import (
    ConfigError,
    FieldSpec,
    Grid,
    JumpPath,
    ModelParams,
    RadialMap,
    __version__,
    bessel_k,
    bessel_k_scaled,
    certify_epsilon,
    char_exponent,
    convolve_kernel,
    dumps_paths,
    estimate_u,
    experiment_names,
    gamma_fn,
    kernel_cdf_1d,
    levy_density,
    levy_khintchine_residual,
    loads_paths,
    make_fields,
    path_integrand,
    run,
    sample_endpoints,
    sample_increments,
    sample_path,
    small_jump_second_moment,
    sphere_area,
    split_step,
    sup_distance,
    tail_mass,
    transform_path,
    transition_kernel,
    truncation_budget,
)
from .io import SCHEMAS, load_manifest, read_csv, read_path_dump

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
