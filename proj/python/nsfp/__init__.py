"""Python access to the nsfp solver core."""

from ._core import (
    Error,
    Params,
    RunConfig,
    divergence,
    fene_eval,
    fit_frequency,
    helmholtz_project,
    maxwellian,
    parse_config,
    parse_config_string,
    pressure_potential,
    rouse_min_eigenvalue,
    set_threads,
    simulate,
    validate,
    verify,
)

__all__ = [
    "Error",
    "Params",
    "RunConfig",
    "divergence",
    "fene_eval",
    "fit_frequency",
    "helmholtz_project",
    "maxwellian",
    "parse_config",
    "parse_config_string",
    "pressure_potential",
    "rouse_min_eigenvalue",
    "set_threads",
    "simulate",
    "validate",
    "verify",
]
