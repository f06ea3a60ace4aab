"""Noise spectra of an optomechanical force sensor with intracavity squeezing."""

from ._core import (
    ConfigError,
    StabilityError,
    __version__,
    default_grid,
    derived,
    figure,
    figure_ids,
    noise_budget,
    simulate,
    spectrum,
    sql_psd,
    table1,
    threshold,
    validate,
)

__all__ = [
    "ConfigError",
    "StabilityError",
    "__version__",
    "default_grid",
    "derived",
    "figure",
    "figure_ids",
    "noise_budget",
    "simulate",
    "spectrum",
    "sql_psd",
    "table1",
    "threshold",
    "validate",
]
