"""Satellite QKD link budgets, error models and protocol simulation."""

from ._core import (
    ConfigError,
    EstimationError,
    InfeasibleError,
    KeyDepletionError,
    Scenario,
    __version__,
    accidental_rate,
    binary_entropy,
    dark_count_rate,
    db_to_transmittance,
    geo_max_latitude,
    orbital_period,
    pass_profile,
    run_cli,
    secure_key_fraction,
    slant_range,
    table1,
    transmittance_to_db,
    xor_relay,
)

__all__ = [
    "ConfigError",
    "EstimationError",
    "InfeasibleError",
    "KeyDepletionError",
    "Scenario",
    "__version__",
    "accidental_rate",
    "binary_entropy",
    "dark_count_rate",
    "db_to_transmittance",
    "geo_max_latitude",
    "orbital_period",
    "pass_profile",
    "run_cli",
    "secure_key_fraction",
    "slant_range",
    "table1",
    "transmittance_to_db",
    "xor_relay",
]
