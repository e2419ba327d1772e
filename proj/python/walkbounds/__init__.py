"""Python access to the walkbounds core: special functions, the bounds
engine and the config-driven pipeline."""

import json

from ._walkbounds import (
    A_carne,
    A_ledr,
    DomainError,
    Error,
    F,
    FG_inv,
    FG_inv_series,
    G,
    InvalidInput,
    boundary_entropy_free,
    chebyshev_value,
    chernov_tail_bound,
    fg_inv_coefficients,
    free_group_estimates,
    free_group_hitting,
    implied_lower_bounds,
    sphere_sizes,
    theorem1_bounds,
)
from . import _walkbounds

__all__ = [
    "A_carne", "A_ledr", "DomainError", "Error", "F", "FG_inv", "FG_inv_series", "G",
    "InvalidInput", "boundary_entropy_free", "chebyshev_value", "chernov_tail_bound",
    "check_bounds", "fg_inv_coefficients", "free_group_estimates", "free_group_hitting",
    "implied_lower_bounds", "run", "sphere_sizes", "theorem1_bounds",
]


def check_bounds(symmetric=True, **inputs):
    """Rows of the bounds engine. Pass h, rho, ell, v as floats (exact) or
    (value, error) pairs, M2 and k as floats."""
    return json.loads(_walkbounds._check_bounds(inputs, symmetric))


def run(config_text, seed=None, stages=None):
    """Run the pipeline on a YAML or JSON config string. Returns a dict with
    report, bounds_md, series_csv and exit_code; the timestamp is left empty."""
    return json.loads(_walkbounds._run(config_text, seed, stages))
