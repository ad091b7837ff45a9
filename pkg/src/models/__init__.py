"""Concrete generator families and their limits."""

from .families import (
    GeneratorFamily,
    compressed_family,
    preservation_family,
    realize_coisometric,
    realize_from_generator,
    realize_general,
    realize_isometric,
    realize_unitary_exp,
    realize_unitary_params,
    table_family,
    v_l,
    v_zlw,
)
from .rqi import (
    RQIParams,
    bipartite_closed_form,
    bipartite_coordinate_form,
    bipartite_factors,
    bipartite_family,
    bipartite_series_limit,
    rqi_family,
    rqi_limit,
    rqi_total,
)

__all__ = [
    "GeneratorFamily",
    "RQIParams",
    "bipartite_closed_form",
    "bipartite_coordinate_form",
    "bipartite_factors",
    "bipartite_family",
    "bipartite_series_limit",
    "compressed_family",
    "preservation_family",
    "realize_coisometric",
    "realize_from_generator",
    "realize_general",
    "realize_isometric",
    "realize_unitary_exp",
    "realize_unitary_params",
    "rqi_family",
    "rqi_limit",
    "rqi_total",
    "table_family",
    "v_l",
    "v_zlw",
]
