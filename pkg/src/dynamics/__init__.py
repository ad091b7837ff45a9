"""Quantum random walks and their limit cocycles."""

from .cocycle import (
    SemigroupGen,
    cocycle_matrix_element,
    cocycle_matrix_elements,
    euler_compare,
    jgj_matrix_element_check,
    semigroup_generator,
    time_grid,
    vacuum_semigroup,
)
from .walk import (
    StepFunction,
    ToyFockOperator,
    inner_integral,
    step_average,
    toyfock_flow,
    toyfock_walk,
    walk_matrix_element,
    walk_matrix_elements,
    walk_step_matrix,
)

__all__ = [
    "SemigroupGen",
    "StepFunction",
    "ToyFockOperator",
    "cocycle_matrix_element",
    "cocycle_matrix_elements",
    "euler_compare",
    "inner_integral",
    "jgj_matrix_element_check",
    "semigroup_generator",
    "step_average",
    "time_grid",
    "toyfock_flow",
    "toyfock_walk",
    "vacuum_semigroup",
    "walk_matrix_element",
    "walk_matrix_elements",
    "walk_step_matrix",
]
