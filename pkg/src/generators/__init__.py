"""Stochastic generators: the series-product monoid and the Holevo transform."""

from .holevo import (
    QParams,
    f_from_skew_params,
    holevo_transform,
    q_from_unitary_params,
    tau_exp_oracle,
)
from .ito import (
    GeneratorParams,
    StructureKind,
    StructureReport,
    assemble_FZLW,
    compose_params,
    decompose_FZLW,
    growth_bound,
    series_product,
    structure_report,
)

__all__ = [
    "GeneratorParams",
    "QParams",
    "StructureKind",
    "StructureReport",
    "assemble_FZLW",
    "compose_params",
    "decompose_FZLW",
    "f_from_skew_params",
    "growth_bound",
    "holevo_transform",
    "q_from_unitary_params",
    "series_product",
    "structure_report",
    "tau_exp_oracle",
]
