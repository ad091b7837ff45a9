"""Dense linear algebra and the block structure of h (x) k^."""

from .block import (
    BlockOperator,
    ampliate_bipartite,
    compress,
    delta,
    delta_perp,
    embed_noise_compress,
    hat,
    scale_h,
    unscale_h,
)
from .mat import (
    func_of_hermitian,
    herm_eig,
    mat_exp,
    op_norm,
    phi_funcs,
    positive_part,
)

__all__ = [
    "BlockOperator",
    "ampliate_bipartite",
    "compress",
    "delta",
    "delta_perp",
    "embed_noise_compress",
    "func_of_hermitian",
    "hat",
    "herm_eig",
    "mat_exp",
    "op_norm",
    "phi_funcs",
    "positive_part",
    "scale_h",
    "unscale_h",
]
