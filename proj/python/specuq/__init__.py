"""Spectral uncertainty and confidence measures for sampled LLM responses."""

from ._core import (
    EndpointError,
    Error,
    ResponseSet,
    ValidationError,
    __version__,
    arc_points,
    auarc,
    auroc,
    deg,
    ecc,
    ecc_embed,
    eigen_decompose,
    jaccard,
    laplacian,
    lexi_sim,
    load_dataset,
    partition,
    pick_best,
    read_dataset,
    rouge_l,
    run_cli,
    score,
    similarity_matrix,
    symmetrize,
    to_probabilities,
    tokenize,
    u_eigv,
)

__all__ = [
    "EndpointError",
    "Error",
    "ResponseSet",
    "ValidationError",
    "__version__",
    "arc_points",
    "auarc",
    "auroc",
    "deg",
    "ecc",
    "ecc_embed",
    "eigen_decompose",
    "jaccard",
    "laplacian",
    "lexi_sim",
    "load_dataset",
    "partition",
    "pick_best",
    "read_dataset",
    "rouge_l",
    "run_cli",
    "score",
    "similarity_matrix",
    "symmetrize",
    "to_probabilities",
    "tokenize",
    "u_eigv",
]
