"""Preconditioner selection from sparse-matrix features and images."""

from ._precsel import (
    SparseMatrix,
    accuracy,
    condest,
    encode_image,
    extreme_eigs,
    features,
    load_matrix,
    optimal_set,
    poisson2d,
    precond_kinds,
    random_spd,
    slowdown,
    solve,
    time_pair,
    tridiagonal,
)

__all__ = [
    "SparseMatrix",
    "accuracy",
    "condest",
    "encode_image",
    "extreme_eigs",
    "features",
    "load_matrix",
    "optimal_set",
    "poisson2d",
    "precond_kinds",
    "random_spd",
    "slowdown",
    "solve",
    "time_pair",
    "tridiagonal",
]
