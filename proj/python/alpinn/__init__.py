"""Python bindings for the alpinn library."""

from ._core import (
    AlpinnError,
    ConfigError,
    DivergedError,
    exact,
    forward,
    grids,
    init_mlp,
    marching_cubes,
    preset,
    problem_names,
    relative_l1,
    train,
)

__all__ = [
    "AlpinnError",
    "ConfigError",
    "DivergedError",
    "exact",
    "forward",
    "grids",
    "init_mlp",
    "marching_cubes",
    "preset",
    "problem_names",
    "relative_l1",
    "train",
]
