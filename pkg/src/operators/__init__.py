# Operators Module
from .scales import ScaleGrid
from .square import (
    SquareFunctionEngine,
    SquareFunctionResult,
    a_alpha,
    g_sq,
    g_vertical,
    g_star,
    g_sq_aperture_pow2,
    a_alpha_comm,
    comm_g_sq,
    comm_g_vertical,
    comm_g_star,
    vector_apply,
)

__all__ = [
    "ScaleGrid",
    "SquareFunctionEngine",
    "SquareFunctionResult",
    "a_alpha",
    "g_sq",
    "g_vertical",
    "g_star",
    "g_sq_aperture_pow2",
    "a_alpha_comm",
    "comm_g_sq",
    "comm_g_vertical",
    "comm_g_star",
    "vector_apply",
]
