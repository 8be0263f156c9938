# Weights Module
from .weights import (
    Weight,
    WeightKind,
    ReverseDoublingFit,
    measure,
    ap_characteristic,
    a1_characteristic,
    doubling_constant,
    check_ap_growth,
    ap_monotonicity,
    check_reverse_doubling,
    membership_probe,
)

__all__ = [
    "Weight",
    "WeightKind",
    "ReverseDoublingFit",
    "measure",
    "ap_characteristic",
    "a1_characteristic",
    "doubling_constant",
    "check_ap_growth",
    "ap_monotonicity",
    "check_reverse_doubling",
    "membership_probe",
]
