# Kernels Module
from .kernels import (
    TestKernel,
    KernelDictionary,
    AdmissibilityReport,
    make_dictionary,
    verify_admissible,
    dilated_convolve,
    dilated_taps,
    export_kernel,
)

__all__ = [
    "TestKernel",
    "KernelDictionary",
    "AdmissibilityReport",
    "make_dictionary",
    "verify_admissible",
    "dilated_convolve",
    "dilated_taps",
    "export_kernel",
]
