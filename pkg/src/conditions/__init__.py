# Conditions Module
from .hardy import (
    RadialProfile,
    Measure1D,
    MeasureKind,
    HardyBoundReport,
    geometric_grid,
    hardy,
    hardy_log,
    hardy_constant,
    hardy_bound_check,
)
from .conditions import (
    ConditionKind,
    ConditionReport,
    ConditionEvaluator,
    condition_eval,
    remark_1_7_tail,
)

__all__ = [
    "RadialProfile",
    "Measure1D",
    "MeasureKind",
    "HardyBoundReport",
    "geometric_grid",
    "hardy",
    "hardy_log",
    "hardy_constant",
    "hardy_bound_check",
    "ConditionKind",
    "ConditionReport",
    "ConditionEvaluator",
    "condition_eval",
    "remark_1_7_tail",
]
