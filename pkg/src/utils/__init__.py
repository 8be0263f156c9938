# Utils Module
# data_loader 依赖 grid，按模块路径导入（utils.data_loader），不在包初始化时加载
from .errors import (
    LabError,
    GridError,
    KernelError,
    WeightError,
    OperatorError,
    NormError,
    ConditionError,
    ParameterError,
)
from .logger import ExperimentLogger, MetricsCollector, get_logger
from .serialize import json_safe

__all__ = [
    "LabError",
    "GridError",
    "KernelError",
    "WeightError",
    "OperatorError",
    "NormError",
    "ConditionError",
    "ParameterError",
    "ExperimentLogger",
    "MetricsCollector",
    "get_logger",
    "json_safe",
]
