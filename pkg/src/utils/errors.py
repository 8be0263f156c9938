"""
Errors - 统一异常层级
"""


class LabError(Exception):
    """实验室基础异常"""
    pass


class GridError(LabError):
    """网格/球/场构造错误"""
    pass


class KernelError(LabError):
    """测试核构造或卷积错误"""
    pass


class WeightError(LabError):
    """权函数错误"""
    pass


class OperatorError(LabError):
    """平方函数算子错误"""
    pass


class NormError(LabError):
    """范数计算错误"""
    pass


class ConditionError(LabError):
    """Hardy 算子与配对条件错误"""
    pass


class ParameterError(LabError):
    """实验配置参数错误"""
    pass
