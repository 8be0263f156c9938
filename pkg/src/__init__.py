"""
Square Function Lab

内蕴平方函数 G_α、g_α、g*_λ 及其交换子在广义加权 Morrey 空间上的数值实验平台。
"""

__version__ = "1.0.0"

__all__ = [
    "grid",
    "kernels",
    "operators",
    "weights",
    "norms",
    "conditions",
    "harness",
    "utils",
]
