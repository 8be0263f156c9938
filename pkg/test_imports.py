#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""测试所有核心模块是否可以正常导入"""

import sys
from pathlib import Path

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent / "src"))

print("测试模块导入...")

try:
    from grid.grid import Grid, GridFunction, Ball
    from grid.family import BallFamily
    print("✓ Grid / BallFamily 导入成功")
except Exception as e:
    print(f"✗ Grid 导入失败: {e}")

try:
    from kernels.kernels import make_dictionary, verify_admissible
    print("✓ 测试核字典 导入成功")
except Exception as e:
    print(f"✗ 测试核字典 导入失败: {e}")

try:
    from operators.square import SquareFunctionEngine
    print("✓ SquareFunctionEngine 导入成功")
except Exception as e:
    print(f"✗ SquareFunctionEngine 导入失败: {e}")

try:
    from weights.weights import Weight, membership_probe
    print("✓ Weight 导入成功")
except Exception as e:
    print(f"✗ Weight 导入失败: {e}")

try:
    from norms.norms import PhiFunction, morrey_norm
    from norms.bmo import bmo_norm
    print("✓ Morrey / BMO 范数 导入成功")
except Exception as e:
    print(f"✗ 范数 导入失败: {e}")

try:
    from conditions.conditions import condition_eval, remark_1_7_tail
    from conditions.hardy import hardy_bound_check
    print("✓ 条件与 Hardy 算子 导入成功")
except Exception as e:
    print(f"✗ 条件 导入失败: {e}")

try:
    from harness.runner import ExperimentRunner
    print("✓ ExperimentRunner 导入成功")
except Exception as e:
    print(f"✗ ExperimentRunner 导入失败: {e}")

print("\n所有核心模块导入测试完成！")
