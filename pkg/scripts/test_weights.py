"""
Weights Test - 权函数与 A_p 诊断测试
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid, GridFunction, Ball
from grid.family import BallFamily
from weights.weights import (
    Weight,
    ap_characteristic,
    a1_characteristic,
    doubling_constant,
    check_ap_growth,
    ap_monotonicity,
    check_reverse_doubling,
    membership_probe,
)
from utils.errors import WeightError


FAMILY = {"num_centers": 9, "num_radii": 8, "extent": 0.5}


def _grid(points: int = 129) -> Grid:
    return Grid(1, 4.0, points)


def test_constant_weight():
    """测试常数权：测度、A_p 常数为 1"""
    grid = _grid()
    w = Weight.constant(grid, 2.0)
    ball = Ball((0.0,), 1.0)
    assert w.measure(ball) == pytest.approx(2.0 * grid.spacing * 33)
    assert w.analytic_measure((0.0,), 1.0) == pytest.approx(4.0)
    family = BallFamily.lattice(grid)
    assert ap_characteristic(w, 2.0, family) == pytest.approx(1.0, abs=1e-12)
    assert a1_characteristic(w, family) == pytest.approx(1.0, abs=1e-12)


def test_power_weight_values():
    """测试幂权在原点取 w(h/2)"""
    grid = _grid(33)
    w = Weight.power(grid, -0.5)
    assert w.values[grid.origin_index] == pytest.approx((0.5 * grid.spacing) ** -0.5)
    assert w.label == "|x|^-0.5"
    with pytest.raises(WeightError):
        Weight.power(grid, -1.0)


def test_power_weight_analytic_measure():
    """测试一维幂权的解析球测度"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    # ∫_{-r}^{r} |x|^{1/2} dx = (4/3) r^{3/2}
    assert w.analytic_measure((0.0,), 4.0) == pytest.approx(4.0 / 3.0 * 8.0)
    assert w.analytic_measure((2.0,), 1.0) == pytest.approx((3.0 ** 1.5 - 1.0) / 1.5)
    big = Ball((0.0,), 16.0)
    assert w.extended_measure(big) == pytest.approx(4.0 / 3.0 * 64.0)


def test_doubling_lebesgue():
    """测试 Lebesgue 测度的倍测度常数接近 2^n"""
    grid = _grid()
    h = grid.spacing
    w = Weight.constant(grid)
    D = doubling_constant(w, BallFamily.single((0.0,), [4 * h, 8 * h, 16 * h]))
    assert abs(D - 2.0) <= 0.1 * 2.0


def test_ap_membership_probe():
    """测试 A_2 成员判定：|x|^{1/2} 接受，|x|^{3/2} 拒绝"""
    grid = _grid()
    inside = membership_probe(Weight.power(grid, 0.5), 2.0, FAMILY)
    outside = membership_probe(Weight.power(grid, 1.5), 2.0, FAMILY)
    assert inside["accepted"]
    assert not outside["accepted"]
    assert outside["growth"] > inside["growth"]


def test_a1_membership_probe():
    """测试 A_1 成员判定：|x|^{-1/2} 接受，|x|^{1/2} 拒绝"""
    grid = _grid()
    assert membership_probe(Weight.power(grid, -0.5), None, FAMILY)["accepted"]
    assert not membership_probe(Weight.power(grid, 0.5), None, FAMILY)["accepted"]


def test_ap_growth_exact_form():
    """测试离散精确形式 w(λB) ≤ (#λB/#B)^p [w]_{A_p(λB)} w(B)"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    result = check_ap_growth(w, 2.0, BallFamily.lattice(grid, r_max=1.0))
    assert result["checked"] > 0
    assert result["worst_exact"] <= 1.0 + 1e-9


def test_ap_monotone_in_p():
    """测试 A_p 特征随 p 不增"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    result = ap_monotonicity(w, [1.5, 2.0, 3.0, 4.0], BallFamily.lattice(grid))
    assert result["worst_increase"] <= 1.0 + 1e-9


def test_reverse_doubling_fit():
    """测试 reverse doubling 指数拟合与留出检验"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    delta = check_reverse_doubling(w, 2.0, BallFamily.lattice(grid))
    fit = w.diagnostics["reverse_doubling"]
    assert 0.0 < delta <= 1.0
    assert fit["num_fit"] > 0 and fit["num_holdout"] > 0
    assert fit["C"] > 0 and fit["C_holdout"] > 0


def test_dual_weight_overflow():
    """测试对偶权需要 p > 1"""
    grid = _grid(33)
    with pytest.raises(WeightError):
        Weight.constant(grid).dual_values(1.0)
    with pytest.raises(WeightError):
        ap_characteristic(Weight.constant(grid), 1.0, BallFamily.lattice(grid))


def test_characteristics_at_least_one_on_random_weights():
    """测试随机权的 A_p 与 A_1 特征不小于 1（离散 Hölder 不等式）"""
    grid = _grid(65)
    family = BallFamily.lattice(grid, **FAMILY)
    rng = np.random.default_rng(11)
    for _ in range(5):
        vals = np.exp(rng.normal(scale=1.5, size=grid.num_nodes))
        w = Weight.tabulated(GridFunction(grid, vals))
        for p in (1.5, 2.0, 3.0):
            assert ap_characteristic(w, p, family) >= 1.0 - 1e-12
        assert a1_characteristic(w, family) >= 1.0 - 1e-12
