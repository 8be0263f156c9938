"""
Norms Test - Lebesgue / Morrey / BMO 范数测试
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid, GridFunction, Ball, sample
from grid.family import BallFamily
from weights.weights import Weight
from norms.norms import PhiFunction, lp_w_ball, weak_lp_w_ball, morrey_norm, morrey_report, tail_integral
from norms.bmo import (
    bmo_norm,
    bmo_norm_weighted,
    bmo_lp_equivalence,
    bmo_log_pair_check,
    john_nirenberg_probe,
)
from utils.data_loader import bump
from utils.errors import NormError


def _grid() -> Grid:
    return Grid(1, 4.0, 129)


def _bump(grid, center=0.0, radius=1.0):
    return sample(grid, lambda x: bump(x, np.array([center]), radius))


def test_lp_of_constant():
    """测试常数函数的 L^p_w 范数"""
    grid = _grid()
    w = Weight.constant(grid)
    one = GridFunction.constant(grid, 1.0)
    ball = Ball((0.0,), 1.0)
    assert lp_w_ball(one, w, 2.0, ball) == pytest.approx(np.sqrt(33 * grid.spacing))
    # 常数函数的弱范数与强范数相等
    assert weak_lp_w_ball(one, w, 2.0, ball) == pytest.approx(lp_w_ball(one, w, 2.0, ball))


def test_weak_below_strong():
    """测试离散 Chebyshev：弱范数不超过强范数"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    f = _bump(grid, 0.3, 1.5)
    for r in (0.25, 1.0, 3.0):
        ball = Ball((0.0,), r)
        for p in (1.0, 2.0, 3.0):
            assert weak_lp_w_ball(f, w, p, ball) <= lp_w_ball(f, w, p, ball) * (1 + 1e-12)


def test_lebesgue_phi_collapses():
    """测试 φ = w(B)^{-1/p} 时 Morrey 范数即球族上 L^p_w 范数的最大值"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    f = _bump(grid, -0.5, 1.0)
    family = BallFamily.lattice(grid)
    expected = max(lp_w_ball(f, w, 2.0, ball) for ball in family)
    assert morrey_norm(f, w, 2.0, PhiFunction.lebesgue(w, 2.0), family) == pytest.approx(expected, rel=1e-12)
    # 参数相同的另一个权对象同样按 L^p_w 范数折叠
    other = w.on(grid)
    assert morrey_norm(f, w, 2.0, PhiFunction.lebesgue(other, 2.0), family) == expected


def test_classical_morrey_of_constant():
    """测试常数函数的经典 Morrey 范数 sup r^{(n−λ)/p}"""
    grid = _grid()
    w = Weight.constant(grid)
    one = GridFunction.constant(grid, 1.0)
    report = morrey_report(one, w, 2.0, PhiFunction.power(2.0, 0.5, 1), BallFamily.lattice(grid))
    assert report.value == pytest.approx(4.0 ** 0.25, rel=1e-10)
    assert report.argmax_ball["radius"] == pytest.approx(4.0)


def test_morrey_is_a_norm():
    """测试 Morrey 范数的齐次性与三角不等式"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    phi = PhiFunction.weighted_morrey(w, 2.0, 0.5)
    family = BallFamily.lattice(grid)
    f = _bump(grid, 0.0, 1.0)
    g = _bump(grid, 1.5, 0.5)
    nf = morrey_norm(f, w, 2.0, phi, family)
    ng = morrey_norm(g, w, 2.0, phi, family)
    assert morrey_norm(f.scaled(3.0), w, 2.0, phi, family) == pytest.approx(3.0 * nf, rel=1e-12)
    assert morrey_norm(f + g, w, 2.0, phi, family) <= (nf + ng) * (1 + 1e-12)
    assert morrey_norm(GridFunction.zeros(grid), w, 2.0, phi, family) == 0.0


def test_norm_parameter_checks():
    """测试 p < 1 与非正 φ"""
    grid = _grid()
    w = Weight.constant(grid)
    f = _bump(grid)
    with pytest.raises(NormError):
        lp_w_ball(f, w, 0.5, Ball((0.0,), 1.0))
    bad = PhiFunction.custom(2.0, lambda c, r: 0.0)
    with pytest.raises(NormError):
        morrey_norm(f, w, 2.0, bad, BallFamily.lattice(grid))
    with pytest.raises(NormError):
        PhiFunction.from_config({"kind": "weighted_morrey"}, 2.0, 1)


def test_tail_integral_of_constant():
    """测试常数函数的尾积分：被积函数恒为 1，积分为 ln(t_to/t_from)"""
    grid = _grid()
    w = Weight.constant(grid)
    one = GridFunction.constant(grid, 1.0)
    result = tail_integral(one, w, 2.0, (0.0,), 0.5, 2.0)
    assert result["value"] == pytest.approx(np.log(4.0), rel=1e-10)
    assert result["last_octave_mass"] == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(NormError):
        tail_integral(one, w, 2.0, (0.0,), 2.0, 0.5)
    with pytest.raises(NormError):
        tail_integral(one, w, 2.0, (0.0,), 0.5, 2.0, korder=1)


def test_bmo_basic_properties():
    """测试 BMO：常数为零、平移不变、齐次"""
    grid = _grid()
    family = BallFamily.lattice(grid)
    b = sample(grid, lambda x: x[:, 0])
    assert bmo_norm(GridFunction.constant(grid, 5.0), family) == pytest.approx(0.0, abs=1e-12)
    base = bmo_norm(b, family)
    assert base > 0
    shifted = b.scaled(3.0) + GridFunction.constant(grid, 5.0)
    assert bmo_norm(shifted, family) == pytest.approx(3.0 * base, rel=1e-10)
    w = Weight.constant(grid, 2.0)
    assert bmo_norm_weighted(b, w, family) == pytest.approx(base, rel=1e-10)


def test_bmo_lp_ratios():
    """测试 L^p 振幅比：p=1 时为 1，且随 p 不减"""
    grid = _grid()
    b = sample(grid, lambda x: np.log(np.abs(x[:, 0]) + 0.5 * grid.spacing))
    result = bmo_lp_equivalence(b, BallFamily.lattice(grid))
    ratios = result["ratios"]
    assert ratios["1.0"] == pytest.approx(1.0, rel=1e-12)
    assert ratios["1.0"] <= ratios["2.0"] * (1 + 1e-12)
    assert ratios["2.0"] <= ratios["4.0"] * (1 + 1e-12)


def test_log_pair_check_constant_is_vacuous():
    """测试常数符号的对数型估计为空检查"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    result = bmo_log_pair_check(GridFunction.constant(grid, 1.0), w, BallFamily.lattice(grid), 1)
    assert result["vacuous"]
    assert result["C_fit_i"] == 0.0
    assert result["num_pairs"] > 0
    with pytest.raises(NormError):
        bmo_log_pair_check(GridFunction.constant(grid, 1.0), w, BallFamily.lattice(grid), 0)


def test_log_pair_check_linear_symbol():
    """测试线性符号的对数型估计给出有限常数"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    b = sample(grid, lambda x: x[:, 0])
    result = bmo_log_pair_check(b, w, BallFamily.lattice(grid, num_centers=3, num_radii=4), 1)
    assert not result["vacuous"]
    assert 0.0 < result["C_fit_i"] < np.inf
    assert result["worst_pair_i"] is not None


def test_john_nirenberg_probe():
    """测试水平集分布探针"""
    grid = _grid()
    ball = Ball((0.0,), 4.0)
    b = sample(grid, lambda x: x[:, 0])
    report = john_nirenberg_probe(b, None, ball)
    assert not report["empty"]
    assert report["C2"] > 0
    assert np.isfinite(report["rmse"])
    assert report["lp_ratios"]["1.0"] == pytest.approx(1.0)
    assert all(u >= v for u, v in zip(report["distribution"], report["distribution"][1:]))

    flat = john_nirenberg_probe(GridFunction.constant(grid, 2.0), None, ball)
    assert flat["empty"]


def test_lebesgue_phi_with_analytic_measure_does_not_collapse():
    """测试解析测度模式的 φ = w(B)^{-1/p} 按一般公式逐球计算"""
    grid = _grid()
    w = Weight.power(grid, 0.5)
    f = _bump(grid, -0.5, 1.0)
    family = BallFamily.lattice(grid, num_centers=3, num_radii=4)
    phi = PhiFunction.lebesgue(w, 2.0).with_mode("analytic")
    expected = max(
        lp_w_ball(f, w, 2.0, ball) * (w.analytic_measure(ball.center, ball.radius) / w.measure(ball)) ** 0.5
        for ball in family
    )
    assert morrey_norm(f, w, 2.0, phi, family) == pytest.approx(expected, rel=1e-12)
    # 不同参数的权不能折叠
    assert not w.same_as(Weight.power(grid, 0.25))
    assert w.same_as(Weight.power(grid, 0.5))


def test_morrey_of_indicator():
    """测试 χ_[−1,1]，p = 1，λ = 0 的经典 Morrey 范数约为 1"""
    grid = _grid()
    w = Weight.constant(grid)
    chi = sample(grid, lambda x: (np.abs(x[:, 0]) <= 1.0 + 1e-9).astype(float))
    family = BallFamily.single((0.0,), [1.0, 2.0, 4.0])
    report = morrey_report(chi, w, 1.0, PhiFunction.power(1.0, 0.0, 1), family)
    # sup_r r·|B ∩ [−1,1]|/|B|：r = 1 时恰为 1，大球上只差闭球端点的离散计数
    assert report.value == pytest.approx(4.0 * 33 / 129, rel=1e-12)
    assert report.value == pytest.approx(1.0, rel=0.03)
    single = morrey_norm(chi, w, 1.0, PhiFunction.power(1.0, 0.0, 1), BallFamily.single((0.0,), [1.0]))
    assert single == pytest.approx(1.0, rel=1e-12)


def test_weighted_bmo_with_unit_weight_is_plain_bmo():
    """测试 w ≡ 1 时加权 BMO 范数与 BMO 范数相同"""
    grid = _grid()
    family = BallFamily.lattice(grid)
    b = sample(grid, lambda x: np.log(np.abs(x[:, 0]) + 0.5 * grid.spacing))
    assert bmo_norm_weighted(b, Weight.constant(grid), family) == pytest.approx(bmo_norm(b, family), rel=1e-12)
