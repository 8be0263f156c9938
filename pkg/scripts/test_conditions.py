"""
Conditions Test - Hardy 算子、(φ₁, φ₂) 条件与尾积分测试
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid
from grid.family import BallFamily
from weights.weights import Weight
from norms.norms import PhiFunction
from conditions.hardy import RadialProfile, Measure1D, hardy, hardy_log, hardy_bound_check, geometric_grid
from conditions.conditions import ConditionKind, ConditionEvaluator, condition_eval, horizon_grid, remark_1_7_tail
from utils.errors import ConditionError


T_MAX = 2.0 ** 20


def _const_weight() -> Weight:
    return Weight.constant(Grid(1, 4.0, 33))


def test_hardy_closed_form():
    """测试 g = r^{-1/2} 时 Hg(1) = 2(1 − √r_min)"""
    mu = Measure1D.lebesgue()
    g = RadialProfile.from_function(lambda r: r ** -0.5, 1e-8, 1.0)
    assert hardy(g, mu, 1.0) == pytest.approx(2.0 * (1.0 - 1e-4), rel=1e-3)
    assert hardy_log(g, mu, 1.0, 0) == hardy(g, mu, 1.0)
    assert hardy(g, mu, g.r[0]) == 0.0


def test_hardy_log_dominates():
    """测试对数因子 ln(e + t/r) ≥ 1 使 H₁ ≥ H"""
    mu = Measure1D.lebesgue()
    g = RadialProfile.from_function(lambda r: r ** -0.25, 1e-4, 10.0)
    for t in (0.01, 1.0, 10.0):
        assert hardy_log(g, mu, t, 1) >= hardy(g, mu, t)


def test_hardy_power_family_is_sharp():
    """测试 ω = v = t^β、g = t^{−β} 时 Hardy 不等式比值为 1"""
    mu = Measure1D.lebesgue()
    for beta in (0.25, 0.5):
        omega = RadialProfile.from_function(lambda r: r ** beta, 1e-8, 1e2)
        g = RadialProfile.from_function(lambda r: r ** (-beta), 1e-8, 1e2)
        for k in (0, 1):
            result = hardy_bound_check(omega, omega, g, mu, korder=k)
            assert result.claimed
            assert result.ratio == pytest.approx(1.0, rel=1e-10)
            assert result.to_dict()["korder"] == k


def test_hardy_increasing_g_is_flagged():
    """测试 g 递增时不给结论"""
    mu = Measure1D.lebesgue()
    up = RadialProfile.from_function(lambda r: r, 1e-3, 1.0)
    result = hardy_bound_check(up, up, up, mu)
    assert not up.nonincreasing
    assert not result.claimed
    assert result.ratio is None


def test_hardy_atomic_measure():
    """测试原子测度：(Hg)(1) = g(1/2)·m"""
    mu = Measure1D.atomic([0.5], [2.0])
    g = RadialProfile.from_function(lambda r: 3.0, 1e-3, 1.0)
    assert hardy(g, mu, 1.0) == pytest.approx(6.0)
    with pytest.raises(ConditionError):
        Measure1D.atomic([0.5], [-1.0])


def test_radial_profile_validation():
    """测试径向剖面与网格检查"""
    with pytest.raises(ConditionError):
        RadialProfile(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
    with pytest.raises(ConditionError):
        geometric_grid(1.0, 0.5)
    a = RadialProfile.from_function(lambda r: r, 1e-3, 1.0)
    b = RadialProfile.from_function(lambda r: r, 1e-3, 2.0)
    with pytest.raises(ConditionError):
        hardy_bound_check(a, a, b, Measure1D.lebesgue())


def test_horizon_grid():
    """测试视界网格包含 r 与 T/2"""
    t = horizon_grid(4.0, T_MAX, 8)
    assert t[0] == 4.0
    assert t[-1] == T_MAX
    assert np.any(np.isclose(t, T_MAX / 2.0, rtol=1e-14))
    with pytest.raises(ConditionError):
        horizon_grid(4.0, 6.0, 8)


def test_classical_supremal_constant():
    """测试经典 Morrey 对 φ = r^{−n/p} 在条件 (1.2) 下 C ≈ p/n"""
    p, n = 2.0, 1
    phi = PhiFunction.power_law(p, -n / p)
    points = BallFamily.single((0.0,), [0.25, 1.0])
    report = condition_eval(phi, phi, _const_weight(), p, ConditionKind.SUPREMAL, points, config={"t_max": T_MAX})
    assert report.C_min == pytest.approx(p / n, rel=1e-2)
    assert report.holds
    assert report.to_dict()["verdict"] == "holds"


def test_slow_decay_pair_fails():
    """测试 φ₁ ≡ 1、φ₂ = 1/r：截断漂移为 ln2/ln(T/2r) = 1/17"""
    phi1 = PhiFunction.power_law(1.0, 0.0)
    phi2 = PhiFunction.power_law(1.0, -1.0)
    points = BallFamily.single((0.0,), [0.5, 4.0])
    report = condition_eval(phi1, phi2, _const_weight(), 1.0, "1.1", points, config={"t_max": T_MAX})
    assert report.argmax["r"] == 4.0
    assert report.tail_drift == pytest.approx(1.0 / 17.0, rel=1e-10)
    assert not report.holds


def test_log_condition_reduces_to_weighted():
    """测试 k = 0 时 (1.4) 与 (1.3) 相同，k = 1 时更大"""
    grid = Grid(1, 4.0, 33)
    w = Weight.power(grid, 0.5)
    phi = PhiFunction.weighted_morrey(w, 2.0, 0.5)
    points = BallFamily.single((0.0,), [0.5, 1.0])
    weighted = condition_eval(phi, phi, w, 2.0, ConditionKind.WEIGHTED, points)
    log0 = condition_eval(phi, phi, w, 2.0, ConditionKind.LOG, points, korder=0)
    log1 = condition_eval(phi, phi, w, 2.0, ConditionKind.LOG, points, korder=1)
    assert log0.C_min == pytest.approx(weighted.C_min, rel=1e-12)
    assert log1.C_min > log0.C_min


def test_condition_kind_parse():
    """测试条件类型解析"""
    assert ConditionKind.parse("1.3") == ConditionKind.WEIGHTED
    assert ConditionKind.parse("log") == ConditionKind.LOG
    with pytest.raises(ConditionError):
        ConditionKind.parse("1.5")
    with pytest.raises(ConditionError):
        ConditionEvaluator({"supremal": "max"})


def test_tail_closed_form():
    """测试 k = 0 尾积分闭式 p/(nδ(1−κ))"""
    kappa, p, n, delta = 0.5, 2.0, 1, 0.5
    value = remark_1_7_tail(kappa, p, n, delta, 0)
    assert value == pytest.approx(p / (n * delta * (1.0 - kappa)), rel=1e-5)
    assert remark_1_7_tail(kappa, p, n, delta, 1) > value


def test_tail_divergence_and_bad_delta():
    """测试 κ = 1 发散与 δ ≤ 0"""
    with pytest.raises(ConditionError):
        remark_1_7_tail(1.0, 2.0, 1, 0.5, 0)
    with pytest.raises(ConditionError):
        remark_1_7_tail(0.5, 2.0, 1, 0.0, 0)


def test_non_monotone_profile_is_rejected():
    """测试有局部上升的 g：证书记录上升量，不给结论"""
    mu = Measure1D.lebesgue()
    g = RadialProfile.from_function(lambda r: r ** -0.5 * (1.0 + 0.3 * np.sin(4.0 * np.log(r))), 1e-3, 1e2)
    omega = RadialProfile.from_function(lambda r: r ** 0.5, 1e-3, 1e2)
    assert not g.nonincreasing
    assert g.monotonicity["violation"] > 0.0
    result = hardy_bound_check(omega, omega, g, mu)
    assert not result.claimed
    assert result.ratio is None


def test_minimal_constant_grows_with_family():
    """测试扩大 (x, r) 族后最小常数不减"""
    grid = Grid(1, 4.0, 33)
    w = Weight.power(grid, 0.5)
    phi = PhiFunction.weighted_morrey(w, 2.0, 0.5)
    base = BallFamily.lattice(grid, num_centers=3, num_radii=3, r_min=0.5, r_max=2.0)
    bigger = base.enlarged(grid)
    evaluator = ConditionEvaluator({"t_max": 2.0 ** 12, "per_octave": 8})
    for kind in (ConditionKind.WEIGHTED, ConditionKind.SUPREMAL):
        small = evaluator.evaluate(phi, phi, w, 2.0, kind, base)
        large = evaluator.evaluate(phi, phi, w, 2.0, kind, bigger)
        assert large.C_min >= small.C_min
