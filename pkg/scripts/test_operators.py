"""
Operators Test - 平方函数引擎与逐点参考实现的对照
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent))

from grid.grid import Grid, GridFunction, VecGridFunction, sample
from operators.scales import ScaleGrid
from operators.square import SquareFunctionEngine, g_sq, comm_g_sq, vector_apply
from kernels.kernels import make_dictionary
from utils.data_loader import bump
from utils.errors import OperatorError

from oracles import (
    small_engine,
    a_oracle,
    cone_oracle,
    star_oracle,
    vertical_oracle,
    comm_cone_oracle,
    square_oracle,
)


def _bump_field(grid, center=0.0, radius=1.0):
    return sample(grid, lambda x: bump(x, np.array([center]), radius))


def test_scale_grid():
    """测试尺度网格与 ln t 梯形权"""
    grid = Grid(1, 4.0, 33)
    scales = ScaleGrid.for_grid(grid, {"num": 24})
    assert len(scales) == 24
    assert scales.t_min == pytest.approx(grid.spacing)
    assert scales.t_max == pytest.approx(2.0 * grid.half_width)
    assert np.sum(scales.log_weights) == pytest.approx(np.log(scales.t_max / scales.t_min))
    with pytest.raises(OperatorError):
        ScaleGrid([1.0, 1.0])


def test_a_field_matches_oracle():
    """测试 A_α 场与逐点卷积一致"""
    engine = small_engine()
    f = _bump_field(engine.grid)
    a = engine.a_field(f)
    for s in (0, 3, 6):
        for i in (4, 16, 20):
            assert a[s, i] == pytest.approx(a_oracle(engine, f, s, i), rel=1e-10, abs=1e-13)


def test_cone_matches_oracle():
    """测试 G_{α,β} 整场与嵌套循环一致（开锥与闭锥）"""
    engine = small_engine()
    f = _bump_field(engine.grid, 0.5, 1.0)
    for beta, closed in ((1.0, False), (2.0, False), (2.0, True)):
        field = engine.g_sq_field(f, beta, closed).values
        for i in (8, 16, 22):
            x = engine.grid.nodes[i]
            assert field[i] == pytest.approx(cone_oracle(engine, f, x, beta, closed), rel=1e-9, abs=1e-13)


def test_star_and_vertical_match_oracle():
    """测试 g*_λ 与竖直 g 函数"""
    engine = small_engine()
    f = _bump_field(engine.grid)
    star = engine.g_star_field(f, 4.5).values
    vert = engine.g_vertical_field(f).values
    for i in (10, 16):
        x = engine.grid.nodes[i]
        assert star[i] == pytest.approx(star_oracle(engine, f, x, 4.5), rel=1e-9, abs=1e-13)
        assert vert[i] == pytest.approx(vertical_oracle(engine, f, i), rel=1e-9, abs=1e-13)


def test_point_functions_match_field():
    """测试单点函数与整场一致"""
    engine = small_engine()
    f = _bump_field(engine.grid)
    field = engine.g_sq_field(f).values
    value = g_sq(f, engine.dictionary, engine.scales, 1.0, [0.5])
    assert value == pytest.approx(field[engine.grid.index_of([0.5])], rel=1e-10)


def test_aperture_monotone():
    """测试孔径单调：G_α ≤ G_{α,β} ≤ G_{α,2^j}（闭锥）"""
    engine = small_engine()
    f = _bump_field(engine.grid, -0.5, 1.5)
    fam = engine.aperture_family(f, 2)
    g = np.sqrt(fam["G"])
    g2 = np.sqrt(fam["G_pow2_1"])
    g4 = np.sqrt(fam["G_pow2_2"])
    assert np.all(g <= g2 * (1 + 1e-12) + 1e-15)
    assert np.all(g2 <= g4 * (1 + 1e-12) + 1e-15)


def test_zero_and_constant_inputs():
    """测试零输入与常数输入"""
    engine = small_engine()
    zero = GridFunction.zeros(engine.grid)
    assert np.all(engine.g_sq_field(zero).values == 0.0)
    assert np.all(engine.g_star_field(zero, 4.5).values == 0.0)
    const = GridFunction.constant(engine.grid, 3.0)
    # 已分辨的 (y, t) 上核支集整体在盒内，常数被消去
    assert np.max(engine.g_sq_field(const).values) < 1e-10


def test_vector_field_is_componentwise_l2():
    """测试向量场：逐分量算子后取 ℓ²"""
    engine = small_engine()
    f1 = _bump_field(engine.grid, 0.0, 1.0)
    f2 = _bump_field(engine.grid, 1.0, 0.75)
    vf = VecGridFunction(engine.grid, (f1, f2))
    out = vector_apply(engine.g_sq_field, vf)
    expected = np.sqrt(engine.g_sq_field(f1).values ** 2 + engine.g_sq_field(f2).values ** 2)
    assert np.allclose(out.values, expected, rtol=1e-12, atol=0.0)


def test_commutator_matches_oracle():
    """测试交换子整场与参考实现"""
    engine = small_engine()
    f = _bump_field(engine.grid, 0.0, 1.0)
    b = sample(engine.grid, lambda x: x[:, 0])
    for korder in (1, 2):
        field = engine.comm_field(f, b, korder).values
        for i in (12, 18):
            assert field[i] == pytest.approx(comm_cone_oracle(engine, f, b, korder, i), rel=1e-9, abs=1e-13)
    point = comm_g_sq(f, engine.dictionary, engine.scales, b, 1, engine.grid.nodes[12])
    assert point == pytest.approx(engine.comm_field(f, b, 1).values[12], rel=1e-10)


def test_commutator_of_constant_symbol_vanishes():
    """测试常数符号的交换子为零"""
    engine = small_engine()
    f = _bump_field(engine.grid)
    b = GridFunction.constant(engine.grid, 2.0)
    assert np.all(engine.comm_field(f, b, 1).values == 0.0)


def test_commutator_order_checked():
    """测试交换子阶数范围"""
    engine = small_engine()
    f = _bump_field(engine.grid)
    b = sample(engine.grid, lambda x: x[:, 0])
    with pytest.raises(OperatorError):
        engine.comm_field(f, b, 4)


def test_engine_rejects_unresolved_scales():
    """测试低于分辨率的尺度网格"""
    grid = Grid(1, 4.0, 33)
    d = make_dictionary(1.0, 4, 1, ref_points=33)
    with pytest.raises(OperatorError):
        SquareFunctionEngine(grid, d, ScaleGrid.geometric(0.1 * grid.spacing, 1.0, num=4))
    with pytest.raises(OperatorError):
        SquareFunctionEngine(grid, d, ScaleGrid.geometric(grid.spacing, 20.0, num=4))


def test_annulus_decomposition_is_exact():
    """测试 g*_λ 的环带分解上界逐点成立"""
    engine = small_engine()
    f = _bump_field(engine.grid, 0.5, 1.0)
    a = engine.a_field(f)
    n, lam = 1, 4.5
    J = engine.jmax_covering()
    pow2 = [engine.cone_square(a, 2.0 ** j, closed=True)[0].reshape(-1) for j in range(J + 1)]
    bound = pow2[0].copy()
    for j in range(1, J + 1):
        bound += (1.0 + 2.0 ** (j - 1)) ** (-n * lam) * (pow2[j] - pow2[j - 1])
    star = engine.star_square(a, lam)[0].reshape(-1)
    assert np.all(star <= bound * (1 + 1e-9) + 1e-13 * np.max(pow2[J]))


def test_positive_homogeneity():
    """测试正齐次性 op(c·f) = |c|·op(f)"""
    engine = small_engine()
    f = _bump_field(engine.grid, 0.5, 1.0)
    b = sample(engine.grid, lambda x: x[:, 0])
    c = -2.5
    cf = f.scaled(c)
    pairs = (
        (engine.g_sq_field(cf).values, engine.g_sq_field(f).values),
        (engine.g_vertical_field(cf).values, engine.g_vertical_field(f).values),
        (engine.g_star_field(cf, 4.5).values, engine.g_star_field(f, 4.5).values),
        (engine.comm_field(cf, b, 1).values, engine.comm_field(f, b, 1).values),
    )
    for scaled, base in pairs:
        assert np.allclose(scaled, abs(c) * base, rtol=1e-12, atol=1e-12 * np.max(base))


def test_sublinearity():
    """测试次线性 op(f+g) ≤ op(f) + op(g)"""
    engine = small_engine()
    f = _bump_field(engine.grid, -0.5, 1.0)
    g = sample(engine.grid, lambda x: np.sin(2.0 * x[:, 0]))
    h = f + g
    for op in (
        engine.g_sq_field,
        engine.g_vertical_field,
        lambda u: engine.g_star_field(u, 4.5),
    ):
        lhs = op(h).values
        rhs = op(f).values + op(g).values
        assert np.all(lhs <= rhs + 1e-10 * max(np.max(rhs), 1.0))


def test_star_dominates_restricted_cone_term():
    """测试 g*_λ 不小于其 |x−y| < t 部分"""
    engine = small_engine()
    f = _bump_field(engine.grid, 0.5, 1.0)
    lam, n = 4.5, 1
    star = engine.g_star_field(f, lam).values
    for i in (10, 16):
        x = engine.grid.nodes[i]
        restricted = square_oracle(
            engine, f, x, lambda d, t: (t / (t + d)) ** (n * lam) if d < t * (1 - 1e-12) else 0.0
        )
        assert restricted <= star[i] * (1 + 1e-9) + 1e-13
    # 锥内 (t/(t+|x−y|))^{nλ} ≥ 2^{−nλ}
    cone = engine.g_sq_field(f).values
    assert np.all(2.0 ** (-n * lam / 2.0) * cone <= star * (1 + 1e-9) + 1e-13)


def test_aperture_bound_at_unit_aperture():
    """测试 β = 1 时 G_{α,β} ≤ β^{3n/2+α} G_α 取等号"""
    engine = small_engine()
    f = _bump_field(engine.grid, -0.5, 1.5)
    n, alpha = engine.grid.dim, engine.dictionary.alpha
    g = engine.g_sq_field(f).values
    g1 = engine.g_sq_field(f, beta=1.0).values
    assert np.array_equal(g, g1)
    assert np.all(g1 <= 1.0 ** (1.5 * n + alpha) * g)
