"""
Kernels Test - 测试核字典与伸缩卷积测试
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid, GridFunction, sample
from kernels.kernels import (
    TestKernel,
    make_dictionary,
    verify_admissible,
    dilated_taps,
    dilated_convolve,
    export_kernel,
    holder_seminorm,
)
from utils.errors import KernelError


def test_dictionary_is_admissible():
    """测试字典中每个核都可容许"""
    for alpha, dim in ((1.0, 1), (0.5, 1), (1.0, 2)):
        ref = 65 if dim == 1 else 17
        d = make_dictionary(alpha, 6, dim, ref_points=ref)
        assert len(d) == 6
        for k in d:
            report = verify_admissible(k)
            assert report.passed, report.to_dict()
            assert report.holder_seminorm == pytest.approx(1.0, abs=1e-9)


def test_dictionary_is_deterministic():
    """测试同种子得到同一字典"""
    a = make_dictionary(1.0, 6, 1, seed=7)
    b = make_dictionary(1.0, 6, 1, seed=7)
    c = make_dictionary(1.0, 6, 1, seed=8)
    assert a.id == b.id
    assert a.id != c.id


def test_dictionary_rejects_bad_parameters():
    """测试非法参数"""
    with pytest.raises(KernelError):
        make_dictionary(0.0, 6)
    with pytest.raises(KernelError):
        make_dictionary(1.5, 6)
    with pytest.raises(KernelError):
        make_dictionary(1.0, 3)


def test_non_admissible_kernel_is_reported():
    """测试未归一化的核被判为不可容许"""
    k = TestKernel.from_function(lambda x: 10.0 * x[:, 0] * (1 - x[:, 0] ** 2), 1.0, normalize=False)
    report = verify_admissible(k)
    assert not report.holder_ok
    assert not report.passed


def test_taps_sum_to_zero():
    """测试离散抽头均值为零"""
    grid = Grid(1, 4.0, 65)
    d = make_dictionary(1.0, 4, 1)
    for t in (grid.spacing, 0.7, 3.0):
        for k in d:
            taps = dilated_taps(k, grid, t)
            assert abs(np.sum(taps)) < 1e-12


def test_scale_below_resolution():
    """测试低于分辨率的尺度"""
    grid = Grid(1, 4.0, 65)
    k = make_dictionary(1.0, 4, 1).kernels[0]
    with pytest.raises(KernelError):
        dilated_taps(k, grid, 0.4 * grid.spacing)
    f = GridFunction.constant(grid, 1.0)
    with pytest.raises(KernelError):
        dilated_convolve(f, k, 0.4 * grid.spacing, [0.0])


def test_constant_is_annihilated():
    """测试常数函数在内部点的卷积为零"""
    grid = Grid(1, 4.0, 65)
    f = GridFunction.constant(grid, 2.5)
    for k in make_dictionary(1.0, 4, 1):
        assert abs(dilated_convolve(f, k, 1.0, [0.0])) < 1e-12


def test_convolution_is_linear():
    """测试卷积的线性"""
    grid = Grid(1, 4.0, 65)
    k = make_dictionary(1.0, 4, 1).kernels[1]
    f = sample(grid, lambda x: np.sin(x[:, 0]))
    g = sample(grid, lambda x: x[:, 0] ** 2)
    lhs = dilated_convolve(f.scaled(2.0) + g, k, 0.5, [0.25])
    rhs = 2.0 * dilated_convolve(f, k, 0.5, [0.25]) + dilated_convolve(g, k, 0.5, [0.25])
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_export_kernel(tmp_path):
    """测试核导出"""
    k = make_dictionary(1.0, 4, 1).kernels[0]
    cert = export_kernel(k, tmp_path, "k0")
    assert (tmp_path / "k0.csv").exists()
    assert (tmp_path / "k0.json").exists()
    assert cert["admissibility"]["passed"]


def test_taps_vanish_at_support_edge():
    """测试 |d| = t 处的抽头为零（校正不引入边界跳跃）"""
    grid = Grid(1, 4.0, 65)
    for t in (6 * grid.spacing, 24 * grid.spacing):
        for k in make_dictionary(1.0, 4, 1):
            taps = dilated_taps(k, grid, t)
            assert abs(taps[0]) < 1e-14
            assert abs(taps[-1]) < 1e-14


def test_taps_keep_holder_bound():
    """测试校正后的抽头（按 φ 的尺度）Hölder 半范仍受核的半范控制"""
    grid = Grid(1, 4.0, 65)
    h = grid.spacing
    for t in (6 * h, 24 * h):
        for k in make_dictionary(1.0, 4, 1):
            taps = dilated_taps(k, grid, t)
            K = (taps.size - 1) // 2
            u = (np.arange(-K, K + 1) * h / t).reshape(-1, 1)
            phi = taps / (grid.cell_volume * t ** (-1))
            raw = k.evaluate(u)
            window = np.clip(1.0 - u[:, 0] ** 2, 0.0, None) ** 2
            c = np.sum(raw) / np.sum(window)
            semi = holder_seminorm(u, phi, 1.0)
            bound = holder_seminorm(u, raw, 1.0) + abs(c) * holder_seminorm(u, window, 1.0)
            assert semi <= bound + 1e-9
            assert semi <= 1.5 * k.holder_seminorm_estimate


def test_convolution_is_translation_equivariant():
    """测试内部点的平移等变：f 平移整数个格距，卷积值随之平移"""
    grid = Grid(1, 4.0, 65)
    shift = 4 * grid.spacing
    f = sample(grid, lambda x: np.clip(1.0 - (x[:, 0] + 0.5) ** 2, 0.0, None) ** 2)
    g = sample(grid, lambda x: np.clip(1.0 - (x[:, 0] + 0.5 - shift) ** 2, 0.0, None) ** 2)
    for k in make_dictionary(1.0, 4, 1):
        for t in (0.5, 1.0):
            for y in (-0.5, -0.3, 0.25):
                assert dilated_convolve(g, k, t, [y + shift]) == pytest.approx(
                    dilated_convolve(f, k, t, [y]), rel=1e-10, abs=1e-13
                )


def test_zero_kernel_is_degenerate():
    """测试零核：支集与均值通过，半范为 0，标记为退化"""
    k = TestKernel(alpha=1.0, dim=1, ref_values=np.zeros(33))
    report = verify_admissible(k)
    assert report.support_ok
    assert report.mean_ok
    assert report.holder_seminorm == 0.0
    assert report.degenerate


def test_support_leak_is_reported():
    """测试支集超出单位球的核"""
    ax = np.linspace(-1.0, 1.0, 17)
    u, v = np.meshgrid(ax, ax, indexing="ij")
    vals = np.clip(1.0 - ((u - 0.5) ** 2 + (v - 0.5) ** 2), 0.0, None) ** 2
    k = TestKernel(alpha=1.0, dim=2, ref_values=vals.reshape(-1))
    report = verify_admissible(k)
    assert not report.support_ok
    assert report.support_leak > 0.0
    assert not report.passed


def test_bump_difference_is_admissible():
    """测试 bump(x) − bump(x−0.3) 归一化后三项检查均通过"""
    def fn(x):
        return (np.clip(1.0 - x[:, 0] ** 2, 0.0, None) ** 2
                - np.clip(1.0 - (x[:, 0] - 0.3) ** 2, 0.0, None) ** 2)

    report = verify_admissible(TestKernel.from_function(fn, 1.0))
    assert report.passed, report.to_dict()
