"""
Grid Test - 网格、球与球族测试
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid, GridFunction, VecGridFunction, Ball, ball_nodes, sample, l2_pointwise
from grid.family import BallFamily
from utils.errors import GridError


def test_grid_geometry():
    """测试网格步长与原点"""
    grid = Grid(1, 4.0, 33)
    assert grid.spacing == pytest.approx(0.25)
    assert grid.nodes[grid.origin_index, 0] == 0.0
    assert grid.num_nodes == 33

    grid2 = Grid(2, 1.0, 9)
    assert grid2.nodes.shape == (81, 2)
    assert grid2.cell_volume == pytest.approx(0.25 ** 2)
    assert np.all(grid2.nodes[grid2.origin_index] == 0.0)


def test_grid_rejects_bad_parameters():
    """测试非法网格参数"""
    with pytest.raises(GridError):
        Grid(3, 1.0, 9)
    with pytest.raises(GridError):
        Grid(1, 1.0, 10)
    with pytest.raises(GridError):
        Grid(1, -1.0, 9)
    with pytest.raises(GridError):
        Grid(2, 1.0, 101, max_nodes=1000)


def test_refine_and_coarsen():
    """测试加密与粗化互逆"""
    grid = Grid(1, 4.0, 65)
    assert grid.refined().points_per_axis == 129
    assert grid.refined().spacing == pytest.approx(0.5 * grid.spacing)
    assert grid.refined().coarsened() == grid


def test_ball_nodes_closed_boundary():
    """测试闭球边界：|x − c| = r 的格点在球内"""
    grid = Grid(1, 4.0, 33)
    idx = ball_nodes(grid, Ball((0.0,), 0.5))
    assert sorted(grid.nodes[idx, 0].tolist()) == [-0.5, -0.25, 0.0, 0.25, 0.5]


def test_ball_below_resolution():
    """测试半径低于分辨率与盒外球"""
    grid = Grid(1, 4.0, 33)
    with pytest.raises(GridError):
        ball_nodes(grid, Ball((0.0,), 0.1))
    with pytest.raises(GridError):
        ball_nodes(grid, Ball((10.0,), 1.0))
    with pytest.raises(GridError):
        Ball((0.0,), 0.0)


def test_grid_function_validation():
    """测试非有限值与长度检查"""
    grid = Grid(1, 1.0, 9)
    with pytest.raises(GridError):
        GridFunction(grid, np.zeros(8))
    values = np.zeros(9)
    values[3] = np.nan
    with pytest.raises(GridError):
        GridFunction(grid, values)
    with pytest.raises(GridError):
        sample(grid, lambda x: 1.0 / x[:, 0])


def test_vector_field_magnitude():
    """测试向量场逐点 ℓ² 范数"""
    grid = Grid(1, 1.0, 9)
    a = GridFunction.constant(grid, 3.0)
    b = GridFunction.constant(grid, 4.0)
    mag = l2_pointwise(VecGridFunction(grid, (a, b)))
    assert np.allclose(mag.values, 5.0)
    assert np.allclose(l2_pointwise(a.scaled(-1.0)).values, 3.0)


def test_family_lattice_and_enlarged():
    """测试格点球族与其扩张"""
    grid = Grid(1, 4.0, 65)
    family = BallFamily.lattice(grid, num_centers=9, num_radii=8)
    assert len(family) == 72
    assert family.radii[0] == pytest.approx(2.0 * grid.spacing)
    assert family.radii[-1] == pytest.approx(grid.half_width)
    ok, errors = family.validate(grid)
    assert ok, errors

    enlarged = family.enlarged(grid)
    assert set(map(tuple, family.centers)) <= set(map(tuple, enlarged.centers))
    assert set(family.radii.tolist()) <= set(enlarged.radii.tolist())
    assert enlarged.id != family.id


def test_family_identical_across_resolutions():
    """测试固定 r_min 时粗细网格上球族相同"""
    coarse = Grid(1, 4.0, 65)
    fine = Grid(1, 4.0, 129)
    r_min = 2.0 * coarse.spacing
    a = BallFamily.lattice(coarse, r_min=r_min, r_max=0.5)
    b = BallFamily.lattice(fine, r_min=r_min, r_max=0.5)
    assert a.id == b.id


def test_family_id_is_stable():
    """测试球族标识只依赖内容"""
    a = BallFamily.single((0.0,), [1.0, 2.0])
    b = BallFamily.single((0.0,), [2.0, 1.0, 1.0])
    assert a.id == b.id
    assert len(b) == 2


def main():
    """运行所有测试"""
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"[OK] {name}")


if __name__ == "__main__":
    main()
