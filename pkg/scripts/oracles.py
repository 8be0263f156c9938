"""
Oracles - 逐点嵌套循环的参考实现（只用于测试，与引擎的卷积快路径对照）
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from grid.grid import Grid, GridFunction
from kernels.kernels import dilated_convolve
from operators.scales import ScaleGrid
from operators.square import SquareFunctionEngine
from kernels.kernels import make_dictionary


def small_engine(points: int = 33, alpha: float = 1.0, dim: int = 1, num_scales: int = 12) -> SquareFunctionEngine:
    grid = Grid(dim, 4.0, points)
    dictionary = make_dictionary(alpha, 4, dim, ref_points=33)
    scales = ScaleGrid.for_grid(grid, {"num": num_scales})
    return SquareFunctionEngine(grid, dictionary, scales)


def a_oracle(engine: SquareFunctionEngine, f: GridFunction, sidx: int, index: int) -> float:
    """A_α f(t, y)：逐核单点卷积取最大"""
    t = float(engine.scales.t_values[sidx])
    y = engine.grid.nodes[index]
    return max(abs(dilated_convolve(f, k, t, y)) for k in engine.dictionary)


def _resolved(grid: Grid, y: np.ndarray, t: float) -> bool:
    return bool(np.all(np.abs(y) + t <= grid.half_width * (1.0 + 1e-12)))


def square_oracle(engine: SquareFunctionEngine, f: GridFunction, x, weight) -> float:
    """
    Σ_t w_t t^{-n} Σ_y h^n weight(|x−y|, t) A(t,y)²，y 只取已分辨节点

    Args:
        weight: (距离, t) -> 权重
    """
    grid = engine.grid
    x = np.asarray(x, dtype=float)
    n = grid.dim
    total = 0.0
    for s, t in enumerate(engine.scales.t_values):
        t = float(t)
        inner = 0.0
        for i, y in enumerate(grid.nodes):
            if not _resolved(grid, y, t):
                continue
            wt = weight(float(np.linalg.norm(x - y)), t)
            if wt == 0.0:
                continue
            inner += grid.cell_volume * wt * a_oracle(engine, f, s, i) ** 2
        total += float(engine.scales.log_weights[s]) * t ** (-n) * inner
    return float(np.sqrt(total))


def cone_oracle(engine: SquareFunctionEngine, f: GridFunction, x, beta: float = 1.0, closed: bool = False) -> float:
    if closed:
        return square_oracle(engine, f, x, lambda d, t: 1.0 if d <= beta * t * (1 + 1e-12) else 0.0)
    return square_oracle(engine, f, x, lambda d, t: 1.0 if d < beta * t * (1 - 1e-12) else 0.0)


def star_oracle(engine: SquareFunctionEngine, f: GridFunction, x, lam: float) -> float:
    n = engine.grid.dim
    return square_oracle(engine, f, x, lambda d, t: (t / (t + d)) ** (n * lam))


def vertical_oracle(engine: SquareFunctionEngine, f: GridFunction, index: int) -> float:
    grid = engine.grid
    y = grid.nodes[index]
    total = 0.0
    for s, t in enumerate(engine.scales.t_values):
        if _resolved(grid, y, float(t)):
            total += float(engine.scales.log_weights[s]) * a_oracle(engine, f, s, index) ** 2
    return float(np.sqrt(total))


def comm_cone_oracle(engine: SquareFunctionEngine, f: GridFunction, b: GridFunction, korder: int, index: int) -> float:
    """[b, G_α]^k f(x)：外点 x 固定后对 (b(x) − b)^k f 做 G_α"""
    g = GridFunction(engine.grid, (b.values[index] - b.values) ** korder * f.values)
    return cone_oracle(engine, g, engine.grid.nodes[index])
