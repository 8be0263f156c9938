"""
Grid - 盒上均匀网格、球几何与格点函数
"""
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, List, Tuple, Sequence, Union

import numpy as np
import pandas as pd

from utils.errors import GridError


# 球边界的相对容差：闭球 |d|² ≤ r²(1+tol)，开球 |d|² < r²(1−tol)
BOUNDARY_RTOL = 1e-12

DEFAULT_MAX_NODES = 4_000_000


def in_ball(dist2: np.ndarray, radius: float, closed: bool = True) -> np.ndarray:
    """
    球成员判定（全库统一的边界规则）

    Args:
        dist2: 到球心距离的平方
        radius: 半径
        closed: True 为 |d| ≤ r，False 为 |d| < r

    Returns:
        布尔数组
    """
    r2 = radius * radius
    if closed:
        return dist2 <= r2 * (1.0 + BOUNDARY_RTOL)
    return dist2 < r2 * (1.0 - BOUNDARY_RTOL)


@dataclass(frozen=True)
class Grid:
    """
    盒 [-L, L]^n 上的均匀网格

    Attributes:
        dim: 维数 n ∈ {1, 2}
        half_width: 半宽 L
        points_per_axis: 每轴点数 m（奇数，保证原点是格点）
        max_nodes: 节点总数上限
    """
    dim: int
    half_width: float
    points_per_axis: int
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"仅支持 n ∈ {{1, 2}}，收到 n={self.dim}")
        if not self.half_width > 0:
            raise GridError(f"半宽必须为正: L={self.half_width}")
        m = self.points_per_axis
        if m < 9 or m % 2 == 0:
            raise GridError(f"每轴点数必须是 ≥ 9 的奇数: m={m}")
        if m ** self.dim > self.max_nodes:
            raise GridError(
                f"节点数 {m ** self.dim} 超出内存预算 {self.max_nodes}"
            )

    @property
    def spacing(self) -> float:
        """步长 h = 2L/(m-1)"""
        return 2.0 * self.half_width / (self.points_per_axis - 1)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def num_nodes(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        """求积权 h^n"""
        return self.spacing ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        # 用整数下标生成，保证原点精确为 0
        m = self.points_per_axis
        return (np.arange(m) - (m - 1) // 2) * self.spacing

    @cached_property
    def nodes(self) -> np.ndarray:
        """节点坐标，形状 (m^n, n)，C 序"""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack([c.reshape(-1) for c in mesh], axis=1)

    @cached_property
    def node_norms2(self) -> np.ndarray:
        return np.sum(self.nodes ** 2, axis=1)

    @property
    def origin_index(self) -> int:
        c = (self.points_per_axis - 1) // 2
        return int(np.ravel_multi_index((c,) * self.dim, self.shape))

    def refined(self) -> "Grid":
        """加密网格（m → 2m−1，步长减半）"""
        return Grid(self.dim, self.half_width, 2 * self.points_per_axis - 1, self.max_nodes)

    def coarsened(self) -> "Grid":
        """粗化网格（m → (m+1)/2）"""
        return Grid(self.dim, self.half_width, (self.points_per_axis + 1) // 2, self.max_nodes)

    def contains(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=float).reshape(-1)
        tol = BOUNDARY_RTOL * self.half_width
        return p.size == self.dim and bool(np.all(np.abs(p) <= self.half_width + tol))

    def index_of(self, point: Sequence[float]) -> int:
        """最近格点的扁平下标"""
        p = np.asarray(point, dtype=float).reshape(-1)
        if not self.contains(p):
            raise GridError(f"点 {p.tolist()} 不在盒内")
        c = (self.points_per_axis - 1) // 2
        idx = tuple(int(round(v / self.spacing)) + c for v in p)
        return int(np.ravel_multi_index(idx, self.shape))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "half_width": self.half_width,
            "points_per_axis": self.points_per_axis,
            "spacing": self.spacing,
        }


@dataclass(frozen=True)
class Ball:
    """闭欧氏球 B(center, radius)"""
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise GridError(f"球半径必须为正: r={self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def lebesgue_measure(self) -> float:
        """连续 Lebesgue 测度 |B|"""
        if self.dim == 1:
            return 2.0 * self.radius
        return np.pi * self.radius ** 2

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)

    def fits_in(self, grid: Grid) -> bool:
        """球是否整体落在盒内"""
        c = np.abs(np.asarray(self.center))
        return bool(np.all(c + self.radius <= grid.half_width * (1.0 + BOUNDARY_RTOL)))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


def ball_nodes(grid: Grid, ball: Ball) -> np.ndarray:
    """
    球内格点下标（升序，每点求积权 h^n）

    Args:
        grid: 网格
        ball: 闭球

    Returns:
        扁平下标数组
    """
    if ball.dim != grid.dim:
        raise GridError(f"球维数 {ball.dim} 与网格维数 {grid.dim} 不一致")
    if ball.radius < grid.spacing * (1.0 - BOUNDARY_RTOL):
        raise GridError(
            f"球半径 {ball.radius} 小于网格分辨率 h={grid.spacing}"
        )
    c = np.asarray(ball.center)
    dist2 = np.sum((grid.nodes - c) ** 2, axis=1)
    idx = np.nonzero(in_ball(dist2, ball.radius, closed=True))[0]
    if idx.size == 0:
        raise GridError(f"球 {ball.to_dict()} 与盒无交")
    return idx


@dataclass(frozen=True, eq=False)
class GridFunction:
    """格点上的标量场，盒外按零延拓"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size != self.grid.num_nodes:
            raise GridError(
                f"取值个数 {vals.size} 与节点数 {self.grid.num_nodes} 不一致"
            )
        bad = np.nonzero(~np.isfinite(vals))[0]
        if bad.size:
            node = self.grid.nodes[bad[0]].tolist()
            raise GridError(f"节点 {node} 处取值非有限: {vals[bad[0]]}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def array(self) -> np.ndarray:
        """按网格形状重排的取值"""
        return self.values.reshape(self.grid.shape)

    def at(self, point: Sequence[float]) -> float:
        return float(self.values[self.grid.index_of(point)])

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.grid != self.grid:
            raise GridError("两个格点函数不在同一网格上")
        return GridFunction(self.grid, self.values + other.values)

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        if other.grid != self.grid:
            raise GridError("两个格点函数不在同一网格上")
        return GridFunction(self.grid, self.values * other.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.num_nodes))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.num_nodes, float(c)))

    def to_frame(self) -> pd.DataFrame:
        return _coords_frame(self.grid).assign(value=self.values)

    def to_csv(self, path: Union[str, Path]) -> None:
        """导出 CSV：坐标列 x[, y] 与取值列 value"""
        self.to_frame().to_csv(path, index=False)


@dataclass(frozen=True, eq=False)
class VecGridFunction:
    """共用一个网格的 J 个分量"""
    grid: Grid
    components: Tuple[GridFunction, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise GridError("向量场至少需要一个分量")
        for c in comps:
            if c.grid != self.grid:
                raise GridError("向量场各分量必须共用同一网格")
        object.__setattr__(self, "components", comps)

    @property
    def size(self) -> int:
        return len(self.components)

    @classmethod
    def of(cls, components: List[GridFunction]) -> "VecGridFunction":
        if not components:
            raise GridError("向量场至少需要一个分量")
        return cls(components[0].grid, tuple(components))

    def stacked(self) -> np.ndarray:
        return np.stack([c.values for c in self.components], axis=0)

    def scaled(self, c: float) -> "VecGridFunction":
        return VecGridFunction(self.grid, tuple(x.scaled(c) for x in self.components))

    def to_csv(self, path: Union[str, Path]) -> None:
        frame = _coords_frame(self.grid)
        for j, comp in enumerate(self.components):
            frame[f"value_{j}"] = comp.values
        frame.to_csv(path, index=False)


def _coords_frame(grid: Grid) -> pd.DataFrame:
    names = ["x", "y"][:grid.dim]
    return pd.DataFrame(grid.nodes, columns=names)


def sample(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
    """
    在格点上采样函数

    Args:
        grid: 网格
        fn: 向量化闭包，输入节点坐标 (N, n)，返回 (N,) 取值

    Returns:
        GridFunction
    """
    vals = np.asarray(fn(grid.nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.num_nodes, float(vals))
    vals = vals.reshape(-1)
    if vals.size != grid.num_nodes:
        raise GridError(f"采样闭包返回 {vals.size} 个值，期望 {grid.num_nodes}")
    bad = np.nonzero(~np.isfinite(vals))[0]
    if bad.size:
        node = grid.nodes[bad[0]].tolist()
        raise GridError(f"采样在节点 {node} 处得到非有限值 {vals[bad[0]]}")
    return GridFunction(grid, vals)


def l2_pointwise(vf: Union[VecGridFunction, GridFunction]) -> GridFunction:
    """逐点 ℓ² 范数 (Σ_j |f_j(x)|²)^{1/2}"""
    if isinstance(vf, GridFunction):
        return vf.abs()
    stack = vf.stacked()
    return GridFunction(vf.grid, np.sqrt(np.sum(stack * stack, axis=0)))
