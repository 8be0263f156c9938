"""
Ball Family - 离散化上确界所用的有名球族
"""
import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from grid.grid import Ball, Grid, BOUNDARY_RTOL
from utils.errors import GridError


FAMILY_VERSION = "ball-family/1"


@dataclass(frozen=True, eq=False)
class BallFamily:
    """
    有限 (中心, 半径) 族，所有 sup 型范数与条件都在其上取最大值

    Attributes:
        dim: 维数
        centers: 中心坐标 (k, n)，均为格点
        radii: 升序半径
    """
    dim: int
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float).reshape(-1, self.dim)
        radii = np.array(sorted(set(float(r) for r in np.atleast_1d(self.radii))))
        if centers.shape[0] == 0 or radii.size == 0:
            raise GridError("球族不能为空")
        if np.any(radii <= 0):
            raise GridError("球族半径必须为正")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def lattice(
        cls,
        grid: Grid,
        num_centers: int = 9,
        num_radii: int = 8,
        r_min: Optional[float] = None,
        r_max: Optional[float] = None,
        extent: float = 0.5,
    ) -> "BallFamily":
        """
        粗子格点中心 × [2h, L] 上对数等距半径

        Args:
            grid: 网格
            num_centers: 中心总数（二维时取每轴 round(sqrt(k)) 个）
            num_radii: 半径个数
            r_min: 最小半径，默认 2h
            r_max: 最大半径，默认 L
            extent: 中心覆盖 [-extent·L, extent·L]
        """
        h = grid.spacing
        r_min = 2.0 * h if r_min is None else float(r_min)
        r_max = grid.half_width if r_max is None else float(r_max)
        if r_min < h * (1.0 - BOUNDARY_RTOL):
            raise GridError(f"最小半径 {r_min} 低于网格分辨率 {h}")
        if r_max < r_min:
            raise GridError(f"半径区间无效: [{r_min}, {r_max}]")

        per_axis = max(1, int(round(num_centers ** (1.0 / grid.dim))))
        if per_axis == 1:
            coords = np.array([0.0])
        else:
            raw = np.linspace(-extent * grid.half_width, extent * grid.half_width, per_axis)
            coords = np.round(raw / h) * h
        mesh = np.meshgrid(*([coords] * grid.dim), indexing="ij")
        centers = np.stack([c.reshape(-1) for c in mesh], axis=1)
        radii = np.geomspace(r_min, r_max, num_radii) if num_radii > 1 else np.array([r_max])
        return cls(grid.dim, centers, radii)

    @classmethod
    def single(cls, center: Tuple[float, ...], radii: List[float]) -> "BallFamily":
        c = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(c.size, c.reshape(1, -1), np.asarray(radii, dtype=float))

    def enlarged(self, grid: Grid) -> "BallFamily":
        """
        两倍扩张：加入相邻中心的格点中点与相邻半径的几何中点（原族的超集）
        """
        h = grid.spacing
        centers = [tuple(c) for c in self.centers]
        axes = [np.unique(self.centers[:, i]) for i in range(self.dim)]
        mids = []
        for ax in axes:
            extra = np.round(0.5 * (ax[1:] + ax[:-1]) / h) * h if ax.size > 1 else np.array([])
            mids.append(np.unique(np.concatenate([ax, extra])))
        mesh = np.meshgrid(*mids, indexing="ij")
        for c in np.stack([m.reshape(-1) for m in mesh], axis=1):
            if tuple(c) not in centers:
                centers.append(tuple(c))
        radii = list(self.radii)
        radii += list(np.sqrt(self.radii[1:] * self.radii[:-1]))
        return BallFamily(self.dim, np.array(centers), np.array(radii))

    @cached_property
    def id(self) -> str:
        """稳定哈希标识"""
        payload = {
            "version": FAMILY_VERSION,
            "dim": self.dim,
            "centers": np.round(self.centers, 12).tolist(),
            "radii": np.round(self.radii, 12).tolist(),
        }
        digest = hashlib.sha1(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()
        return f"bf-{digest[:12]}"

    def __len__(self) -> int:
        return self.centers.shape[0] * self.radii.size

    def __iter__(self) -> Iterator[Ball]:
        for c in self.centers:
            for r in self.radii:
                yield Ball(tuple(c), float(r))

    def balls(self) -> List[Ball]:
        return list(self)

    def validate(self, grid: Grid) -> Tuple[bool, List[str]]:
        """
        检查每个球对网格合法

        Returns:
            (是否合法, 错误列表)
        """
        errors = []
        if grid.dim != self.dim:
            errors.append(f"球族维数 {self.dim} 与网格维数 {grid.dim} 不一致")
            return False, errors
        if self.radii[0] < grid.spacing * (1.0 - BOUNDARY_RTOL):
            errors.append(f"最小半径 {self.radii[0]} 低于网格分辨率 {grid.spacing}")
        for c in self.centers:
            if not grid.contains(c):
                errors.append(f"中心 {c.tolist()} 不在盒内")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "dim": self.dim,
            "num_centers": int(self.centers.shape[0]),
            "num_radii": int(self.radii.size),
            "r_min": float(self.radii[0]),
            "r_max": float(self.radii[-1]),
        }
