"""
Scale Grid - 尺度 t 的几何网格与 ∫ dt/t 的梯形权
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from grid.grid import Grid
from utils.errors import OperatorError


DEFAULT_NUM_SCALES = 24


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """严格递增的尺度序列，附 ln t 上的梯形权"""
    t_values: np.ndarray

    def __post_init__(self):
        t = np.array(self.t_values, dtype=float).reshape(-1)
        if t.size < 2:
            raise OperatorError("尺度网格至少需要两个尺度")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise OperatorError("尺度必须为正且严格递增")
        t.setflags(write=False)
        object.__setattr__(self, "t_values", t)

    @classmethod
    def geometric(
        cls,
        t_min: float,
        t_max: float,
        num: Optional[int] = None,
        ratio: Optional[float] = None,
    ) -> "ScaleGrid":
        """
        几何尺度序列：给定个数 num，或给定公比 ratio（末项不超过 t_max）
        """
        if not 0 < t_min < t_max:
            raise OperatorError(f"尺度区间无效: [{t_min}, {t_max}]")
        if ratio is not None:
            if ratio <= 1.0:
                raise OperatorError(f"公比必须大于 1: {ratio}")
            count = int(np.floor(np.log(t_max / t_min) / np.log(ratio) + 1e-9)) + 1
            return cls(t_min * ratio ** np.arange(count))
        num = DEFAULT_NUM_SCALES if num is None else int(num)
        return cls(np.geomspace(t_min, t_max, num))

    @classmethod
    def for_grid(cls, grid: Grid, config: Optional[Dict] = None) -> "ScaleGrid":
        """
        按配置为网格生成尺度：默认 t_min = h，t_max = 2L，24 个尺度
        """
        config = config or {}
        t_min = config.get("t_min") or grid.spacing
        t_max = config.get("t_max") or 2.0 * grid.half_width
        return cls.geometric(t_min, t_max, num=config.get("num"), ratio=config.get("ratio"))

    @property
    def t_min(self) -> float:
        return float(self.t_values[0])

    @property
    def t_max(self) -> float:
        return float(self.t_values[-1])

    def __len__(self) -> int:
        return self.t_values.size

    @cached_property
    def log_weights(self) -> np.ndarray:
        """ln t 上的梯形权，和为 ln(t_max/t_min)"""
        du = np.diff(np.log(self.t_values))
        w = np.zeros(self.t_values.size)
        w[:-1] += 0.5 * du
        w[1:] += 0.5 * du
        return w

    def to_dict(self) -> Dict:
        return {
            "num": int(self.t_values.size),
            "t_min": self.t_min,
            "t_max": self.t_max,
            "ratio_first": float(self.t_values[1] / self.t_values[0]),
        }
