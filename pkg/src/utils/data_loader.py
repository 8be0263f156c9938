"""
测试场语料加载器 - 构造版本化的测试函数语料、BMO 符号与结果文件
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union
from enum import Enum

import numpy as np
import pandas as pd

from grid.grid import Grid, GridFunction, VecGridFunction, sample
from utils.errors import ParameterError
from utils.serialize import json_safe


CORPUS_VERSION = "corpus-v1"
CORPUS_LABEL = "corpus-v1 (constructed test fields; not taken from any published experiment)"


class SymbolKind(Enum):
    """BMO 符号类型"""
    LINEAR = "linear"
    LOG = "log"
    CONSTANT = "constant"


@dataclass(eq=False)
class CorpusField:
    """语料中的一个测试场"""
    name: str
    field: Union[GridFunction, VecGridFunction]
    kind: str
    description: str

    @property
    def components(self) -> List[GridFunction]:
        if isinstance(self.field, VecGridFunction):
            return list(self.field.components)
        return [self.field]

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "num_components": len(self.components),
            "description": self.description,
        }


def bump(x: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """(1 − |x−c|²/R²)²₊"""
    d2 = np.sum((x - center) ** 2, axis=1)
    return np.clip(1.0 - d2 / radius ** 2, 0.0, None) ** 2


class CorpusLoader:
    """语料加载器"""

    def __init__(self, output_dir: str = "results", seed: int = 20240601):
        self.output_dir = Path(output_dir)
        self.seed = seed

    def load_corpus(self, grid: Grid, names: Optional[List[str]] = None) -> List[CorpusField]:
        """
        构造测试场语料

        Args:
            grid: 网格
            names: 只保留这些名字（None 为全部）

        Returns:
            测试场列表（顺序固定）
        """
        L = grid.half_width
        n = grid.dim
        e1 = np.zeros(n)
        e1[0] = 1.0

        corpus = [
            CorpusField(
                "centered_bump",
                sample(grid, lambda x: bump(x, np.zeros(n), L / 4.0)),
                "bump",
                "中心在原点、半径 L/4 的光滑鼓包",
            ),
            CorpusField(
                "off_center_bump",
                sample(grid, lambda x: bump(x, 0.5 * L * e1, L / 8.0)),
                "bump",
                "中心在 (L/2, 0)、半径 L/8 的鼓包",
            ),
            CorpusField(
                "ball_indicator",
                sample(grid, lambda x: (np.sum((x + 0.25 * L * e1) ** 2, axis=1) <= (L / 4.0) ** 2).astype(float)),
                "indicator",
                "球 B(−L/4·e₁, L/4) 的示性函数",
            ),
            CorpusField(
                "random_smooth",
                self._band_limited(grid, self.seed),
                "random",
                "种子确定的带限随机场（乘以半径 3L/4 的鼓包窗）",
            ),
            CorpusField(
                "vector_2",
                VecGridFunction(grid, (
                    sample(grid, lambda x: bump(x, np.zeros(n), L / 4.0)),
                    sample(grid, lambda x: bump(x, 0.5 * L * e1, L / 8.0)),
                )),
                "vector",
                "两分量向量场（两个鼓包）",
            ),
            CorpusField(
                "vector_5",
                self._vector_field(grid, 5, self.seed + 1),
                "vector",
                "五分量向量场（种子确定的平移鼓包）",
            ),
        ]
        if names is None:
            return corpus
        known = {c.name for c in corpus}
        unknown = [name for name in names if name not in known]
        if unknown:
            raise ParameterError(f"语料中没有这些测试场: {unknown}")
        return [c for c in corpus if c.name in names]

    def _band_limited(self, grid: Grid, seed: int, num_modes: int = 8) -> GridFunction:
        rng = np.random.default_rng(seed)
        L = grid.half_width
        n = grid.dim
        # 最短周期 L/4，与网格无关，粗细网格采样同一个函数
        omega_max = 8.0 * np.pi / L
        freqs = rng.uniform(-omega_max, omega_max, size=(num_modes, n))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=num_modes)
        amps = rng.normal(size=num_modes) / np.sqrt(num_modes)

        def fn(x):
            wave = np.cos(x @ freqs.T + phases) @ amps
            return wave * bump(x, np.zeros(n), 0.75 * L)

        return sample(grid, fn)

    def _vector_field(self, grid: Grid, size: int, seed: int) -> VecGridFunction:
        rng = np.random.default_rng(seed)
        L = grid.half_width
        n = grid.dim
        comps = []
        for _ in range(size):
            center = rng.uniform(-0.5 * L, 0.5 * L, size=n)
            radius = rng.uniform(L / 8.0, L / 4.0)
            amp = rng.uniform(0.5, 2.0)
            comps.append(sample(grid, lambda x, c=center, r=radius, a=amp: a * bump(x, c, r)))
        return VecGridFunction(grid, tuple(comps))

    def random_fields(self, grid: Grid, count: int, seed: Optional[int] = None) -> List[GridFunction]:
        """独立同分布的随机格点场（用于范数性质检查）"""
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return [GridFunction(grid, rng.normal(size=grid.num_nodes)) for _ in range(count)]

    def make_symbol(self, grid: Grid, kind: str, value: float = 1.0) -> GridFunction:
        """
        BMO 符号 b

        Args:
            kind: linear（b = x₁）、log（b = ln|x|，原点取 ln(h/2)）、constant
        """
        symbol = SymbolKind(kind)
        if symbol == SymbolKind.LINEAR:
            return sample(grid, lambda x: x[:, 0])
        if symbol == SymbolKind.LOG:
            floor = 0.5 * grid.spacing
            return sample(grid, lambda x: np.log(np.maximum(np.sqrt(np.sum(x * x, axis=1)), floor)))
        return GridFunction.constant(grid, value)

    def save_results(
        self,
        experiment: str,
        report: Dict,
        tables: Optional[Dict[str, pd.DataFrame]] = None,
        timing: Optional[Dict] = None,
    ) -> Path:
        """
        保存实验结果：report.json（键排序，确定性）、CSV 绘图数据、timing.json

        Args:
            experiment: 实验名（子目录名）
            report: 报告字典
            tables: 表名 -> DataFrame
            timing: 计时信息（单独存放，不进入 report.json）

        Returns:
            输出目录
        """
        output_dir = self.output_dir / experiment
        output_dir.mkdir(parents=True, exist_ok=True)

        with open(output_dir / "report.json", 'w', encoding='utf-8') as f:
            json.dump(json_safe(report), f, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=False)
            f.write("\n")

        for name, frame in (tables or {}).items():
            frame.to_csv(output_dir / f"{name}.csv", index=False)

        if timing is not None:
            with open(output_dir / "timing.json", 'w', encoding='utf-8') as f:
                json.dump(json_safe(timing), f, indent=2, ensure_ascii=False, allow_nan=False)

        return output_dir
