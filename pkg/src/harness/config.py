"""
Experiment Config - 实验配置的加载、合并与参数校验
"""
import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from grid.grid import Grid
from grid.family import BallFamily
from kernels.kernels import KernelDictionary, make_dictionary
from operators.scales import ScaleGrid
from weights.weights import Weight
from utils.errors import ParameterError


PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config" / "default_params.yaml"

EXPERIMENT_NAMES = (
    "aperture_domination",
    "ball_estimate_G",
    "ball_estimate_gstar",
    "ball_estimate_commutator",
    "morrey_boundedness",
    "space_foundations",
    "pair_conditions",
)

# 用到 g*_λ 的实验，需要 λ > 3 + α/n
GSTAR_EXPERIMENTS = ("ball_estimate_gstar", "morrey_boundedness")


def resolve_path(path: Union[str, Path]) -> Path:
    """相对路径按项目根目录解析"""
    path = Path(path)
    return path if path.is_absolute() else PROJECT_ROOT / path


def load_yaml(path: Union[str, Path]) -> Dict:
    path = resolve_path(path)
    if not path.exists():
        raise ParameterError(f"配置文件不存在: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParameterError(f"配置文件顶层必须是映射: {path}")
    return data


def deep_merge(base: Dict, override: Dict) -> Dict:
    """递归合并：override 中的映射逐键覆盖，其余值整体替换"""
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class ExperimentConfig:
    """
    单个实验的完整配置（已与默认配置合并）

    Attributes:
        data: 合并后的配置字典，原样回显到报告中
        label: 输出子目录名，默认与实验名相同
    """
    data: Dict
    label: Optional[str] = None
    _dictionary: Optional[KernelDictionary] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.label:
            self.label = str(self.data.get("experiment", "experiment"))

    @classmethod
    def from_dict(cls, data: Dict, defaults: Optional[Dict] = None) -> "ExperimentConfig":
        if defaults is None:
            defaults = load_yaml(DEFAULT_CONFIG_PATH)
        data = dict(data)
        label = data.pop("label", None)
        return cls(deep_merge(defaults, data), label)

    @classmethod
    def from_file(cls, path: Union[str, Path], defaults: Optional[Dict] = None) -> "ExperimentConfig":
        return cls.from_dict(load_yaml(path), defaults)

    # ------------------------------------------------------------------
    # 访问器
    # ------------------------------------------------------------------

    @property
    def name(self) -> str:
        return str(self.data.get("experiment", ""))

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 20240601))

    def section(self, key: str) -> Dict:
        return self.data.get(key) or {}

    @property
    def params(self) -> Dict:
        return self.section("params")

    @property
    def tolerances(self) -> Dict:
        return self.section("tolerances")

    @property
    def kernel(self) -> Dict:
        return self.section("kernel")

    @property
    def dim(self) -> int:
        return int(self.section("grid").get("dim", 1))

    @property
    def alpha(self) -> float:
        return float(self.kernel.get("alpha", 1.0))

    @property
    def p(self) -> float:
        return float(self.params.get("p", 2.0))

    @property
    def output_dir(self) -> Path:
        return resolve_path(self.section("output").get("dir", "results"))

    def resolutions(self) -> List[Tuple[str, int]]:
        """(名称, 每轴点数)：先粗后细"""
        g = self.section("grid")
        fine = int(g.get("points", 129))
        coarse = int(g.get("coarse_points", (fine + 1) // 2))
        return [("coarse", coarse), ("fine", fine)]

    def grid(self, points: Optional[int] = None) -> Grid:
        g = self.section("grid")
        return Grid(
            dim=self.dim,
            half_width=float(g.get("half_width", 4.0)),
            points_per_axis=int(points or g.get("points", 129)),
        )

    def dictionary(self) -> KernelDictionary:
        if self._dictionary is None:
            k = self.kernel
            self._dictionary = make_dictionary(
                alpha=self.alpha,
                size=int(k.get("size", 6)),
                dim=self.dim,
                ref_points=int(k.get("ref_points", 65)),
                seed=int(k.get("seed", self.seed)),
            )
        return self._dictionary

    def scales(self, grid: Grid) -> ScaleGrid:
        return ScaleGrid.for_grid(grid, self.section("scales"))

    def engine_config(self) -> Dict:
        s = self.section("scales")
        return {
            "resolved_only": s.get("resolved_only", True),
            "convolution_method": s.get("convolution_method", "direct"),
        }

    def family(self, grid: Grid, r_max: Optional[float] = None, r_min: Optional[float] = None) -> BallFamily:
        f = self.section("family")
        return BallFamily.lattice(
            grid,
            num_centers=int(f.get("centers", 9)),
            num_radii=int(f.get("radii", 8)),
            r_min=r_min if r_min is not None else f.get("r_min"),
            r_max=r_max if r_max is not None else f.get("r_max"),
            extent=float(f.get("extent", 0.5)),
        )

    def family_config(self) -> Dict:
        """membership_probe 使用的 BallFamily.lattice 参数"""
        f = self.section("family")
        return {
            "num_centers": int(f.get("centers", 9)),
            "num_radii": int(f.get("radii", 8)),
            "extent": float(f.get("extent", 0.5)),
        }

    def weight(self, grid: Grid) -> Weight:
        return Weight.from_config(grid, self.section("weight"))

    # ------------------------------------------------------------------
    # 校验
    # ------------------------------------------------------------------

    def validate(self) -> Tuple[bool, List[str]]:
        """
        检查配置结构与实验前提，不运行实验

        Returns:
            (是否合法, 错误列表)
        """
        errors = []
        if self.name not in EXPERIMENT_NAMES:
            errors.append(f"未知实验: '{self.name}'（可选: {', '.join(EXPERIMENT_NAMES)}）")

        g = self.section("grid")
        if self.dim not in (1, 2):
            errors.append(f"grid.dim 只支持 1 或 2: {self.dim}")
        if float(g.get("half_width", 4.0)) <= 0:
            errors.append("grid.half_width 必须为正")
        for name, points in self.resolutions():
            if points < 9 or points % 2 == 0:
                errors.append(f"{name} 网格点数必须为 ≥ 9 的奇数: {points}")
        (_, coarse), (_, fine) = self.resolutions()
        if coarse >= fine:
            errors.append(f"coarse_points ({coarse}) 必须小于 points ({fine})")

        if not 0.0 < self.alpha <= 1.0:
            errors.append(f"kernel.alpha 必须在 (0, 1] 内: {self.alpha}")
        if int(self.kernel.get("size", 6)) < 4:
            errors.append("kernel.size 必须 ≥ 4")

        if int(self.section("scales").get("num", 24)) < 2:
            errors.append("scales.num 必须 ≥ 2")

        w = self.section("weight")
        kind = w.get("kind", "constant")
        if kind not in ("constant", "power"):
            errors.append(f"weight.kind 只能是 constant 或 power: {kind}")
        elif kind == "power" and float(w.get("gamma", 0.0)) <= -self.dim:
            errors.append(f"幂权需要 γ > −n: γ={w.get('gamma')}")
        elif kind == "constant" and float(w.get("value", 1.0)) <= 0:
            errors.append("常数权必须为正")

        params = self.params
        if self.p < 1.0:
            errors.append(f"params.p 必须 ≥ 1: {self.p}")
        kappa = float(params.get("kappa", 0.5))
        if not 0.0 < kappa < 1.0:
            errors.append(f"params.kappa 必须在 (0, 1) 内: {kappa}")
        korders = list(params.get("korders", [params.get("korder", 1)]))
        for k in korders + [params.get("korder", 1)]:
            if int(k) not in (1, 2, 3):
                errors.append(f"交换子阶数 k 只支持 1、2、3: {k}")
        if any(float(b) < 1.0 for b in params.get("betas", [2.0, 4.0])):
            errors.append("孔径 β 必须 ≥ 1")
        if int(params.get("j_max", 3)) < 1:
            errors.append("params.j_max 必须 ≥ 1")

        if self.name in GSTAR_EXPERIMENTS:
            lam = float(params.get("lam", 4.5))
            bound = 3.0 + self.alpha / self.dim
            if lam <= bound:
                errors.append(f"g*_λ 需要 λ > 3 + α/n = {bound:g}: λ={lam:g}")

        supremal = self.section("conditions").get("supremal", "inf")
        if supremal not in ("inf", "sup"):
            errors.append(f"conditions.supremal 只能是 inf 或 sup: {supremal}")

        return len(errors) == 0, errors

    def require_valid(self) -> None:
        ok, errors = self.validate()
        if not ok:
            raise ParameterError(f"实验 {self.label} 配置无效: " + "; ".join(errors))

    def to_dict(self) -> Dict:
        return copy.deepcopy(self.data)


def load_suite(path: Union[str, Path], defaults: Optional[Dict] = None) -> List[ExperimentConfig]:
    """
    读取实验文件：顶层 experiments 列表为套件，顶层 experiment 键为单个实验

    Raises:
        ParameterError: 两种键都没有，或列表项不是映射
    """
    data = load_yaml(path)
    if defaults is None:
        defaults = load_yaml(DEFAULT_CONFIG_PATH)
    if "experiments" in data:
        entries = data.get("experiments") or []
        shared = {k: v for k, v in data.items() if k != "experiments"}
        configs = []
        for entry in entries:
            if not isinstance(entry, dict):
                raise ParameterError(f"experiments 列表项必须是映射: {entry!r}")
            configs.append(ExperimentConfig.from_dict(deep_merge(shared, entry), defaults))
        return configs
    if "experiment" in data:
        return [ExperimentConfig.from_dict(data, defaults)]
    raise ParameterError(f"配置文件缺少 experiment 或 experiments 键: {resolve_path(path)}")
