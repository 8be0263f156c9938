"""
Hardy Operators - 径向剖面、一维测度与 Hardy 型算子 H、H₁
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Optional

import numpy as np

from utils.errors import ConditionError
from utils.logger import get_logger


logger = get_logger(__name__)

DEFAULT_PER_OCTAVE = 32
MONOTONE_RTOL = 1e-12


def geometric_grid(r_min: float, r_max: float, per_octave: int = DEFAULT_PER_OCTAVE) -> np.ndarray:
    """[r_min, r_max] 上每倍频程 per_octave 个点的几何网格"""
    if not 0 < r_min < r_max:
        raise ConditionError(f"径向区间无效: [{r_min}, {r_max}]")
    num = max(2, int(np.ceil(np.log2(r_max / r_min) * per_octave)) + 1)
    return np.geomspace(r_min, r_max, num)


@dataclass(eq=False)
class RadialProfile:
    """
    几何 r 网格上的函数采样

    Attributes:
        r: 严格递增的正网格
        values: 采样值
        label: 名称
    """
    r: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.r.shape != self.values.shape or self.r.size < 2:
            raise ConditionError("径向剖面的网格与取值长度不一致或过短")
        if np.any(self.r <= 0) or np.any(np.diff(self.r) <= 0):
            raise ConditionError("径向网格必须为正且严格递增")
        if not np.all(np.isfinite(self.values)):
            raise ConditionError(f"径向剖面 {self.label} 含非有限值")

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        r_min: float,
        r_max: float,
        per_octave: int = DEFAULT_PER_OCTAVE,
        label: str = "",
    ) -> "RadialProfile":
        r = geometric_grid(r_min, r_max, per_octave)
        return cls(r, np.broadcast_to(np.asarray(fn(r), dtype=float), r.shape).copy(), label)

    @cached_property
    def monotonicity(self) -> Dict:
        """不增性证书：最大的上升量（相对 max|g|）"""
        rise = np.max(np.diff(self.values), initial=0.0)
        scale = max(float(np.max(np.abs(self.values))), 1e-300)
        violation = max(0.0, float(rise)) / scale
        return {"nonincreasing": violation <= MONOTONE_RTOL, "violation": violation}

    @property
    def nonincreasing(self) -> bool:
        return self.monotonicity["nonincreasing"]

    def running_sup(self) -> np.ndarray:
        """ess sup_{0<s<r} 在采样上的取值（累积最大）"""
        return np.maximum.accumulate(self.values)

    def at(self, t: float) -> float:
        """ln r 上线性插值"""
        return float(np.interp(np.log(t), np.log(self.r), self.values))

    def same_grid(self, other: "RadialProfile") -> bool:
        return self.r.shape == other.r.shape and bool(np.allclose(self.r, other.r, rtol=1e-14, atol=0))


class MeasureKind(Enum):
    """一维测度类型"""
    LEBESGUE = "lebesgue"
    DENSITY = "density"
    ATOMIC = "atomic"


@dataclass(eq=False)
class Measure1D:
    """
    (0, ∞) 上的非负 Borel 测度

    Attributes:
        kind: 类型
        density: DENSITY 情形的密度闭包 m(r) ≥ 0
        atoms: ATOMIC 情形的原子位置
        masses: ATOMIC 情形的原子质量
    """
    kind: MeasureKind = MeasureKind.LEBESGUE
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    atoms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.kind == MeasureKind.DENSITY and self.density is None:
            raise ConditionError("DENSITY 测度需要密度函数")
        if self.kind == MeasureKind.ATOMIC:
            if self.atoms.shape != self.masses.shape:
                raise ConditionError("原子位置与质量长度不一致")
            if np.any(self.masses < 0) or np.any(self.atoms <= 0):
                raise ConditionError("原子必须位于 (0,∞) 且质量非负")

    @classmethod
    def lebesgue(cls) -> "Measure1D":
        return cls(MeasureKind.LEBESGUE)

    @classmethod
    def with_density(cls, density: Callable[[np.ndarray], np.ndarray]) -> "Measure1D":
        return cls(MeasureKind.DENSITY, density=density)

    @classmethod
    def atomic(cls, atoms, masses) -> "Measure1D":
        return cls(MeasureKind.ATOMIC, atoms=atoms, masses=masses)

    def density_at(self, r: np.ndarray) -> np.ndarray:
        if self.kind == MeasureKind.LEBESGUE:
            return np.ones_like(r)
        dens = np.asarray(self.density(r), dtype=float)
        if np.any(dens < 0):
            raise ConditionError("测度密度出现负值")
        return dens

    def integrate(self, r: np.ndarray, values: np.ndarray, lower: float, upper: float) -> float:
        """
        ∫_{[lower, upper]} values dμ：连续部分在 ln r 上梯形求积，原子部分插值求和

        Args:
            r: 采样网格（几何）
            values: 被积函数在 r 上的取值
            lower: 下限（≥ r[0]）
            upper: 上限
        """
        if upper <= lower:
            return 0.0
        if self.kind == MeasureKind.ATOMIC:
            keep = (self.atoms >= lower) & (self.atoms <= upper)
            at = np.interp(np.log(self.atoms[keep]), np.log(r), values)
            return float(np.sum(at * self.masses[keep]))
        inside = (r > lower) & (r < upper)
        nodes = np.concatenate([[lower], r[inside], [upper]])
        vals = np.interp(np.log(nodes), np.log(r), values)
        integrand = vals * self.density_at(nodes) * nodes
        u = np.log(nodes)
        return float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(u)))

    def to_dict(self) -> Dict:
        out = {"kind": self.kind.value}
        if self.kind == MeasureKind.ATOMIC:
            out["num_atoms"] = int(self.atoms.size)
        return out


def hardy_log(g: RadialProfile, mu: Measure1D, t: float, korder: int) -> float:
    """
    (H₁g)(t) = (1/t)∫_{r_min}^{t} ln^k(e + t/r) g(r) dμ(r)

    Args:
        g: 径向剖面
        mu: 测度
        t: 求值点 (t ≥ r_min)
        korder: 对数阶 k ≥ 0（k=0 即 H）
    """
    if korder < 0:
        raise ConditionError(f"korder 必须非负: {korder}")
    if t <= g.r[0]:
        return 0.0
    factor = np.log(np.e + t / g.r) ** korder
    return mu.integrate(g.r, factor * g.values, g.r[0], t) / t


def hardy(g: RadialProfile, mu: Measure1D, t: float) -> float:
    """(Hg)(t) = (1/t)∫_{r_min}^{t} g dμ"""
    return hardy_log(g, mu, t, 0)


@dataclass
class HardyBoundReport:
    """ess sup ω H_k g ≤ c ess sup v g 的数值检查"""
    korder: int
    lhs_sup: float
    rhs_sup: float
    A_or_A1: float
    ratio: Optional[float]
    certificate: Dict

    @property
    def claimed(self) -> bool:
        return self.ratio is not None

    def to_dict(self) -> Dict:
        return {
            "korder": self.korder,
            "lhs_sup": self.lhs_sup,
            "rhs_sup": self.rhs_sup,
            "A_or_A1": self.A_or_A1,
            "ratio": self.ratio,
            "claimed": self.claimed,
            "certificate": self.certificate,
        }


def hardy_constant(omega: RadialProfile, v: RadialProfile, mu: Measure1D, korder: int = 0) -> float:
    """A（k=0）或 A₁：sup_t (ω(t)/t)∫_0^t ln^k(e+t/r) dμ(r) / ess sup_{0<s<r} v(s)"""
    inv = 1.0 / v.running_sup()
    best = 0.0
    for t, om in zip(omega.r[1:], omega.values[1:]):
        factor = np.log(np.e + t / omega.r) ** korder
        best = max(best, om / t * mu.integrate(omega.r, factor * inv, omega.r[0], t))
    return float(best)


def hardy_bound_check(
    omega: RadialProfile,
    v: RadialProfile,
    g: RadialProfile,
    mu: Measure1D,
    korder: int = 0,
) -> HardyBoundReport:
    """
    在 r 网格上计算两侧：lhs = max ω·H_k g，rhs = max v·g，ratio = lhs / (A·rhs)

    g 不单调不增时只标记证书并跳过结论（ratio=None）。
    """
    if not (omega.same_grid(v) and omega.same_grid(g)):
        raise ConditionError("ω、v、g 必须在同一 r 网格上采样")
    cert = g.monotonicity
    lhs = max(om * hardy_log(g, mu, t, korder) for t, om in zip(g.r, omega.values))
    rhs = float(np.max(v.values * g.values))
    A = hardy_constant(omega, v, mu, korder)
    ratio = None
    if cert["nonincreasing"]:
        ratio = float(lhs / (A * rhs)) if A * rhs > 0 else 0.0
    else:
        logger.warning(f"g 不是单调不增（violation={cert['violation']:.3e}），跳过 Hardy 不等式结论")
    return HardyBoundReport(korder, float(lhs), rhs, A, ratio, dict(cert))
