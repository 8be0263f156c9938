"""
Pair Conditions - (φ₁, φ₂) 对的积分条件求值与 ∫ ln^k(e+τ) τ^{-a} dτ/τ 尾积分
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np
from scipy.integrate import trapezoid

from grid.family import BallFamily
from norms.norms import PhiFunction
from weights.weights import Weight
from utils.errors import ConditionError
from utils.logger import get_logger


logger = get_logger(__name__)

DEFAULT_T_MAX = 2.0 ** 20
DEFAULT_PER_OCTAVE = 8
DRIFT_TOLERANCE = 0.05

TAIL_START = 8.0
TAIL_POINTS = 2049
TAIL_RTOL = 1e-6
TAIL_MAX_DOUBLINGS = 30


class ConditionKind(Enum):
    """
    ZYGMUND:   ∫_r^∞ φ₁(x,t) dt/t ≤ C φ₂(x,r)
    SUPREMAL:  ∫_r^∞ ess_{s>t} φ₁(x,s) s^{n/p} / t^{n/p+1} dt ≤ C φ₂(x,r)
    WEIGHTED:  ∫_r^∞ ess_{s>t} φ₁(x,s) w(B(x,s))^{1/p} / w(B(x,t))^{1/p} dt/t ≤ C φ₂(x,r)
    LOG:       同 WEIGHTED，被积函数乘 ln^k(e + t/r)
    """
    ZYGMUND = "1.1"
    SUPREMAL = "1.2"
    WEIGHTED = "1.3"
    LOG = "1.4"

    @classmethod
    def parse(cls, value) -> "ConditionKind":
        text = str(value)
        for kind in cls:
            if kind.value == text or kind.name.lower() == text.lower():
                return kind
        raise ConditionError(f"未知的条件类型: {value}")


@dataclass
class ConditionReport:
    """条件在 (x, r) 族上的最小常数报告"""
    kind: ConditionKind
    korder: int
    p: float
    phi1: str
    phi2: str
    weight: str
    family_id: str
    C_min: float
    C_half: float
    tail_drift: float
    argmax: Optional[Dict] = None
    grid: Dict = field(default_factory=dict)
    drift_tolerance: float = DRIFT_TOLERANCE

    @property
    def verdict(self) -> str:
        return "holds" if self.tail_drift < self.drift_tolerance else "fails"

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "k": self.korder,
            "p": self.p,
            "phi1": self.phi1,
            "phi2": self.phi2,
            "weight": self.weight,
            "family_id": self.family_id,
            "C_min": self.C_min,
            "C_half": self.C_half,
            "tail_drift": self.tail_drift,
            "verdict": self.verdict,
            "argmax": self.argmax,
            "grid": self.grid,
        }


def horizon_grid(r: float, t_max: float, per_octave: int) -> np.ndarray:
    """从 t_max 向下每倍频程 per_octave 个点直到 r（t_max/2 总是网格点）"""
    if t_max <= 2.0 * r:
        raise ConditionError(f"截断视界 T_max={t_max} 必须大于 2r={2.0 * r}")
    steps = int(np.floor(np.log2(t_max / r) * per_octave + 1e-9))
    t = t_max * 2.0 ** (-np.arange(steps + 1)[::-1] / per_octave)
    if t[0] > r * (1.0 + 1e-12):
        t = np.concatenate([[r], t])
    else:
        t[0] = r
    return t


def _suffix_extreme(values: np.ndarray, supremal: str) -> np.ndarray:
    """ess_{s ≥ t} 在采样上的后缀极值"""
    rev = values[::-1]
    acc = np.minimum.accumulate(rev) if supremal == "inf" else np.maximum.accumulate(rev)
    return acc[::-1]


class ConditionEvaluator:
    """
    条件求值器：对每个 (x, r) 计算 LHS(x,r)/φ₂(x,r)，取族上最大值

    配置项：t_max、per_octave、supremal（inf 为默认读法，sup 为字面读法）、drift_tolerance
    """

    def __init__(self, config: Dict = None):
        self.config = config or {}
        self.t_max = float(self.config.get("t_max", DEFAULT_T_MAX))
        self.per_octave = int(self.config.get("per_octave", DEFAULT_PER_OCTAVE))
        self.supremal = self.config.get("supremal", "inf")
        self.drift_tolerance = float(self.config.get("drift_tolerance", DRIFT_TOLERANCE))
        if self.supremal not in ("inf", "sup"):
            raise ConditionError(f"supremal 只能是 inf 或 sup: {self.supremal}")

    def _integrand(
        self,
        kind: ConditionKind,
        phi1: PhiFunction,
        w: Weight,
        p: float,
        dim: int,
        center: np.ndarray,
        r: float,
        t: np.ndarray,
        korder: int,
        horizon: int,
    ) -> np.ndarray:
        """t[:horizon] 上的被积函数（关于 dt/t）"""
        t = t[:horizon]
        phi_vals = np.array([phi1(center, s) for s in t])
        if kind == ConditionKind.ZYGMUND:
            return phi_vals
        if kind == ConditionKind.SUPREMAL:
            ess = _suffix_extreme(phi_vals * t ** (dim / p), self.supremal)
            return ess * t ** (-dim / p)
        wb = np.array([w.analytic_measure(center, s) for s in t]) ** (1.0 / p)
        ess = _suffix_extreme(phi_vals * wb, self.supremal)
        out = ess / wb
        if kind == ConditionKind.LOG:
            out = out * np.log(np.e + t / r) ** korder
        return out

    def evaluate(
        self,
        phi1: PhiFunction,
        phi2: PhiFunction,
        w: Weight,
        p: float,
        kind: ConditionKind,
        points: BallFamily,
        korder: int = 0,
    ) -> ConditionReport:
        kind = ConditionKind.parse(kind.value if isinstance(kind, ConditionKind) else kind)
        if kind == ConditionKind.LOG and korder < 0:
            raise ConditionError(f"korder 必须非负: {korder}")
        phi1 = phi1.with_mode("analytic")
        phi2 = phi2.with_mode("analytic")
        dim = points.dim
        best = best_half = 0.0
        arg = None
        for c in points.centers:
            for r in points.radii:
                r = float(r)
                denom = phi2(c, r)
                if not denom > 0:
                    raise ConditionError(f"φ₂ 在 (x={c.tolist()}, r={r}) 处为零")
                t = horizon_grid(r, self.t_max, self.per_octave)
                half = int(np.searchsorted(t, self.t_max / 2.0 * (1.0 + 1e-12), side="right"))
                u = np.log(t)
                full = self._integrand(kind, phi1, w, p, dim, c, r, t, korder, t.size)
                part = self._integrand(kind, phi1, w, p, dim, c, r, t, korder, half)
                value = trapezoid(full, u) / denom
                value_half = trapezoid(part, u[:half]) / denom
                if value > best:
                    best, best_half = value, value_half
                    arg = {"center": c.tolist(), "r": r}
        drift = abs(best - best_half) / best_half if best_half > 0 else (0.0 if best == 0 else np.inf)
        return ConditionReport(
            kind=kind,
            korder=korder if kind == ConditionKind.LOG else 0,
            p=p,
            phi1=phi1.label,
            phi2=phi2.label,
            weight=w.label,
            family_id=points.id,
            C_min=float(best),
            C_half=float(best_half),
            tail_drift=float(drift),
            argmax=arg,
            grid={"t_max": self.t_max, "per_octave": self.per_octave, "supremal": self.supremal},
            drift_tolerance=self.drift_tolerance,
        )


def condition_eval(
    phi1: PhiFunction,
    phi2: PhiFunction,
    w: Weight,
    p: float,
    kind,
    points: BallFamily,
    korder: int = 0,
    config: Dict = None,
) -> ConditionReport:
    """
    条件 (φ₁, φ₂) 在 (x, r) 族上的最小常数 C 与截断敏感度

    Args:
        phi1, phi2: 尺度函数（内部改用 ℝⁿ 上的解析球测度）
        w: 权
        p: 指数
        kind: ConditionKind 或 "1.1" / "1.2" / "1.3" / "1.4"
        points: (x, r) 族
        korder: LOG 情形的对数阶 k
        config: t_max、per_octave、supremal、drift_tolerance

    Returns:
        ConditionReport（verdict: tail_drift < 5% 为 holds）
    """
    return ConditionEvaluator(config).evaluate(phi1, phi2, w, p, kind, points, korder)


def remark_1_7_tail(
    kappa: float,
    p: float,
    n: int,
    delta: float,
    korder: int,
    points_per_piece: int = TAIL_POINTS,
    max_doublings: int = TAIL_MAX_DOUBLINGS,
) -> float:
    """
    ∫_1^∞ ln^k(e+τ) τ^{nδ(κ−1)/p} dτ/τ

    令 u = ln τ，先积 [0, 8]，再逐段积 [U, 2U]，直到新段占比 < 1e−6；
    段数用尽仍未收敛视为发散（κ ≥ 1 时必然如此）。

    Raises:
        ConditionError: δ ≤ 0，或积分发散
    """
    if delta <= 0:
        raise ConditionError(f"需要 δ > 0: δ={delta}")
    if p <= 0 or n < 1:
        raise ConditionError(f"参数无效: p={p}, n={n}")
    a = n * delta * (1.0 - kappa) / p

    def piece(lo: float, hi: float) -> float:
        u = np.linspace(lo, hi, points_per_piece)
        with np.errstate(over="ignore"):
            vals = np.logaddexp(1.0, u) ** korder * np.exp(-a * u)
        return float(trapezoid(vals, u))

    total = piece(0.0, TAIL_START)
    upper = TAIL_START
    for _ in range(max_doublings):
        extra = piece(upper, 2.0 * upper)
        if not np.isfinite(extra):
            break
        total += extra
        upper *= 2.0
        if extra <= TAIL_RTOL * total:
            return total
    raise ConditionError(
        f"尾积分在 τ ≤ e^{upper:g} 内未收敛（κ={kappa}, δ={delta}, k={korder}），判定为发散"
    )
