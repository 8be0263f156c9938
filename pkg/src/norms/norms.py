"""
Norms - 加权 Lebesgue / 弱 Lebesgue / 广义加权 Morrey 范数
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from grid.grid import Ball, GridFunction, VecGridFunction, ball_nodes, l2_pointwise
from grid.family import BallFamily
from weights.weights import Weight
from utils.errors import NormError
from utils.logger import get_logger


logger = get_logger(__name__)

MEASURE_MODES = ("discrete", "analytic", "extended")

Field = Union[GridFunction, VecGridFunction]


class PhiKind(Enum):
    """φ(x, r) 的类型"""
    POWER = "power"
    WEIGHTED_MORREY = "weighted_morrey"
    TWO_WEIGHT = "two_weight"
    LEBESGUE = "lebesgue"
    CUSTOM = "custom"


@dataclass(eq=False)
class PhiFunction:
    """
    Morrey 型范数的尺度函数 φ(x, r)

    Attributes:
        kind: 类型
        p: 可积指数
        params: 参数（exponent / lam / kappa）
        weight: w（加权 Morrey、Lebesgue、双权的 w）
        v_weight: 双权情形的 v
        fn: 自定义闭包 (center, r) -> float
        measure_mode: 球测度取法 discrete（盒内求和）/ analytic（ℝⁿ 精确）/ extended
    """
    kind: PhiKind
    p: float
    params: Dict = field(default_factory=dict)
    weight: Optional[Weight] = None
    v_weight: Optional[Weight] = None
    fn: Optional[Callable] = None
    measure_mode: str = "discrete"

    @classmethod
    def power_law(cls, p: float, exponent: float) -> "PhiFunction":
        """φ = r^{exponent}"""
        return cls(PhiKind.POWER, p, {"exponent": float(exponent)})

    @classmethod
    def power(cls, p: float, lam: float, dim: int) -> "PhiFunction":
        """经典 Morrey 情形 φ = r^{(λ−n)/p}"""
        return cls(PhiKind.POWER, p, {"exponent": (lam - dim) / p, "lam": float(lam)})

    @classmethod
    def weighted_morrey(cls, w: Weight, p: float, kappa: float) -> "PhiFunction":
        """φ = w(B(x,r))^{(κ−1)/p}"""
        return cls(PhiKind.WEIGHTED_MORREY, p, {"kappa": float(kappa)}, weight=w)

    @classmethod
    def two_weight(cls, v: Weight, w: Weight, p: float, kappa: float) -> "PhiFunction":
        """φ = v(B)^{κ/p} w(B)^{−1/p}"""
        return cls(PhiKind.TWO_WEIGHT, p, {"kappa": float(kappa)}, weight=w, v_weight=v)

    @classmethod
    def lebesgue(cls, w: Weight, p: float) -> "PhiFunction":
        """φ = w(B)^{−1/p}：Morrey 范数退化为 L^p_w 范数"""
        return cls(PhiKind.LEBESGUE, p, {}, weight=w)

    @classmethod
    def custom(cls, p: float, fn: Callable[[np.ndarray, float], float], label: str = "custom") -> "PhiFunction":
        return cls(PhiKind.CUSTOM, p, {"label": label}, fn=fn)

    @classmethod
    def from_config(cls, config: Dict, p: float, dim: int, w: Optional[Weight] = None) -> "PhiFunction":
        """从配置字典构造：{kind: power, exponent|lam} / {kind: weighted_morrey, kappa} / {kind: lebesgue}"""
        kind = config.get("kind", "power")
        if kind == "power":
            if "exponent" in config:
                return cls.power_law(p, config["exponent"])
            return cls.power(p, config.get("lam", 0.0), dim)
        if w is None:
            raise NormError(f"φ 类型 {kind} 需要权函数")
        if kind == "weighted_morrey":
            return cls.weighted_morrey(w, p, config.get("kappa", 0.5))
        if kind == "lebesgue":
            return cls.lebesgue(w, p)
        raise NormError(f"配置不支持的 φ 类型: {kind}")

    def with_mode(self, mode: str) -> "PhiFunction":
        if mode not in MEASURE_MODES:
            raise NormError(f"未知的测度模式: {mode}")
        return replace(self, measure_mode=mode)

    @property
    def label(self) -> str:
        if self.kind == PhiKind.POWER:
            return f"r^{self.params['exponent']:g}"
        if self.kind == PhiKind.WEIGHTED_MORREY:
            return f"w(B)^((kappa-1)/p), kappa={self.params['kappa']:g}"
        if self.kind == PhiKind.TWO_WEIGHT:
            return f"v(B)^(kappa/p) w(B)^(-1/p), kappa={self.params['kappa']:g}"
        if self.kind == PhiKind.LEBESGUE:
            return "w(B)^(-1/p)"
        return self.params.get("label", "custom")

    def ball_measure(self, w: Weight, center: Sequence[float], r: float) -> float:
        ball = Ball(tuple(np.atleast_1d(center)), r)
        if self.measure_mode == "analytic":
            return w.analytic_measure(ball.center, r)
        if self.measure_mode == "extended":
            return w.extended_measure(ball)
        return w.measure(ball)

    def __call__(self, center: Sequence[float], r: float) -> float:
        p = self.p
        if self.kind == PhiKind.POWER:
            value = r ** self.params["exponent"]
        elif self.kind == PhiKind.WEIGHTED_MORREY:
            value = self.ball_measure(self.weight, center, r) ** ((self.params["kappa"] - 1.0) / p)
        elif self.kind == PhiKind.TWO_WEIGHT:
            kappa = self.params["kappa"]
            value = (self.ball_measure(self.v_weight, center, r) ** (kappa / p)
                     * self.ball_measure(self.weight, center, r) ** (-1.0 / p))
        elif self.kind == PhiKind.LEBESGUE:
            value = self.ball_measure(self.weight, center, r) ** (-1.0 / p)
        else:
            value = float(self.fn(np.atleast_1d(center), r))
        if not (np.isfinite(value) and value > 0):
            raise NormError(f"φ 在 (x={list(np.atleast_1d(center))}, r={r}) 处非正或非有限: {value}")
        return float(value)

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "p": self.p,
            "params": self.params,
            "label": self.label,
            "measure_mode": self.measure_mode,
        }


@dataclass
class NormReport:
    """范数报告"""
    norm_kind: str
    p: float
    phi_kind: Optional[str]
    family_id: str
    value: float
    argmax_ball: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {
            "norm_kind": self.norm_kind,
            "p": self.p,
            "phi_kind": self.phi_kind,
            "family_id": self.family_id,
            "value": self.value,
            "argmax_ball": self.argmax_ball,
        }


def _magnitude(f: Field) -> np.ndarray:
    return l2_pointwise(f).values


def _check_p(p: float) -> None:
    if p < 1:
        raise NormError(f"需要 p ≥ 1: p={p}")


def _lp_on_nodes(mag: np.ndarray, w: Weight, p: float, idx: np.ndarray) -> float:
    return float((w.grid.cell_volume * np.sum(mag[idx] ** p * w.values[idx])) ** (1.0 / p))


def _weak_on_nodes(mag: np.ndarray, w: Weight, p: float, idx: np.ndarray) -> float:
    """
    精确离散弱范数：在每个不同取值 v 处 t ↑ v，sup = max_v v·w({|f| ≥ v})^{1/p}
    """
    vals = mag[idx]
    wts = w.values[idx] * w.grid.cell_volume
    order = np.argsort(-vals, kind="stable")
    v = vals[order]
    cum = np.cumsum(wts[order])
    last = np.append(np.nonzero(np.diff(v))[0], v.size - 1)
    levels = v[last]
    mass = cum[last]
    keep = levels > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(levels[keep] * mass[keep] ** (1.0 / p)))


def lp_w_ball(f: Field, w: Weight, p: float, ball: Ball) -> float:
    """
    ‖f‖_{L^p_w(B)} = (h^n Σ_B |f|^p w)^{1/p}

    Args:
        f: 标量或向量场（向量场取逐点 ℓ² 范数）
        w: 权
        p: 指数 p ≥ 1
        ball: 球
    """
    _check_p(p)
    return _lp_on_nodes(_magnitude(f), w, p, ball_nodes(w.grid, ball))


def weak_lp_w_ball(f: Field, w: Weight, p: float, ball: Ball) -> float:
    """‖f‖_{WL^p_w(B)}，按不同取值精确扫描阈值"""
    _check_p(p)
    return _weak_on_nodes(_magnitude(f), w, p, ball_nodes(w.grid, ball))


def morrey_report(
    vf: Field,
    w: Weight,
    p: float,
    phi: PhiFunction,
    balls: BallFamily,
    weak: bool = False,
) -> NormReport:
    """
    sup_B φ(x,r)^{−1} w(B)^{−1/p} ‖f‖_{(W)L^p_w(B)} 在球族上的最大值及取到它的球
    """
    _check_p(p)
    mag = _magnitude(vf)
    local = _weak_on_nodes if weak else _lp_on_nodes
    # φ = w(B)^{−1/p} 且与范数用同一离散测度时逐球值就是 ‖f‖_{L^p_w(B)}
    collapse = (
        phi.kind == PhiKind.LEBESGUE
        and phi.measure_mode == "discrete"
        and phi.weight is not None
        and phi.weight.same_as(w)
    )
    best, arg = 0.0, None
    for ball in balls:
        idx = ball_nodes(w.grid, ball)
        norm = local(mag, w, p, idx)
        if norm == 0.0:
            continue
        if collapse:
            value = norm
        else:
            value = norm / (phi(ball.center, ball.radius) * w.measure(ball) ** (1.0 / p))
        if value > best:
            best, arg = value, ball.to_dict()
    return NormReport(
        norm_kind="weak_morrey" if weak else "morrey",
        p=p,
        phi_kind=phi.kind.value,
        family_id=balls.id,
        value=float(best),
        argmax_ball=arg,
    )


def morrey_norm(
    vf: Field,
    w: Weight,
    p: float,
    phi: PhiFunction,
    balls: BallFamily,
    weak: bool = False,
) -> float:
    """广义加权 Morrey 范数（weak=True 时为弱 Morrey 范数）"""
    return morrey_report(vf, w, p, phi, balls, weak).value


def tail_integral(
    f: Field,
    w: Weight,
    p: float,
    center: Sequence[float],
    t_from: float,
    t_to: float,
    per_octave: int = 16,
    korder: int = 0,
    r_ref: Optional[float] = None,
    weak: bool = False,
) -> Dict:
    """
    ∫_{t_from}^{t_to} ln^k(e + t/r) ‖f‖_{L^p_w(B(x0,t))} w(B(x0,t))^{−1/p} dt/t

    ln t 上几何网格梯形求积；同时给出最后一个倍频程的贡献占比。
    出盒的球用解析测度。

    Returns:
        {value, last_octave_mass, num_points}
    """
    if t_to <= t_from:
        raise NormError(f"尾积分区间无效: [{t_from}, {t_to}]")
    if korder and r_ref is None:
        raise NormError("带对数因子的尾积分需要参考半径 r_ref")
    mag = _magnitude(f)
    local = _weak_on_nodes if weak else _lp_on_nodes
    octaves = np.log2(t_to / t_from)
    num = max(2, int(np.ceil(octaves * per_octave)) + 1)
    ts = np.geomspace(t_from, t_to, num)
    integrand = np.zeros(num)
    for i, t in enumerate(ts):
        ball = Ball(tuple(np.atleast_1d(center)), float(t))
        norm = local(mag, w, p, ball_nodes(w.grid, ball))
        integrand[i] = norm * w.extended_measure(ball) ** (-1.0 / p)
        if korder:
            integrand[i] *= np.log(np.e + t / r_ref) ** korder
    u = np.log(ts)
    pieces = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(u)
    value = float(np.sum(pieces))
    last = ts[:-1] >= t_to / 2.0 * (1.0 - 1e-12)
    last_mass = float(np.sum(pieces[last]) / value) if value > 0 else 0.0
    return {"value": value, "last_octave_mass": last_mass, "num_points": int(num)}
