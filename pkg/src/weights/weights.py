"""
Weights - 权函数、加权测度与 Muckenhoupt A_p 诊断
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from grid.grid import Ball, Grid, GridFunction, ball_nodes
from grid.family import BallFamily
from utils.errors import WeightError
from utils.logger import get_logger


logger = get_logger(__name__)

MEMBERSHIP_GROWTH = 1.25


class WeightKind(Enum):
    """权函数类型"""
    CONSTANT = "constant"
    POWER = "power"
    TABULATED = "tabulated"


@dataclass(eq=False)
class Weight:
    """
    格点上严格为正的权函数

    Attributes:
        grid: 网格
        kind: 类型
        params: 解析描述（c / gamma, center）
        table: 制表取值（仅 TABULATED）
        diagnostics: A_p、倍测度、δ 等缓存诊断
    """
    grid: Grid
    kind: WeightKind
    params: Dict = field(default_factory=dict)
    table: Optional[np.ndarray] = None
    diagnostics: Dict = field(default_factory=dict)

    @classmethod
    def constant(cls, grid: Grid, c: float = 1.0) -> "Weight":
        if not c > 0:
            raise WeightError(f"常数权必须为正: c={c}")
        return cls(grid, WeightKind.CONSTANT, {"value": float(c)})

    @classmethod
    def power(cls, grid: Grid, gamma: float, center: Optional[Sequence[float]] = None) -> "Weight":
        """|x − center|^γ，要求 γ > −n（局部可积）"""
        if gamma <= -grid.dim:
            raise WeightError(f"幂权 |x|^γ 需要 γ > −n: γ={gamma}, n={grid.dim}")
        center = [0.0] * grid.dim if center is None else [float(c) for c in center]
        return cls(grid, WeightKind.POWER, {"gamma": float(gamma), "center": center})

    @classmethod
    def tabulated(cls, f: GridFunction) -> "Weight":
        if np.any(f.values <= 0):
            raise WeightError("制表权必须在所有节点上严格为正")
        return cls(f.grid, WeightKind.TABULATED, {}, table=np.array(f.values))

    @classmethod
    def from_config(cls, grid: Grid, config: Dict) -> "Weight":
        kind = config.get("kind", "constant")
        if kind == "constant":
            return cls.constant(grid, config.get("value", 1.0))
        if kind == "power":
            return cls.power(grid, config.get("gamma", 0.0), config.get("center"))
        raise WeightError(f"配置不支持的权类型: {kind}")

    def on(self, grid: Grid) -> "Weight":
        """同一解析描述在另一网格上的权"""
        if self.kind == WeightKind.TABULATED:
            raise WeightError("制表权不能迁移到其它网格")
        return Weight(grid, self.kind, dict(self.params))

    def same_as(self, other: "Weight") -> bool:
        """同一网格上类型与参数（制表权为取值）相同"""
        if other is self:
            return True
        if self.grid != other.grid or self.kind != other.kind or self.params != other.params:
            return False
        if self.kind == WeightKind.TABULATED:
            return bool(np.array_equal(self.table, other.table))
        return True

    @property
    def label(self) -> str:
        if self.kind == WeightKind.CONSTANT:
            return f"const({self.params['value']:g})"
        if self.kind == WeightKind.POWER:
            return f"|x|^{self.params['gamma']:g}"
        return "tabulated"

    @cached_property
    def values(self) -> np.ndarray:
        """节点取值；幂权在奇点节点处取 w(h/2)"""
        if self.kind == WeightKind.CONSTANT:
            vals = np.full(self.grid.num_nodes, self.params["value"])
        elif self.kind == WeightKind.POWER:
            gamma = self.params["gamma"]
            dist = np.sqrt(np.sum((self.grid.nodes - np.asarray(self.params["center"])) ** 2, axis=1))
            dist = np.where(dist == 0.0, 0.5 * self.grid.spacing, dist)
            vals = dist ** gamma
        else:
            vals = np.array(self.table, dtype=float)
        vals.setflags(write=False)
        return vals

    def dual_values(self, p: float) -> np.ndarray:
        """对偶权 w^{1−p'}"""
        if p <= 1:
            raise WeightError(f"对偶权需要 p > 1: p={p}")
        with np.errstate(over="raise", divide="raise"):
            try:
                return self.values ** (-1.0 / (p - 1.0))
            except FloatingPointError:
                raise WeightError(
                    f"计算 w^(1-p') 溢出（p={p}, {self.label}），请缩小 |γ| 或增大 p"
                )

    def measure(self, ball: Ball) -> float:
        """w(B) = h^n Σ_{B} w"""
        idx = ball_nodes(self.grid, ball)
        return self.grid.cell_volume * float(np.sum(self.values[idx]))

    def analytic_measure(self, center: Sequence[float], radius: float) -> float:
        """
        ℝⁿ 上的精确球测度（常数权与幂权），用于超出盒的积分
        """
        if self.kind == WeightKind.CONSTANT:
            return self.params["value"] * Ball(tuple(center), radius).lebesgue_measure
        if self.kind != WeightKind.POWER:
            raise WeightError("制表权没有解析球测度")
        gamma = self.params["gamma"]
        rel = np.asarray(center, dtype=float) - np.asarray(self.params["center"])
        if self.grid.dim == 1:
            a = float(rel[0])
            F = lambda u: np.sign(u) * abs(u) ** (gamma + 1.0) / (gamma + 1.0)
            return float(F(a + radius) - F(a - radius))
        a = float(np.linalg.norm(rel))
        if a == 0.0:
            return 2.0 * np.pi * radius ** (gamma + 2.0) / (gamma + 2.0)

        def arc(rho: float) -> float:
            if rho <= radius - a:
                return 2.0 * np.pi
            c = (rho * rho + a * a - radius * radius) / (2.0 * rho * a)
            return 2.0 * np.arccos(np.clip(c, -1.0, 1.0))

        lo = max(0.0, a - radius)
        breaks = [radius - a] if lo < radius - a < a + radius else None
        value, _ = quad(lambda rho: rho ** (gamma + 1.0) * arc(rho), lo, a + radius, points=breaks, limit=200)
        return float(value)

    def extended_measure(self, ball: Ball) -> float:
        """盒内的球用离散测度，出盒的球改用 ℝⁿ 上的解析测度（制表权只能截断）"""
        if ball.fits_in(self.grid) or self.kind == WeightKind.TABULATED:
            return self.measure(ball)
        return self.analytic_measure(ball.center, ball.radius)

    def to_dict(self) -> Dict:
        return {"kind": self.kind.value, "params": self.params, "diagnostics": self.diagnostics}


def measure(w: Weight, ball: Ball) -> float:
    """加权测度 w(B)"""
    return w.measure(ball)


def _ball_mean(values: np.ndarray, idx: np.ndarray) -> float:
    return float(np.mean(values[idx]))


def ap_characteristic(w: Weight, p: float, balls: BallFamily) -> float:
    """
    [w]_{A_p} 在球族上的估计 max (avg_B w)(avg_B w^{1−p'})^{p−1}

    Args:
        w: 权
        p: 指数 p > 1
        balls: 球族

    Returns:
        特征常数估计（≥ 1）
    """
    if p <= 1:
        raise WeightError(f"A_p 特征需要 p > 1: p={p}")
    vals = w.values
    dual = w.dual_values(p)
    best = 0.0
    with np.errstate(over="raise"):
        try:
            for ball in balls:
                idx = ball_nodes(w.grid, ball)
                best = max(best, _ball_mean(vals, idx) * _ball_mean(dual, idx) ** (p - 1.0))
        except FloatingPointError:
            raise WeightError(f"A_{p} 特征计算溢出（{w.label}），请缩小 |γ|")
    if not np.isfinite(best):
        raise WeightError(f"A_{p} 特征非有限（{w.label}），请缩小 |γ|")
    w.diagnostics.setdefault("ap", {})[str(p)] = best
    w.diagnostics["family_id"] = balls.id
    return best


def a1_characteristic(w: Weight, balls: BallFamily) -> float:
    """[w]_{A_1} 估计：max_x (球族限制极大平均)(x) / w(x)"""
    vals = w.values
    maximal = np.zeros(w.grid.num_nodes)
    covered = np.zeros(w.grid.num_nodes, dtype=bool)
    for ball in balls:
        idx = ball_nodes(w.grid, ball)
        maximal[idx] = np.maximum(maximal[idx], _ball_mean(vals, idx))
        covered[idx] = True
    best = float(np.max(maximal[covered] / vals[covered]))
    w.diagnostics["a1"] = best
    return best


def doubling_constant(w: Weight, balls: BallFamily) -> float:
    """max w(2B)/w(B)；二倍球出盒的球跳过并计数"""
    best = 0.0
    skipped = 0
    for ball in balls:
        double = ball.scaled(2.0)
        if not double.fits_in(w.grid):
            skipped += 1
            continue
        best = max(best, w.measure(double) / w.measure(ball))
    if skipped == len(balls):
        raise WeightError("球族中所有二倍球都超出盒，无法估计倍测度常数")
    w.diagnostics["doubling"] = best
    w.diagnostics["doubling_skipped"] = skipped
    return best


def check_ap_growth(w: Weight, p: float, balls: BallFamily, lambdas: Sequence[float] = (2.0, 4.0)) -> Dict:
    """
    w(λB) ≤ λ^{np}[w]_{A_p} w(B) 的逐球检查

    同时给出离散精确形式 w(λB)/w(B) ≤ (#λB/#B)^p [w]_{A_p(λB)}

    Returns:
        {worst_literal, worst_exact, checked, skipped}
    """
    ap = ap_characteristic(w, p, balls)
    n = w.grid.dim
    dual = w.dual_values(p)
    worst_literal = 0.0
    worst_exact = 0.0
    checked = skipped = 0
    for lam in lambdas:
        for ball in balls:
            big = ball.scaled(lam)
            if not big.fits_in(w.grid):
                skipped += 1
                continue
            small_idx = ball_nodes(w.grid, ball)
            big_idx = ball_nodes(w.grid, big)
            lhs = w.measure(big) / w.measure(ball)
            ap_big = _ball_mean(w.values, big_idx) * _ball_mean(dual, big_idx) ** (p - 1.0)
            exact = (big_idx.size / small_idx.size) ** p * ap_big
            worst_literal = max(worst_literal, lhs / (lam ** (n * p) * ap))
            worst_exact = max(worst_exact, lhs / exact)
            checked += 1
    return {
        "p": p,
        "lambdas": list(lambdas),
        "ap_estimate": ap,
        "worst_literal": worst_literal,
        "worst_exact": worst_exact,
        "checked": checked,
        "skipped": skipped,
    }


def ap_monotonicity(w: Weight, ps: Sequence[float], balls: BallFamily) -> Dict:
    """A_p ⊂ A_q（p < q）：特征常数随 p 不增"""
    ps = sorted(ps)
    values = [ap_characteristic(w, p, balls) for p in ps]
    worst = max((values[i + 1] / values[i] for i in range(len(values) - 1)), default=1.0)
    return {"ps": ps, "ap": values, "worst_increase": worst}


@dataclass
class ReverseDoublingFit:
    """w(S)/w(B) ≤ C (|S|/|B|)^δ 的拟合"""
    delta: float
    C: float
    C_holdout: float
    num_fit: int
    num_holdout: int
    tolerance: float = 0.25

    @property
    def holds(self) -> bool:
        return self.C_holdout <= max(self.C, 1.0) * (1.0 + self.tolerance)

    def to_dict(self) -> Dict:
        return {
            "delta": self.delta,
            "C": self.C,
            "C_holdout": self.C_holdout,
            "num_fit": self.num_fit,
            "num_holdout": self.num_holdout,
            "holds": self.holds,
        }


def nested_pairs(w: Weight, balls: BallFamily) -> List[tuple]:
    """
    嵌套球对 (ρ, ρ_w)：S 取同心及贴边子球，ρ = #S/#B，ρ_w = w(S)/w(B)
    """
    pairs = []
    n = w.grid.dim
    for c in balls.centers:
        for r in balls.radii:
            big = Ball(tuple(c), float(r))
            big_idx = ball_nodes(w.grid, big)
            w_big = w.measure(big)
            for s in balls.radii[balls.radii < r]:
                offsets = [np.zeros(n)]
                for i in range(n):
                    e = np.zeros(n)
                    e[i] = r - s
                    offsets += [e, -e]
                for off in offsets:
                    sub = Ball(tuple(c + off), float(s))
                    if not w.grid.contains(sub.center):
                        continue
                    sub_idx = ball_nodes(w.grid, sub)
                    rho = sub_idx.size / big_idx.size
                    if rho >= 1.0:
                        continue
                    pairs.append((rho, w.measure(sub) / w_big))
    return pairs


def check_reverse_doubling(w: Weight, p: float, balls: BallFamily) -> float:
    """
    拟合最大 δ 使 w(S)/w(B) ≤ C(|S|/|B|)^δ；偶数下标对用于拟合，奇数下标对留出检验

    Returns:
        δ 估计（拟合细节存入 w.diagnostics["reverse_doubling"]）
    """
    pairs = nested_pairs(w, balls)
    if len(pairs) < 2:
        raise WeightError("嵌套球对不足，无法拟合 δ")
    fit = pairs[0::2]
    held = pairs[1::2]
    delta = min(1.0, min(np.log(rw) / np.log(rho) for rho, rw in fit))
    C = max(rw / rho ** delta for rho, rw in fit)
    C_hold = max(rw / rho ** delta for rho, rw in held)
    result = ReverseDoublingFit(float(delta), float(C), float(C_hold), len(fit), len(held))
    w.diagnostics["reverse_doubling"] = result.to_dict()
    w.diagnostics["delta"] = result.delta
    w.diagnostics["p"] = p
    return result.delta


def membership_probe(
    weight: Weight,
    p: Optional[float],
    family_config: Dict,
    threshold: float = MEMBERSHIP_GROWTH,
) -> Dict:
    """
    A_p（p=None 时为 A_1）成员判定：对比当前网格球族与加密网格（2m−1）上重建的球族

    Returns:
        {base, enlarged, growth, accepted}
    """
    base_grid = weight.grid
    fine_grid = base_grid.refined()
    cfg = {k: v for k, v in family_config.items() if k != "r_min"}
    base_family = BallFamily.lattice(base_grid, **cfg)
    fine_cfg = dict(cfg)
    fine_cfg["num_radii"] = 2 * cfg.get("num_radii", 8) - 1
    fine_family = BallFamily.lattice(fine_grid, **fine_cfg)
    fine_weight = weight.on(fine_grid)
    if p is None:
        base, enlarged = a1_characteristic(weight, base_family), a1_characteristic(fine_weight, fine_family)
    else:
        base, enlarged = ap_characteristic(weight, p, base_family), ap_characteristic(fine_weight, p, fine_family)
    growth = enlarged / base
    return {
        "weight": weight.label,
        "p": p,
        "base": base,
        "enlarged": enlarged,
        "growth": growth,
        "accepted": bool(growth < threshold),
        "base_family": base_family.id,
        "enlarged_family": fine_family.id,
    }
