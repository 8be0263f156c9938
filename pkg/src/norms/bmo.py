"""
BMO - 平均振幅、加权 BMO、John-Nirenberg 探针与对数型球对估计
"""
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from grid.grid import Ball, GridFunction, ball_nodes
from grid.family import BallFamily
from weights.weights import Weight
from norms.norms import NormReport
from utils.errors import NormError
from utils.logger import get_logger


logger = get_logger(__name__)

JN_MIN_COUNT = 8
JN_NUM_LEVELS = 32
JN_LOWER = 1.5


def _oscillation(bvals: np.ndarray, wvals: np.ndarray) -> Tuple[float, float]:
    """
    加权平均与平均振幅

    Returns:
        (b_{B,w}, (1/w(B)) Σ |b − b_{B,w}| w)
    """
    mass = np.sum(wvals)
    avg = float(np.sum(bvals * wvals) / mass)
    return avg, float(np.sum(np.abs(bvals - avg) * wvals) / mass)


def _scan(b: GridFunction, balls: BallFamily, wvals: np.ndarray) -> Tuple[float, Optional[Dict]]:
    best, arg = 0.0, None
    for ball in balls:
        idx = ball_nodes(b.grid, ball)
        _, osc = _oscillation(b.values[idx], wvals[idx])
        if osc > best:
            best, arg = osc, ball.to_dict()
    return best, arg


def bmo_report(b: GridFunction, balls: BallFamily, w: Optional[Weight] = None) -> NormReport:
    """‖b‖_* 或 ‖b‖_{*,w} 及取到最大值的球"""
    wvals = np.ones(b.grid.num_nodes) if w is None else w.values
    value, arg = _scan(b, balls, wvals)
    return NormReport(
        norm_kind="bmo" if w is None else "bmo_weighted",
        p=1.0,
        phi_kind=None,
        family_id=balls.id,
        value=value,
        argmax_ball=arg,
    )


def bmo_norm(b: GridFunction, balls: BallFamily) -> float:
    """‖b‖_* = max_B (1/|B|)∫_B |b − b_B|"""
    return bmo_report(b, balls).value


def bmo_norm_weighted(b: GridFunction, w: Weight, balls: BallFamily) -> float:
    """‖b‖_{*,w} = max_B (1/w(B))∫_B |b − b_{B,w}| w"""
    if w.grid != b.grid:
        raise NormError("b 与权函数不在同一网格上")
    return bmo_report(b, balls, w).value


def bmo_lp_equivalence(
    b: GridFunction,
    balls: BallFamily,
    ps: Sequence[float] = (1.0, 2.0, 4.0),
    w: Optional[Weight] = None,
) -> Dict:
    """
    sup_B ((1/w(B))∫_B |b − b_B|^p w)^{1/p} 与 ‖b‖_* 的比值（w=None 时为 Lebesgue 情形）

    b_B 始终是无权平均。

    Returns:
        {bmo, sup_p: {p: value}, ratios: {p: value}}
    """
    bmo = bmo_norm(b, balls)
    wvals = np.ones(b.grid.num_nodes) if w is None else w.values
    sups = {}
    for p in ps:
        best = 0.0
        for ball in balls:
            idx = ball_nodes(b.grid, ball)
            bv = b.values[idx]
            dev = np.abs(bv - np.mean(bv)) ** p
            best = max(best, float((np.sum(dev * wvals[idx]) / np.sum(wvals[idx])) ** (1.0 / p)))
        sups[str(p)] = best
    ratios = {k: (v / bmo if bmo > 0 else 0.0) for k, v in sups.items()}
    return {"bmo": bmo, "weighted": w is not None, "sup_p": sups, "ratios": ratios, "family_id": balls.id}


def bmo_log_pair_check(
    b: GridFunction,
    w: Weight,
    balls: BallFamily,
    korder: int,
    p: float = 2.0,
) -> Dict:
    """
    同心球对 (B(x,r₁), B(x,r₂)) 上的对数型估计

    (i)  ((1/w(B₁))∫_{B₁}|b − b_{B₂,w}|^{kp} w)^{1/p} ≤ C (1+|ln r₁/r₂|)^k ‖b‖_*^k
    (ii) 同式换为对偶权 w^{1−p′} 与指数 p′

    Returns:
        {bmo, C_fit_i, C_fit_ii, num_pairs, worst_pair_i, worst_pair_ii, vacuous}
    """
    if korder < 1:
        raise NormError(f"korder 必须 ≥ 1: {korder}")
    if p <= 1:
        raise NormError(f"对偶部分需要 p > 1: p={p}")
    bmo = bmo_norm(b, balls)
    pp = p / (p - 1.0)
    wv = w.values
    sigma = w.dual_values(p)
    result = {
        "korder": korder,
        "p": p,
        "bmo": bmo,
        "C_fit_i": 0.0,
        "C_fit_ii": 0.0,
        "num_pairs": 0,
        "worst_pair_i": None,
        "worst_pair_ii": None,
        "family_id": balls.id,
        "vacuous": bmo == 0.0,
    }
    for c in balls.centers:
        idx_by_r = {float(r): ball_nodes(b.grid, Ball(tuple(c), float(r))) for r in balls.radii}
        avg_w = {}
        for r, idx in idx_by_r.items():
            avg_w[r] = float(np.sum(b.values[idx] * wv[idx]) / np.sum(wv[idx]))
        for r1, idx1 in idx_by_r.items():
            for r2 in idx_by_r:
                dev = np.abs(b.values[idx1] - avg_w[r2])
                lhs_i = (np.sum(dev ** (korder * p) * wv[idx1]) / np.sum(wv[idx1])) ** (1.0 / p)
                lhs_ii = (np.sum(dev ** (korder * pp) * sigma[idx1]) / np.sum(sigma[idx1])) ** (1.0 / pp)
                result["num_pairs"] += 1
                if bmo == 0.0:
                    continue
                rhs = (1.0 + abs(np.log(r1 / r2))) ** korder * bmo ** korder
                pair = {"center": c.tolist(), "r1": r1, "r2": r2}
                if lhs_i / rhs > result["C_fit_i"]:
                    result["C_fit_i"] = float(lhs_i / rhs)
                    result["worst_pair_i"] = pair
                if lhs_ii / rhs > result["C_fit_ii"]:
                    result["C_fit_ii"] = float(lhs_ii / rhs)
                    result["worst_pair_ii"] = pair
    return result


def john_nirenberg_probe(
    b: GridFunction,
    w: Optional[Weight],
    ball: Ball,
    num_levels: int = JN_NUM_LEVELS,
    min_count: int = JN_MIN_COUNT,
    bmo: Optional[float] = None,
) -> Dict:
    """
    水平集分布 |{x∈B: |b − b_B| > β}|/|B|（给定 w 时为 w 测度）的指数衰减拟合

    β 网格从 1.5·‖b‖ 到水平集仍含 min_count 个节点的最大值；
    ln 分布 = ln C₁ − C₂ β/‖b‖ 用最小二乘拟合，残差取对数空间 RMSE。
    同时给出球上 p ∈ {1,2,4} 的 L^p 振幅与 L^1 振幅之比。

    Args:
        b: 函数
        w: 权（None 为 Lebesgue）
        ball: 球
        num_levels: β 网格点数
        min_count: 最高水平集的最少节点数
        bmo: 归一化用的 BMO 范数，默认取本球的平均振幅

    Returns:
        探针报告字典
    """
    idx = ball_nodes(b.grid, ball)
    bv = b.values[idx]
    wv = np.ones(idx.size) if w is None else w.values[idx]
    dev = np.abs(bv - np.mean(bv))
    scale = float(np.mean(dev)) if bmo is None else float(bmo)
    lp = {str(p): float(np.mean(dev ** p) ** (1.0 / p)) for p in (1.0, 2.0, 4.0)}
    report = {
        "ball": ball.to_dict(),
        "weighted": w is not None,
        "bmo": scale,
        "lp_oscillation": lp,
        "lp_ratios": {k: (v / lp["1.0"] if lp["1.0"] > 0 else 0.0) for k, v in lp.items()},
        "empty": True,
        "levels": [],
        "distribution": [],
        "C1": None,
        "C2": None,
        "rmse": None,
    }
    if scale <= 1e-12 * max(1.0, float(np.max(np.abs(bv)))) or dev.size < min_count:
        return report
    top = np.sort(dev)[::-1][min_count - 1]
    lo = JN_LOWER * scale
    hi = top * (1.0 - 1e-9)
    if hi <= lo:
        return report
    levels = np.linspace(lo, hi, num_levels)
    total = np.sum(wv)
    dist = np.array([np.sum(wv[dev > beta]) / total for beta in levels])
    x = levels / scale
    slope, intercept = np.polyfit(x, np.log(dist), 1)
    resid = np.log(dist) - (slope * x + intercept)
    report.update({
        "empty": False,
        "levels": levels.tolist(),
        "distribution": dist.tolist(),
        "C1": float(np.exp(intercept)),
        "C2": float(-slope),
        "rmse": float(np.sqrt(np.mean(resid ** 2))),
    })
    return report


def level_distribution(b: GridFunction, ball: Ball, levels: Sequence[float]) -> np.ndarray:
    """|{x∈B: |b − b_B| > β}|/|B| 在给定 β 上的取值"""
    idx = ball_nodes(b.grid, ball)
    dev = np.abs(b.values[idx] - np.mean(b.values[idx]))
    return np.array([np.mean(dev > beta) for beta in levels])
