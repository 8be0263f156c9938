"""
Test Kernels - C_α 测试核字典与伸缩卷积
"""
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from grid.grid import Grid, GridFunction, in_ball, BOUNDARY_RTOL
from utils.errors import KernelError
from utils.logger import get_logger
from utils.serialize import json_safe


logger = get_logger(__name__)

DEFAULT_SEED = 20240601
HOLDER_TOL = 1e-9
MEAN_TOL = 1e-12


def reference_axis(ref_points: int) -> np.ndarray:
    """[-1, 1] 上的参考轴（奇数点，含原点）"""
    if ref_points < 9 or ref_points % 2 == 0:
        raise KernelError(f"参考网格点数必须是 ≥ 9 的奇数: {ref_points}")
    c = (ref_points - 1) // 2
    return (np.arange(ref_points) - c) / c


def _reference_nodes(dim: int, ref_points: int) -> np.ndarray:
    ax = reference_axis(ref_points)
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _bump(x: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """(1 − |x−c|²/r²)_+²，Lipschitz 且支在 B(c, r)"""
    s = np.sum((x - center) ** 2, axis=1) / (radius * radius)
    return np.clip(1.0 - s, 0.0, None) ** 2


def holder_seminorm(nodes: np.ndarray, values: np.ndarray, alpha: float, chunk: int = 2048) -> float:
    """
    参考网格上所有点对的 α-Hölder 比值最大值

    Args:
        nodes: 节点坐标 (N, n)
        values: 节点取值 (N,)
        alpha: Hölder 指数
        chunk: 分块大小
    """
    best = 0.0
    n = nodes.shape[0]
    for start in range(0, n, chunk):
        a = nodes[start:start + chunk]
        va = values[start:start + chunk]
        d = np.sqrt(np.sum((a[:, None, :] - nodes[None, :, :]) ** 2, axis=2))
        diff = np.abs(va[:, None] - values[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, diff / np.power(d, alpha, where=d > 0, out=np.ones_like(d)), 0.0)
        best = max(best, float(np.max(ratio)))
    return best


@dataclass
class AdmissibilityReport:
    """可容许性报告：支集、均值、Hölder 三项检查"""
    support_ok: bool
    mean_ok: bool
    holder_ok: bool
    support_leak: float
    mean_residual: float
    holder_seminorm: float
    degenerate: bool

    @property
    def passed(self) -> bool:
        return self.support_ok and self.mean_ok and self.holder_ok

    def to_dict(self) -> Dict:
        return {
            "support_ok": self.support_ok,
            "mean_ok": self.mean_ok,
            "holder_ok": self.holder_ok,
            "passed": self.passed,
            "degenerate": self.degenerate,
            "support_leak": self.support_leak,
            "mean_residual": self.mean_residual,
            "holder_seminorm": self.holder_seminorm,
        }


@dataclass(eq=False)
class TestKernel:
    """
    参考网格 [-1,1]^n 上制表的测试核 φ

    Attributes:
        alpha: Hölder 指数
        dim: 维数
        ref_values: 参考网格取值（C 序扁平）
        label: 形状描述
    """
    __test__ = False

    alpha: float
    dim: int
    ref_values: np.ndarray
    label: str = "custom"
    params: Dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.ref_values, dtype=float).reshape(-1)
        m = int(round(vals.size ** (1.0 / self.dim)))
        if m ** self.dim != vals.size:
            raise KernelError(f"参考取值个数 {vals.size} 不是 {self.dim} 维方格")
        self.ref_values = vals
        self.ref_points = m

    @cached_property
    def ref_nodes(self) -> np.ndarray:
        return _reference_nodes(self.dim, self.ref_points)

    @property
    def ref_spacing(self) -> float:
        return 2.0 / (self.ref_points - 1)

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        ax = reference_axis(self.ref_points)
        table = self.ref_values.reshape((self.ref_points,) * self.dim)
        return RegularGridInterpolator(
            (ax,) * self.dim, table, method="linear", bounds_error=False, fill_value=0.0
        )

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """多线性插值求值，u 形状 (N, n)；单位球外取 0"""
        u = np.asarray(u, dtype=float).reshape(-1, self.dim)
        vals = self._interpolator(u)
        outside = ~in_ball(np.sum(u * u, axis=1), 1.0, closed=True)
        vals[outside] = 0.0
        return vals

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.ref_values)))

    @property
    def mean_residual(self) -> float:
        """参考网格上 |h_ref^n Σ φ|"""
        return abs(float(np.sum(self.ref_values))) * self.ref_spacing ** self.dim

    @cached_property
    def holder_seminorm_estimate(self) -> float:
        return holder_seminorm(self.ref_nodes, self.ref_values, self.alpha)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        alpha: float,
        dim: int = 1,
        ref_points: int = 65,
        label: str = "custom",
        params: Optional[Dict] = None,
        normalize: bool = True,
    ) -> "TestKernel":
        """
        制表并（可选）归一化：截断到单位球、减去均值、除以 Hölder 半范

        Args:
            fn: 向量化函数，输入 (N, n)
            alpha: Hölder 指数
            dim: 维数
            ref_points: 每轴参考点数
            normalize: 是否做均值校正与 Hölder 归一化
        """
        nodes = _reference_nodes(dim, ref_points)
        vals = np.asarray(fn(nodes), dtype=float).reshape(-1)
        inside = in_ball(np.sum(nodes ** 2, axis=1), 1.0, closed=True)
        vals = np.where(inside, vals, 0.0)
        if normalize:
            vals = _mean_correct(nodes, vals)
            semi = holder_seminorm(nodes, vals, alpha)
            if semi <= 0.0:
                raise KernelError(f"候选核 {label} 的 Hölder 半范为 0，无法归一化")
            vals = vals / semi
        return cls(alpha=alpha, dim=dim, ref_values=vals, label=label, params=dict(params or {}))

    def to_frame(self) -> pd.DataFrame:
        names = ["u", "v"][:self.dim]
        frame = pd.DataFrame(self.ref_nodes, columns=names)
        frame["value"] = self.ref_values
        return frame


def _mean_correct(nodes: np.ndarray, vals: np.ndarray) -> np.ndarray:
    # 减去正窗函数的倍数，支集保持在单位球内，边界处仍为 0
    window = _bump(nodes, np.zeros(nodes.shape[1]), 1.0)
    return vals - (np.sum(vals) / np.sum(window)) * window


def _mean_correct_at(u: np.ndarray, vals: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """
    伸缩抽头的离散均值校正：在 mask 内减去窗函数 (1−|u|²)² 的倍数

    u = d/t 为归一化偏移；窗函数在 |u| = 1 处为 0，校正后边界抽头仍为 0
    """
    window = np.where(mask, _bump(u, np.zeros(u.shape[1]), 1.0), 0.0)
    mass = np.sum(window)
    if mass <= 0.0:
        # 所有节点都在单位球面上，φ 在那里本就为 0
        return vals
    return vals - (np.sum(vals[mask]) / mass) * window


def verify_admissible(k: TestKernel) -> AdmissibilityReport:
    """
    检查支集、均值为零、Hölder 半范 ≤ 1 三项条件

    Args:
        k: 测试核

    Returns:
        AdmissibilityReport（仅报告，不抛异常）
    """
    nodes = k.ref_nodes
    outside = ~in_ball(np.sum(nodes ** 2, axis=1), 1.0, closed=True)
    leak = float(np.max(np.abs(k.ref_values[outside]))) if np.any(outside) else 0.0
    scale = k.max_abs
    residual = k.mean_residual
    semi = k.holder_seminorm_estimate
    return AdmissibilityReport(
        support_ok=leak == 0.0,
        mean_ok=residual <= MEAN_TOL * max(scale, np.finfo(float).tiny) or scale == 0.0,
        holder_ok=semi <= 1.0 + HOLDER_TOL,
        support_leak=leak,
        mean_residual=residual,
        holder_seminorm=semi,
        degenerate=semi == 0.0,
    )


@dataclass(eq=False)
class KernelDictionary:
    """共享 α 的有限测试核字典"""
    alpha: float
    dim: int
    kernels: List[TestKernel]
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if len(self.kernels) < 4:
            raise KernelError(f"字典至少需要 4 个核，当前 {len(self.kernels)}")
        for k in self.kernels:
            if k.alpha != self.alpha or k.dim != self.dim:
                raise KernelError("字典中所有核必须共享 α 与维数")

    def __len__(self) -> int:
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    @cached_property
    def id(self) -> str:
        h = hashlib.sha1()
        h.update(json.dumps({"alpha": self.alpha, "dim": self.dim, "seed": self.seed}).encode())
        for k in self.kernels:
            h.update(np.round(k.ref_values, 14).tobytes())
        return f"kd-{h.hexdigest()[:12]}"

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "alpha": self.alpha,
            "dim": self.dim,
            "size": len(self.kernels),
            "seed": self.seed,
            "labels": [k.label for k in self.kernels],
        }


def _candidate_shapes(dim: int, rng: np.random.Generator) -> List[Tuple[str, Dict, Callable]]:
    """按固定顺序循环产生候选形状"""
    shapes = []
    for axis in range(dim):
        e = np.zeros(dim)
        e[axis] = 1.0
        shapes.append((
            "odd_bump",
            {"axis": axis},
            lambda x, e=e: (x @ e) * _bump(x, np.zeros(dim), 1.0),
        ))
    for _ in range(3):
        c = float(rng.uniform(0.15, 0.45))
        s = float(rng.uniform(0.3, 1.0 - c))
        d = rng.normal(size=dim)
        d = d / np.linalg.norm(d)
        shapes.append((
            "translated_bump_difference",
            {"shift": c, "radius": s, "direction": d.tolist()},
            lambda x, c=c, s=s, d=d: _bump(x, c * d, s) - _bump(x, -c * d, s),
        ))
        omega = float(rng.uniform(1.0, 3.5))
        shapes.append((
            "radial_oscillation",
            {"omega": omega},
            lambda x, omega=omega: np.cos(np.pi * omega * np.sqrt(np.sum(x * x, axis=1)))
            * _bump(x, np.zeros(dim), 1.0),
        ))
    for _ in range(2):
        s = float(rng.uniform(0.4, 0.6))
        c = float(rng.uniform(0.05, 1.0 - s))
        d = rng.normal(size=dim)
        d = d / np.linalg.norm(d)
        shapes.append((
            "odd_bump_shifted",
            {"shift": c, "radius": s, "direction": d.tolist()},
            lambda x, c=c, s=s, d=d: ((x - c * d) @ d) * _bump(x, c * d, s),
        ))
    return shapes


def make_dictionary(
    alpha: float,
    size: int,
    dim: int = 1,
    ref_points: int = 65,
    seed: int = DEFAULT_SEED,
) -> KernelDictionary:
    """
    构造 D 个可容许核组成的确定性字典

    Args:
        alpha: Hölder 指数 (0, 1]
        size: 字典大小 D ≥ 4
        dim: 维数
        ref_points: 每轴参考点数
        seed: 随机种子（候选参数）

    Returns:
        KernelDictionary
    """
    if not 0.0 < alpha <= 1.0:
        raise KernelError(f"α 必须在 (0, 1] 内: {alpha}")
    if size < 4:
        raise KernelError(f"字典大小必须 ≥ 4: {size}")

    rng = np.random.default_rng(seed)
    kernels: List[TestKernel] = []
    rounds = 0
    while len(kernels) < size and rounds < 4 * size:
        for label, params, fn in _candidate_shapes(dim, rng):
            rounds += 1
            try:
                k = TestKernel.from_function(fn, alpha, dim, ref_points, label, params)
            except KernelError as e:
                logger.debug(f"跳过候选核: {e}")
                continue
            if not verify_admissible(k).passed:
                logger.debug(f"候选核 {label} 未通过可容许性检查，跳过")
                continue
            kernels.append(k)
            if len(kernels) == size:
                break
    if len(kernels) < size:
        raise KernelError(f"仅得到 {len(kernels)} 个可容许核，少于要求的 {size}")
    return KernelDictionary(alpha=alpha, dim=dim, kernels=kernels, seed=seed)


def lattice_offsets(grid: Grid, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    覆盖闭球 |d| ≤ t 的格点偏移

    Returns:
        (每轴整数偏移 (2K+1,), 偏移方块 (2K+1)^n 的距离平方)
    """
    h = grid.spacing
    K = int(np.floor(t / h * (1.0 + BOUNDARY_RTOL)))
    j = np.arange(-K, K + 1)
    mesh = np.meshgrid(*([j * h] * grid.dim), indexing="ij")
    dist2 = sum(m * m for m in mesh)
    return j, dist2


def dilated_taps(k: TestKernel, grid: Grid, t: float) -> np.ndarray:
    """
    伸缩核的离散抽头 h^n t^{-n} φ(d/t)，d 取闭球 |d| ≤ t 内的格点偏移；
    抽头减去窗函数 (1−|d/t|²)² 的倍数，离散和精确为零且边界抽头为 0

    Returns:
        形状 (2K+1,)^n 的数组，中心对应 d = 0
    """
    if t < 0.5 * grid.spacing:
        raise KernelError(f"scale below resolution: t={t} < h/2={0.5 * grid.spacing}")
    j, dist2 = lattice_offsets(grid, t)
    mask = in_ball(dist2, t, closed=True)
    h = grid.spacing
    mesh = np.meshgrid(*([j * h] * grid.dim), indexing="ij")
    u = np.stack([m.reshape(-1) for m in mesh], axis=1) / t
    vals = k.evaluate(u) * t ** (-grid.dim)
    flat_mask = mask.reshape(-1)
    vals = np.where(flat_mask, _mean_correct_at(u, vals, flat_mask), 0.0).reshape(dist2.shape)
    return vals * grid.cell_volume


def dilated_convolve(f: GridFunction, k: TestKernel, t: float, y) -> float:
    """
    单点伸缩卷积 f*φ_t(y) = Σ_z h^n t^{-n} φ((y−z)/t) f(z)，|y−z| ≤ t

    z 取延拓到盒外的格点（盒外 f 为 0），φ 的离散抽头做窗函数均值校正

    Args:
        f: 格点函数
        k: 测试核
        t: 尺度
        y: 盒内一点

    Returns:
        卷积值
    """
    grid = f.grid
    if t < 0.5 * grid.spacing:
        raise KernelError(f"scale below resolution: t={t} < h/2={0.5 * grid.spacing}")
    y = np.asarray(y, dtype=float).reshape(-1)
    if not grid.contains(y):
        raise KernelError(f"点 {y.tolist()} 不在盒内")
    h = grid.spacing
    c = (grid.points_per_axis - 1) // 2
    lo = np.floor((y - t) / h).astype(int)
    hi = np.ceil((y + t) / h).astype(int)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(grid.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    idx = np.stack([m.reshape(-1) for m in mesh], axis=1)
    z = idx * h
    d = y - z
    mask = in_ball(np.sum(d * d, axis=1), t, closed=True)
    idx, d = idx[mask], d[mask]
    u = d / t
    phi = _mean_correct_at(u, k.evaluate(u) * t ** (-grid.dim), np.ones(len(u), dtype=bool))

    shifted = idx + c
    inside = np.all((shifted >= 0) & (shifted < grid.points_per_axis), axis=1)
    if not np.any(inside):
        return 0.0
    flat = np.ravel_multi_index(tuple(shifted[inside].T), grid.shape)
    return float(grid.cell_volume * np.sum(phi[inside] * f.values[flat]))


def export_kernel(k: TestKernel, directory: Union[str, Path], name: str) -> Dict:
    """导出参考网格 CSV 与 JSON 可容许性证书"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    k.to_frame().to_csv(directory / f"{name}.csv", index=False)
    certificate = {
        "label": k.label,
        "alpha": k.alpha,
        "dim": k.dim,
        "ref_points": k.ref_points,
        "params": k.params,
        "admissibility": verify_admissible(k).to_dict(),
    }
    with open(directory / f"{name}.json", "w", encoding="utf-8") as f:
        json.dump(json_safe(certificate), f, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=False)
    return certificate
