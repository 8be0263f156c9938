"""
Square Functions - 内蕴平方函数、g 函数、g*_λ 函数及其交换子
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.signal import convolve

from grid.grid import Grid, GridFunction, VecGridFunction, l2_pointwise, in_ball, BOUNDARY_RTOL
from kernels.kernels import KernelDictionary, dilated_convolve, dilated_taps
from operators.scales import ScaleGrid
from utils.errors import OperatorError
from utils.logger import get_logger


logger = get_logger(__name__)

COMMUTATOR_ORDERS = (1, 2, 3)


@dataclass(eq=False)
class SquareFunctionResult:
    """算子输出场与诊断信息"""
    field: GridFunction
    operator: str
    diagnostics: Dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def to_dict(self) -> Dict:
        return {
            "operator": self.operator,
            "max": float(np.max(self.field.values)),
            "diagnostics": self.diagnostics,
        }

    def to_csv(self, path: Union[str, Path]) -> None:
        self.field.to_csv(path)


class SquareFunctionEngine:
    """
    平方函数计算引擎

    对给定 (网格, 字典, 尺度) 预计算伸缩核抽头与锥指示抽头，整场计算走卷积快路径，
    单点计算走直接求和
    """

    def __init__(
        self,
        grid: Grid,
        dictionary: KernelDictionary,
        scales: ScaleGrid,
        config: Dict = None,
    ):
        """
        Args:
            grid: 网格
            dictionary: 测试核字典
            scales: 尺度网格
            config: resolved_only（仅用核支集在盒内的 (y,t)），convolution_method
        """
        self.config = config or {}
        if dictionary.dim != grid.dim:
            raise OperatorError(f"字典维数 {dictionary.dim} 与网格维数 {grid.dim} 不一致")
        if scales.t_min < 0.5 * grid.spacing:
            raise OperatorError(f"scale below resolution: t_min={scales.t_min}")
        if scales.t_max > 2.0 * grid.half_width * (1.0 + BOUNDARY_RTOL):
            raise OperatorError(f"t_max={scales.t_max} 超出 2L={2.0 * grid.half_width}")

        self.grid = grid
        self.dictionary = dictionary
        self.scales = scales
        self.resolved_only = bool(self.config.get("resolved_only", True))
        self.method = self.config.get("convolution_method", "direct")
        self._kernel_taps: Dict[Tuple[int, int], np.ndarray] = {}
        self._masks: Dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------
    # 基础构件
    # ------------------------------------------------------------------

    def kernel_taps(self, kidx: int, sidx: int) -> np.ndarray:
        key = (kidx, sidx)
        if key not in self._kernel_taps:
            t = float(self.scales.t_values[sidx])
            self._kernel_taps[key] = dilated_taps(self.dictionary.kernels[kidx], self.grid, t)
        return self._kernel_taps[key]

    def resolved_mask(self, sidx: int) -> np.ndarray:
        """核支集 B(y,t) 落在盒内的节点 y"""
        if sidx not in self._masks:
            if self.resolved_only:
                t = float(self.scales.t_values[sidx])
                ok = np.all(
                    np.abs(self.grid.nodes) + t <= self.grid.half_width * (1.0 + BOUNDARY_RTOL),
                    axis=1,
                )
            else:
                ok = np.ones(self.grid.num_nodes, dtype=bool)
            self._masks[sidx] = ok.reshape(self.grid.shape)
        return self._masks[sidx]

    def _convolve(self, data: np.ndarray, taps: np.ndarray) -> np.ndarray:
        # full 卷积后按中心截取，out[y] = Σ_z data[z] taps[y−z]
        full = convolve(data, taps, mode="full", method=self.method)
        K = [(s - 1) // 2 for s in taps.shape]
        sl = tuple(slice(k, k + m) for k, m in zip(K, data.shape))
        return full[sl]

    def _offset_block(self, radius: float) -> Tuple[np.ndarray, np.ndarray]:
        # 距离平方方块，截断到盒内可能出现的最大偏移
        h = self.grid.spacing
        K = min(int(np.floor(radius / h * (1.0 + BOUNDARY_RTOL))), self.grid.points_per_axis - 1)
        j = np.arange(-K, K + 1) * h
        mesh = np.meshgrid(*([j] * self.grid.dim), indexing="ij")
        return j, sum(m * m for m in mesh)

    def cone_taps(self, radius: float, closed: bool) -> np.ndarray:
        _, dist2 = self._offset_block(radius)
        return in_ball(dist2, radius, closed=closed).astype(float)

    def decay_taps(self, t: float, lam: float) -> np.ndarray:
        _, dist2 = self._offset_block(2.0 * self.grid.half_width * np.sqrt(self.grid.dim))
        return (t / (t + np.sqrt(dist2))) ** (self.grid.dim * lam)

    # ------------------------------------------------------------------
    # A_α 场
    # ------------------------------------------------------------------

    def a_field(self, f: GridFunction) -> np.ndarray:
        """
        A_α f(t, y) 在全部 (尺度, 节点) 上的取值，形状 (S, *grid.shape)
        """
        data = f.array
        out = np.zeros((len(self.scales),) + self.grid.shape)
        if not np.any(data):
            return out
        for s in range(len(self.scales)):
            for k in range(len(self.dictionary)):
                conv = self._convolve(data, self.kernel_taps(k, s))
                np.maximum(out[s], np.abs(conv), out=out[s])
        return out

    def _masked_square(self, a: np.ndarray, sidx: int) -> np.ndarray:
        return np.where(self.resolved_mask(sidx), a[sidx] ** 2, 0.0)

    def _scale_factor(self, sidx: int) -> float:
        t = float(self.scales.t_values[sidx])
        return float(self.scales.log_weights[sidx]) * t ** (-self.grid.dim) * self.grid.cell_volume

    # ------------------------------------------------------------------
    # 整场（卷积快路径）
    # ------------------------------------------------------------------

    def _accumulate(self, a: np.ndarray, taps_for: Callable[[int], np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        total = np.zeros(self.grid.shape)
        per_scale = np.zeros(len(self.scales))
        for s in range(len(self.scales)):
            a2 = self._masked_square(a, s)
            if not np.any(a2):
                continue
            contrib = self._scale_factor(s) * self._convolve(a2, taps_for(s))
            per_scale[s] = float(np.sum(contrib))
            total += contrib
        return total, per_scale

    def cone_square(self, a: np.ndarray, beta: float = 1.0, closed: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """Σ_t w_t t^{-n} Σ_{|y−x|<βt} h^n A²，返回 (平方和场, 各尺度贡献)"""
        if beta < 1.0:
            raise OperatorError(f"孔径必须 ≥ 1: β={beta}")
        t = self.scales.t_values
        return self._accumulate(a, lambda s: self.cone_taps(beta * float(t[s]), closed))

    def star_square(self, a: np.ndarray, lam: float) -> Tuple[np.ndarray, np.ndarray]:
        if lam <= 1.0:
            raise OperatorError(f"g*_λ 需要 λ > 1: λ={lam}")
        t = self.scales.t_values
        return self._accumulate(a, lambda s: self.decay_taps(float(t[s]), lam))

    def vertical_square(self, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        total = np.zeros(self.grid.shape)
        per_scale = np.zeros(len(self.scales))
        for s in range(len(self.scales)):
            contrib = float(self.scales.log_weights[s]) * self._masked_square(a, s)
            per_scale[s] = float(np.sum(contrib))
            total += contrib
        return total, per_scale

    def _result(self, f: GridFunction, square: np.ndarray, per_scale: np.ndarray, operator: str, extra: Dict = None) -> SquareFunctionResult:
        values = np.sqrt(np.clip(square, 0.0, None)).reshape(-1)
        diagnostics = self._diagnostics(f, per_scale)
        if extra:
            diagnostics.update(extra)
        return SquareFunctionResult(GridFunction(self.grid, values), operator, diagnostics)

    def _diagnostics(self, f: GridFunction, per_scale: np.ndarray) -> Dict:
        grid = self.grid
        width = min(self.scales.t_max, grid.half_width)
        dist_to_boundary = grid.half_width - np.max(np.abs(grid.nodes), axis=1)
        mass = np.abs(f.values)
        total_mass = float(np.sum(mass))
        collar = float(np.sum(mass[dist_to_boundary < width])) / total_mass if total_mass > 0 else 0.0
        total = float(np.sum(per_scale))
        return {
            "scales": self.scales.to_dict(),
            "dictionary_id": self.dictionary.id,
            "resolved_only": self.resolved_only,
            "collar_width": width,
            "collar_mass_fraction": collar,
            "scale_share_first": float(per_scale[0] / total) if total > 0 else 0.0,
            "scale_share_last": float(per_scale[-1] / total) if total > 0 else 0.0,
        }

    def g_sq_field(self, f: GridFunction, beta: float = 1.0, closed: bool = False) -> SquareFunctionResult:
        """G_{α,β} f（开锥 |x−y| < βt）；closed=True 为闭锥"""
        square, per_scale = self.cone_square(self.a_field(f), beta, closed)
        return self._result(f, square, per_scale, "G", {"beta": beta, "closed": closed})

    def g_aperture_pow2_field(self, f: GridFunction, j: int) -> SquareFunctionResult:
        """G_{α,2^j} f（闭锥 |x−y| ≤ 2^j t）"""
        if j < 0:
            raise OperatorError(f"j 必须非负: {j}")
        square, per_scale = self.cone_square(self.a_field(f), 2.0 ** j, closed=True)
        return self._result(f, square, per_scale, "G_pow2", {"j": j})

    def g_vertical_field(self, f: GridFunction) -> SquareFunctionResult:
        square, per_scale = self.vertical_square(self.a_field(f))
        return self._result(f, square, per_scale, "g")

    def g_star_field(self, f: GridFunction, lam: float) -> SquareFunctionResult:
        square, per_scale = self.star_square(self.a_field(f), lam)
        return self._result(f, square, per_scale, "g_star", {"lambda": lam})

    def aperture_family(self, f: GridFunction, j_max: int) -> Dict[str, np.ndarray]:
        """
        一次 A_α 场计算得到 G_α 与 G_{α,2^j}（j = 0..j_max）的平方场
        """
        a = self.a_field(f)
        out = {"G": self.cone_square(a, 1.0, closed=False)[0].reshape(-1)}
        for j in range(j_max + 1):
            out[f"G_pow2_{j}"] = self.cone_square(a, 2.0 ** j, closed=True)[0].reshape(-1)
        return out

    def jmax_covering(self) -> int:
        """使 2^j t_min 覆盖盒直径的最小 j"""
        diameter = 2.0 * self.grid.half_width * np.sqrt(self.grid.dim)
        return int(np.ceil(np.log2(diameter / self.scales.t_min))) + 1

    # ------------------------------------------------------------------
    # 单点（直接求和）
    # ------------------------------------------------------------------

    def _point_sum(self, a: np.ndarray, x: np.ndarray, weight: Callable[[np.ndarray, float], np.ndarray]) -> float:
        d2 = np.sum((self.grid.nodes - x) ** 2, axis=1)
        total = 0.0
        for s, t in enumerate(self.scales.t_values):
            a2 = self._masked_square(a, s).reshape(-1)
            total += self._scale_factor(s) * float(np.sum(weight(d2, float(t)) * a2))
        return total

    def _vertical_at(self, a: np.ndarray, index: int) -> float:
        total = 0.0
        for s in range(len(self.scales)):
            a2 = self._masked_square(a, s).reshape(-1)
            total += float(self.scales.log_weights[s]) * float(a2[index])
        return total

    def point_value(
        self,
        a: np.ndarray,
        x,
        kind: str,
        beta: float = 1.0,
        closed: bool = False,
        lam: Optional[float] = None,
    ) -> float:
        """
        由 A 场在单点 x 处求值

        Args:
            a: A_α 场
            x: 求值点（vertical 需为格点）
            kind: "cone" / "vertical" / "star"
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        if not self.grid.contains(x):
            raise OperatorError(f"点 {x.tolist()} 不在盒内")
        if kind == "cone":
            if beta < 1.0:
                raise OperatorError(f"孔径必须 ≥ 1: β={beta}")
            value = self._point_sum(a, x, lambda d2, t: in_ball(d2, beta * t, closed=closed))
        elif kind == "vertical":
            value = self._vertical_at(a, self.grid.index_of(x))
        elif kind == "star":
            if lam is None or lam <= 1.0:
                raise OperatorError(f"g*_λ 需要 λ > 1: λ={lam}")
            n = self.grid.dim
            value = self._point_sum(a, x, lambda d2, t: (t / (t + np.sqrt(d2))) ** (n * lam))
        else:
            raise OperatorError(f"未知算子类型: {kind}")
        return float(np.sqrt(max(value, 0.0)))

    # ------------------------------------------------------------------
    # 交换子
    # ------------------------------------------------------------------

    def commutator_input(self, f: GridFunction, b: GridFunction, korder: int, index: int) -> GridFunction:
        """外点 x（下标 index）处的被积函数 [b(x) − b(z)]^k f(z)"""
        _check_korder(korder)
        return GridFunction(self.grid, (b.values[index] - b.values) ** korder * f.values)

    def comm_field(
        self,
        f: GridFunction,
        b: GridFunction,
        korder: int,
        kind: str = "cone",
        beta: float = 1.0,
        lam: Optional[float] = None,
    ) -> SquareFunctionResult:
        """
        [b, T]^k f 整场：逐外点 x 计算 A^k_{α,b} 场后求和
        """
        _check_korder(korder)
        if b.grid != self.grid or f.grid != self.grid:
            raise OperatorError("f、b 必须与引擎共用网格")
        values = np.zeros(self.grid.num_nodes)
        if np.any(f.values) and np.ptp(b.values) > 0:
            for i, x in enumerate(self.grid.nodes):
                a = self.a_field(self.commutator_input(f, b, korder, i))
                values[i] = self.point_value(a, x, kind, beta=beta, lam=lam)
        name = {"cone": "comm_G", "vertical": "comm_g", "star": "comm_g_star"}.get(kind, kind)
        diagnostics = {
            "scales": self.scales.to_dict(),
            "dictionary_id": self.dictionary.id,
            "resolved_only": self.resolved_only,
            "korder": korder,
        }
        return SquareFunctionResult(GridFunction(self.grid, values), name, diagnostics)


def _check_korder(korder: int) -> None:
    if korder not in COMMUTATOR_ORDERS:
        raise OperatorError(f"交换子阶数必须在 {COMMUTATOR_ORDERS} 内: k={korder}")


# ----------------------------------------------------------------------
# 单点算子
# ----------------------------------------------------------------------

def a_alpha(f: GridFunction, dictionary: KernelDictionary, y, t: float) -> float:
    """A_α f(t, y) = max_φ |f*φ_t(y)|"""
    return max(abs(dilated_convolve(f, k, t, y)) for k in dictionary)


def _engine(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, config: Optional[Dict]) -> SquareFunctionEngine:
    return SquareFunctionEngine(f.grid, dictionary, scales, config)


def g_sq(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, beta: float, x, config: Dict = None) -> float:
    """G_{α,β} f(x)，开锥；β = 1 即 G_α"""
    eng = _engine(f, dictionary, scales, config)
    return eng.point_value(eng.a_field(f), x, "cone", beta=beta, closed=False)


def g_vertical(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, x, config: Dict = None) -> float:
    """沿 y = x 的竖直 g 函数"""
    eng = _engine(f, dictionary, scales, config)
    return eng.point_value(eng.a_field(f), x, "vertical")


def g_star(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, lam: float, x, config: Dict = None) -> float:
    eng = _engine(f, dictionary, scales, config)
    return eng.point_value(eng.a_field(f), x, "star", lam=lam)


def g_sq_aperture_pow2(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, j: int, x, config: Dict = None) -> float:
    """G_{α,2^j} f(x)，闭锥 |x−y| ≤ 2^j t"""
    if j < 0:
        raise OperatorError(f"j 必须非负: {j}")
    eng = _engine(f, dictionary, scales, config)
    return eng.point_value(eng.a_field(f), x, "cone", beta=2.0 ** j, closed=True)


def a_alpha_comm(f: GridFunction, dictionary: KernelDictionary, b: GridFunction, korder: int, y, t: float, x) -> float:
    """
    A^k_{α,b} f(t, y)，外点 x 处 b(x) 取格点值

    Args:
        x: 外点（取最近格点）
    """
    _check_korder(korder)
    index = f.grid.index_of(x)
    fx = GridFunction(f.grid, (b.values[index] - b.values) ** korder * f.values)
    return a_alpha(fx, dictionary, y, t)


def _comm_point(f, dictionary, scales, b, korder, x, kind, lam=None, config=None) -> float:
    _check_korder(korder)
    eng = _engine(f, dictionary, scales, config)
    index = f.grid.index_of(x)
    a = eng.a_field(eng.commutator_input(f, b, korder, index))
    return eng.point_value(a, x, kind, lam=lam)


def comm_g_sq(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, b: GridFunction, korder: int, x, config: Dict = None) -> float:
    """[b, G_α]^k f(x)"""
    return _comm_point(f, dictionary, scales, b, korder, x, "cone", config=config)


def comm_g_vertical(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, b: GridFunction, korder: int, x, config: Dict = None) -> float:
    """[b, g_α]^k f(x)"""
    return _comm_point(f, dictionary, scales, b, korder, x, "vertical", config=config)


def comm_g_star(f: GridFunction, dictionary: KernelDictionary, scales: ScaleGrid, b: GridFunction, korder: int, lam: float, x, config: Dict = None) -> float:
    """[b, g*_λ]^k f(x)"""
    return _comm_point(f, dictionary, scales, b, korder, x, "star", lam=lam, config=config)


def vector_apply(op: Callable, vf: Union[VecGridFunction, GridFunction], **kwargs) -> GridFunction:
    """
    对每个分量施加标量算子，再取逐点 ℓ² 范数

    Args:
        op: 标量算子，返回 GridFunction 或 SquareFunctionResult
        vf: 向量场
    """
    if isinstance(vf, GridFunction):
        vf = VecGridFunction(vf.grid, (vf,))
    outputs = []
    for comp in vf.components:
        out = op(comp, **kwargs)
        if isinstance(out, SquareFunctionResult):
            out = out.field
        outputs.append(out)
    return l2_pointwise(VecGridFunction(vf.grid, tuple(outputs)))
