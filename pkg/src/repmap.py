#!/usr/bin/env python3
"""
表示映射模块
系数向量 c 与分段多项式函数之间的表示映射 ℛ、插值逆映射，以及范数矩阵 𝒰、𝒰̂ 的奇异值

系数布局：按子区间排列，区间内依次为 k 个微分分量（各 N+1 个系数）
和 m-k 个代数分量（各 N 个系数），每个区间块长 mN+k。
微分分量在区间 j 上为 Σ_l c_{jκl} h_j p̄_l(τ)，代数分量为 Σ_l c_{jκl} p_l(τ)，
τ = (t - t_{j-1}) / h_j。
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag, solve, svdvals

from src.basis import BasisFamily
from src.config import config
from src.errors import InputError, NumericError
from src.logger import get_logger
from src.mesh import Partition
from src.quadrature import gauss_legendre

logger = get_logger("repmap")


@dataclass(frozen=True)
class Layout:
    """系数向量的下标结构"""

    n: int
    m: int
    k: int
    N: int

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise InputError(f"要求 n >= 1 且 N >= 1，实际 n={self.n}, N={self.N}")
        # k = m 只用于表示映射研究（纯微分布局），DAE 问题本身要求 k < m
        if not 0 < self.k <= self.m:
            raise InputError(f"要求 0 < k <= m，实际 m={self.m}, k={self.k}")

    @property
    def block_size(self) -> int:
        return self.m * self.N + self.k

    @property
    def dim(self) -> int:
        return self.n * self.block_size

    def component_length(self, kappa: int) -> int:
        return self.N + 1 if kappa < self.k else self.N

    def component_slice(self, j: int, kappa: int) -> slice:
        """区间 j、分量 κ（均从 0 开始）的系数切片"""
        if not (0 <= j < self.n and 0 <= kappa < self.m):
            raise InputError(f"下标越界: j={j}, κ={kappa}")
        start = j * self.block_size
        if kappa < self.k:
            start += kappa * (self.N + 1)
        else:
            start += self.k * (self.N + 1) + (kappa - self.k) * self.N
        return slice(start, start + self.component_length(kappa))

    def block_slice(self, j: int) -> slice:
        return slice(j * self.block_size, (j + 1) * self.block_size)

    def component_indices(self, kappa: int) -> np.ndarray:
        """c^κ = [c_{1κ0}, ..., c_{1κN}, c_{2κ0}, ..., c_{nκN}] 在 c 中的下标"""
        return np.concatenate(
            [np.arange(self.dim)[self.component_slice(j, kappa)] for j in range(self.n)]
        )


@dataclass
class CoefficientVector:
    """带布局的系数向量 c ∈ ℝ^{n(mN+k)}"""

    layout: Layout
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).ravel()
        if self.data.size != self.layout.dim:
            raise InputError(f"系数向量长度 {self.data.size} 与布局 {self.layout.dim} 不符")

    @classmethod
    def zeros(cls, layout: Layout) -> "CoefficientVector":
        return cls(layout, np.zeros(layout.dim))

    def component(self, j: int, kappa: int) -> np.ndarray:
        return self.data[self.layout.component_slice(j, kappa)]

    def with_data(self, data: np.ndarray) -> "CoefficientVector":
        return CoefficientVector(self.layout, data)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


def singular_values(matrix: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    降序奇异值；小于 tol * σ_max 的视为零

    Args:
        matrix: 任意形状矩阵
        tol: 相对阈值，默认取配置 numerics.sv_zero_tol
    """
    if tol is None:
        tol = config.get("numerics.sv_zero_tol", 1e-13)
    s = svdvals(matrix)
    if s.size:
        s = np.where(s < tol * s[0], 0.0, s)
    return s


@dataclass(frozen=True)
class RepMapMatrices:
    """插值矩阵 V̄、V、V̊ 与求积权重的平方根"""

    family: BasisFamily
    sigma_bar: np.ndarray
    sigma: np.ndarray
    gamma_bar: np.ndarray
    gamma: np.ndarray
    Vbar: np.ndarray
    V: np.ndarray
    Vring: np.ndarray
    GVbar: np.ndarray = field(init=False, repr=False)
    GV: np.ndarray = field(init=False, repr=False)
    GVring: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sg_bar = np.sqrt(self.gamma_bar)[:, None]
        object.__setattr__(self, "GVbar", sg_bar * self.Vbar)
        object.__setattr__(self, "GV", np.sqrt(self.gamma)[:, None] * self.V)
        object.__setattr__(self, "GVring", sg_bar * self.Vring)

    @property
    def N(self) -> int:
        return self.family.N


@lru_cache(maxsize=64)
def build_interp_matrices(family: BasisFamily, extra_points: int = 0) -> RepMapMatrices:
    """
    构造 V̄_{iα} = p̄_{α-1}(σ̄_i)、V_{iα} = p_{α-1}(σ_i)、V̊_{iα} = p̄'_{α-1}(σ̄_i)

    Args:
        family: 基族
        extra_points: 在 N+1 与 N 个 Gauss 点之外追加的节点数（用于验证节点无关性）

    Returns:
        RepMapMatrices
    """
    N = family.N
    rule_bar = gauss_legendre(N + 1 + extra_points)
    rule = gauss_legendre(N + extra_points)
    Vbar = family.pbar_table(rule_bar.nodes)
    V = family.p_table(rule.nodes)
    Vring = family.pbar_derivative_table(rule_bar.nodes)

    for name, mat in (("V̄", Vbar), ("V", V)):
        if np.linalg.cond(mat) > 1e14:
            raise NumericError(f"插值矩阵 {name} 奇异 ({family})")

    return RepMapMatrices(
        family, rule_bar.nodes, rule.nodes, rule_bar.weights, rule.weights, Vbar, V, Vring
    )


# ---------------------------------------------------------------------------
# 区间块 U_j 与 Û_j
# ---------------------------------------------------------------------------


def differential_block(mats: RepMapMatrices, h: float, broken_h1: bool = False) -> np.ndarray:
    """微分分量的块 h^{3/2} Γ̄V̄，或 H¹ 情形下的 [h^{3/2} Γ̄V̄; h^{1/2} Γ̄V̊]"""
    top = h**1.5 * mats.GVbar
    if not broken_h1:
        return top
    return np.vstack([top, h**0.5 * mats.GVring])


def algebraic_block(mats: RepMapMatrices, h: float) -> np.ndarray:
    """代数分量的块 h^{1/2} ΓV"""
    return h**0.5 * mats.GV


def interval_block(mats: RepMapMatrices, h: float, m: int, k: int, broken_h1: bool = False):
    """单个区间的 U_j（broken_h1=True 时为 Û_j）"""
    diff = differential_block(mats, h, broken_h1)
    alg = algebraic_block(mats, h)
    return block_diag(*([diff] * k + [alg] * (m - k)))


def gram_blocks(
    partition: Partition, mats: RepMapMatrices, m: int, k: int, broken_h1: bool = False
) -> List[np.ndarray]:
    """各区间的 Gram 块 U_j^T U_j（或 Û_j^T Û_j）"""
    grams = []
    for h in partition.steps:
        U = interval_block(mats, float(h), m, k, broken_h1)
        grams.append(U.T @ U)
    return grams


# ---------------------------------------------------------------------------
# 求值
# ---------------------------------------------------------------------------


def evaluate_local(c: CoefficientVector, partition: Partition, family: BasisFamily, j: int, tau):
    """
    在区间 j 的局部坐标 τ 处求 x_j，τ 可取端点以得到单侧极限

    Returns:
        形状 (len(τ), m) 的数组
    """
    lay = c.layout
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    h = float(partition.steps[j])
    out = np.empty((tau.size, lay.m))
    if lay.k:
        Pbar = family.pbar_table(tau)
    if lay.m > lay.k:
        P = family.p_table(tau)
    for kappa in range(lay.m):
        coeff = c.component(j, kappa)
        out[:, kappa] = h * (Pbar @ coeff) if kappa < lay.k else P @ coeff
    return out


def evaluate_local_derivative(
    c: CoefficientVector, partition: Partition, family: BasisFamily, j: int, tau
):
    """区间 j 上 (Dx_j)'(τ)，形状 (len(τ), k)；h_j 的缩放在求导时抵消"""
    lay = c.layout
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    dP = family.pbar_derivative_table(tau)
    return np.column_stack([dP @ c.component(j, kappa) for kappa in range(lay.k)])


def _local_coordinate(partition: Partition, t: float) -> Tuple[int, float]:
    j = partition.locate(t)
    tau = (t - partition.breakpoints[j]) / partition.steps[j]
    return j, min(max(tau, 0.0), 1.0)


def evaluate(c: CoefficientVector, partition: Partition, family: BasisFamily, t: float) -> np.ndarray:
    """
    x(t) = (ℛc)(t) ∈ ℝ^m

    断点处取右连续（半开区间 [t_{j-1}, t_j)），t = b 归入最后一个区间。
    """
    _check_compatible(c, partition, family)
    j, tau = _local_coordinate(partition, t)
    return evaluate_local(c, partition, family, j, tau)[0]


def evaluate_Dx_derivative(
    c: CoefficientVector, partition: Partition, family: BasisFamily, t: float
) -> np.ndarray:
    """(Dx)'(t) ∈ ℝ^k"""
    _check_compatible(c, partition, family)
    j, tau = _local_coordinate(partition, t)
    return evaluate_local_derivative(c, partition, family, j, tau)[0]


def _check_compatible(c: CoefficientVector, partition: Partition, family: BasisFamily):
    if c.layout.n != partition.n or c.layout.N != family.N:
        raise InputError(
            f"布局 (n={c.layout.n}, N={c.layout.N}) 与剖分 n={partition.n} / 基 N={family.N} 不一致"
        )


# ---------------------------------------------------------------------------
# 插值逆映射 ℛ^{-1}
# ---------------------------------------------------------------------------


def sample_points(partition: Partition, mats: RepMapMatrices) -> Tuple[np.ndarray, np.ndarray]:
    """
    各区间上的采样点 t̄_{ji} = t_{j-1} + σ̄_i h_j 与 t_{ji} = t_{j-1} + σ_i h_j

    Returns:
        形状 (n, N+1) 与 (n, N) 的两个数组
    """
    t0 = partition.breakpoints[:-1, None]
    h = partition.steps[:, None]
    return t0 + mats.sigma_bar[None, :] * h, t0 + mats.sigma[None, :] * h


def coefficients_from_samples(
    diff_samples: np.ndarray,
    alg_samples: np.ndarray,
    partition: Partition,
    mats: RepMapMatrices,
    m: int,
    k: int,
) -> CoefficientVector:
    """
    由节点值恢复系数：微分分量 c_{jκ} = V̄^{-1}(X_{jκ}/h_j)，代数分量 c_{jκ} = V^{-1} X_{jκ}

    Args:
        diff_samples: 形状 (n, k, N+1)，微分分量在 t̄_{ji} 处的值
        alg_samples: 形状 (n, m-k, N)，代数分量在 t_{ji} 处的值
    """
    layout = Layout(partition.n, m, k, mats.N)
    diff_samples = np.asarray(diff_samples, dtype=float)
    alg_samples = np.asarray(alg_samples, dtype=float)
    if diff_samples.shape != (layout.n, k, mats.N + 1) or alg_samples.shape != (
        layout.n,
        m - k,
        mats.N,
    ):
        raise InputError("采样值的形状与布局不符")
    if mats.Vbar.shape[0] != mats.N + 1:
        raise InputError("插值逆映射需要恰好 N+1 与 N 个节点")

    data = np.empty(layout.dim)
    for j, h in enumerate(partition.steps):
        for kappa in range(m):
            sl = layout.component_slice(j, kappa)
            if kappa < k:
                data[sl] = solve(mats.Vbar, diff_samples[j, kappa] / h)
            else:
                data[sl] = solve(mats.V, alg_samples[j, kappa - k])
    return CoefficientVector(layout, data)


def coefficients_from_function(
    func: Callable[[float], np.ndarray],
    partition: Partition,
    family: BasisFamily,
    m: int,
    k: int,
    mats: Optional[RepMapMatrices] = None,
) -> CoefficientVector:
    """
    c = ℛ^{-1} x：在插值节点处对 x 采样后求解

    Args:
        func: t -> ℝ^m 的函数；在 X̃_π 中的函数被精确恢复
    """
    mats = mats or build_interp_matrices(family)
    t_bar, t_alg = sample_points(partition, mats)
    n = partition.n
    diff = np.empty((n, k, family.N + 1))
    alg = np.empty((n, m - k, family.N))
    for j in range(n):
        for i, t in enumerate(t_bar[j]):
            diff[j, :, i] = np.asarray(func(t), dtype=float)[:k]
        for i, t in enumerate(t_alg[j]):
            alg[j, :, i] = np.asarray(func(t), dtype=float)[k:]
    return coefficients_from_samples(diff, alg, partition, mats, m, k)


# ---------------------------------------------------------------------------
# 范数与条件数
# ---------------------------------------------------------------------------


def _blockwise_norm(c: CoefficientVector, partition, family, broken_h1: bool) -> float:
    _check_compatible(c, partition, family)
    mats = build_interp_matrices(family)
    lay = c.layout
    total = 0.0
    for j, h in enumerate(partition.steps):
        U = interval_block(mats, float(h), lay.m, lay.k, broken_h1)
        total += float(np.sum((U @ c.data[lay.block_slice(j)]) ** 2))
    return float(np.sqrt(total))


def norm_L2(c: CoefficientVector, partition: Partition, family: BasisFamily) -> float:
    """‖ℛc‖_{L²} = |𝒰c|"""
    return _blockwise_norm(c, partition, family, broken_h1=False)


def norm_H1Dpi(c: CoefficientVector, partition: Partition, family: BasisFamily) -> float:
    """破缺范数 ‖ℛc‖_{H¹_{D,π}} = |𝒰̂c|"""
    return _blockwise_norm(c, partition, family, broken_h1=True)


@dataclass(frozen=True)
class RepMapReport:
    """𝒰 与 𝒰̂ 的极端奇异值及表示映射的算子范数"""

    sigma_max_U: float
    sigma_min_U: float
    sigma_max_Uhat: float
    sigma_min_Uhat: float

    @property
    def kappa_U(self) -> float:
        return self.sigma_max_U / self.sigma_min_U

    @property
    def kappa_Uhat(self) -> float:
        return self.sigma_max_Uhat / self.sigma_min_Uhat

    @property
    def norm_R_L2(self) -> float:
        return self.sigma_max_U

    @property
    def norm_Rinv_L2(self) -> float:
        return 1.0 / self.sigma_min_U

    @property
    def norm_R_H1(self) -> float:
        return self.sigma_max_Uhat

    @property
    def norm_Rinv_H1(self) -> float:
        return 1.0 / self.sigma_min_Uhat


def rep_map_conditioning(partition: Partition, family: BasisFamily, m: int, k: int) -> RepMapReport:
    """
    逐块计算 𝒰、𝒰̂ 的最大/最小奇异值

    𝒰 与 𝒰̂ 块对角，每个 U_j 又由 k 个微分块和 m-k 个代数块组成，
    所以整体的极端奇异值是各小块极端值在所有区间上的最小/最大。

    Args:
        partition: 剖分
        family: 基族（决定 N）
        m: 分量个数
        k: 微分分量个数

    Returns:
        RepMapReport
    """
    Layout(partition.n, m, k, family.N)
    mats = build_interp_matrices(family)
    s_gvbar = singular_values(mats.GVbar)
    s_gv = singular_values(mats.GV)

    smax_u, smin_u, smax_uh, smin_uh = 0.0, np.inf, 0.0, np.inf
    for h in np.unique(partition.steps):
        h = float(h)
        s_hat = singular_values(differential_block(mats, h, broken_h1=True))
        cand_u = [h**1.5 * s_gvbar]
        cand_uh = [s_hat]
        if m > k:
            cand_u.append(h**0.5 * s_gv)
            cand_uh.append(h**0.5 * s_gv)
        smax_u = max(smax_u, max(s[0] for s in cand_u))
        smin_u = min(smin_u, min(s[-1] for s in cand_u))
        smax_uh = max(smax_uh, max(s[0] for s in cand_uh))
        smin_uh = min(smin_uh, min(s[-1] for s in cand_uh))

    if smin_u <= 0 or smin_uh <= 0:
        raise NumericError(f"𝒰 出现零奇异值 ({family})")
    logger.debug(
        f"{family.short_name} N={family.N} n={partition.n}: "
        f"σ(𝒰)=[{smin_u:.3e}, {smax_u:.3e}] σ(𝒰̂)=[{smin_uh:.3e}, {smax_uh:.3e}]"
    )
    return RepMapReport(smax_u, smin_u, smax_uh, smin_uh)


def jump_bound_constant(family: BasisFamily) -> float:
    """跳跃估计中的常数 2√2 σ_max(ΓV)"""
    mats = build_interp_matrices(family)
    return 2.0 * np.sqrt(2.0) * float(svdvals(mats.GV)[0])
