#!/usr/bin/env python3
"""
连续性约束模块
约束矩阵 𝒞、结构因子 𝒞_s、三对角矩阵 𝒞_s𝒞_s^T 的谱、κ(𝒞) 与核空间正交基 𝒟

断点 t_j 处对每个微分分量 κ 的约束行为
    h_j ⟨f, c_{jκ}⟩ - h_{j+1} c_{j+1,κ,0} = 0，
即左极限等于右极限。𝒞𝒞^T 的特征值是 k 份 𝒞_s𝒞_s^T 的特征值。
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal, null_space

from src.basis import BasisFamily, integral_weights_f
from src.errors import InputError, RankDeficiencyError
from src.logger import get_logger
from src.mesh import Partition
from src.repmap import Layout

logger = get_logger("constraint")


@dataclass(frozen=True)
class ConstraintMatrix:
    """约束矩阵 𝒞 ∈ ℝ^{k(n-1) × n(mN+k)}"""

    layout: Layout
    f: np.ndarray
    steps: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.layout.k * (self.layout.n - 1), self.layout.dim)

    def to_sparse(self) -> sparse.csr_matrix:
        """按行模式 [h_j f, -h_{j+1} e_1] 组装的稀疏矩阵"""
        lay = self.layout
        rows, cols, vals = [], [], []
        for j in range(lay.n - 1):
            for kappa in range(lay.k):
                row = j * lay.k + kappa
                left = lay.component_slice(j, kappa)
                right = lay.component_slice(j + 1, kappa)
                idx = np.arange(left.start, left.stop)
                rows.extend([row] * idx.size)
                cols.extend(idx.tolist())
                vals.extend((self.steps[j] * self.f).tolist())
                rows.append(row)
                cols.append(right.start)
                vals.append(-self.steps[j + 1])
        mat = sparse.coo_matrix((vals, (rows, cols)), shape=self.shape)
        return mat.tocsr()

    def dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def apply(self, c: np.ndarray) -> np.ndarray:
        """𝒞c"""
        return self.to_sparse() @ np.asarray(c, dtype=float)


def build_C(partition: Partition, family: BasisFamily, m: int, k: int) -> ConstraintMatrix:
    """
    构造连续性约束矩阵

    Args:
        partition: 剖分（n = 1 时没有约束行）
        family: 基族
        m: 分量个数
        k: 微分分量个数

    Returns:
        ConstraintMatrix
    """
    layout = Layout(partition.n, m, k, family.N)
    return ConstraintMatrix(layout, integral_weights_f(family), np.array(partition.steps))


def Cs_matrix(partition: Partition, f: np.ndarray) -> np.ndarray:
    """单个分量的缩放因子 𝒞_s = C_s diag(h_1, ..., h_n)，形状 (n-1) × n(N+1)"""
    n, width = partition.n, f.size
    Cs = np.zeros((n - 1, n * width))
    for j in range(n - 1):
        Cs[j, j * width:(j + 1) * width] = partition.steps[j] * f
        Cs[j, (j + 1) * width] = -partition.steps[j + 1]
    return Cs


@dataclass(frozen=True)
class Tridiagonal:
    """对称三对角矩阵"""

    diag: np.ndarray
    off: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def banded(self) -> np.ndarray:
        """scipy.linalg.solveh_banded 所需的上三角带状存储"""
        ab = np.zeros((2, self.size))
        ab[0, 1:] = self.off
        ab[1] = self.diag
        return ab

    def eigenvalues(self) -> np.ndarray:
        if self.size == 1:
            return self.diag.copy()
        return eigh_tridiagonal(self.diag, self.off, eigvals_only=True)


def CsCst_matrix(partition: Partition, f: np.ndarray) -> Tridiagonal:
    """
    𝒞_s𝒞_s^T：对角元 h_j²|f|² + h_{j+1}²，次对角元 -h_{j+1}²

    Args:
        partition: 剖分，要求 n >= 2
        f: 积分向量
    """
    return _cscst_from_steps(partition.steps, f)


def _cscst_from_steps(h: np.ndarray, f: np.ndarray) -> Tridiagonal:
    if h.size < 2:
        raise InputError("𝒞_s𝒞_s^T 需要 n >= 2")
    fnorm2 = float(f @ f)
    diag = h[:-1] ** 2 * fnorm2 + h[1:] ** 2
    off = -h[1:-1] ** 2
    return Tridiagonal(diag, off)


def toeplitz_eigenvalues(fnorm2: float, n: int) -> np.ndarray:
    """
    等距网格下 C_sC_s^T 的特征值 λ_j = 1 + |f|² - 2cos(jπ/n)，j = 1..n-1，升序
    """
    if n < 2:
        raise InputError("需要 n >= 2")
    if fnorm2 < 1:
        raise InputError(f"|f|² >= 1 恒成立，实际 {fnorm2}")
    j = np.arange(1, n)
    return 1.0 + fnorm2 - 2.0 * np.cos(j * np.pi / n)


@dataclass(frozen=True)
class ConstraintConditioning:
    norm_C: float
    norm_Cplus: float

    @property
    def kappa(self) -> float:
        return self.norm_C * self.norm_Cplus


def constraint_conditioning(C: ConstraintMatrix) -> ConstraintConditioning:
    """
    由 𝒞_s𝒞_s^T 的极端特征值得到 ‖𝒞‖、‖𝒞^+‖ 与 κ(𝒞)

    等距网格用特征值闭式，否则做对称三对角特征分解。
    """
    n = C.layout.n
    if n < 2:
        raise InputError("n = 1 时没有约束，条件数无定义")
    if np.allclose(C.steps, C.steps[0], rtol=1e-12, atol=0.0):
        h = float(C.steps[0])
        lam = h * h * toeplitz_eigenvalues(float(C.f @ C.f), n)
    else:
        lam = _cscst_from_steps(C.steps, C.f).eigenvalues()
    lam_min, lam_max = float(lam.min()), float(lam.max())
    if lam_min <= 0:
        raise RankDeficiencyError("𝒞 不是行满秩", 0.0, np.sqrt(lam_max))
    result = ConstraintConditioning(np.sqrt(lam_max), 1.0 / np.sqrt(lam_min))
    logger.debug(f"κ(𝒞)={result.kappa:.4g}, ‖𝒞⁺‖={result.norm_Cplus:.4g}")
    return result


@dataclass(frozen=True)
class NullspaceBasis:
    """ker𝒞 的列正交基 𝒟"""

    D: np.ndarray

    @property
    def projector(self) -> np.ndarray:
        """正交投影 P = 𝒟𝒟^T"""
        return self.D @ self.D.T


def nullspace_basis(C: ConstraintMatrix) -> NullspaceBasis:
    """
    ker𝒞 的正交基，列数 nmN + k

    n = 1 时 𝒟 为单位阵。
    """
    lay = C.layout
    if lay.n == 1:
        return NullspaceBasis(np.eye(lay.dim))
    D = null_space(C.dense())
    expected = lay.dim - C.shape[0]
    if D.shape[1] != expected:
        raise RankDeficiencyError(f"ker𝒞 的维数 {D.shape[1]} 不等于 {expected}")
    return NullspaceBasis(D)


def corollary_bounds(family: BasisFamily) -> Tuple[float, float]:
    """
    等距网格下 κ(𝒞) 与 ‖𝒞^+‖·h 的理论上界

    Returns:
        (κ 上界, ‖𝒞^+‖·h 上界)；Runge-Kutta 族要求 f 非负
    """
    N = family.N
    if family.kind == "legendre":
        return np.sqrt(5.0), 1.0
    if family.kind == "modified_legendre":
        return np.sqrt((2.0 * N + 6.0) / (2.0 * N)), (2.0 * N) ** -0.5
    if family.kind == "chebyshev":
        return np.sqrt(4.0 + 2.0 * np.log(2.0)), 1.0
    f = integral_weights_f(family)
    if np.any(f < 0):
        raise InputError(f"{family} 的积分向量有负分量，界不适用")
    return np.sqrt(5.0 * N), np.sqrt(N)
