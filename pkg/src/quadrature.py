#!/usr/bin/env python3
"""
求积与权矩阵模块
[0,1] 上的 Gauss-Legendre 求积、配置点族以及泛函的三种权矩阵 L^C / L^I / L^R
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import eigh_tridiagonal, inv

from src.errors import InputError, NumericError
from src.logger import get_logger

logger = get_logger("quadrature")

NODE_KINDS = ("gauss", "uniform")
VARIANTS = ("C", "I", "R")


@dataclass(frozen=True)
class QuadratureRule:
    """[0,1] 上的求积公式"""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, values: np.ndarray) -> float:
        """对节点处的函数值求积"""
        return float(self.weights @ np.asarray(values, dtype=float))


def gauss_legendre(count: int) -> QuadratureRule:
    """
    [0,1] 上 count 点 Gauss-Legendre 公式（Golub-Welsch）

    Args:
        count: 节点个数

    Returns:
        对 2*count-1 次多项式精确的求积公式
    """
    if count < 1:
        raise InputError(f"节点个数必须为正，实际 {count}")
    if count == 1:
        return QuadratureRule(np.array([0.5]), np.array([1.0]), 1)

    i = np.arange(1, count, dtype=float)
    beta = i / np.sqrt(4.0 * i * i - 1.0)
    x, vecs = eigh_tridiagonal(np.zeros(count), beta)
    w = 2.0 * vecs[0] ** 2
    # 对称化
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * count - 1)


def collocation_nodes(M: int, kind: str = "gauss") -> np.ndarray:
    """
    子区间参考单元上的配置点 0 <= ρ_1 < ... < ρ_M <= 1

    Args:
        M: 配置点个数
        kind: "gauss" 或 "uniform"
    """
    kind = kind.lower()
    if kind not in NODE_KINDS:
        raise InputError(f"未知配置点族: {kind}，可选 {NODE_KINDS}")
    if M < 1:
        raise InputError(f"配置点个数必须为正，实际 {M}")
    if kind == "gauss":
        return gauss_legendre(M).nodes
    if M == 1:
        raise InputError("等距配置点至少需要两个节点")
    return np.arange(M, dtype=float) / (M - 1)


def orthonormal_vandermonde(points: np.ndarray, count: int) -> np.ndarray:
    """
    L²(0,1) 标准正交移位 Legendre 多项式 φ_d = sqrt(2d+1) P_d(2τ-1) 的配置矩阵

    Returns:
        形状 (len(points), count) 的矩阵，第 α 列为 φ_α 在各点的值
    """
    points = np.asarray(points, dtype=float)
    scale = np.sqrt(2.0 * np.arange(count) + 1.0)
    return legendre.legvander(2.0 * points - 1.0, count - 1) * scale


@dataclass(frozen=True)
class WeightMatrix:
    """泛函的权矩阵 L 及其因子 S（S^T S = L）"""

    variant: str
    nodes: np.ndarray
    L: np.ndarray
    S: np.ndarray

    @property
    def M(self) -> int:
        return self.nodes.size


def weight_matrix(variant: str, rho: np.ndarray) -> WeightMatrix:
    """
    构造权矩阵

    Args:
        variant: "C"（M^{-1} I）、"I"（插值求积权重对角阵）或 "R"（(V^{-1})^T V^{-1}）
        rho: 配置点

    Returns:
        WeightMatrix，只依赖 M 与 ρ，不依赖剖分
    """
    variant = variant.upper()
    if variant not in VARIANTS:
        raise InputError(f"未知泛函变体: {variant}，可选 {VARIANTS}")
    rho = np.asarray(rho, dtype=float)
    M = rho.size
    if M < 1 or np.any(np.diff(rho) <= 0) or rho[0] < 0 or rho[-1] > 1:
        raise InputError("配置点必须在 [0,1] 内严格递增")

    if variant == "C":
        S = np.eye(M) / np.sqrt(M)
        L = np.eye(M) / M
    else:
        V = orthonormal_vandermonde(rho, M)
        if np.linalg.cond(V) > 1e12:
            raise NumericError(f"配置点上的质量矩阵 V 奇异 (M={M})")
        V_inv = inv(V)
        if variant == "I":
            # 插值求积权重 γ_i = ∫ℓ_i；∫φ_0 = 1，其余 ∫φ_d = 0，故取 V^{-1} 第一行
            gamma = V_inv[0]
            if np.any(gamma <= 0):
                raise InputError("插值求积权重存在非正值，L^I 不正定")
            S = np.diag(np.sqrt(gamma))
            L = np.diag(gamma)
        else:
            S = V_inv
            L = S.T @ S
            L = 0.5 * (L + L.T)

    logger.debug(f"权矩阵 {variant}: M={M}, trace={np.trace(L):.6g}")
    return WeightMatrix(variant, rho, L, S)
