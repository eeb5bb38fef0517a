#!/usr/bin/env python3
"""
投影模块
把不连续的系数向量投影到 ker𝒞 上：
  - Q_π：欧氏正交投影，逐分量求解三对角系统 (𝒞_s𝒞_s^T) d^κ = 𝒞_s c^κ
  - Q_{L²}、Q_{H¹}：分别在 (𝒰·,𝒰·) 与 (𝒰̂·,𝒰̂·) 内积下的正交投影
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve, solveh_banded

from src.basis import BasisFamily, integral_weights_f
from src.constraint import ConstraintMatrix, Cs_matrix, CsCst_matrix, build_C
from src.errors import InputError
from src.logger import get_logger
from src.mesh import Partition, make_partition
from src.repmap import CoefficientVector, Layout, build_interp_matrices, evaluate_local, gram_blocks

logger = get_logger("projection")


@dataclass(frozen=True)
class ProjectionContext:
    """投影所需的全部预处理量"""

    partition: Partition
    family: BasisFamily
    layout: Layout
    constraint: ConstraintMatrix
    Cs: np.ndarray
    cscst_banded: np.ndarray
    gram_L2: List[Tuple]
    gram_H1: List[Tuple]


def build_projection_context(
    partition: Partition, family: BasisFamily, m: int, k: int
) -> ProjectionContext:
    """
    预先组装 𝒞_s、𝒞_s𝒞_s^T 的带状存储以及逐块 Cholesky 分解的 Gram 矩阵

    等距网格上 h 在 Q_π 中相消，直接使用未缩放的 C_s。
    """
    layout = Layout(partition.n, m, k, family.N)
    f = integral_weights_f(family)
    constraint = build_C(partition, family, m, k)

    Cs, banded = np.zeros((0, layout.n * (family.N + 1))), np.zeros((2, 0))
    if partition.n > 1:
        scaled = partition
        if partition.is_uniform:
            scaled = make_partition(np.arange(partition.n + 1, dtype=float))
        Cs = Cs_matrix(scaled, f)
        banded = CsCst_matrix(scaled, f).banded()

    mats = build_interp_matrices(family)
    gram_L2 = [cho_factor(G) for G in gram_blocks(partition, mats, m, k, broken_h1=False)]
    gram_H1 = [cho_factor(G) for G in gram_blocks(partition, mats, m, k, broken_h1=True)]
    logger.debug(f"投影上下文: n={partition.n}, {family.short_name} N={family.N}, m={m}, k={k}")
    return ProjectionContext(partition, family, layout, constraint, Cs, banded, gram_L2, gram_H1)


def _check_layout(c: CoefficientVector, context: ProjectionContext):
    if c.layout != context.layout:
        raise InputError(f"系数布局 {c.layout} 与投影上下文 {context.layout} 不符")


def project_coefficients(c: CoefficientVector, context: ProjectionContext) -> CoefficientVector:
    """
    欧氏正交投影 Q_π

    对每个微分分量 κ：
        1. 取出 c^κ = [c_{1κ0}, ..., c_{nκN}]
        2. 解 (𝒞_s𝒞_s^T) d^κ = 𝒞_s c^κ
        3. c^κ ← c^κ - 𝒞_s^T d^κ
    代数分量不变；同一个三对角分解对所有 κ 复用。
    """
    _check_layout(c, context)
    data = c.data.copy()
    if context.layout.n == 1:
        return c.with_data(data)
    for kappa in range(context.layout.k):
        idx = context.layout.component_indices(kappa)
        ck = data[idx]
        dk = solveh_banded(context.cscst_banded, context.Cs @ ck)
        data[idx] = ck - context.Cs.T @ dk
    return c.with_data(data)


def _block_solve(factors: List[Tuple], layout: Layout, rhs: np.ndarray) -> np.ndarray:
    """块对角 Gram 矩阵的求解，rhs 可为向量或矩阵"""
    out = np.empty_like(rhs, dtype=float)
    for j, factor in enumerate(factors):
        sl = layout.block_slice(j)
        out[sl] = cho_solve(factor, rhs[sl])
    return out


def _gram_projection(c: CoefficientVector, context: ProjectionContext, factors) -> CoefficientVector:
    # c - G^{-1}𝒞^T (𝒞G^{-1}𝒞^T)^{-1} 𝒞c
    _check_layout(c, context)
    if context.layout.n == 1:
        return c.with_data(c.data.copy())
    C = context.constraint.dense()
    X = _block_solve(factors, context.layout, C.T)
    schur = C @ X
    y = solve(schur, C @ c.data, assume_a="pos")
    return c.with_data(c.data - X @ y)


def project_L2(c: CoefficientVector, context: ProjectionContext) -> CoefficientVector:
    """ℛc 在 L² 内积下到 X_π 的正交投影"""
    return _gram_projection(c, context, context.gram_L2)


def project_H1(c: CoefficientVector, context: ProjectionContext) -> CoefficientVector:
    """ℛc 在破缺 H¹_{D,π} 内积下到 X_π 的正交投影"""
    return _gram_projection(c, context, context.gram_H1)


def max_jump(c: CoefficientVector, partition: Partition, family: BasisFamily) -> float:
    """内部断点处微分分量的最大跳跃 |x_κ(t_j - 0) - x_κ(t_j + 0)|"""
    lay = c.layout
    if lay.n != partition.n or lay.N != family.N:
        raise InputError("系数布局与剖分或基族不一致")
    jump = 0.0
    for j in range(lay.n - 1):
        left = evaluate_local(c, partition, family, j, 1.0)[0, : lay.k]
        right = evaluate_local(c, partition, family, j + 1, 0.0)[0, : lay.k]
        jump = max(jump, float(np.max(np.abs(left - right))))
    return jump


def step_function_coefficients(
    partition: Partition, family: BasisFamily, m: int = 1, k: int = 1
) -> CoefficientVector:
    """
    交替阶跃函数的系数：按 1 起算的第 j 个子区间上，j 为奇数时取 1，为偶数时取 0

    所有微分分量取该函数，代数分量为零；每个内部断点处的跳跃都等于 1。
    """
    layout = Layout(partition.n, m, k, family.N)
    c = CoefficientVector.zeros(layout)
    for j, h in enumerate(partition.steps):
        if j % 2 == 0:
            for kappa in range(k):
                c.data[layout.component_slice(j, kappa).start] = 1.0 / h
    return c
