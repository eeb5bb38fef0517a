#!/usr/bin/env python3
"""
离散系统组装模块
把 DAE 边值问题 A(t)(Dx)'(t) + B(t)x(t) = q(t)、G_a x(a) + G_b x(b) = d
离散为最小二乘问题 min |𝒜c - r|²，s.t. 𝒞c = 0

区间 j 的行块为 h_j^{1/2} (S ⊗ I_m) [w(t_{j1}); ...; w(t_{jM})]，S^T S = L；
边界行默认乘 h^{1/2}（h 为最大步长），与配置行同量级；
numerics.boundary_scaling = "none" 时不缩放。
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.basis import BasisFamily
from src.config import config
from src.constraint import ConstraintMatrix, build_C
from src.errors import InputError
from src.logger import get_logger
from src.mesh import Partition
from src.quadrature import WeightMatrix, collocation_nodes, weight_matrix
from src.repmap import CoefficientVector, Layout

logger = get_logger("assembly")

BOUNDARY_SCALINGS = ("sqrt_h", "none")


@dataclass
class DAEProblem:
    """线性 DAE 边值问题，D = [I_k 0]"""

    a: float
    b: float
    m: int
    k: int
    l_dyn: int
    mu: int
    A: Callable[[float], np.ndarray]
    B: Callable[[float], np.ndarray]
    q: Callable[[float], np.ndarray]
    Ga: np.ndarray
    Gb: np.ndarray
    d: np.ndarray
    x_exact: Optional[Callable[[float], np.ndarray]] = None
    dx_exact: Optional[Callable[[float], np.ndarray]] = None
    name: str = ""
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.l_dyn <= self.k < self.m:
            raise InputError(f"要求 0 <= l_dyn <= k < m，实际 l_dyn={self.l_dyn}, k={self.k}, m={self.m}")
        if not self.a < self.b:
            raise InputError(f"要求 a < b，实际 [{self.a}, {self.b}]")
        self.Ga = np.asarray(self.Ga, dtype=float).reshape(self.l_dyn, self.m)
        self.Gb = np.asarray(self.Gb, dtype=float).reshape(self.l_dyn, self.m)
        self.d = np.asarray(self.d, dtype=float).reshape(self.l_dyn)
        # ker D ⊆ ker G_a, ker G_b：代数分量对应的列必须为零
        if np.any(self.Ga[:, self.k:]) or np.any(self.Gb[:, self.k:]):
            raise InputError("边界矩阵 G_a、G_b 在代数分量上的列必须为零")

    @property
    def has_exact_solution(self) -> bool:
        return self.x_exact is not None and self.dx_exact is not None

    def coefficients_at(self, t: float):
        """返回 (A(t), B(t), q(t)) 并检查维数"""
        A = np.asarray(self.A(t), dtype=float)
        B = np.asarray(self.B(t), dtype=float)
        q = np.asarray(self.q(t), dtype=float)
        if A.shape != (self.m, self.k) or B.shape != (self.m, self.m) or q.shape != (self.m,):
            raise InputError(
                f"系数函数维数不符: A{A.shape}, B{B.shape}, q{q.shape}，"
                f"期望 A({self.m},{self.k}), B({self.m},{self.m}), q({self.m},)"
            )
        return A, B, q


@dataclass
class DiscreteSystem:
    """组装后的离散系统：𝒜 的 n 个对角块、边界行、右端 r 与约束 𝒞"""

    problem: DAEProblem
    partition: Partition
    family: BasisFamily
    weights: WeightMatrix
    layout: Layout
    blocks: List[np.ndarray]
    rhs_blocks: List[np.ndarray]
    boundary_first: np.ndarray
    boundary_last: np.ndarray
    constraint: ConstraintMatrix
    boundary_weight: float = 1.0

    @property
    def N(self) -> int:
        return self.family.N

    @property
    def M(self) -> int:
        return self.weights.M

    @property
    def variant(self) -> str:
        return self.weights.variant

    @property
    def shape(self):
        lay = self.layout
        return (lay.n * lay.m * self.M + self.problem.l_dyn, lay.dim)

    @property
    def r(self) -> np.ndarray:
        return np.concatenate(self.rhs_blocks + [self.boundary_weight * self.problem.d])

    def dense_A(self) -> np.ndarray:
        """组装完整的 𝒜（桌面规模下稠密存储即可）"""
        lay = self.layout
        rows = lay.m * self.M
        A = np.zeros(self.shape)
        for j, block in enumerate(self.blocks):
            A[j * rows:(j + 1) * rows, lay.block_slice(j)] = block
        top = lay.n * rows
        A[top:, lay.block_slice(0)] += self.boundary_first
        A[top:, lay.block_slice(lay.n - 1)] += self.boundary_last
        return A

    def apply(self, c) -> np.ndarray:
        """𝒜c，逐块计算"""
        data = c.data if isinstance(c, CoefficientVector) else np.asarray(c, dtype=float)
        lay = self.layout
        parts = [blk @ data[lay.block_slice(j)] for j, blk in enumerate(self.blocks)]
        bc = self.boundary_first @ data[lay.block_slice(0)] + self.boundary_last @ data[
            lay.block_slice(lay.n - 1)
        ]
        return np.concatenate(parts + [bc])


def _interval_block(problem: DAEProblem, family: BasisFamily, layout: Layout, t0, h, rho, tables):
    """区间上未缩放的配置行块 E_j 与右端 q 的采样"""
    Pbar, P, dPbar = tables
    m, k, M = problem.m, problem.k, rho.size
    E = np.zeros((M * m, layout.block_size))
    q_stack = np.zeros(M * m)
    for i, tau in enumerate(rho):
        A, B, q = problem.coefficients_at(t0 + tau * h)
        rows = slice(i * m, (i + 1) * m)
        q_stack[rows] = q
        for kappa in range(m):
            cols = layout.component_slice(0, kappa)
            if kappa < k:
                E[rows, cols] = np.outer(A[:, kappa], dPbar[i]) + np.outer(B[:, kappa], h * Pbar[i])
            else:
                E[rows, cols] = np.outer(B[:, kappa], P[i])
    return E, q_stack


def _boundary_rows(G: np.ndarray, family: BasisFamily, layout: Layout, h: float, tau: float):
    """G x(t)，x 取区间在局部坐标 τ 处的值；只涉及微分分量"""
    pbar = family.pbar_table([tau])[0]
    rows = np.zeros((G.shape[0], layout.block_size))
    for kappa in range(layout.k):
        rows[:, layout.component_slice(0, kappa)] = np.outer(G[:, kappa], h * pbar)
    return rows


def assemble(
    problem: DAEProblem,
    partition: Partition,
    family: BasisFamily,
    M: Optional[int] = None,
    rho: Optional[np.ndarray] = None,
    variant: str = "R",
    boundary_scaling: Optional[str] = None,
) -> DiscreteSystem:
    """
    组装离散最小二乘系统

    Args:
        problem: DAE 边值问题
        partition: 剖分，须覆盖 [a, b]
        family: 基族（决定 N）
        M: 配置点个数，默认 N+1
        rho: 配置点，默认 M 个 Gauss-Legendre 点
        variant: 泛函变体 "C" / "I" / "R"
        boundary_scaling: "sqrt_h" 或 "none"，默认取配置 numerics.boundary_scaling

    Returns:
        DiscreteSystem；"none" 时 |𝒜c - r|² = Φ_{π,M}(ℛc)，
        "sqrt_h" 时边界项带权 h
    """
    N = family.N
    if rho is not None:
        rho = np.asarray(rho, dtype=float)
        M = rho.size if M is None else M
        if rho.size != M:
            raise InputError(f"配置点个数 {rho.size} 与 M={M} 不符")
    M = N + 1 if M is None else int(M)
    if M < N + 1:
        logger.warning(f"M={M} < N+1={N + 1}，不满足收敛性要求 M >= N+1")
        raise InputError(f"配置点个数 M={M} 必须至少为 N+1={N + 1}")
    if rho is None:
        rho = collocation_nodes(M, "gauss")
    if not (np.isclose(partition.a, problem.a) and np.isclose(partition.b, problem.b)):
        raise InputError(f"剖分 [{partition.a}, {partition.b}] 与问题区间 [{problem.a}, {problem.b}] 不符")

    weights = weight_matrix(variant, rho)
    layout = Layout(partition.n, problem.m, problem.k, N)
    scale = np.kron(weights.S, np.eye(problem.m))
    tables = (family.pbar_table(rho), family.p_table(rho), family.pbar_derivative_table(rho))

    blocks, rhs_blocks = [], []
    for j in range(partition.n):
        h = float(partition.steps[j])
        E, q_stack = _interval_block(
            problem, family, layout, partition.breakpoints[j], h, rho, tables
        )
        blocks.append(np.sqrt(h) * scale @ E)
        rhs_blocks.append(np.sqrt(h) * scale @ q_stack)

    scaling = str(boundary_scaling or config.get("numerics.boundary_scaling", "sqrt_h")).lower()
    if scaling not in BOUNDARY_SCALINGS:
        raise InputError(f"未知边界缩放: {scaling}，可选 {BOUNDARY_SCALINGS}")
    beta = float(np.sqrt(partition.h)) if scaling == "sqrt_h" else 1.0
    first = beta * _boundary_rows(problem.Ga, family, layout, float(partition.steps[0]), 0.0)
    last = beta * _boundary_rows(problem.Gb, family, layout, float(partition.steps[-1]), 1.0)

    system = DiscreteSystem(
        problem,
        partition,
        family,
        weights,
        layout,
        blocks,
        rhs_blocks,
        first,
        last,
        build_C(partition, family, problem.m, problem.k),
        beta,
    )
    logger.debug(
        f"组装完成 {problem.name or 'DAE'}: {family.short_name} N={N} M={M} "
        f"variant={weights.variant} n={partition.n}, 𝒜 形状 {system.shape}"
    )
    return system


def functional_value(system: DiscreteSystem, c) -> float:
    """φ(c) = |𝒜c - r|²"""
    res = system.apply(c) - system.r
    return float(res @ res)
