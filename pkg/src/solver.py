#!/usr/bin/env python3
"""
约束最小二乘求解模块
用零空间方法求解 min |𝒜c - r|，s.t. 𝒞c = 0，并给出受限条件数 κ_𝒞(𝒜)
以及两种扰动界的求值
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lstsq, null_space, solve as dense_solve, svd, svdvals

from src.assembly import DiscreteSystem
from src.config import config
from src.constraint import nullspace_basis
from src.errors import BoundPreconditionError, InputError, RankDeficiencyError
from src.logger import get_logger
from src.repmap import CoefficientVector

logger = get_logger("solver")


@dataclass(frozen=True)
class SolveResult:
    """零空间方法的解与诊断量"""

    c: CoefficientVector
    d: np.ndarray
    residual: np.ndarray
    sigma_max: float
    sigma_min: float

    @property
    def residual_norm(self) -> float:
        """|𝔯|，𝔯 = r - 𝒜c"""
        return float(np.linalg.norm(self.residual))

    @property
    def kappa(self) -> float:
        """κ_𝒞(𝒜) = σ_max(𝒜𝒟) / σ_min(𝒜𝒟)"""
        return self.sigma_max / self.sigma_min


def _compressed_svd(AD: np.ndarray):
    U, s, Vt = svd(AD, full_matrices=False)
    tol = config.get("numerics.rank_tol", 1e-12)
    if s.size == 0 or s[-1] <= tol * s[0]:
        smin = float(s[-1]) if s.size else 0.0
        smax = float(s[0]) if s.size else 0.0
        raise RankDeficiencyError(
            f"𝒜𝒟 数值秩亏 (σ_min={smin:.3e}, σ_max={smax:.3e})，离散化不可容许", smin, smax
        )
    return U, s, Vt


def solve(system: DiscreteSystem, D: Optional[np.ndarray] = None) -> SolveResult:
    """
    零空间方法：min_d |𝒜𝒟d - r|，c = 𝒟d

    Args:
        system: 组装好的离散系统
        D: 可选的 ker𝒞 列正交基，默认由约束矩阵计算

    Returns:
        SolveResult

    Raises:
        RankDeficiencyError: 𝒜𝒟 列不满秩
    """
    if D is None:
        D = nullspace_basis(system.constraint).D
    A = system.dense_A()
    r = system.r
    if D.shape[0] != A.shape[1]:
        raise InputError(f"核空间基行数 {D.shape[0]} 与 𝒜 列数 {A.shape[1]} 不符")

    AD = A @ D
    U, s, Vt = _compressed_svd(AD)
    d = Vt.T @ ((U.T @ r) / s)
    c = D @ d
    residual = r - A @ c
    result = SolveResult(
        CoefficientVector(system.layout, c), d, residual, float(s[0]), float(s[-1])
    )
    logger.debug(
        f"求解完成: 𝒜𝒟 形状 {AD.shape}, |𝔯|={result.residual_norm:.3e}, κ={result.kappa:.3e}"
    )
    return result


def kappa_C_of_A(system: DiscreteSystem) -> float:
    """受限条件数 κ_𝒞(𝒜) = ‖𝒜P‖‖(𝒜P)^+‖，用 𝒜𝒟 的奇异值计算"""
    D = nullspace_basis(system.constraint).D
    s = svdvals(system.dense_A() @ D)
    tol = config.get("numerics.rank_tol", 1e-12)
    if s[-1] <= tol * s[0]:
        raise RankDeficiencyError("𝒜𝒟 数值秩亏", float(s[-1]), float(s[0]))
    return float(s[0] / s[-1])


def solve_kkt(system: DiscreteSystem) -> np.ndarray:
    """
    稠密 KKT 系统求约束最小二乘解，作为零空间方法的对照

        [ I   𝒜   0  ] [s]   [r]
        [ 𝒜^T 0  -𝒞^T] [c] = [0]
        [ 0  -𝒞   0  ] [λ]   [0]

    只适用于小规模系统。
    """
    A = system.dense_A()
    C = system.constraint.dense()
    rows, cols = A.shape
    p = C.shape[0]
    size = rows + cols + p
    K = np.zeros((size, size))
    K[:rows, :rows] = np.eye(rows)
    K[:rows, rows:rows + cols] = A
    K[rows:rows + cols, :rows] = A.T
    K[rows:rows + cols, rows + cols:] = -C.T
    K[rows + cols:, rows:rows + cols] = -C
    rhs = np.zeros(size)
    rhs[:rows] = system.r
    sol = dense_solve(K, rhs, assume_a="sym")
    return sol[rows:rows + cols]


# ---------------------------------------------------------------------------
# 扰动界
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedKernelBound:
    """核不变（Δ𝒞 = 0）时的扰动界"""

    absolute: float
    relative: Optional[float]
    omega: float

    @property
    def relative_available(self) -> bool:
        return self.relative is not None


@dataclass(frozen=True)
class PerturbedKernelBound:
    """核受扰动时的扰动界"""

    absolute: float
    relative: Optional[float]
    varkappa: float
    omega_delta: float
    frak_R: float
    drift: float

    @property
    def relative_available(self) -> bool:
        return self.relative is not None


def _check_nonnegative(**values):
    for name, value in values.items():
        if value < 0 or not np.isfinite(value):
            raise InputError(f"{name} 必须为有限非负数，实际 {value}")


def _bound_terms(norm_ApPlus, norm_R, norm_AP, c_norm, r_norm, rres_norm, dr_norm, omega):
    absolute = norm_ApPlus / (1.0 - omega) * (
        norm_R * (c_norm + norm_ApPlus * rres_norm) + dr_norm
    )
    if r_norm == 0.0 or c_norm == 0.0:
        logger.info("r = 0 或 c = 0，相对界不可用")
        return absolute, None
    kappa = norm_AP * norm_ApPlus
    relative = (
        (kappa + rres_norm / (norm_AP * c_norm) * kappa**2) * norm_R / norm_AP
        + norm_ApPlus * r_norm / c_norm * dr_norm / r_norm
    ) / (1.0 - omega)
    return absolute, relative


def perturbation_bound_fixed_kernel(
    norm_ApPlus: float,
    norm_DeltaAP: float,
    norm_AP: float,
    c_norm: float,
    r_norm: float,
    rres_norm: float,
    dr_norm: float,
) -> FixedKernelBound:
    """
    𝒞 不变时 |Δc| 的绝对界与相对界

        |Δc| ≤ ‖(𝒜P)^+‖/(1-ω) · (‖Δ𝒜P‖(|c| + ‖(𝒜P)^+‖|𝔯|) + |Δr|)

    |Δr| 不乘 ‖Δ𝒜P‖。ω = ‖(𝒜P)^+‖‖Δ𝒜P‖ 必须小于 1。
    r = 0 时相对界无定义，relative 为 None。

    Raises:
        BoundPreconditionError: ω >= 1
    """
    _check_nonnegative(
        norm_ApPlus=norm_ApPlus, norm_DeltaAP=norm_DeltaAP, norm_AP=norm_AP,
        c_norm=c_norm, r_norm=r_norm, rres_norm=rres_norm, dr_norm=dr_norm,
    )
    omega = norm_ApPlus * norm_DeltaAP
    if omega >= 1.0:
        raise BoundPreconditionError("ω < 1", omega)
    absolute, relative = _bound_terms(
        norm_ApPlus, norm_DeltaAP, norm_AP, c_norm, r_norm, rres_norm, dr_norm, omega
    )
    return FixedKernelBound(absolute, relative, omega)


def perturbation_bound_perturbed_kernel(
    norm_Cplus: float,
    norm_DeltaC: float,
    kappa_C: float,
    norm_A_plus_DeltaA: float,
    norm_ApPlus: float,
    norm_DeltaAP: float,
    norm_AP: float,
    c_norm: float,
    r_norm: float,
    rres_norm: float,
    dr_norm: float,
) -> PerturbedKernelBound:
    """
    𝒞 也受扰动时 |Δc| 的绝对界与相对界

    ϰ = ‖𝒞^+‖‖Δ𝒞‖ < 1/2；核漂移 (‖𝒞^+‖/(1-ϰ))(√2κ(𝒞)+1)‖Δ𝒞‖；
    ‖ℜ‖ <= ‖Δ𝒜P‖ + ‖𝒜+Δ𝒜‖ * 漂移；ω_Δ = ‖(𝒜P)^+‖‖ℜ‖ < 1。
    Δ𝒞 = 0 时与核不变的界完全一致。

    Raises:
        BoundPreconditionError: ϰ >= 1/2 或 ω_Δ >= 1
    """
    _check_nonnegative(
        norm_Cplus=norm_Cplus, norm_DeltaC=norm_DeltaC, kappa_C=kappa_C,
        norm_A_plus_DeltaA=norm_A_plus_DeltaA, norm_ApPlus=norm_ApPlus,
        norm_DeltaAP=norm_DeltaAP, norm_AP=norm_AP, c_norm=c_norm, r_norm=r_norm,
        rres_norm=rres_norm, dr_norm=dr_norm,
    )
    varkappa = norm_Cplus * norm_DeltaC
    if varkappa >= 0.5:
        raise BoundPreconditionError("ϰ < 1/2", varkappa)
    drift = norm_Cplus / (1.0 - varkappa) * (np.sqrt(2.0) * kappa_C + 1.0) * norm_DeltaC
    frak_R = norm_DeltaAP + norm_A_plus_DeltaA * drift
    omega_delta = norm_ApPlus * frak_R
    if omega_delta >= 1.0:
        raise BoundPreconditionError("ω_Δ < 1", omega_delta)

    absolute, relative = _bound_terms(
        norm_ApPlus, frak_R, norm_AP, c_norm, r_norm, rres_norm, dr_norm, omega_delta
    )
    absolute += drift * c_norm
    if relative is not None:
        relative += drift
    return PerturbedKernelBound(absolute, relative, varkappa, omega_delta, frak_R, drift)


@dataclass(frozen=True)
class PerturbationMeasurement:
    """扰动前后重新求解得到的 |Δc| 以及代入扰动界所需的各范数"""

    delta_c: float
    norm_ApPlus: float
    norm_DeltaAP: float
    norm_AP: float
    c_norm: float
    r_norm: float
    rres_norm: float
    dr_norm: float
    norm_Cplus: float
    norm_DeltaC: float
    kappa_C: float
    norm_A_plus_DeltaA: float

    def fixed_kernel_bound(self) -> FixedKernelBound:
        return perturbation_bound_fixed_kernel(
            self.norm_ApPlus, self.norm_DeltaAP, self.norm_AP,
            self.c_norm, self.r_norm, self.rres_norm, self.dr_norm,
        )

    def perturbed_kernel_bound(self) -> PerturbedKernelBound:
        return perturbation_bound_perturbed_kernel(
            self.norm_Cplus, self.norm_DeltaC, self.kappa_C, self.norm_A_plus_DeltaA,
            self.norm_ApPlus, self.norm_DeltaAP, self.norm_AP,
            self.c_norm, self.r_norm, self.rres_norm, self.dr_norm,
        )


def _dense_constrained_lsq(A: np.ndarray, r: np.ndarray, C: np.ndarray) -> np.ndarray:
    D = null_space(C) if C.shape[0] else np.eye(A.shape[1])
    d = lstsq(A @ D, r)[0]
    return D @ d


def perturb_and_resolve(
    system: DiscreteSystem,
    delta_A: np.ndarray,
    delta_r: np.ndarray,
    delta_C: Optional[np.ndarray] = None,
) -> PerturbationMeasurement:
    """
    对稠密的 𝒜、r、𝒞 施加扰动后重新求解，测量 |Δc|

    Args:
        system: 原离散系统
        delta_A: 与 𝒜 同形的扰动
        delta_r: 与 r 同长的扰动
        delta_C: 与 𝒞 同形的扰动，None 表示核不变
    """
    A = system.dense_A()
    r = system.r
    C = system.constraint.dense()
    delta_A = np.asarray(delta_A, dtype=float)
    delta_r = np.asarray(delta_r, dtype=float)
    delta_C = np.zeros_like(C) if delta_C is None else np.asarray(delta_C, dtype=float)
    if delta_A.shape != A.shape or delta_r.shape != r.shape or delta_C.shape != C.shape:
        raise InputError("扰动的形状与系统不符")

    base = solve(system)
    c = base.c.data
    perturbed = _dense_constrained_lsq(A + delta_A, r + delta_r, C + delta_C)
    D = nullspace_basis(system.constraint).D

    if C.shape[0]:
        sC = svdvals(C)
        norm_Cplus, kappa_C = 1.0 / sC[-1], sC[0] / sC[-1]
        norm_DeltaC = float(np.linalg.norm(delta_C, 2))
    else:
        norm_Cplus, kappa_C, norm_DeltaC = 0.0, 1.0, 0.0

    return PerturbationMeasurement(
        delta_c=float(np.linalg.norm(perturbed - c)),
        norm_ApPlus=1.0 / base.sigma_min,
        norm_DeltaAP=float(np.linalg.norm(delta_A @ D, 2)),
        norm_AP=base.sigma_max,
        c_norm=float(np.linalg.norm(c)),
        r_norm=float(np.linalg.norm(r)),
        rres_norm=base.residual_norm,
        dr_norm=float(np.linalg.norm(delta_r)),
        norm_Cplus=float(norm_Cplus),
        norm_DeltaC=norm_DeltaC,
        kappa_C=float(kappa_C),
        norm_A_plus_DeltaA=float(np.linalg.norm(A + delta_A, 2)),
    )


def fit_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """log-log 最小二乘拟合 error ≈ C h^p，返回 p"""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if steps.size != errors.size or steps.size < 2:
        raise InputError("拟合阶数至少需要两组 (h, error)")
    if np.any(steps <= 0) or np.any(errors <= 0):
        raise InputError("步长与误差必须为正")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)
