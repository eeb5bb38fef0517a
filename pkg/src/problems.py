#!/usr/bin/env python3
"""
基准问题模块
三个带精确解的线性 DAE 基准问题、多项式构造解问题以及 H¹_D 误差

右端 q 与边界数据 d 都由精确解按解析式算出，残差停留在舍入误差水平。
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from src.assembly import DAEProblem
from src.basis import BasisFamily
from src.errors import InputError
from src.logger import get_logger
from src.mesh import Partition
from src.quadrature import gauss_legendre
from src.repmap import CoefficientVector, evaluate_local, evaluate_local_derivative

logger = get_logger("problems")


@dataclass(frozen=True)
class BenchmarkProblem:
    """带精确解的 DAE 问题；labels 记录内部分量顺序对应的原始分量名"""

    problem: DAEProblem
    labels: Tuple[str, ...]

    @property
    def name(self) -> str:
        return self.problem.name

    @property
    def params(self) -> Dict[str, float]:
        return dict(self.problem.params)

    def x_exact(self, t: float) -> np.ndarray:
        return self.problem.x_exact(t)

    def dx_exact(self, t: float) -> np.ndarray:
        return self.problem.dx_exact(t)

    def consistency_residual(self, t: float) -> np.ndarray:
        """A(t)(Dx*)'(t) + B(t)x*(t) - q(t)"""
        A, B, q = self.problem.coefficients_at(t)
        return A @ self.dx_exact(t) + B @ self.x_exact(t) - q

    def boundary_residual(self) -> np.ndarray:
        """G_a x*(a) + G_b x*(b) - d"""
        p = self.problem
        return p.Ga @ self.x_exact(p.a) + p.Gb @ self.x_exact(p.b) - p.d


def _manufacture(A: Callable, B: Callable, x: Callable, dx: Callable) -> Callable:
    """由精确解构造右端 q(t) = A(t)(Dx*)'(t) + B(t)x*(t)"""

    def q(t):
        return np.asarray(A(t)) @ dx(t) + np.asarray(B(t)) @ x(t)

    return q


def example_index3(eta: float = -2.0) -> BenchmarkProblem:
    """
    无动态自由度的指标 3 问题，t ∈ [0,1]

        x_2' + x_1 = q_1
        tη x_2' + x_3' + (η+1) x_2 = q_2
        tη x_2 + x_3 = q_3

    微分分量为 x_2、x_3，内部顺序 y = (x_2, x_3, x_1)，使 D = [I_2 0]。
    默认 η = -2，条件数表按此参数给出。
    """
    eta = float(eta)

    def A(t):
        return np.array([[1.0, 0.0], [t * eta, 1.0], [0.0, 0.0]])

    def B(t):
        return np.array([[0.0, 0.0, 1.0], [eta + 1.0, 0.0, 0.0], [t * eta, 1.0, 0.0]])

    def x(t):
        e1, e2 = np.exp(-t), np.exp(-2.0 * t)
        return np.array([e2 * np.sin(t), e1 * np.cos(t), e1 * np.sin(t)])

    def dx(t):
        e1, e2 = np.exp(-t), np.exp(-2.0 * t)
        return np.array([e2 * (np.cos(t) - 2.0 * np.sin(t)), -e1 * (np.cos(t) + np.sin(t))])

    problem = DAEProblem(
        a=0.0, b=1.0, m=3, k=2, l_dyn=0, mu=3,
        A=A, B=B, q=_manufacture(A, B, x, dx),
        Ga=np.zeros((0, 3)), Gb=np.zeros((0, 3)), d=np.zeros(0),
        x_exact=x, dx_exact=dx, name="index3", params={"eta": eta},
    )
    return BenchmarkProblem(problem, ("x2", "x3", "x1"))


def example_hessenberg2(eta: float = -25.0, lam: float = -1.0) -> BenchmarkProblem:
    """
    Hessenberg 指标 2 问题，t ∈ [0,1]，一个动态自由度，条件 x_1(0) = 0

        x_1' + λx_1 - x_2 - x_3 = q_1
        x_2' + (ηt(1-ηt) - η)x_1 + λx_2 - ηt x_3 = q_2
        (1-ηt)x_1 + x_2 = q_3
    """
    eta, lam = float(eta), float(lam)

    def A(t):
        return np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])

    def B(t):
        return np.array(
            [
                [lam, -1.0, -1.0],
                [eta * t * (1.0 - eta * t) - eta, lam, -eta * t],
                [1.0 - eta * t, 1.0, 0.0],
            ]
        )

    def x(t):
        e1, e2 = np.exp(-t), np.exp(-2.0 * t)
        return np.array([e1 * np.sin(t), e2 * np.sin(t), e1 * np.cos(t)])

    def dx(t):
        e1, e2 = np.exp(-t), np.exp(-2.0 * t)
        return np.array([e1 * (np.cos(t) - np.sin(t)), e2 * (np.cos(t) - 2.0 * np.sin(t))])

    Ga = np.array([[1.0, 0.0, 0.0]])
    problem = DAEProblem(
        a=0.0, b=1.0, m=3, k=2, l_dyn=1, mu=2,
        A=A, B=B, q=_manufacture(A, B, x, dx),
        Ga=Ga, Gb=np.zeros((1, 3)), d=Ga @ x(0.0),
        x_exact=x, dx_exact=dx, name="hessenberg2", params={"eta": eta, "lambda": lam},
    )
    return BenchmarkProblem(problem, ("x1", "x2", "x3"))


def example_campbell_moore(rho: float = 5.0) -> BenchmarkProblem:
    """
    Campbell-Moore 线性化问题，t ∈ [0,5]，指标 3，l_dyn = 4

    初始条件 x_2(0)=1, x_3(0)=2, x_5(0)=0, x_6(0)=0 由精确解在 t=0 处的值给出。
    """
    rho = float(rho)
    if rho == 0.0:
        raise InputError("ρ 不能为 0")

    A_const = np.vstack([np.eye(6), np.zeros((1, 6))])

    def A(t):
        return A_const

    def B(t):
        s, c = np.sin(t), np.cos(t)
        r2 = 2.0 * rho
        return np.array(
            [
                [0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0],
                [0.0, 0.0, s, 0.0, 1.0, -c, -r2 * c * c],
                [0.0, 0.0, -c, -1.0, 0.0, -s, -r2 * s * c],
                [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, r2 * s],
                [r2 * c * c, r2 * s * c, -r2 * s, 0.0, 0.0, 0.0, 0.0],
            ]
        )

    def x(t):
        s, c = np.sin(t), np.cos(t)
        return np.array([s, c, 2.0 * c * c, c, -s, -2.0 * np.sin(2.0 * t), -s / rho])

    def dx(t):
        s, c = np.sin(t), np.cos(t)
        return np.array([c, -s, -2.0 * np.sin(2.0 * t), -s, -c, -4.0 * np.cos(2.0 * t)])

    Ga = np.zeros((4, 7))
    for row, col in enumerate((1, 2, 4, 5)):
        Ga[row, col] = 1.0
    problem = DAEProblem(
        a=0.0, b=5.0, m=7, k=6, l_dyn=4, mu=3,
        A=A, B=B, q=_manufacture(A, B, x, dx),
        Ga=Ga, Gb=np.zeros((4, 7)), d=Ga @ x(0.0),
        x_exact=x, dx_exact=dx, name="campbell_moore", params={"rho": rho},
    )
    return BenchmarkProblem(problem, tuple(f"x{i}" for i in range(1, 8)))


def manufactured_polynomial_problem(N: int, seed: int = 0) -> BenchmarkProblem:
    """
    精确解属于 X_π 的指标 1 问题（m=2, k=1），用于离散格式的精确性检验

        x_1' + t x_1 - x_2 = q_1
        -x_1 + (2+t) x_2 = q_2,   x_1(0) = x_1*(0)

    x_1* 为 N 次多项式，x_2* 为 N-1 次多项式，系数由 seed 决定。
    """
    if N < 1:
        raise InputError(f"N 必须为正，实际 {N}")
    rng = np.random.default_rng(seed)
    p1 = Polynomial(rng.standard_normal(N + 1))
    p2 = Polynomial(rng.standard_normal(N))
    dp1 = p1.deriv()

    def A(t):
        return np.array([[1.0], [0.0]])

    def B(t):
        return np.array([[t, -1.0], [-1.0, 2.0 + t]])

    def x(t):
        return np.array([p1(t), p2(t)])

    def dx(t):
        return np.array([dp1(t)])

    Ga = np.array([[1.0, 0.0]])
    problem = DAEProblem(
        a=0.0, b=1.0, m=2, k=1, l_dyn=1, mu=1,
        A=A, B=B, q=_manufacture(A, B, x, dx),
        Ga=Ga, Gb=np.zeros((1, 2)), d=Ga @ x(0.0),
        x_exact=x, dx_exact=dx, name="manufactured", params={"N": float(N), "seed": float(seed)},
    )
    return BenchmarkProblem(problem, ("x1", "x2"))


_REGISTRY: Dict[str, Callable[..., BenchmarkProblem]] = {
    "index3": example_index3,
    "hessenberg2": example_hessenberg2,
    "campbell_moore": example_campbell_moore,
}

_ALIASES = {
    "example1": "index3",
    "example2": "hessenberg2",
    "example3": "campbell_moore",
    "campbell-moore": "campbell_moore",
}


def problem_names():
    return sorted(_REGISTRY)


def get_problem(name: str, **params) -> BenchmarkProblem:
    """
    按名称构造基准问题

    Args:
        name: index3 / hessenberg2 / campbell_moore（或 example1..3）
        **params: eta、lam、rho 等问题参数

    Returns:
        BenchmarkProblem
    """
    key = _ALIASES.get(name.strip().lower(), name.strip().lower())
    if key not in _REGISTRY:
        raise InputError(f"未知问题: {name}，可选 {', '.join(problem_names())}")
    if key == "hessenberg2" and "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return _REGISTRY[key](**{k: float(v) for k, v in params.items()})
    except TypeError as e:
        raise InputError(f"问题 {key} 的参数无效: {e}")


def error_H1D(
    c: CoefficientVector,
    problem,
    partition: Partition,
    family: BasisFamily,
    points: Optional[int] = None,
) -> float:
    """
    ‖x_π - x*‖_{H¹_D}：逐区间 N+3 点 Gauss 求积
    |x_π - x*|² 对全部分量积分，|(Dx_π)' - (Dx*)'|² 对微分分量积分

    Args:
        c: 系数向量
        problem: DAEProblem 或 BenchmarkProblem，须带精确解
        partition: 剖分
        family: 基族
        points: 每个区间的求积点数，默认 N+3
    """
    dae = problem.problem if isinstance(problem, BenchmarkProblem) else problem
    if not dae.has_exact_solution:
        raise InputError(f"问题 {dae.name or 'DAE'} 没有精确解，无法计算误差")
    rule = gauss_legendre(points or family.N + 3)
    total = 0.0
    for j, h in enumerate(partition.steps):
        t = partition.breakpoints[j] + rule.nodes * h
        x_pi = evaluate_local(c, partition, family, j, rule.nodes)
        dx_pi = evaluate_local_derivative(c, partition, family, j, rule.nodes)
        x_star = np.array([dae.x_exact(ti) for ti in t])
        dx_star = np.array([dae.dx_exact(ti) for ti in t])
        integrand = np.sum((x_pi - x_star) ** 2, axis=1) + np.sum((dx_pi - dx_star) ** 2, axis=1)
        total += h * rule.integrate(integrand)
    return float(np.sqrt(total))
