#!/usr/bin/env python3
"""
多项式基模块
[0,1] 上的基 {p_0, ..., p_{N-1}}、原函数基 {p̄_0, ..., p̄_N} 以及积分向量 f

p̄_0 ≡ 1，p̄_i(τ) = ∫_0^τ p_{i-1}，于是 p_i = p̄'_{i+1}。
Legendre 与 Chebyshev 族用移位自变量 2τ-1 上的级数表示，
Runge-Kutta 族（Lagrange 基）用 Chebyshev 系数表示。
"""

from functools import lru_cache
from typing import List, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Chebyshev, Legendre, chebyshev
from scipy.linalg import solve

from src.config import config
from src.errors import InputError
from src.logger import get_logger
from src.quadrature import gauss_legendre

logger = get_logger("basis")

KINDS = (
    "legendre",
    "modified_legendre",
    "chebyshev",
    "runge_kutta",
    "runge_kutta_uniform",
)

# 表格列名
SHORT_NAMES = {
    "legendre": "L",
    "modified_legendre": "mL",
    "chebyshev": "Ch",
    "runge_kutta": "RK",
    "runge_kutta_uniform": "RKu",
}

_ALIASES = {name.lower(): kind for kind, name in SHORT_NAMES.items()}
_ALIASES.update({"mlegendre": "modified_legendre", "rk_uniform": "runge_kutta_uniform"})

DOMAIN = [0.0, 1.0]

Polynomial = Union[Legendre, Chebyshev]


def normalize_kind(kind: str) -> str:
    """将别名（L/mL/Ch/RK/RKu 等）规范化为基族全名"""
    key = kind.strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in KINDS:
        raise InputError(f"未知基族: {kind}，可选 {', '.join(KINDS)}")
    return key


def chebyshev_interp_nodes(N: int) -> np.ndarray:
    """
    移位 Chebyshev 节点 τ_κ = (1 + cos((2κ-1)π/(2N))) / 2，升序

    Args:
        N: 节点个数
    """
    if N < 1:
        raise InputError(f"N 必须为正，实际 {N}")
    kappa = np.arange(1, N + 1)
    x = np.sort(np.cos((2 * kappa - 1) * np.pi / (2 * N)))
    x = 0.5 * (x - x[::-1])
    return 0.5 * (1.0 + x)


def uniform_interp_nodes(N: int) -> np.ndarray:
    """等距内点 τ_κ = (2κ-1)/(2N)"""
    if N < 1:
        raise InputError(f"N 必须为正，实际 {N}")
    return (2.0 * np.arange(1, N + 1) - 1.0) / (2.0 * N)


class BasisFamily:
    """一个基族在给定次数 N 下的全部多项式"""

    def __init__(self, kind: str, N: int, nodes: Optional[Sequence[float]] = None):
        self.kind = normalize_kind(kind)
        if int(N) != N or N < 1:
            raise InputError(f"N 必须为正整数，实际 {N}")
        self.N = int(N)
        if self.N > config.get("numerics.max_N", 30):
            # 允许但未经验证
            logger.warning(f"N={self.N} 超出已验证范围")

        self.nodes = None
        if self.kind in ("runge_kutta", "runge_kutta_uniform"):
            if nodes is None:
                nodes = (
                    chebyshev_interp_nodes(self.N)
                    if self.kind == "runge_kutta"
                    else uniform_interp_nodes(self.N)
                )
            nodes = np.asarray(nodes, dtype=float)
            if nodes.shape != (self.N,):
                raise InputError(f"插值节点个数必须为 N={self.N}")
            if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0 or nodes[-1] >= 1:
                raise InputError("插值节点必须严格递增且位于 (0,1) 内")
            self.nodes = nodes
        elif nodes is not None:
            raise InputError(f"{self.kind} 基不接受插值节点")

        self._p, self._pbar = self._build()

    def __repr__(self):
        return f"BasisFamily({self.kind!r}, N={self.N})"

    @property
    def short_name(self) -> str:
        return SHORT_NAMES[self.kind]

    def _build(self):
        N = self.N
        one = Legendre([1.0], domain=DOMAIN)
        if self.kind == "modified_legendre":
            # 闭式 p̄_i = P_i(2τ-1) - (-1)^i
            pbar = [one] + [Legendre.basis(i, domain=DOMAIN) - (-1.0) ** i for i in range(1, N + 1)]
            p = [pbar[i + 1].deriv() for i in range(N)]
            return p, pbar

        if self.kind == "legendre":
            p = [Legendre.basis(i, domain=DOMAIN) for i in range(N)]
        elif self.kind == "chebyshev":
            p = [Chebyshev.basis(i, domain=DOMAIN) for i in range(N)]
            one = Chebyshev([1.0], domain=DOMAIN)
        else:
            # Lagrange 多项式的 Chebyshev 系数：在节点处配置后求解
            X = chebyshev.chebvander(2.0 * self.nodes - 1.0, N - 1)
            coef = solve(X, np.eye(N))
            p = [Chebyshev(coef[:, i], domain=DOMAIN) for i in range(N)]
            one = Chebyshev([1.0], domain=DOMAIN)
        pbar = [one] + [pi.integ(lbnd=0.0) for pi in p]
        return p, pbar

    def _check_tau(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0.0) or np.any(tau > 1.0):
            raise InputError("τ 必须位于 [0,1] 内")
        return tau

    def p(self, i: int) -> Polynomial:
        if not 0 <= i < self.N:
            raise InputError(f"p_i 的下标越界: i={i}, N={self.N}")
        return self._p[i]

    def pbar(self, i: int) -> Polynomial:
        if not 0 <= i <= self.N:
            raise InputError(f"p̄_i 的下标越界: i={i}, N={self.N}")
        return self._pbar[i]

    def eval_p(self, i: int, tau):
        """p_i(τ)"""
        return self.p(i)(self._check_tau(tau))

    def eval_pbar(self, i: int, tau):
        """p̄_i(τ)"""
        return self.pbar(i)(self._check_tau(tau))

    def eval_pbar_derivative(self, i: int, tau):
        """p̄'_i(τ)：i = 0 时为 0，否则为 p_{i-1}(τ)"""
        self.pbar(i)
        tau = self._check_tau(tau)
        if i == 0:
            return np.zeros_like(tau)
        return self._p[i - 1](tau)

    def p_table(self, tau) -> np.ndarray:
        """形状 (len(τ), N) 的值表，第 α 列为 p_α"""
        tau = np.atleast_1d(self._check_tau(tau))
        return np.column_stack([pi(tau) for pi in self._p])

    def pbar_table(self, tau) -> np.ndarray:
        """形状 (len(τ), N+1) 的值表，第 α 列为 p̄_α"""
        tau = np.atleast_1d(self._check_tau(tau))
        return np.column_stack([np.broadcast_to(pb(tau), tau.shape) for pb in self._pbar])

    def pbar_derivative_table(self, tau) -> np.ndarray:
        """形状 (len(τ), N+1) 的值表 [0 | p_0 ... p_{N-1}]"""
        tau = np.atleast_1d(self._check_tau(tau))
        return np.column_stack([np.zeros_like(tau), self.p_table(tau)])


def integral_weights_f(family: BasisFamily) -> np.ndarray:
    """
    积分向量 f = [1, ∫_0^1 p_0, ..., ∫_0^1 p_{N-1}]，即 p̄_i(1)

    Args:
        family: 基族

    Returns:
        长度 N+1 的向量；Legendre、修正 Legendre、Chebyshev 用闭式，
        Runge-Kutta 族用 Gauss 求积得到插值求积权重
    """
    N = family.N
    f = np.zeros(N + 1)
    f[0] = 1.0
    if family.kind == "legendre":
        f[1] = 1.0
    elif family.kind == "modified_legendre":
        i = np.arange(1, N + 1)
        f[1:] = 1.0 - (-1.0) ** i
    elif family.kind == "chebyshev":
        for i in range(N):
            if i != 1:
                f[i + 1] = 0.5 * (1.0 + (-1.0) ** i) / (1.0 - i * i)
    else:
        rule = gauss_legendre(N)
        f[1:] = rule.weights @ family.p_table(rule.nodes)
    return f


@lru_cache(maxsize=128)
def _cached_basis(kind: str, N: int) -> BasisFamily:
    return BasisFamily(kind, N)


def make_basis(kind: str, N: int, nodes: Optional[Sequence[float]] = None) -> BasisFamily:
    """基族工厂；默认节点的基族会被缓存复用"""
    if nodes is not None:
        return BasisFamily(kind, N, nodes)
    return _cached_basis(normalize_kind(kind), int(N))


def all_kinds(include_uniform: bool = True) -> List[str]:
    if include_uniform:
        return list(KINDS)
    return [k for k in KINDS if k != "runge_kutta_uniform"]
