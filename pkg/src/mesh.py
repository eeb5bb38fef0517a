#!/usr/bin/env python3
"""
网格模块
区间 [a, b] 的剖分 π 及其步长统计
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.errors import InputError


@dataclass(frozen=True)
class Partition:
    """剖分 a = t_0 < t_1 < ... < t_n = b"""

    breakpoints: np.ndarray
    steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.breakpoints, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InputError("剖分至少需要两个断点")
        if not np.all(np.isfinite(t)):
            raise InputError("断点必须是有限实数")
        h = np.diff(t)
        if np.any(h <= 0):
            raise InputError("断点必须严格递增")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "steps", h)

    @property
    def n(self) -> int:
        return self.steps.size

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def h(self) -> float:
        """最大步长"""
        return float(self.steps.max())

    @property
    def h_min(self) -> float:
        return float(self.steps.min())

    @property
    def mesh_ratio(self) -> float:
        """h / h_min，拟一致网格的度量"""
        return self.h / self.h_min

    @property
    def is_uniform(self) -> bool:
        # 断点算术的舍入误差不算非等距
        return bool(np.allclose(self.steps, self.steps[0], rtol=1e-12, atol=0.0))

    def locate(self, t: float) -> int:
        """
        返回 t 所在子区间的下标 j（从 0 开始）

        区间取左闭右开 [t_{j-1}, t_j)，t = b 归入最后一个子区间。
        """
        if t < self.a or t > self.b:
            raise InputError(f"t={t} 不在区间 [{self.a}, {self.b}] 内")
        j = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return min(j, self.n - 1)


def make_uniform_partition(a: float, b: float, n: int) -> Partition:
    """
    构造等距剖分

    Args:
        a: 左端点
        b: 右端点
        n: 子区间个数

    Returns:
        t_j = a + j (b - a) / n 的剖分，末端点强制等于 b
    """
    if not a < b:
        raise InputError(f"要求 a < b，实际 a={a}, b={b}")
    if int(n) != n or n < 1:
        raise InputError(f"子区间个数必须为正整数，实际 n={n}")
    n = int(n)
    t = a + np.arange(n + 1) * ((b - a) / n)
    t[-1] = b
    return Partition(t)


def make_partition(breakpoints: Sequence[float]) -> Partition:
    """由显式断点列表构造剖分，断点须严格递增"""
    return Partition(np.asarray(breakpoints, dtype=float))
