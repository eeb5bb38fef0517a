#!/usr/bin/env python3
"""
异常定义模块
所有数值模块抛出的错误都带错误码，CLI 据此决定退出码
"""


class CollocationError(Exception):
    """最小二乘配置法错误基类"""

    errcode = 1

    def __init__(self, errmsg: str, errcode: int = None):
        if errcode is not None:
            self.errcode = errcode
        self.errmsg = errmsg
        super().__init__(f"[{self.errcode}] {errmsg}")


class InputError(CollocationError, ValueError):
    """参数、形状或配置非法（退出码 2）"""

    errcode = 2


class NumericError(CollocationError):
    """数值计算失败（退出码 3）"""

    errcode = 3


class RankDeficiencyError(NumericError):
    """矩阵数值秩亏"""

    def __init__(self, errmsg: str, sigma_min: float = 0.0, sigma_max: float = 0.0):
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        super().__init__(errmsg)


class BoundPreconditionError(InputError):
    """扰动界的前提条件不成立"""

    def __init__(self, inequality: str, value: float):
        self.inequality = inequality
        self.value = value
        super().__init__(f"前提条件 {inequality} 不成立 (当前值 {value:.6g})")
