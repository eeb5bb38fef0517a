"""
最小二乘配置法
线性边值 DAE 的离散化、条件数分析与投影
"""

__version__ = "1.0.0"
__author__ = "lsq-collocation contributors"
