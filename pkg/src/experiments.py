#!/usr/bin/env python3
"""
实验模块
按 (基族, N, n) 扫描计算条件数、残差、误差与投影跳跃，结果整理为表格：
行为 n，列为基族，每个 (实验, 量, N, 变体) 一张表
"""

import csv
import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.assembly import assemble
from src.basis import make_basis
from src.constraint import build_C, constraint_conditioning
from src.errors import CollocationError, InputError
from src.logger import get_logger
from src.mesh import make_uniform_partition
from src.problems import BenchmarkProblem, error_H1D, get_problem
from src.projection import (
    build_projection_context,
    max_jump,
    project_coefficients,
    step_function_coefficients,
)
from src.repmap import rep_map_conditioning
from src.solver import fit_order, kappa_C_of_A, perturb_and_resolve, solve

logger = get_logger("experiments")

EXPERIMENTS = (
    "repmap-conditioning",
    "constraint-conditioning",
    "system-conditioning",
    "solve",
    "convergence",
    "projection-test",
    "perturbation",
)

# 表示映射表格可选的量
REPMAP_QUANTITIES = (
    "sigma_min_Uhat",
    "sigma_min_U",
    "sigma_max_U",
    "sigma_max_Uhat",
    "kappa_U",
    "kappa_Uhat",
)


def format_sci(value: float) -> str:
    """三位有效数字的科学计数法，指数不补零：5.77e+4"""
    if value is None or not np.isfinite(value):
        return "nan"
    mantissa, exponent = f"{value:.2e}".split("e")
    return f"{mantissa}e{int(exponent):+d}"


@dataclass
class ResultTable:
    """一张结果表：行标签为 n（或试验序号），列为基族简称"""

    experiment: str
    quantity: str
    columns: List[str]
    N: Optional[int] = None
    variant: Optional[str] = None
    row_label: str = "n"
    rows: List[tuple] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    def add_row(self, key, values: Sequence[float]):
        if len(values) != len(self.columns):
            raise InputError(f"行长度 {len(values)} 与列数 {len(self.columns)} 不符")
        self.rows.append((key, [float(v) for v in values]))

    def column(self, name: str) -> List[float]:
        idx = self.columns.index(name)
        return [values[idx] for _, values in self.rows]

    def cell(self, key, name: str) -> float:
        idx = self.columns.index(name)
        for row_key, values in self.rows:
            if row_key == key:
                return values[idx]
        raise KeyError(key)

    @property
    def stem(self) -> str:
        parts = [self.experiment, self.quantity]
        if self.N is not None:
            parts.append(f"N{self.N}")
        if self.variant:
            parts.append(self.variant)
        return "_".join(parts)

    def _header_lines(self) -> List[str]:
        meta = dict(self.metadata)
        meta.update(experiment=self.experiment, quantity=self.quantity)
        if self.N is not None:
            meta["N"] = self.N
        if self.variant:
            meta["variant"] = self.variant
        return [f"{key}={meta[key]}" for key in sorted(meta)]

    def write_csv(self, path: Path):
        """元数据写成 # 注释行，数值保留全部精度"""
        with open(path, "w", newline="", encoding="utf-8") as f:
            for line in self._header_lines():
                f.write(f"# {line}\n")
            writer = csv.writer(f)
            writer.writerow([self.row_label] + self.columns)
            for key, values in self.rows:
                writer.writerow([key] + [repr(v) for v in values])

    def to_markdown(self) -> str:
        title = f"### {self.quantity}"
        if self.N is not None:
            title += f", N={self.N}"
        if self.variant:
            title += f", Φ^{self.variant}"
        lines = [title, ""]
        lines.append("| " + " | ".join([self.row_label] + self.columns) + " |")
        lines.append("|" + "---|" * (len(self.columns) + 1))
        for key, values in self.rows:
            lines.append("| " + " | ".join([str(key)] + [format_sci(v) for v in values]) + " |")
        return "\n".join(lines)


def guard_cell(func: Optional[Callable] = None, *, fallback=float("nan")) -> Callable:
    """单元格计算失败时记录日志并返回 fallback（默认 nan），扫描继续"""
    if func is None:
        return functools.partial(guard_cell, fallback=fallback)

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CollocationError, np.linalg.LinAlgError) as e:
            logger.warning(f"{func.__name__} 失败 (args={args[1:]}): {e}")
            return fallback

    return wrapper


def _short_names(kinds: Sequence[str]) -> List[str]:
    return [make_basis(kind, 1).short_name for kind in kinds]


# ---------------------------------------------------------------------------
# 表示映射与约束矩阵
# ---------------------------------------------------------------------------


@guard_cell
def _repmap_cell(kind, N, n, m, k, quantity):
    report = rep_map_conditioning(make_uniform_partition(0.0, 1.0, n), make_basis(kind, N), m, k)
    return getattr(report, quantity)


def repmap_tables(
    Ns: Sequence[int],
    ns: Sequence[int],
    kinds: Sequence[str],
    m: int = 2,
    k: int = 1,
    quantities: Sequence[str] = REPMAP_QUANTITIES,
) -> List[ResultTable]:
    """[0,1] 等距网格上 𝒰、𝒰̂ 的奇异值与条件数"""
    unknown = set(quantities) - set(REPMAP_QUANTITIES)
    if unknown:
        raise InputError(f"未知的量: {', '.join(sorted(unknown))}")
    tables = []
    for quantity in quantities:
        for N in Ns:
            table = ResultTable(
                "repmap-conditioning", quantity, _short_names(kinds), N=N,
                metadata={"m": m, "k": k, "interval": "[0, 1]"},
            )
            for n in ns:
                table.add_row(n, [_repmap_cell(kind, N, n, m, k, quantity) for kind in kinds])
            tables.append(table)
    return tables


@guard_cell
def _constraint_cell(kind, N, n, quantity):
    partition = make_uniform_partition(0.0, 1.0, n)
    cond = constraint_conditioning(build_C(partition, make_basis(kind, N), 1, 1))
    if quantity == "kappa_C":
        return cond.kappa
    return cond.norm_Cplus * partition.h


def constraint_tables(
    Ns: Sequence[int], ns: Sequence[int], kinds: Sequence[str]
) -> List[ResultTable]:
    """κ(𝒞) 与 ‖𝒞^+‖·h；与 m、k 无关"""
    tables = []
    for quantity in ("kappa_C", "norm_Cplus_h"):
        for N in Ns:
            table = ResultTable("constraint-conditioning", quantity, _short_names(kinds), N=N)
            for n in ns:
                table.add_row(n, [_constraint_cell(kind, N, n, quantity) for kind in kinds])
            tables.append(table)
    return tables


# ---------------------------------------------------------------------------
# 离散系统
# ---------------------------------------------------------------------------


def _system(bench: BenchmarkProblem, kind, N, n, variant):
    dae = bench.problem
    partition = make_uniform_partition(dae.a, dae.b, n)
    family = make_basis(kind, N)
    return assemble(dae, partition, family, variant=variant), partition, family


@guard_cell
def _kappa_cell(bench, kind, N, n, variant):
    system, _, _ = _system(bench, kind, N, n, variant)
    return kappa_C_of_A(system)


@guard_cell(fallback=(float("nan"), float("nan")))
def _solve_cell(bench, kind, N, n, variant) -> Tuple[float, float]:
    """一次求解同时给出残差与误差"""
    system, partition, family = _system(bench, kind, N, n, variant)
    result = solve(system)
    return result.residual_norm, error_H1D(result.c, bench, partition, family)


def _problem_metadata(bench: BenchmarkProblem) -> Dict[str, object]:
    meta = {"problem": bench.name}
    meta.update({f"param.{key}": value for key, value in bench.params.items()})
    return meta


def system_tables(
    bench: BenchmarkProblem,
    Ns: Sequence[int],
    ns: Sequence[int],
    kinds: Sequence[str],
    variants: Sequence[str] = ("R",),
) -> List[ResultTable]:
    """受限条件数 κ_𝒞(𝒜)"""
    tables = []
    for variant in variants:
        for N in Ns:
            table = ResultTable(
                "system-conditioning", "kappa_CA", _short_names(kinds), N=N, variant=variant,
                metadata=_problem_metadata(bench),
            )
            for n in ns:
                table.add_row(n, [_kappa_cell(bench, kind, N, n, variant) for kind in kinds])
            tables.append(table)
    return tables


def solve_tables(
    bench: BenchmarkProblem,
    Ns: Sequence[int],
    ns: Sequence[int],
    kinds: Sequence[str],
    variants: Sequence[str] = ("R",),
) -> List[ResultTable]:
    """残差 |𝔯| 与 H¹_D 误差，先列出全部残差表"""
    residual_tables, error_tables = [], []
    for variant in variants:
        for N in Ns:
            residual, error = (
                ResultTable(
                    "solve", quantity, _short_names(kinds), N=N, variant=variant,
                    metadata=_problem_metadata(bench),
                )
                for quantity in ("residual", "error_H1D")
            )
            for n in ns:
                cells = [_solve_cell(bench, kind, N, n, variant) for kind in kinds]
                residual.add_row(n, [cell[0] for cell in cells])
                error.add_row(n, [cell[1] for cell in cells])
            residual_tables.append(residual)
            error_tables.append(error)
    return residual_tables + error_tables


def convergence_tables(
    bench: BenchmarkProblem,
    Ns: Sequence[int],
    ns: Sequence[int],
    kinds: Sequence[str],
    variants: Sequence[str] = ("R",),
) -> List[ResultTable]:
    """H¹_D 误差随 n 的变化，拟合阶数写入元数据"""
    tables = solve_tables(bench, Ns, ns, kinds, variants)
    tables = [t for t in tables if t.quantity == "error_H1D"]
    dae = bench.problem
    for table in tables:
        table.experiment = "convergence"
        table.metadata["mu"] = dae.mu
        table.metadata["predicted_order"] = table.N - dae.mu + 1
        steps = [(dae.b - dae.a) / n for n, _ in table.rows]
        for name in table.columns:
            errors = table.column(name)
            try:
                order = fit_order(steps, errors)
            except InputError:
                order = float("nan")
            table.metadata[f"order.{name}"] = f"{order:.3f}"
    return tables


# ---------------------------------------------------------------------------
# 投影与扰动
# ---------------------------------------------------------------------------


@guard_cell
def _jump_cell(kind, N, n, stage):
    partition = make_uniform_partition(0.0, 1.0, n)
    family = make_basis(kind, N)
    c = step_function_coefficients(partition, family)
    if stage == "after":
        c = project_coefficients(c, build_projection_context(partition, family, 1, 1))
    return max_jump(c, partition, family)


def projection_tables(
    Ns: Sequence[int], ns: Sequence[int], kinds: Sequence[str]
) -> List[ResultTable]:
    """交替阶跃函数在 Q_π 投影前后的最大跳跃"""
    tables = []
    for stage in ("before", "after"):
        for N in Ns:
            table = ResultTable("projection-test", f"max_jump_{stage}", _short_names(kinds), N=N)
            for n in ns:
                table.add_row(n, [_jump_cell(kind, N, n, stage) for kind in kinds])
            tables.append(table)
    return tables


def perturbation_table(
    bench: BenchmarkProblem,
    kind: str,
    N: int,
    n: int,
    variant: str = "R",
    trials: int = 20,
    eps: float = 1e-9,
    seed: int = 0,
) -> ResultTable:
    """
    随机小扰动下测得的 |Δc| 与两种扰动界

    偶数次试验只扰动 𝒜、r（核不变），奇数次同时扰动 𝒞。
    """
    system, _, _ = _system(bench, kind, N, n, variant)
    A = system.dense_A()
    C = system.constraint.dense()
    rng = np.random.default_rng(seed)
    table = ResultTable(
        "perturbation",
        f"delta_c_{system.family.short_name}_n{n}",
        ["measured", "fixed_kernel", "perturbed_kernel"],
        N=N, variant=variant, row_label="trial",
        metadata=dict(_problem_metadata(bench), basis=kind, n=n, eps=eps, seed=seed),
    )
    for trial in range(trials):
        dA = eps * rng.standard_normal(A.shape)
        dr = eps * rng.standard_normal(A.shape[0])
        dC = eps * rng.standard_normal(C.shape) if trial % 2 else None
        meas = perturb_and_resolve(system, dA, dr, dC)
        fixed = float("nan")
        if dC is None:
            fixed = _bound_or_nan(meas.fixed_kernel_bound)
        perturbed = _bound_or_nan(meas.perturbed_kernel_bound)
        table.add_row(trial, [meas.delta_c, fixed, perturbed])
    return table


def _bound_or_nan(evaluate: Callable) -> float:
    try:
        return evaluate().absolute
    except CollocationError as e:
        logger.info(f"扰动界不适用: {e}")
        return float("nan")


# ---------------------------------------------------------------------------
# 输出
# ---------------------------------------------------------------------------


def write_tables(tables: Sequence[ResultTable], out_dir: Path, fmt: str = "csv") -> List[Path]:
    """
    写出结果

    csv：每张表一个文件；md：同一 (实验, 量, 变体) 的各 N 表格写入同一个文件
    """
    fmt = fmt.lower()
    if fmt not in ("csv", "md"):
        raise InputError(f"未知输出格式: {fmt}，可选 csv / md")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        for table in tables:
            path = out_dir / f"{table.stem}.csv"
            table.write_csv(path)
            paths.append(path)
        return paths

    groups: Dict[str, List[ResultTable]] = {}
    for table in tables:
        key = "_".join(filter(None, [table.experiment, table.quantity, table.variant]))
        groups.setdefault(key, []).append(table)
    for key, group in groups.items():
        path = out_dir / f"{key}.md"
        meta = [line for line in group[0]._header_lines() if not line.startswith("N=")]
        header = "\n".join(f"<!-- {line} -->" for line in meta)
        body = "\n\n".join(t.to_markdown() for t in group)
        path.write_text(f"{header}\n\n{body}\n", encoding="utf-8")
        paths.append(path)
    return paths


def run_experiment(
    experiment: str,
    Ns: Sequence[int],
    ns: Sequence[int],
    kinds: Sequence[str],
    variants: Sequence[str] = ("R",),
    problem: Optional[str] = None,
    params: Optional[Dict[str, float]] = None,
    m: int = 2,
    k: int = 1,
) -> List[ResultTable]:
    """
    按实验名分派到对应的表格函数

    Raises:
        InputError: 实验名未知、参数组合为空或需要问题而未给出
    """
    if experiment not in EXPERIMENTS:
        raise InputError(f"未知实验: {experiment}，可选 {', '.join(EXPERIMENTS)}")
    if not Ns or not ns or not kinds:
        raise InputError("N、n 与基族列表都不能为空")
    logger.info(f"实验 {experiment}: N={list(Ns)}, n={list(ns)}, 基族={list(kinds)}")

    if experiment == "repmap-conditioning":
        return repmap_tables(Ns, ns, kinds, m, k)
    if experiment == "constraint-conditioning":
        return constraint_tables(Ns, ns, kinds)
    if experiment == "projection-test":
        return projection_tables(Ns, ns, kinds)

    bench = get_problem(problem or "index3", **(params or {}))
    if experiment == "system-conditioning":
        return system_tables(bench, Ns, ns, kinds, variants)
    if experiment == "solve":
        return solve_tables(bench, Ns, ns, kinds, variants)
    if experiment == "convergence":
        return convergence_tables(bench, Ns, ns, kinds, variants)
    return [
        perturbation_table(bench, kind, N, n, variant)
        for variant in variants
        for N in Ns
        for n in ns
        for kind in kinds
    ]
