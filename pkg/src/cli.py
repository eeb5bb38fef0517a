#!/usr/bin/env python3
"""
CLI 入口模块
批量运行条件数、求解、收敛与投影实验，输出 CSV / Markdown 表格
"""

import sys
import json
import click
from pathlib import Path
from typing import Any, Dict, Iterable, List

from src.config import config, load_experiment_file, parse_value
from src.basis import normalize_kind
from src.errors import CollocationError, InputError, NumericError
from src.experiments import EXPERIMENTS, run_experiment, write_tables
from src.logger import get_logger, init_logger, level_from_flags
from src.quadrature import VARIANTS

logger = get_logger("cli")

EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


@click.group()
@click.version_option(version="1.0.0", prog_name="lsq-dae")
@click.option('--verbose', '-v', is_flag=True, help='显示详细日志')
@click.option('--debug', is_flag=True, help='启用调试模式')
@click.pass_context
def cli(ctx, verbose, debug):
    """最小二乘配置法 - DAE 边值问题的离散化与条件数实验"""
    init_logger(
        level=level_from_flags(verbose, debug), log_file=config.get("log.file", True), console=True
    )


def _split_values(values: Iterable) -> List[str]:
    """展开重复选项与逗号分隔值：('3,5', '10') -> ['3', '5', '10']"""
    if isinstance(values, (str, int, float)):
        values = [values]
    items = []
    for value in values:
        items.extend(part.strip() for part in str(value).split(",") if part.strip())
    return items


def _int_list(values, name: str, minimum: int = 1, maximum: int = None) -> List[int]:
    result = []
    for item in _split_values(values):
        try:
            number = int(item)
        except ValueError:
            raise InputError(f"{name} 必须是整数，实际 {item!r}")
        if number < minimum or (maximum is not None and number > maximum):
            raise InputError(f"{name}={number} 超出范围 [{minimum}, {maximum or '∞'}]")
        result.append(number)
    return result


def _parse_params(pairs: Iterable[str]) -> Dict[str, float]:
    """key=value 形式的问题参数"""
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise InputError(f"参数格式应为 key=value，实际 {pair!r}")
        key, value = pair.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise InputError(f"参数 {key} 的值必须是数值，实际 {value!r}")
    return params


def _resolve_settings(file_settings: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """合并优先级：命令行 > 实验配置文件 > 全局配置"""
    settings = {
        "experiment": None,
        "basis": config.get("experiment.bases"),
        "N": config.get("experiment.N"),
        "n": config.get("experiment.n"),
        "variant": config.get("experiment.variants"),
        "problem": None,
        "params": {},
        "m": config.get("experiment.m", 2),
        "k": config.get("experiment.k", 1),
        "out": config.get("output.dir", "results"),
        "format": config.get("output.format", "csv"),
    }
    unknown = set(file_settings) - set(settings)
    if unknown:
        raise InputError(f"实验配置文件含未知键: {', '.join(sorted(unknown))}")
    settings.update(file_settings)
    settings.update({key: value for key, value in overrides.items() if value not in (None, (), [])})

    if settings["experiment"] not in EXPERIMENTS:
        raise InputError(f"未知实验: {settings['experiment']}，可选 {', '.join(EXPERIMENTS)}")
    max_N = config.get("numerics.max_N", 30)
    settings["N"] = _int_list(settings["N"], "N", 1, max_N)
    settings["n"] = _int_list(settings["n"], "n", 1)
    settings["basis"] = [normalize_kind(kind) for kind in _split_values(settings["basis"])]
    settings["variant"] = [v.upper() for v in _split_values(settings["variant"])]
    bad = [v for v in settings["variant"] if v not in VARIANTS]
    if bad:
        raise InputError(f"未知泛函变体: {', '.join(bad)}，可选 {', '.join(VARIANTS)}")
    if not (settings["N"] and settings["n"] and settings["basis"] and settings["variant"]):
        raise InputError("参数组合为空")
    settings["m"], settings["k"] = int(settings["m"]), int(settings["k"])
    settings["params"] = {k: float(v) for k, v in (settings["params"] or {}).items()}
    return settings


@cli.command()
@click.option('--config', 'config_file', type=click.Path(exists=True), help='YAML 实验配置文件')
@click.option('-e', '--experiment', type=click.Choice(EXPERIMENTS), help='实验类型')
@click.option('-b', '--basis', multiple=True, help='基族（L/mL/Ch/RK/RKu，可重复或逗号分隔）')
@click.option('--N', 'N_values', multiple=True, help='多项式次数 N（可重复或逗号分隔）')
@click.option('--n', 'n_values', multiple=True, help='子区间个数 n（可重复或逗号分隔）')
@click.option('--variant', multiple=True, help='泛函变体 C/I/R')
@click.option('-p', '--problem', help='基准问题（index3/hessenberg2/campbell_moore）')
@click.option('--param', 'params', multiple=True, help='问题参数 key=value，如 eta=-25')
@click.option('--m', 'm', type=int, help='表示映射实验的分量个数')
@click.option('--k', 'k', type=int, help='表示映射实验的微分分量个数')
@click.option('-o', '--out', type=click.Path(), help='输出目录')
@click.option('-f', '--format', 'fmt', type=click.Choice(['csv', 'md']), help='输出格式')
def run(config_file, experiment, basis, N_values, n_values, variant, problem, params, m, k, out, fmt):
    """
    运行一次参数扫描实验并写出表格

    示例:
        # 表示映射奇异值（行为 n，列为基族）
        lsq-dae run -e repmap-conditioning --N 3,5 --n 10,20,40

        # 指标 3 问题的 κ_𝒞(𝒜)，两种泛函
        lsq-dae run -e system-conditioning -p index3 --variant R --variant C -f md
    """
    try:
        file_settings = load_experiment_file(config_file) if config_file else {}
        overrides = {
            "experiment": experiment,
            "basis": basis,
            "N": N_values,
            "n": n_values,
            "variant": variant,
            "problem": problem,
            "params": _parse_params(params) if params else None,
            "m": m,
            "k": k,
            "out": out,
            "format": fmt,
        }
        settings = _resolve_settings(file_settings, overrides)
    except InputError as e:
        click.echo(f"[ERROR] 配置错误: {e.errmsg}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    click.echo(f"[INFO] 实验 {settings['experiment']}: N={settings['N']}, n={settings['n']}")
    try:
        tables = run_experiment(
            settings["experiment"],
            settings["N"],
            settings["n"],
            settings["basis"],
            settings["variant"],
            settings["problem"],
            settings["params"],
            settings["m"],
            settings["k"],
        )
        paths = write_tables(tables, Path(settings["out"]), settings["format"])
    except InputError as e:
        click.echo(f"[ERROR] 配置错误: {e.errmsg}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    except NumericError as e:
        logger.exception("实验失败")
        click.echo(f"[ERROR] 数值计算失败: {e.errmsg}", err=True)
        sys.exit(EXIT_NUMERIC_ERROR)

    failed = sum(1 for t in tables for _, values in t.rows for v in values if v != v)
    if failed:
        click.echo(f"[WARN] {failed} 个单元格计算失败，已记为 nan（详见日志）")
    for path in paths:
        click.echo(f"[OK] 已写出: {path}")


@cli.command()
@click.option('-p', '--problem', default='index3', help='基准问题（index3/hessenberg2/campbell_moore）')
@click.option('-b', '--basis', default='legendre', help='基族')
@click.option('--N', 'N', default=3, type=int, help='多项式次数')
@click.option('--n', 'n', default=10, type=int, help='子区间个数')
@click.option('--variant', default='R', help='泛函变体 C/I/R')
@click.option('--param', 'params', multiple=True, help='问题参数 key=value')
def solve(problem, basis, N, n, variant, params):
    """求解单个基准问题，输出残差、κ_𝒞(𝒜) 与 H¹_D 误差"""
    from src.assembly import assemble
    from src.basis import make_basis
    from src.mesh import make_uniform_partition
    from src.problems import error_H1D, get_problem
    from src.solver import solve as solve_system

    try:
        bench = get_problem(problem, **_parse_params(params))
        dae = bench.problem
        partition = make_uniform_partition(dae.a, dae.b, n)
        family = make_basis(basis, N)
        system = assemble(dae, partition, family, variant=variant)
    except InputError as e:
        click.echo(f"[ERROR] 配置错误: {e.errmsg}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    try:
        result = solve_system(system)
        error = error_H1D(result.c, bench, partition, family)
    except CollocationError as e:
        click.echo(f"[ERROR] 数值计算失败: {e.errmsg}", err=True)
        sys.exit(EXIT_NUMERIC_ERROR)

    click.echo(f"[INFO] {bench.name} {bench.params}: {family.short_name} N={N} n={n} Φ^{system.variant}")
    click.echo(f"  |r|        = {result.residual_norm:.6e}")
    click.echo(f"  κ_C(A)     = {result.kappa:.6e}")
    click.echo(f"  H1_D error = {error:.6e}")


@cli.group('config')
def config_cmd():
    """配置管理命令"""
    pass


@config_cmd.command('init')
def init_config():
    """以默认值初始化配置文件"""
    if config.config_file.exists():
        if not click.confirm("配置文件已存在，是否覆盖？"):
            click.echo("已取消")
            return
    path = config.init_config()
    click.echo(f"[OK] 配置已保存到: {path}")
    click.echo(f"   也可以通过 {config.ENV_PREFIX}<KEY> 环境变量覆盖，如 LSQDAE_NUMERICS_RANK_TOL")


@config_cmd.command('set')
@click.argument('key')
@click.argument('value')
def set_config(key, value):
    """设置配置项（值按 YAML 解析，如 1e-10、[3, 5]）"""
    config.set(key, parse_value(value))
    click.echo(f"[OK] 已设置 {key} = {config.get(key)}")


@config_cmd.command('get')
@click.argument('key')
def get_config(key):
    """获取配置项"""
    value = config.get(key)
    if value is not None:
        click.echo(f"{key} = {value}")
    else:
        click.echo(f"配置项 {key} 不存在")


@config_cmd.command('list')
def list_config():
    """列出所有配置"""
    click.echo("\n当前配置:")
    click.echo(json.dumps(config.as_dict(), indent=2, ensure_ascii=False))


def main():
    """主入口"""
    cli(auto_envvar_prefix='LSQDAE')


if __name__ == '__main__':
    main()
