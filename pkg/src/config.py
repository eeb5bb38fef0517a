#!/usr/bin/env python3
"""
配置管理模块
处理配置文件读写、环境变量覆盖、实验配置文件加载
"""

import os
import copy
import json
import yaml
from pathlib import Path
from typing import Dict, Any, Optional

from src.errors import InputError


class Config:
    """配置管理器"""

    # 默认配置
    DEFAULT_CONFIG = {
        "version": "1.0.0",
        "numerics": {
            "rank_tol": 1e-12,
            "sv_zero_tol": 1e-13,
            "max_N": 30,
            "boundary_scaling": "sqrt_h",
        },
        "experiment": {
            "N": [3, 5, 10, 20],
            "n": [10, 20, 40, 80, 160, 320],
            "bases": ["legendre", "modified_legendre", "chebyshev", "runge_kutta"],
            "variants": ["R"],
            "m": 2,
            "k": 1,
        },
        "output": {
            "dir": "results",
            "format": "csv",
        },
        "log": {
            "level": "WARNING",
            "file": True,
            "max_bytes": 10 * 1024 * 1024,
            "backups": 5,
        },
    }

    ENV_PREFIX = "LSQDAE_"

    def __init__(self, config_dir: Optional[Path] = None):
        self.config_dir = config_dir or Path.home() / ".lsq-collocation"
        self.config_file = self.config_dir / "config.json"
        self._config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self):
        """加载配置文件"""
        self._config = copy.deepcopy(self.DEFAULT_CONFIG)
        if not self.config_file.exists():
            return
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                _deep_update(self._config, json.load(f))
        except (OSError, ValueError) as e:
            print(f"警告: 加载配置文件失败，使用默认配置: {e}")

    def save_config(self):
        """保存配置到文件"""
        self.config_dir.mkdir(parents=True, exist_ok=True)
        with open(self.config_file, "w", encoding="utf-8") as f:
            json.dump(self._config, f, indent=2, ensure_ascii=False)

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置项，优先级：环境变量 > 配置文件 > 默认值

        Args:
            key: 配置键，支持点号分隔，如 "numerics.rank_tol"
            default: 默认值

        Returns:
            配置值；环境变量的字符串经 YAML 解析转换类型
        """
        env_key = self.ENV_PREFIX + key.replace(".", "_").upper()
        env_value = os.getenv(env_key)
        if env_value:
            return parse_value(env_value)

        value = self._config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        """
        设置配置项并保存

        Args:
            key: 配置键，支持点号分隔
            value: 配置值
        """
        keys = key.split(".")
        node = self._config
        for k in keys[:-1]:
            if not isinstance(node.get(k), dict):
                node[k] = {}
            node = node[k]
        node[keys[-1]] = value
        self.save_config()

    def as_dict(self) -> Dict[str, Any]:
        """返回当前配置的副本"""
        return copy.deepcopy(self._config)

    def init_config(self) -> Path:
        """以默认值初始化配置文件"""
        self._config = copy.deepcopy(self.DEFAULT_CONFIG)
        self.save_config()
        (self.config_dir / "logs").mkdir(exist_ok=True)
        return self.config_file


def parse_value(text: str) -> Any:
    """按 YAML 解析字符串；YAML 1.1 不认 1e-8 这类无小数点的浮点数，单独处理"""
    value = yaml.safe_load(text)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    return value


def _deep_update(target: Dict[str, Any], source: Dict[str, Any]):
    for key, value in source.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _deep_update(target[key], value)
        else:
            target[key] = value


def load_experiment_file(path) -> Dict[str, Any]:
    """
    读取 YAML 实验配置文件

    Args:
        path: 文件路径

    Returns:
        键值字典（键与 CLI 选项同名）
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise InputError(f"无法读取实验配置文件 {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InputError(f"实验配置文件 {path} 必须是键值映射")
    return data


# 全局配置实例
config = Config()
