#!/usr/bin/env python3
"""
日志管理模块
根日志器 lsq_collocation：控制台走 stderr（stdout 留给表格），
文件日志按大小轮转，写到配置目录下的 logs/
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

from src.config import config

LOGGER_NAME = "lsq_collocation"
LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s"


def level_from_flags(verbose: bool = False, debug: bool = False, default: Optional[str] = None) -> str:
    """命令行开关到日志级别：--debug > --verbose > 配置 log.level"""
    if debug:
        return "DEBUG"
    if verbose:
        return "INFO"
    return str(default or config.get("log.level", "WARNING")).upper()


class LoggerManager:
    """日志管理器，进程内只有一个实例"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.logger = logging.getLogger(LOGGER_NAME)
            cls._instance.logger.setLevel(logging.WARNING)
        return cls._instance

    @property
    def log_dir(self) -> Path:
        return config.config_dir / "logs"

    def _rotating(self, filename: str, level: int, formatter: logging.Formatter):
        handler = logging.handlers.RotatingFileHandler(
            self.log_dir / filename,
            maxBytes=int(config.get("log.max_bytes", 10 * 1024 * 1024)),
            backupCount=int(config.get("log.backups", 5)),
            encoding="utf-8",
        )
        handler.setLevel(level)
        handler.setFormatter(formatter)
        return handler

    def setup(self, level: str = "WARNING", log_file: bool = True, console: bool = True):
        """
        重新配置处理器

        Args:
            level: 控制台级别 (DEBUG/INFO/WARNING/ERROR)；app.log 总是记录 DEBUG
            log_file: 是否写 app.log 与 error.log
            console: 是否输出到 stderr
        """
        numeric = getattr(logging, str(level).upper(), None)
        if not isinstance(numeric, int):
            raise ValueError(f"未知日志级别: {level}")

        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

        formatter = logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
        # 文件要 DEBUG，根日志器不能比它高
        self.logger.setLevel(logging.DEBUG if log_file else numeric)

        if console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(numeric)
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        if log_file:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self.logger.addHandler(self._rotating("app.log", logging.DEBUG, formatter))
            self.logger.addHandler(self._rotating("error.log", logging.ERROR, formatter))

    def get_logger(self, name: Optional[str] = None) -> logging.Logger:
        return self.logger.getChild(name) if name else self.logger


logger_manager = LoggerManager()


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """模块日志器，如 get_logger("solver") -> lsq_collocation.solver"""
    return logger_manager.get_logger(name)


def init_logger(level: str = "WARNING", log_file: bool = True, console: bool = True):
    """初始化日志系统"""
    logger_manager.setup(level=level, log_file=log_file, console=console)
    logger = get_logger()
    logger.debug(f"日志系统初始化完成，级别: {level}")
    return logger
