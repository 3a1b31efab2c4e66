#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
日志工具模块
为层析学习流水线提供统一的日志记录功能
每个核心模块通过 name 参数区分自己的日志通道，例如 'blockdiag_learner'
"""

import os
import sys
import logging
import datetime
from typing import Optional, Dict, Any
from logging.handlers import RotatingFileHandler

DEFAULT_NAME = 'lowdim_tomo'


class Logger:
    """
    日志单例
    控制台输出 + 按日期轮转的日志文件，级别由环境变量控制
    """

    LEVEL_MAP = {
        'DEBUG': logging.DEBUG,
        'INFO': logging.INFO,
        'WARNING': logging.WARNING,
        'WARN': logging.WARNING,
        'ERROR': logging.ERROR,
        'CRITICAL': logging.CRITICAL,
        'FATAL': logging.CRITICAL
    }

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Logger, cls).__new__(cls)
            cls._instance._init_logger()
        return cls._instance

    def _init_logger(self):
        """
        初始化日志记录器
        """
        self.config = {
            'level': os.environ.get('LOG_LEVEL', 'INFO').upper(),
            'console_level': os.environ.get('LOG_CONSOLE_LEVEL', 'WARNING').upper(),
            'file_level': os.environ.get('LOG_FILE_LEVEL', 'INFO').upper(),
            'log_dir': os.environ.get(
                'LOG_DIR',
                os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), 'logs')
            ),
            'max_bytes': int(os.environ.get('LOG_MAX_BYTES', 10 * 1024 * 1024)),
            'backup_count': int(os.environ.get('LOG_BACKUP_COUNT', 5)),
            'to_file': os.environ.get('LOG_TO_FILE', 'True').lower() == 'true',
            'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            'datefmt': '%Y-%m-%d %H:%M:%S'
        }

        self.root_logger = logging.getLogger(DEFAULT_NAME)
        self.root_logger.setLevel(logging.DEBUG)
        self.root_logger.propagate = False
        self.root_logger.handlers.clear()

        self.console_handler: Optional[logging.Handler] = None
        self.file_handler: Optional[logging.Handler] = None
        self.loggers: Dict[str, logging.Logger] = {}

        self._setup_console_handler()
        if self.config['to_file']:
            self._setup_file_handler()

    def _formatter(self) -> logging.Formatter:
        return logging.Formatter(self.config['format'], self.config['datefmt'])

    def _setup_console_handler(self):
        """
        设置控制台日志处理器
        """
        try:
            console_handler = logging.StreamHandler(sys.stdout)
            console_handler.setLevel(self.LEVEL_MAP.get(self.config['console_level'], logging.WARNING))
            console_handler.setFormatter(self._formatter())
            self.root_logger.addHandler(console_handler)
            self.console_handler = console_handler
        except Exception as e:
            print(f"警告: 设置控制台日志处理器失败: {str(e)}")

    def _setup_file_handler(self):
        """
        设置文件日志处理器（按日期命名，按大小轮转）
        """
        try:
            os.makedirs(self.config['log_dir'], exist_ok=True)
            today = datetime.datetime.now().strftime('%Y-%m-%d')
            log_file = os.path.join(self.config['log_dir'], f'lowdim_tomo_{today}.log')

            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=self.config['max_bytes'],
                backupCount=self.config['backup_count'],
                encoding='utf-8'
            )
            file_handler.setLevel(self.LEVEL_MAP.get(self.config['file_level'], logging.INFO))
            file_handler.setFormatter(self._formatter())
            self.root_logger.addHandler(file_handler)
            self.file_handler = file_handler
        except OSError as e:
            # 只读文件系统等情况下退化为仅控制台输出
            print(f"警告: 创建日志文件失败: {e}")

    def configure(self, config: Optional[Dict[str, Any]] = None) -> None:
        """
        重新配置日志系统

        :param config: 日志配置字典，键同 self.config
        """
        if not config:
            return
        self.config.update(config)
        for handler in self.root_logger.handlers[:]:
            self.root_logger.removeHandler(handler)
            handler.close()
        self.loggers.clear()
        self.console_handler = None
        self.file_handler = None
        self._setup_console_handler()
        if self.config['to_file']:
            self._setup_file_handler()
        self.info(f"日志系统已重新配置: 级别={self.config['level']}, 控制台级别={self.config['console_level']}", 'logger')

    def get_logger(self, name: str = DEFAULT_NAME) -> logging.Logger:
        """
        获取子日志记录器，统一挂在 lowdim_tomo 之下

        :param name: 模块名
        :return: logging.Logger实例
        """
        if name not in self.loggers:
            full_name = name if name == DEFAULT_NAME else f"{DEFAULT_NAME}.{name}"
            logger = logging.getLogger(full_name)
            logger.setLevel(self.LEVEL_MAP.get(self.config['level'], logging.INFO))
            self.loggers[name] = logger
        return self.loggers[name]

    def log(self, message: str, level: str = 'INFO', name: str = DEFAULT_NAME, exc_info: bool = False):
        """
        记录日志

        :param message: 日志消息
        :param level: 日志级别
        :param name: 模块名
        :param exc_info: 是否附带异常栈
        """
        log_level = self.LEVEL_MAP.get(level.upper(), logging.INFO)
        self.get_logger(name).log(log_level, message, exc_info=exc_info)

    def debug(self, message: str, name: str = DEFAULT_NAME):
        self.log(message, 'DEBUG', name)

    def info(self, message: str, name: str = DEFAULT_NAME):
        self.log(message, 'INFO', name)

    def warning(self, message: str, name: str = DEFAULT_NAME):
        self.log(message, 'WARNING', name)

    def error(self, message: str, name: str = DEFAULT_NAME, exc_info: bool = True):
        self.log(message, 'ERROR', name, exc_info)

    def exception(self, message: str, name: str = DEFAULT_NAME):
        self.log(message, 'ERROR', name, exc_info=True)

    def set_level(self, level: str):
        """
        设置日志级别（同时作用于控制台）

        :param level: 日志级别字符串
        """
        level = level.upper()
        if level not in self.LEVEL_MAP:
            self.warning(f"未知日志级别: {level}", 'logger')
            return
        self.config['level'] = level
        for logger in self.loggers.values():
            logger.setLevel(self.LEVEL_MAP[level])
        if self.console_handler is not None:
            self.console_handler.setLevel(self.LEVEL_MAP[level])
        self.debug(f"日志级别已设置为: {level}", 'logger')


logger_instance: Optional[Logger] = None


def get_logger() -> Logger:
    """
    获取全局日志实例

    :return: Logger实例
    """
    global logger_instance
    if logger_instance is None:
        logger_instance = Logger()
    return logger_instance


def log_message(message: str, level: str = 'INFO', name: str = DEFAULT_NAME) -> None:
    """
    记录日志的便捷函数

    :param message: 日志消息
    :param level: 日志级别
    :param name: 模块名
    """
    get_logger().log(message, level, name)


def debug(message: str, name: str = DEFAULT_NAME) -> None:
    log_message(message, 'DEBUG', name)


def info(message: str, name: str = DEFAULT_NAME) -> None:
    log_message(message, 'INFO', name)


def warning(message: str, name: str = DEFAULT_NAME) -> None:
    log_message(message, 'WARNING', name)


def error(message: str, name: str = DEFAULT_NAME, exc_info: bool = True) -> None:
    get_logger().error(message, name, exc_info)


def exception(message: str, name: str = DEFAULT_NAME) -> None:
    get_logger().exception(message, name)


def set_log_level(level: str) -> None:
    """
    设置日志级别

    :param level: 日志级别
    """
    get_logger().set_level(level)


def configure_logger(config: Optional[Dict[str, Any]] = None) -> None:
    """
    配置日志系统

    :param config: 日志配置字典
    """
    get_logger().configure(config)
