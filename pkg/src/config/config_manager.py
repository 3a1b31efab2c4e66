#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
配置管理模块
负责读取、解析和验证配置文件
支持配置优先级：命令行参数 > 环境变量 > 配置文件 > 默认值
配置文件可以是 JSON、YAML，或每行 "section.key = value" 的文本文件
"""

import json
import os
from typing import Dict, Any, Optional

import yaml
from dotenv import load_dotenv

from src.utils.logger import get_logger
from src.utils.exceptions import ConfigError

load_dotenv()

logger = get_logger()
LOG_NAME = 'config'

SECTIONS = ('dense', 'pauli', 'learner', 'run')


def parse_key_value_file(path: str) -> Dict[str, Dict[str, Any]]:
    """
    解析 key=value 配置文件
    每行形如 "learner.c_tomo = 4"，# 开头为注释；值用 yaml.safe_load 解析以得到数字/布尔

    :param path: 文件路径
    :return: 分节后的配置字典
    """
    result: Dict[str, Dict[str, Any]] = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ConfigError(f"第{lineno}行缺少 '=': {line}", details={'file': path, 'line': lineno})
            key, value = (part.strip() for part in line.split('=', 1))
            if '.' in key:
                section, name = key.split('.', 1)
            else:
                section, name = 'run', key
            try:
                parsed = yaml.safe_load(value) if value else None
            except yaml.YAMLError as e:
                raise ConfigError(f"第{lineno}行的值无法解析: {value}", details={'file': path, 'line': lineno}, cause=e)
            result.setdefault(section, {})[name] = parsed
    return result


class ConfigManager:
    """
    配置管理器类
    按节（dense / pauli / learner / run）提供带缓存、带校验的配置
    """

    def __init__(self, config_path: Optional[str] = None, cli_args: Optional[Dict[str, Any]] = None):
        """
        初始化配置管理器

        :param config_path: 配置文件路径，None 时尝试仓库根目录下的 config.json
        :param cli_args: 命令行参数字典，键名形如 run_seed、dense_cap
        """
        self.config_path = config_path
        self.cli_args = cli_args or {}
        self.config: Dict[str, Any] = {}
        self.is_loaded = False
        self._cached_configs: Dict[str, Dict[str, Any]] = {}
        self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """
        加载配置文件，显式指定的文件不存在或格式错误时抛出 ConfigError

        :return: 配置字典
        """
        path = self.config_path
        explicit = path is not None
        if path is None:
            path = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), 'config.json')

        self._cached_configs.clear()
        if not os.path.exists(path):
            if explicit:
                raise ConfigError(f"配置文件不存在: {path}", details={'file': path})
            logger.debug("未找到配置文件，使用默认配置", LOG_NAME)
            self.config = {}
            self.is_loaded = True
            return self.config

        try:
            if path.endswith('.json'):
                with open(path, 'r', encoding='utf-8') as f:
                    self.config = json.load(f)
            elif path.endswith(('.yaml', '.yml')):
                with open(path, 'r', encoding='utf-8') as f:
                    self.config = yaml.safe_load(f) or {}
            else:
                self.config = parse_key_value_file(path)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"配置文件格式错误: {str(e)}", details={'file': path}, cause=e)

        if not isinstance(self.config, dict):
            raise ConfigError("配置文件顶层必须是字典", details={'file': path})
        unknown = [key for key in self.config if key not in SECTIONS]
        if unknown:
            logger.warning(f"忽略未知配置节: {', '.join(unknown)}", LOG_NAME)

        self.is_loaded = True
        logger.info(f"成功加载配置文件: {path}", LOG_NAME)
        return self.config

    def _apply_config_priority(self, config_section: str, base_config: Dict[str, Any]) -> Dict[str, Any]:
        """
        应用配置优先级：命令行参数 > 环境变量 > 配置文件 > 默认值

        :param config_section: 配置节名称
        :param base_config: 默认配置
        :return: 合并后的配置
        """
        file_config = self.config.get(config_section, {}) or {}
        result_config = self._deep_merge_dicts(base_config, file_config)
        self._apply_env_variables(result_config, config_section)
        self._apply_cli_args(result_config, config_section)
        return result_config

    def _deep_merge_dicts(self, base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
        result = base.copy()
        for key, value in overlay.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge_dicts(result[key], value)
            else:
                result[key] = value
        return result

    @staticmethod
    def _coerce(value: Any, target_type: type) -> Any:
        # 按默认值的类型转换，bool 必须先于 int 判断
        if target_type is bool:
            if isinstance(value, str):
                lowered = value.lower()
                if lowered in ('true', 'yes', '1'):
                    return True
                if lowered in ('false', 'no', '0'):
                    return False
                raise ValueError(value)
            return bool(value)
        if target_type is int:
            return int(value)
        if target_type is float:
            return float(value)
        return value

    def _apply_env_variables(self, config: Dict[str, Any], section: str) -> None:
        """
        应用环境变量，变量名为 SECTION_KEY，例如 LEARNER_C_TOMO

        :param config: 配置字典
        :param section: 配置节名称
        """
        env_prefix = f"{section.upper()}_"
        for key in list(config.keys()):
            env_value = os.environ.get(f"{env_prefix}{key.upper()}")
            if env_value is None:
                continue
            try:
                config[key] = self._coerce(env_value, type(config[key]))
                logger.debug(f"从环境变量覆盖配置 {section}.{key} = {config[key]}", LOG_NAME)
            except ValueError:
                logger.warning(f"环境变量 {env_prefix}{key.upper()} 的值无效，忽略", LOG_NAME)

    def _apply_cli_args(self, config: Dict[str, Any], section: str) -> None:
        """
        应用命令行参数，键名为 section_key

        :param config: 配置字典
        :param section: 配置节名称
        """
        section_prefix = f"{section}_"
        for key, value in self.cli_args.items():
            if value is None or not key.startswith(section_prefix):
                continue
            config_key = key[len(section_prefix):]
            if config_key not in config:
                continue
            try:
                config[config_key] = self._coerce(value, type(config[config_key]))
            except (ValueError, TypeError):
                logger.warning(f"无法转换命令行参数 {key}，使用原始值", LOG_NAME)
                config[config_key] = value
            logger.debug(f"从命令行参数覆盖配置 {section}.{config_key} = {config[config_key]}", LOG_NAME)

    def _get_section(self, section: str) -> Dict[str, Any]:
        if section in self._cached_configs:
            return self._cached_configs[section]
        defaults = getattr(self, f"_get_default_{section}_config")()
        merged = self._apply_config_priority(section, defaults)
        getattr(self, f"_validate_{section}_config")(merged, defaults)
        self._cached_configs[section] = merged
        return merged

    def _reset_invalid(self, config: Dict[str, Any], defaults: Dict[str, Any], key: str, ok: bool) -> None:
        if not ok:
            logger.warning(f"配置项 {key}={config.get(key)!r} 无效，将使用默认值 {defaults[key]!r}", LOG_NAME)
            config[key] = defaults[key]

    # ---- dense ----
    def get_dense_config(self) -> Dict[str, Any]:
        """
        获取稠密模拟配置

        :return: {'cap': 稠密矩阵比特数上限, 'choi_cap': Choi 态显式构造上限}
        """
        return self._get_section('dense')

    def _get_default_dense_config(self) -> Dict[str, Any]:
        return {'cap': 12, 'choi_cap': 10}

    def _validate_dense_config(self, config: Dict[str, Any], defaults: Dict[str, Any]) -> None:
        self._reset_invalid(config, defaults, 'cap', isinstance(config['cap'], int) and 1 <= config['cap'] <= 14)
        self._reset_invalid(config, defaults, 'choi_cap', isinstance(config['choi_cap'], int) and 0 <= config['choi_cap'] <= config['cap'])

    # ---- pauli ----
    def get_pauli_config(self) -> Dict[str, Any]:
        """
        获取 Pauli 展开相关配置

        :return: 阈值、精确扭转上限、精确 LCU 上限
        """
        return self._get_section('pauli')

    def _get_default_pauli_config(self) -> Dict[str, Any]:
        return {'threshold': 1e-12, 'twirl_cap': 20, 'lcu_exact_cap': 14}

    def _validate_pauli_config(self, config: Dict[str, Any], defaults: Dict[str, Any]) -> None:
        self._reset_invalid(config, defaults, 'threshold', isinstance(config['threshold'], (int, float)) and 0 <= config['threshold'] < 1)
        self._reset_invalid(config, defaults, 'twirl_cap', isinstance(config['twirl_cap'], int) and config['twirl_cap'] >= 0)
        self._reset_invalid(config, defaults, 'lcu_exact_cap', isinstance(config['lcu_exact_cap'], int) and config['lcu_exact_cap'] >= 1)

    # ---- learner ----
    def get_learner_config(self) -> Dict[str, Any]:
        """
        获取学习算法常数

        :return: 学习器配置字典
        """
        return self._get_section('learner')

    def _get_default_learner_config(self) -> Dict[str, Any]:
        return {
            'c_tomo': 4.0,
            'c_emp': 6.0,
            'tomo_backend': 'model',
            'amp_query_const': 3.0,
            'eps_cap': 8.0,
            'c_out': 8.0,
            'bootstrap_rep_const': 18.0,
            'base_accuracy': 0.125,
            'parallel_threshold': 8,
            'max_workers': 4,
            'degenerate_retries': 1
        }

    def _validate_learner_config(self, config: Dict[str, Any], defaults: Dict[str, Any]) -> None:
        for key in ('c_tomo', 'c_emp', 'amp_query_const', 'eps_cap', 'c_out', 'bootstrap_rep_const'):
            self._reset_invalid(config, defaults, key, isinstance(config[key], (int, float)) and config[key] > 0)
        self._reset_invalid(config, defaults, 'tomo_backend', config['tomo_backend'] in ('model', 'empirical'))
        self._reset_invalid(config, defaults, 'base_accuracy', isinstance(config['base_accuracy'], (int, float)) and 0 < config['base_accuracy'] < 1)
        for key in ('parallel_threshold', 'max_workers', 'degenerate_retries'):
            self._reset_invalid(config, defaults, key, isinstance(config[key], int) and config[key] >= 0)

    # ---- run ----
    def get_run_config(self) -> Dict[str, Any]:
        """
        获取单次运行配置

        :return: seed / eps / delta / learner / jobs / out
        """
        return self._get_section('run')

    def _get_default_run_config(self) -> Dict[str, Any]:
        return {
            'seed': 0,
            'eps': 0.1,
            'delta': 0.1,
            'learner': 'kdim-inv',
            'jobs': 1,
            'out': 'report.json',
            'schema': 'v1'
        }

    def _validate_run_config(self, config: Dict[str, Any], defaults: Dict[str, Any]) -> None:
        self._reset_invalid(config, defaults, 'seed', isinstance(config['seed'], int) and config['seed'] >= 0)
        for key in ('eps', 'delta'):
            self._reset_invalid(config, defaults, key, isinstance(config[key], (int, float)) and 0 < config[key] < 1)
        self._reset_invalid(config, defaults, 'jobs', isinstance(config['jobs'], int) and config['jobs'] >= 1)

    def get(self, key: str, default: Any = None) -> Any:
        """
        以 "section.key" 的形式读取单个配置值

        :param key: 点分键
        :param default: 缺省值
        :return: 配置值
        """
        section, _, name = key.partition('.')
        if section not in SECTIONS:
            return default
        values = self._get_section(section)
        return values.get(name, default) if name else values

    def as_dict(self) -> Dict[str, Dict[str, Any]]:
        """
        所有节的最终配置，写入报告以便复现
        """
        return {section: dict(self._get_section(section)) for section in SECTIONS}

    def __str__(self) -> str:
        return f"ConfigManager(path={self.config_path}, sections={list(self.as_dict())})"


_default_manager: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """
    全局默认配置管理器（无命令行参数），供未显式传入配置的函数使用
    """
    global _default_manager
    if _default_manager is None:
        _default_manager = ConfigManager()
    return _default_manager


def set_config_manager(manager: ConfigManager) -> ConfigManager:
    """
    替换全局默认配置管理器（命令行加载了 --config 时使用）
    """
    global _default_manager
    _default_manager = manager
    return manager
