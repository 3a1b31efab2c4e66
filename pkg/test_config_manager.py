#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：配置管理器

覆盖：
1. 默认配置与 config.json 的合并
2. key=value / YAML 配置文件
3. 优先级：命令行参数 > 环境变量 > 配置文件 > 默认值
4. 非法配置项回退到默认值，显式配置文件缺失时报错
"""

import os
import sys
import tempfile

import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config.config_manager import ConfigManager, get_config_manager, parse_key_value_file, set_config_manager
from src.core.blockdiag_learner import LearnParams
from src.utils.exceptions import ConfigError


def _write(tmp, name, text):
    path = os.path.join(tmp, name)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    return path


def test_repository_defaults():
    manager = ConfigManager()
    assert manager.get('dense.cap') == 12
    assert manager.get('learner.c_tomo') == 4.0
    assert manager.get('run.learner') == 'kdim-inv'
    assert manager.get('missing.key', 'fallback') == 'fallback'
    assert set(manager.as_dict()) == {'dense', 'pauli', 'learner', 'run'}


def test_key_value_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, 'run.conf', "# 常数\nlearner.c_tomo = 2.5\nlearner.tomo_backend = empirical\nseed = 7\n")
        assert parse_key_value_file(path) == {'learner': {'c_tomo': 2.5, 'tomo_backend': 'empirical'},
                                              'run': {'seed': 7}}
        manager = ConfigManager(config_path=path)
        params = LearnParams.from_config(manager)
        assert params.c_tomo == 2.5 and params.tomo_backend == 'empirical'
        assert manager.get('run.seed') == 7
        bad = _write(tmp, 'bad.conf', "learner.c_tomo 2.5\n")
        with pytest.raises(ConfigError):
            ConfigManager(config_path=bad)


def test_yaml_file_and_invalid_values():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, 'run.yaml', "dense:\n  cap: 40\nrun:\n  eps: 0.05\n  jobs: 0\n")
        manager = ConfigManager(config_path=path)
        assert manager.get('dense.cap') == 12
        assert manager.get('run.eps') == 0.05
        assert manager.get('run.jobs') == 1


def test_priority_order():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, 'run.conf', "learner.c_out = 5\nrun.eps = 0.2\n")
        os.environ['LEARNER_C_OUT'] = '6'
        os.environ['RUN_EPS'] = '0.3'
        try:
            manager = ConfigManager(config_path=path, cli_args={'run_eps': 0.4, 'run_seed': None})
            assert manager.get('learner.c_out') == 6.0
            assert manager.get('run.eps') == 0.4
            assert manager.get('run.seed') == 0
        finally:
            del os.environ['LEARNER_C_OUT']
            del os.environ['RUN_EPS']


def test_missing_explicit_file():
    with pytest.raises(ConfigError):
        ConfigManager(config_path='/nonexistent/lowdim.json')


def test_global_manager_swap():
    original = get_config_manager()
    try:
        with tempfile.TemporaryDirectory() as tmp:
            replacement = ConfigManager(config_path=_write(tmp, 'c.conf', "dense.choi_cap = 3\n"))
            set_config_manager(replacement)
            assert get_config_manager().get('dense.choi_cap') == 3
    finally:
        set_config_manager(original)


if __name__ == "__main__":
    tests = [
        test_repository_defaults,
        test_key_value_file,
        test_yaml_file_and_invalid_values,
        test_priority_order,
        test_missing_explicit_file,
        test_global_manager_swap,
    ]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"✅ {test.__name__}")
        except Exception as e:
            print(f"❌ {test.__name__}: {e}")
    print(f"\n总体结果: {passed}/{len(tests)} 测试通过")
    sys.exit(0 if passed == len(tests) else 1)
