#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：命令行子命令与退出码

退出码：0 成功，1 学习失败，2 用法或配置错误
"""

import json
import os
import sys
import tempfile

import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config.config_manager import get_config_manager, set_config_manager
from src.core.experiment_runner import summary_path
from src.core.main import EXIT_LEARNER_FAILURE, EXIT_OK, EXIT_USAGE, main


def _run(argv):
    # main 会替换全局配置管理器，测试结束后恢复
    original = get_config_manager()
    try:
        return main(argv + ['--log-level', 'WARNING'])
    finally:
        set_config_manager(original)


def _write(tmp, name, text):
    path = os.path.join(tmp, name)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    return path


def test_verify_exit_codes():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'verify.json')
        assert _run(['verify', 'metrics', '--quick', '--seed', '1', '-o', out]) == EXIT_OK
        with open(out, encoding='utf-8') as f:
            assert json.load(f)['suite'] == 'metrics'
    assert _run(['verify', 'nonsense']) == EXIT_USAGE
    assert _run(['verify', 'metrics', '--quick', '--eps', '1.5']) == EXIT_USAGE
    assert _run(['verify', 'metrics', '--quick', '--seed', '-1']) == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(['learn', 'x.json', '--learner', 'oracle-magic'])


def test_gen_rejects_bad_specs():
    with tempfile.TemporaryDirectory() as tmp:
        broken = _write(tmp, 'broken.json', '{"kind": "kdim",')
        assert _run(['gen', broken, '-o', os.path.join(tmp, 'i.json')]) == EXIT_USAGE
        too_big = _write(tmp, 'big.json', json.dumps({'kind': 'junta', 'n': 64, 'k': 1}))
        assert _run(['gen', too_big, '-o', os.path.join(tmp, 'i.json')]) == EXIT_USAGE
        assert _run(['gen', os.path.join(tmp, 'missing.json')]) == EXIT_USAGE
        assert _run(['gen', broken, '--config', os.path.join(tmp, 'missing.conf')]) == EXIT_USAGE


def test_gen_then_learn_is_reproducible():
    with tempfile.TemporaryDirectory() as tmp:
        spec = _write(tmp, 'spec.json', json.dumps({'kind': 'kdim', 'n': 2, 'a': 1, 'b': 0, 'conjugate': False}))
        instance = os.path.join(tmp, 'inst.json')
        assert _run(['gen', spec, '-o', instance, '--seed', '3']) == EXIT_OK
        assert os.path.exists(os.path.join(tmp, 'inst.witness.json'))

        report = os.path.join(tmp, 'report.json')
        argv = ['learn', instance, '--learner', 'blockdiag', '--eps', '0.2', '--seed', '5', '-o', report]
        assert _run(argv) == EXIT_OK
        with open(report, 'rb') as f:
            first = f.read()
        assert _run(argv) == EXIT_OK
        with open(report, 'rb') as f:
            assert f.read() == first
        data = json.loads(first)
        assert data['status'] == 'ok' and data['learner'] == 'blockdiag'
        assert (data['a'], data['b'], data['seed']) == (1, 0, 5)
        assert data['config']['eps'] == 0.2
        assert 'dist_phaseop' in data


def test_learn_failure_writes_report():
    with tempfile.TemporaryDirectory() as tmp:
        instance = _write(tmp, 'x.json', json.dumps({'n': 1, 'gates': "X 1"}))
        report = os.path.join(tmp, 'report.json')
        code = _run(['learn', instance, '--learner', 'blockdiag', '--a', '0', '--b', '0', '-o', report])
        assert code == EXIT_LEARNER_FAILURE
        with open(report, encoding='utf-8') as f:
            data = json.load(f)
        assert data['status'] == 'failed'
        assert data['stage'] == 'postselection'
        assert _run(['learn', instance, '--learner', 'blockdiag', '-o', report]) == EXIT_USAGE


def test_sweep_from_yaml():
    with tempfile.TemporaryDirectory() as tmp:
        grid = _write(tmp, 'grid.yaml', "learner: blockdiag\nn: 2\neps: [0.2]\nseeds: [4]\nab: [[1, 0]]\n")
        out = os.path.join(tmp, 'sweep.csv')
        assert _run(['sweep', grid, '-o', out]) == EXIT_OK
        with open(out, encoding='utf-8') as f:
            assert len(f.read().strip().splitlines()) == 2
        assert os.path.exists(summary_path(out))
        bad = _write(tmp, 'bad.yaml', "eps: [1.5]\n")
        assert _run(['sweep', bad, '-o', out]) == EXIT_USAGE


if __name__ == "__main__":
    tests = [
        test_verify_exit_codes,
        test_gen_rejects_bad_specs,
        test_gen_then_learn_is_reproducible,
        test_learn_failure_writes_report,
        test_sweep_from_yaml,
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
