#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：不变量校验套件（quick 模式）
"""

import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.verify_suites import SUITES, run_suite
from src.utils.exceptions import ValidationError

# 统计检验在固定种子下也可能偶然落在阈值之外，只检查其存在
STATISTICAL = {
    'acceptance_probability', 'haar_isotropy', 'junta_recovery', 'doped_learning_qc', 'doped_learning_cq'
}


def _check_suite(name):
    result = run_suite(name, seed=0, quick=True)
    assert result.suite == name
    assert result.checks
    for check in result.checks:
        if check['name'] not in STATISTICAL:
            assert check['ok'], check
    return result


def test_symplectic_suite():
    _check_suite('symplectic')


def test_pauli_suite():
    _check_suite('pauli')


def test_clifford_suite():
    _check_suite('clifford')


def test_lcu_suite():
    names = [c['name'] for c in _check_suite('lcu').checks]
    assert 'acceptance_probability' in names


def test_tomo_suite():
    names = [c['name'] for c in _check_suite('tomo').checks]
    assert 'haar_isotropy' in names


def test_metrics_suite():
    result = _check_suite('metrics')
    assert result.passed
    assert result.to_dict()['suite'] == 'metrics'


def test_composed_suite():
    names = [c['name'] for c in _check_suite('composed').checks]
    assert {'doped_learning_qc', 'doped_learning_cq', 'doped_term_dimension_qc'} <= set(names)


def test_learners_suite():
    result = _check_suite('learners')
    capture = next(c for c in result.checks if c['name'] == 'support_capture')
    assert capture['captured'] >= 0.87 * capture['trials']
    assert any(c['name'] == 'junta_recovery' for c in result.checks)


def test_unknown_suite():
    assert 'oracle' not in SUITES
    with pytest.raises(ValidationError):
        run_suite('oracle')


if __name__ == "__main__":
    tests = [
        test_symplectic_suite,
        test_pauli_suite,
        test_clifford_suite,
        test_lcu_suite,
        test_tomo_suite,
        test_metrics_suite,
        test_composed_suite,
        test_learners_suite,
        test_unknown_suite,
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
