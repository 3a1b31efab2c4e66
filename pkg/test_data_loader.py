#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：实例、见证与报告文件的读写
"""

import json
import os
import sys
import tempfile

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.data.data_loader import DataLoader, decode_matrix, encode_matrix, witness_path
from src.data.instance_generator import gen_instance
from src.utils.exceptions import ValidationError
from src.utils.standardized_interface import LearnReport

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _write_json(tmp, name, data):
    path = os.path.join(tmp, name)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f)
    return path


def test_witness_path():
    assert witness_path('x/inst.json') == 'x/inst.witness.json'
    assert witness_path('inst') == 'inst.witness.json'


def test_matrix_instance_with_witness():
    loader = DataLoader()
    instance = gen_instance('kdim', {'n': 2, 'a': 1, 'b': 0, 'conjugate': False}, np.random.default_rng(0))
    with tempfile.TemporaryDirectory() as tmp:
        path, w_path = loader.save_instance(instance, os.path.join(tmp, 'inst.json'))
        assert w_path == os.path.join(tmp, 'inst.witness.json')
        assert loader.load_json(path)['format'] == 'matrix'
        unitary, witness = loader.load_instance(path)
        assert unitary.n == 2
        assert np.allclose(unitary.matrix, instance.matrix, atol=1e-12)
        assert (witness['a'], witness['b']) == (1, 0)


def test_circuit_instance_formats():
    loader = DataLoader()
    with tempfile.TemporaryDirectory() as tmp:
        text = _write_json(tmp, 'text.json', {'n': 2, 'gates': "H 1\nCNOT 1 2"})
        unitary, witness = loader.load_instance(text)
        assert witness is None
        assert np.allclose(unitary.matrix, CNOT @ np.kron(H, np.eye(2)))
        dicts = _write_json(tmp, 'dicts.json', {'format': 'circuit', 'n': 2,
                                                'gates': [{'name': 'CNOT', 'qubits': [2, 1]}]})
        unitary, _ = loader.load_instance(dicts)
        assert np.allclose(unitary.matrix, CNOT[[0, 2, 1, 3]][:, [0, 2, 1, 3]])

        doped = gen_instance('shallow_doped', {'n': 2, 'd': 1, 't': 1}, np.random.default_rng(4))
        path, _ = loader.save_instance(doped, os.path.join(tmp, 'doped.json'))
        assert loader.load_json(path)['format'] == 'circuit'
        unitary, witness = loader.load_instance(path)
        assert np.allclose(unitary.matrix, doped.matrix, atol=1e-10)
        assert witness['t'] == 1


def test_invalid_instances():
    loader = DataLoader()
    with tempfile.TemporaryDirectory() as tmp:
        with pytest.raises(ValidationError):
            loader.load_instance(os.path.join(tmp, 'missing.json'))
        broken = os.path.join(tmp, 'broken.json')
        with open(broken, 'w', encoding='utf-8') as f:
            f.write('{"n": 2,')
        with pytest.raises(ValidationError):
            loader.load_instance(broken)
        with pytest.raises(ValidationError):
            loader.load_instance(_write_json(tmp, 'nonunitary.json',
                                             {'rows': encode_matrix(np.diag([1.0, 0.5]))}))
        with pytest.raises(ValidationError):
            loader.load_instance(_write_json(tmp, 'mismatch.json', {'n': 2, 'rows': encode_matrix(H)}))
        with pytest.raises(ValidationError):
            loader.load_instance(_write_json(tmp, 'nogates.json', {'format': 'circuit', 'gates': "H 1"}))
        with pytest.raises(ValidationError):
            loader.load_instance(_write_json(tmp, 'empty.json', {'format': 'circuit', 'n': 1}))
        with pytest.raises(ValidationError):
            loader.load_instance(_write_json(tmp, 'fmt.json', {'format': 'qasm'}))
        with pytest.raises(ValidationError):
            loader.load_spec(_write_json(tmp, 'spec.json', {'n': 3}))
    with pytest.raises(ValidationError):
        decode_matrix([[1.0, 2.0, 3.0]])
    with pytest.raises(ValidationError):
        decode_matrix([1.0, 2.0])
    # 展平的行
    assert np.allclose(decode_matrix([[0, 0, 1, 0], [1, 0, 0, 0]]), [[0, 1], [1, 0]])


def test_report_is_deterministic():
    loader = DataLoader()
    report = LearnReport(learner='blockdiag', queries={'forward': 10, 'inverse': 0}, a=1, b=0, seed=3,
                         support=['+IX', '+IZ'], distances={'dist_phaseop': 0.01, 'diamond_upper': 0.02})
    with tempfile.TemporaryDirectory() as tmp:
        first = loader.save_report(report, os.path.join(tmp, 'r1.json'))
        second = loader.save_report(report, os.path.join(tmp, 'r2.json'))
        with open(first, 'rb') as f1, open(second, 'rb') as f2:
            assert f1.read() == f2.read()
        data = loader.load_json(first)
        assert data['dist_phaseop'] == 0.01
        assert 'distances' not in data and 'stage' not in data


if __name__ == "__main__":
    tests = [
        test_witness_path,
        test_matrix_instance_with_witness,
        test_circuit_instance_formats,
        test_invalid_instances,
        test_report_is_deterministic,
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
