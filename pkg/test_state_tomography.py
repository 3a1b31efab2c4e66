#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试脚本：纯态层析的两个后端
"""

import itertools
import os
import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core.quantum_sim import StateVector
from src.core.state_tomography import (
    copies_needed, internal_failure, run_tomography, tomo_copies, tomo_empirical, tomo_model
)
from src.utils.exceptions import TomographyError, ValidationError


def _random_state(m, seed):
    U = unitary_group.rvs(1 << m, random_state=seed)
    return StateVector.from_array(U[:, 0])


def test_copy_count_formula():
    # ⌈4·(4 + ln 10)/0.01⌉
    assert tomo_copies(2, 0.1, 0.1, 4.0) == 2522
    assert copies_needed('model', 2, 0.1, 0.1, c_tomo=4.0) == 2522
    assert copies_needed('empirical', 1, 0.2, 0.1, c_emp=6.0) == 646
    with pytest.raises(ValidationError):
        copies_needed('shadow', 1, 0.1, 0.1)


def test_internal_failure_floor():
    assert internal_failure(1, 0.5) == pytest.approx(np.exp(-10))
    assert internal_failure(1, 1e-6) == 1e-6
    assert internal_failure(8, 0.1) > 0.0


def test_model_decomposition():
    rng = np.random.default_rng(7)
    target = _random_state(3, 7)
    for _ in range(20):
        result = tomo_model(target, 0.1, 0.05, rng, c_tomo=4.0)
        psi_hat = result.estimate.amplitudes
        overlap = np.vdot(target.amplitudes, psi_hat)
        phi = overlap / abs(overlap)
        assert abs(abs(overlap) - np.sqrt(1 - result.eps_hat ** 2)) <= 1e-10
        w = psi_hat / phi - np.sqrt(1 - result.eps_hat ** 2) * target.amplitudes
        assert abs(np.vdot(target.amplitudes, w)) <= 1e-10
        if not result.failed:
            assert result.eps_hat <= 0.1
    assert result.copies_charged == tomo_copies(3, 0.1, 0.05, 4.0)


def test_model_single_amplitude():
    result = tomo_model(StateVector.basis(0), 0.1, 0.1, np.random.default_rng(0), c_tomo=4.0)
    assert result.eps_hat == 0.0


def test_empirical_fidelity():
    target = _random_state(1, 3)
    N = tomo_copies(1, 0.2, 0.1, 6.0)
    result = tomo_empirical(itertools.repeat(target, N), 1, 0.2, 0.1, np.random.default_rng(3), c_emp=6.0)
    assert result.copies_charged == 646
    assert result.backend == 'empirical'
    assert result.estimate.fidelity(target) > 0.8


def test_empirical_runs_out_of_copies():
    target = _random_state(1, 4)
    with pytest.raises(TomographyError):
        tomo_empirical([target] * 3, 1, 0.2, 0.1, np.random.default_rng(0), c_emp=6.0)


def test_dispatch():
    target = _random_state(2, 5)
    rng = np.random.default_rng(5)
    assert run_tomography('model', [target], 2, 0.1, 0.1, rng, c_tomo=4.0).backend == 'model'
    with pytest.raises(TomographyError):
        run_tomography('model', [], 2, 0.1, 0.1, rng, c_tomo=4.0)
    with pytest.raises(ValidationError):
        run_tomography('shadow', [target], 2, 0.1, 0.1, rng)
    with pytest.raises(ValidationError):
        tomo_model(target, 1.5, 0.1, rng, c_tomo=4.0)


if __name__ == "__main__":
    tests = [
        test_copy_count_formula,
        test_internal_failure_floor,
        test_model_decomposition,
        test_model_single_amplitude,
        test_empirical_fidelity,
        test_empirical_runs_out_of_copies,
        test_dispatch,
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
