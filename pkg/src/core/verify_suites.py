#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
不变量校验套件
每个套件对应一个模块的性质列表，返回 VerifyResult；quick=True 时缩小试验次数
"""

import math
from dataclasses import replace
from typing import Callable, Dict

import numpy as np
from scipy.linalg import expm
from scipy.stats import beta, chisquare

from src.core.blockdiag_learner import LearnParams, polar_round
from src.core.clifford import clifford_to_block, compose, conjugate_pauli, conjugated_span, random_clifford
from src.core.composed_learner import (
    LETTERS, ComposedEstimate, exact_factors, heisenberg_target, learn_composed, target_double
)
from src.core.dimension_learner import learn_junta, learn_support_forward
from src.core.f2symplectic import (
    PauliVec, canonical_subspace, random_nested_pair, random_subspace, symplectic_complement,
    span, symplectic_gram_schmidt, symplectic_product
)
from src.core.metrics import diamond_upper, dist_phaseF, dist_phaseop, norm_chain_check
from src.core.pauli_algebra import (
    PauliOperator, approx_block_distance, captured_mass, pauli_coefficients, pauli_dimension,
    pauli_project, pauli_twirl, weyl_matrix
)
from src.core.quantum_sim import QueryOracle, StateVector, bell_sample_choi, lcu_project_apply, projected_branch
from src.core.state_tomography import tomo_copies, tomo_model
from src.data.instance_generator import gen_instance, haar_unitary
from src.utils.exceptions import BaseError, ValidationError
from src.utils.logger import info, warning
from src.utils.standardized_interface import VerifyResult

LOG_NAME = 'verify_suites'


def _trials(full: int, quick: bool, small: int) -> int:
    return small if quick else full


def _rate_ok(successes: int, trials: int, rate: float) -> bool:
    return successes >= math.ceil(rate * trials)


def _random_state(n: int, rng: np.random.Generator) -> StateVector:
    return StateVector.from_array(rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n))


def suite_symplectic(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('symplectic')

    bad = 0
    for _ in range(_trials(1000, quick, 100)):
        n = int(rng.integers(1, 7))
        x, y, z = (PauliVec.from_packed(n, int(rng.integers(0, 1 << (2 * n)))) for _ in range(3))
        if symplectic_product(x + y, z) != symplectic_product(x, z) ^ symplectic_product(y, z):
            bad += 1
    result.record('bilinearity', bad == 0, failures=bad)

    bad = 0
    for _ in range(_trials(500, quick, 50)):
        n = int(rng.integers(1, 6))
        S = random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
        if symplectic_complement(symplectic_complement(S)) != S:
            bad += 1
    result.record('double_complement', bad == 0, failures=bad)

    # E_{x∈S^⊥}[(-1)^{[a,x]}] = 1_{a∈S}
    bad = 0
    for _ in range(_trials(50, quick, 10)):
        n = int(rng.integers(1, 4))
        S = random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
        perp = list(symplectic_complement(S).elements())
        for packed in range(1 << (2 * n)):
            a = PauliVec.from_packed(n, packed)
            mean = sum(1 - 2 * symplectic_product(a, x) for x in perp) / len(perp)
            if mean != (1 if a in S else 0):
                bad += 1
    result.record('character_sum', bad == 0, failures=bad)

    bad = 0
    for _ in range(_trials(500, quick, 50)):
        n = int(rng.integers(1, 9))
        dim_s = int(rng.integers(0, 2 * n + 1))
        T, S = random_nested_pair(n, int(rng.integers(0, dim_s + 1)), dim_s, rng)
        t_basis, s_basis = symplectic_gram_schmidt(T, S)
        again = symplectic_gram_schmidt(T, S)
        if (t_basis.relation_violations() or s_basis.relation_violations()
                or t_basis.subspace() != T or s_basis.subspace() != S
                or again[1].vectors() != s_basis.vectors()):
            bad += 1
    result.record('gram_schmidt_relations', bad == 0, failures=bad)
    return result


def suite_pauli(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('pauli')
    worst_twirl = worst_parseval = worst_norm = 0.0
    for _ in range(_trials(200, quick, 20)):
        n = int(rng.integers(1, 5))
        U = haar_unitary(1 << n, rng)
        S = random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
        P = pauli_project(U, S)
        worst_twirl = max(worst_twirl, float(np.linalg.norm(pauli_twirl(U, S) - P)))
        A = rng.standard_normal((1 << n, 1 << n)) + 1j * rng.standard_normal((1 << n, 1 << n))
        alpha = pauli_coefficients(A)
        frob2 = float(np.linalg.norm(A) ** 2)
        worst_parseval = max(worst_parseval, abs(frob2 - (1 << n) * float(np.sum(np.abs(alpha) ** 2))) / frob2)
        worst_norm = max(worst_norm, float(np.linalg.norm(P, 2)))
    result.record('twirl_equals_projection', worst_twirl <= 1e-10, worst=worst_twirl)
    result.record('parseval', worst_parseval <= 1e-9, worst=worst_parseval)
    result.record('projection_contraction', worst_norm <= 1 + 1e-9, worst=worst_norm)

    # ‖U − V‖ ≤ ε 且 supp(V) ⊆ S ⇒ ‖U − Π_S(U)‖ ≤ 2ε
    bad = 0
    for _ in range(_trials(50, quick, 10)):
        n = int(rng.integers(2, 5))
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n - a + 1))
        inst = gen_instance('kdim', {'n': n, 'a': a, 'b': b}, rng)
        S = span([PauliVec.from_label(label)[0] for label in inst.witness['support']], n)
        G = rng.standard_normal((1 << n, 1 << n)) + 1j * rng.standard_normal((1 << n, 1 << n))
        H = (G + G.conj().T) / 2
        U = inst.matrix @ expm(1j * float(rng.uniform(0.001, 0.1)) * H / np.linalg.norm(H, 2))
        eps = float(np.linalg.norm(U - inst.matrix, 2))
        if np.linalg.norm(U - pauli_project(U, S), 2) > 2 * eps + 1e-9:
            bad += 1
    result.record('closeness_transfer', bad == 0, failures=bad)
    return result


def suite_clifford(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('clifford')

    bad = 0
    for _ in range(_trials(100, quick, 10)):
        n = int(rng.integers(1, 7 if not quick else 4))
        C = random_clifford(n, rng)
        Cm = C.to_matrix()
        for q in range(n):
            for letter in LETTERS:
                p = PauliOperator(PauliVec.single(n, q, letter))
                dense = Cm @ weyl_matrix(p) @ Cm.conj().T
                if np.linalg.norm(dense - weyl_matrix(conjugate_pauli(C, p))) > 1e-9:
                    bad += 1
    result.record('tableau_dense_agreement', bad == 0, failures=bad)

    bad = 0
    for _ in range(_trials(200, quick, 20)):
        n = int(rng.integers(1, 7))
        T = random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
        C, a, b = clifford_to_block(T)
        if conjugated_span(C, T) != canonical_subspace(n, a, b):
            bad += 1
    result.record('canonicalization', bad == 0, failures=bad)

    bad = 0
    for _ in range(_trials(50, quick, 10)):
        n = int(rng.integers(1, 4))
        C1, C2 = random_clifford(n, rng), random_clifford(n, rng)
        M = C1.to_matrix() @ C2.to_matrix()
        C = compose(C1, C2)
        for packed in range(1, 1 << (2 * n)):
            p = PauliOperator(PauliVec.from_packed(n, packed))
            if np.linalg.norm(M @ weyl_matrix(p) @ M.conj().T - weyl_matrix(conjugate_pauli(C, p))) > 1e-9:
                bad += 1
                break
    result.record('composition', bad == 0, failures=bad)

    # U = V·exp(iθP)，P ∉ W_{a,b}：W_{a,b} 内质量为 1−η，η = δ²/2^{a+b}
    bad = 0
    for _ in range(_trials(50, quick, 10)):
        n = int(rng.integers(2, 5))
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n - a))
        V = gen_instance('kdim', {'n': n, 'a': a, 'b': b, 'conjugate': False}, rng).matrix
        delta = float(rng.uniform(0.01, 0.5))
        eta = delta ** 2 / (1 << (a + b))
        theta = math.asin(math.sqrt(eta))
        P = weyl_matrix(PauliOperator(PauliVec.single(n, n - a - 1, 'X')))
        U = V @ (math.cos(theta) * np.eye(1 << n) + 1j * math.sin(theta) * P)
        if approx_block_distance(U, a, b) > delta + 1e-8:
            bad += 1
    result.record('support_bound', bad == 0, failures=bad)
    return result


def suite_lcu(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('lcu')
    trials = _trials(10000, quick, 2000)
    outliers = 0
    worst_prob = 0.0
    worst_fid = 1.0
    audit_ok = True
    outside_support = 0
    instances = _trials(20, quick, 4)
    for _ in range(instances):
        n = int(rng.integers(1, 4))
        oracle = QueryOracle(haar_unitary(1 << n, rng))
        S = random_subspace(n, int(rng.integers(1, 2 * n + 1)), rng)
        psi = _random_state(n, rng)
        p, phi = projected_branch(oracle, S, psi)
        accepted = sum(lcu_project_apply(oracle, S, psi, rng) is not None for _ in range(trials))
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / trials)
        if abs(accepted / trials - p) > 3 * sigma + 1.0 / trials:
            outliers += 1
        audit_ok = audit_ok and oracle.queries()['forward'] == trials

        p_exact, phi_exact = projected_branch(oracle, S, psi, circuit_exact=True)
        worst_prob = max(worst_prob, abs(p_exact - p))
        if phi is not None and phi_exact is not None:
            worst_fid = min(worst_fid, float(abs(np.vdot(phi, phi_exact)) ** 2))

        expansion = oracle.expansion()
        for x in bell_sample_choi(oracle, 200, rng):
            if abs(expansion.coefficient(x)) <= expansion.threshold:
                outside_support += 1
    # 每个实例 3σ 之外的概率约 0.3%，允许少量离群
    result.record('acceptance_probability', outliers <= max(1, instances // 10), outliers=outliers)
    result.record('query_accounting', audit_ok)
    result.record('circuit_exact_probability', worst_prob <= 1e-8, worst=worst_prob)
    result.record('circuit_exact_state', worst_fid >= 1 - 1e-8, worst_fidelity=worst_fid)
    result.record('bell_samples_in_support', outside_support == 0, failures=outside_support)
    return result


def suite_tomo(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('tomo')
    worst = 0.0
    copies_ok = True
    for _ in range(_trials(200, quick, 20)):
        m = int(rng.integers(1, 5))
        psi = _random_state(m, rng)
        eps, delta = float(rng.uniform(0.01, 0.3)), float(rng.uniform(0.01, 0.3))
        out = tomo_model(psi, eps, delta, rng, c_tomo=4.0)
        overlap = np.vdot(psi.amplitudes, out.estimate.amplitudes)
        residual = out.estimate.amplitudes - overlap * psi.amplitudes
        worst = max(worst, abs(abs(overlap) - math.sqrt(1 - out.eps_hat ** 2)),
                    abs(np.linalg.norm(residual) - out.eps_hat),
                    abs(np.vdot(psi.amplitudes, residual)))
        copies_ok = copies_ok and out.copies_charged == tomo_copies(m, eps, delta, 4.0)
    result.record('model_decomposition', worst <= 1e-10, worst=worst)
    result.record('copy_accounting', copies_ok)

    # |ψ⟩ = |0⟩，d = 4：w 在 3 维补空间上均匀，|w_1|² ~ Beta(1, 2)
    draws = _trials(10000, quick, 2000)
    psi = StateVector.basis(2, 0)
    samples = np.empty(draws)
    for i in range(draws):
        out = tomo_model(psi, 0.2, 0.01, rng, c_tomo=4.0)
        w = out.estimate.amplitudes - np.vdot(psi.amplitudes, out.estimate.amplitudes) * psi.amplitudes
        w = w / np.linalg.norm(w)
        samples[i] = abs(w[1]) ** 2
    bins = 10
    edges = beta(1, 2).ppf(np.linspace(0, 1, bins + 1))
    counts, _ = np.histogram(samples, bins=edges)
    p_value = float(chisquare(counts, np.full(bins, draws / bins)).pvalue)
    result.record('haar_isotropy', p_value > 0.01, p_value=p_value)
    return result


def suite_metrics(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('metrics')
    I2, Z = np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)
    result.record('identity_vs_z', abs(dist_phaseop(I2, Z) - math.sqrt(2)) <= 1e-8)

    worst_phase = worst_inv = worst_tensor = 0.0
    chain_ok = canary_ok = True
    for _ in range(_trials(100, quick, 10)):
        n = int(rng.integers(1, 4))
        U, V, W = (haar_unitary(1 << n, rng) for _ in range(3))
        worst_phase = max(worst_phase, dist_phaseop(U, np.exp(1j * rng.uniform(0, 2 * np.pi)) * U))
        worst_inv = max(worst_inv, abs(dist_phaseop(W @ U, W @ V) - dist_phaseop(U, V)))
        A = rng.standard_normal((1 << n, 1 << n)) + 1j * rng.standard_normal((1 << n, 1 << n))
        d = int(rng.integers(1, 5))
        worst_tensor = max(worst_tensor, abs(np.linalg.norm(np.kron(np.eye(d), A)) - math.sqrt(d) * np.linalg.norm(A)))
        chain_ok = chain_ok and norm_chain_check(A)['holds']
        canary_ok = canary_ok and dist_phaseF(U, V) <= math.sqrt(2) * dist_phaseop(U, V) + 1e-9
    result.record('phase_invariance', worst_phase <= 1e-8, worst=worst_phase)
    result.record('unitary_invariance', worst_inv <= 1e-7, worst=worst_inv)
    result.record('tensor_identity', worst_tensor <= 1e-9, worst=worst_tensor)
    result.record('norm_chain', chain_ok)
    if not canary_ok:
        warning("dist_phaseF ≤ √2·dist_phaseop 的回归检查未通过", LOG_NAME)
    result.record('frobenius_canary', canary_ok)
    return result


def suite_composed(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    result = VerifyResult('composed')

    worst = 0.0
    for _ in range(_trials(50, quick, 5)):
        n = int(rng.integers(1, 5 if not quick else 3))
        U = haar_unitary(1 << n, rng)
        for direction in ('QC', 'CQ'):
            est = exact_factors(U, direction)
            worst = max(worst, float(np.linalg.norm(est.to_matrix() - target_double(U, direction), 2)))
    result.record('double_system_identity', worst <= 1e-9, worst=worst)

    bad = 0
    hermitian_worst = 0.0
    for _ in range(_trials(100, quick, 10)):
        n = int(rng.integers(2, 5))
        d, t = int(rng.integers(0, 2)), int(rng.integers(0, 2))
        U = gen_instance('shallow_doped', {'n': n, 'd': d, 't': t}, rng).matrix
        for q in range(n):
            for letter in LETTERS:
                T = heisenberg_target(U, PauliOperator(PauliVec.single(n, q, letter)))
                if pauli_dimension(T, threshold=1e-9) > (1 << (d + 1)) + 2 * t:
                    bad += 1
                hermitian_worst = max(hermitian_worst, float(np.linalg.norm(T - T.conj().T)),
                                      float(np.linalg.norm(T @ T - np.eye(1 << n))))
    result.record('per_term_dimension', bad == 0, failures=bad)
    result.record('hermitian_targets', hermitian_worst <= 1e-9, worst=hermitian_worst)

    bad = 0
    for _ in range(_trials(20, quick, 4)):
        n = int(rng.integers(1, 4))
        exact = exact_factors(haar_unitary(1 << n, rng))
        noisy = []
        for F in exact.factors:
            G = rng.standard_normal(F.shape) + 1j * rng.standard_normal(F.shape)
            noisy.append(polar_round(F + 0.01 * G))
        approx = ComposedEstimate(n, 'QC', exact.terms, noisy)
        total = sum(dist_phaseop(F, G) for F, G in zip(exact.factors, noisy))
        if dist_phaseop(exact.to_matrix(), approx.to_matrix()) > total + 1e-8:
            bad += 1
    result.record('error_composition', bad == 0, failures=bad)

    # CZ 层 ∘ (Clifford + 1 个 T)：每项 Pauli 维数不超过 2^2 + 2，菱形距离上界不超过 eps
    params = LearnParams.from_config(eps=0.3, delta=0.1)
    if quick:
        params = replace(params, bootstrap_rep_const=1.0)
    trials = _trials(10, quick, 2)
    for direction in ('QC', 'CQ'):
        good = oversized = 0
        for _ in range(trials):
            inst = gen_instance('shallow_doped', {'n': 3, 'd': 1, 't': 1, 'direction': direction}, rng)
            try:
                estimate, report = learn_composed(QueryOracle(inst.unitary), 1, 2, params, rng, direction)
            except BaseError as e:
                warning(f"组合学习失败 ({direction}): {e.message}", LOG_NAME)
                continue
            oversized += sum(term['support_dim'] > 6 for term in report.details['terms'].values())
            if diamond_upper(target_double(inst.matrix, direction), estimate.to_matrix()) <= 0.3:
                good += 1
        result.record(f'doped_learning_{direction.lower()}', _rate_ok(good, trials, 0.8), good=good, trials=trials)
        result.record(f'doped_term_dimension_{direction.lower()}', oversized == 0, failures=oversized)
    return result


def suite_learners(rng: np.random.Generator, quick: bool = False) -> VerifyResult:
    """
    学习器层面的成功率：支撑捕获的 Pauli 质量、junta 比特恢复
    quick=True 时同时把自举重复常数降到 1
    """
    result = VerifyResult('learners')

    # 学到的支撑至少捕获 1 − eps_sup 的质量
    trials = _trials(200, quick, 30)
    captured = 0
    worst = 1.0
    for _ in range(trials):
        a = int(rng.integers(0, 3))
        inst = gen_instance('kdim', {'n': 4, 'a': a, 'b': 4 - 2 * a}, rng)
        support = learn_support_forward(QueryOracle(inst.unitary), 4, 0.1, 0.1, rng)
        mass = captured_mass(inst.matrix, support.subspace)
        worst = min(worst, mass)
        captured += mass >= 0.9
    result.record('support_capture', _rate_ok(captured, trials, 0.87), captured=captured, trials=trials,
                  worst=worst)

    params = LearnParams.from_config(eps=0.1, delta=0.1)
    if quick:
        params = replace(params, bootstrap_rep_const=1.0)
    trials = _trials(20, quick, 4)
    recovered = 0
    inverse_used = 0
    for _ in range(trials):
        inst = gen_instance('junta', {'n': 8, 'k': 2}, rng)
        oracle = QueryOracle(inst.unitary, allow_inverse=False)
        try:
            estimate, report = learn_junta(oracle, 2, params, rng)
        except BaseError as e:
            warning(f"junta 学习失败: {e.message}", LOG_NAME)
            continue
        inverse_used += oracle.queries()['inverse']
        if (report.details['junta_qubits'] == inst.witness['junta_qubits']
                and dist_phaseop(estimate.to_matrix(), inst.matrix) <= 0.8):
            recovered += 1
    result.record('junta_recovery', _rate_ok(recovered, trials, 0.9), recovered=recovered, trials=trials)
    result.record('junta_forward_only', inverse_used == 0, inverse_queries=inverse_used)
    return result


SUITES: Dict[str, Callable[..., VerifyResult]] = {
    'symplectic': suite_symplectic,
    'pauli': suite_pauli,
    'clifford': suite_clifford,
    'lcu': suite_lcu,
    'tomo': suite_tomo,
    'metrics': suite_metrics,
    'composed': suite_composed,
    'learners': suite_learners,
}


def run_suite(name: str, seed: int = 0, quick: bool = False) -> VerifyResult:
    """
    按名称运行套件

    :raises ValidationError: 未知的套件名
    """
    if name not in SUITES:
        raise ValidationError(f"未知的校验套件: {name}，可选 {', '.join(SUITES)}", field='suite')
    info(f"运行校验套件 {name} (seed={seed}, quick={quick})", LOG_NAME)
    result = SUITES[name](np.random.default_rng(seed), quick)
    for check in result.checks:
        if not check['ok']:
            warning(f"{name}.{check['name']} 未通过: {check}", LOG_NAME)
    info(f"套件 {name}: {'通过' if result.passed else '失败'}", LOG_NAME)
    return result
