#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
单次学习的执行与扫描实验
execute_learner 供 learn 子命令与扫描共用：建立新的预言机，运行学习器，对照真值计算距离，核对查询计数
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from src.core.blockdiag_learner import LearnParams, learn_block_diag
from src.core.composed_learner import learn_composed, target_double
from src.core.dimension_learner import run_learner
from src.core.metrics import distance_report
from src.core.quantum_sim import DenseUnitary, QueryOracle
from src.data.data_loader import DataLoader
from src.data.instance_generator import gen_instance
from src.utils.exceptions import (
    BaseError, BootstrapError, ConfigError, DegenerateInputError, DenseCapError, LearnerFailure,
    OracleAccessError, PhaseAlignmentError, PostselectionError, TomographyError, ValidationError
)
from src.utils.logger import info, warning
from src.utils.standardized_interface import (
    LEARNERS, LearnReport, ProgressTracker, SweepRow, WitnessInfo
)

LOG_NAME = 'experiment_runner'

FORWARD_ONLY = ('junta', 'kdim-fwd')

# 学习过程中的异常 -> 报告中的失败阶段
STAGES = (
    (PostselectionError, 'postselection'),
    (TomographyError, 'tomography'),
    (PhaseAlignmentError, 'phase_alignment'),
    (DegenerateInputError, 'polar_round'),
    (BootstrapError, 'bootstrap'),
    (OracleAccessError, 'oracle_access'),
)

COLUMNS = ['row', 'learner', 'k', 'a', 'b', 'eps', 'eps_eff', 'seed', 'queries_fwd', 'queries_inv',
           'dist_phaseop', 'wall_ms', 'status', 'stage']


def make_oracle(learner: str, unitary: DenseUnitary) -> QueryOracle:
    """
    junta 与 kdim-fwd 只给正向访问
    """
    return QueryOracle(unitary, allow_inverse=learner not in FORWARD_ONLY)


def stage_of(error: BaseError) -> str:
    if isinstance(error, LearnerFailure) and error.stage:
        return error.stage
    for cls, stage in STAGES:
        if isinstance(error, cls):
            return stage
    return 'learn'


@dataclass
class LearnBounds:
    """
    学习器需要的结构上界；缺省时从见证推出
    """
    k_bound: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None
    d_bound: Optional[int] = None
    t_bound: Optional[int] = None
    direction: str = 'QC'

    @classmethod
    def from_witness(cls, witness: Optional[WitnessInfo], **overrides: Any) -> 'LearnBounds':
        bounds = cls()
        witness = witness or {}
        kind = witness.get('kind')
        if kind == 'kdim':
            bounds.a, bounds.b = witness['a'], witness['b']
            bounds.k_bound = 2 * witness['a'] + witness['b']
        elif kind == 'junta':
            bounds.k_bound = len(witness.get('junta_qubits', []))
        elif kind == 'shallow_doped':
            # 掺入 t 个非 Clifford 门的 Clifford 零化度不超过 2t
            bounds.d_bound, bounds.t_bound = witness['depth'], 2 * witness['t']
            bounds.direction = witness.get('direction', 'QC')
        for key, value in overrides.items():
            if value is not None:
                setattr(bounds, key, value)
        return bounds


@dataclass
class LearnOutcome:
    """
    一次学习的结果；失败时 estimate 为 None
    """
    report: LearnReport
    estimate: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None
    audit_ok: bool = True
    error: Optional[BaseError] = field(default=None, repr=False)


def _require(value: Optional[int], name: str, learner: str) -> int:
    if value is None:
        raise ValidationError(f"学习器 {learner} 需要 {name}（命令行给出或由见证推出）", field=name)
    return value


def execute_learner(learner: str, unitary: DenseUnitary, params: LearnParams, rng: np.random.Generator,
                    bounds: LearnBounds, witness_present: bool = True) -> LearnOutcome:
    """
    在新的预言机上运行学习器

    :param witness_present: 为 True 时在报告中写入与真值的距离
    :raises ValidationError: 学习器未知或缺少结构上界
    """
    if learner not in LEARNERS:
        raise ValidationError(f"未知的学习器: {learner}", field='learner')
    oracle = make_oracle(learner, unitary)
    target = unitary.matrix
    try:
        if learner == 'blockdiag':
            a, b = _require(bounds.a, 'a', learner), _require(bounds.b, 'b', learner)
            block, report = learn_block_diag(oracle, a, b, params, rng)
            estimate = block.to_matrix()
        elif learner == 'composed':
            d = _require(bounds.d_bound, 'd_bound', learner)
            t = _require(bounds.t_bound, 't_bound', learner)
            composed, report = learn_composed(oracle, d, t, params, rng, bounds.direction)
            estimate = composed.to_matrix()
            target = target_double(unitary.matrix, bounds.direction)
        else:
            k = _require(bounds.k_bound, 'k_bound', learner)
            structured, report = run_learner(learner, oracle, params, rng, k)
            estimate = structured.to_matrix()
    except (ValidationError, ConfigError, DenseCapError):
        raise
    except BaseError as e:
        stage = stage_of(e)
        warning(f"学习器 {learner} 在 {stage} 阶段失败: {e.message}", LOG_NAME)
        report = LearnReport(learner=learner, queries=oracle.queries())
        report.mark_failed(stage, e.message)
        if isinstance(e, LearnerFailure) and e.term:
            report.details['term'] = e.term
        return LearnOutcome(report, error=e)

    report.learner = learner
    counted = oracle.queries()
    audit_ok = dict(report.queries) == counted
    if not audit_ok:
        warning(f"报告查询数 {dict(report.queries)} 与计数器 {counted} 不一致", LOG_NAME)
    report.details['query_audit'] = audit_ok
    if witness_present:
        distances = distance_report(target, estimate)
        report.distances = {
            'dist_op': distances.op,
            'dist_phaseop': distances.phaseop,
            'diamond_upper': distances.diamond_upper,
            'dist_phaseF': distances.frob_normalized,
        }
    return LearnOutcome(report, estimate, target, audit_ok)


# ---- 扫描 ----

@dataclass
class SweepGrid:
    """
    扫描网格：结构（k 或 (a,b)，组合学习器为 (d,t)）× eps × 种子
    """
    learner: str = 'kdim-inv'
    n: int = 4
    eps: List[float] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    structures: List[Dict[str, int]] = field(default_factory=list)
    delta: float = 0.1
    constants: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SweepGrid':
        """
        接受 {"learner", "n", "eps": [...], "seeds": [...] 或个数, "k": [...] 或 "ab": [[a,b], ...]
        或 "dt": [[d,t], ...], "delta", "constants"}
        """
        if not isinstance(data, Mapping):
            raise ValidationError("扫描网格必须是 JSON/YAML 对象", field='grid')
        learner = data.get('learner', 'kdim-inv')
        if learner not in LEARNERS:
            raise ValidationError(f"未知的学习器: {learner}", field='learner')
        seeds = data.get('seeds', [0])
        seeds = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
        structures: List[Dict[str, int]] = []
        if 'ab' in data:
            structures = [{'a': int(a), 'b': int(b)} for a, b in data['ab']]
        elif 'k' in data:
            ks = data['k'] if isinstance(data['k'], list) else [data['k']]
            structures = [{'k': int(k)} for k in ks]
        elif 'dt' in data:
            structures = [{'d': int(d), 't': int(t)} for d, t in data['dt']]
        eps = data.get('eps', [])
        eps = [float(e) for e in (eps if isinstance(eps, list) else [eps])]
        for e in eps:
            if not 0 < e < 1:
                raise ValidationError(f"eps={e} 必须在 (0, 1) 内", field='eps')
        return cls(learner, int(data.get('n', 4)), eps, seeds, structures, float(data.get('delta', 0.1)),
                   dict(data.get('constants', {})))

    def rows(self) -> List[Tuple[Dict[str, int], float, int]]:
        return list(product(self.structures, self.eps, self.seeds))


def _instance_spec(learner: str, n: int, structure: Mapping[str, int]) -> Tuple[str, Dict[str, Any], int, int, int]:
    """
    (实例类型, 规格, k, a, b)
    """
    if learner == 'composed':
        return 'shallow_doped', {'n': n, 'd': structure['d'], 't': structure['t']}, 0, 0, 0
    if learner == 'junta':
        k = structure.get('k', structure.get('a', 0))
        return 'junta', {'n': n, 'k': k}, k, k, 0
    if 'k' in structure:
        a, b = structure['k'] // 2, structure['k'] % 2
    else:
        a, b = structure['a'], structure['b']
    spec = {'n': n, 'a': a, 'b': b, 'conjugate': learner != 'blockdiag'}
    return 'kdim', spec, 2 * a + b, a, b


def run_row(grid: SweepGrid, index: int, structure: Mapping[str, int], eps: float, seed: int,
            base_params: LearnParams) -> SweepRow:
    """
    扫描中的一行；随机数由 (seed, 行号) 决定
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    instance_rng, learn_rng = rng.spawn(2)
    kind, spec, k, a, b = _instance_spec(grid.learner, grid.n, structure)
    params = base_params.with_accuracy(eps, grid.delta)
    eps_eff = params.effective_eps if grid.learner == 'blockdiag' else eps
    row: SweepRow = {'row': index, 'learner': grid.learner, 'k': k, 'a': a, 'b': b, 'eps': eps,
                     'eps_eff': eps_eff, 'seed': seed}
    started = time.perf_counter()
    instance = gen_instance(kind, spec, instance_rng)
    bounds = LearnBounds.from_witness(instance.witness)
    outcome = execute_learner(grid.learner, instance.unitary, params, learn_rng, bounds)
    report = outcome.report
    row.update({
        'queries_fwd': int(report.queries.get('forward', 0)),
        'queries_inv': int(report.queries.get('inverse', 0)),
        'dist_phaseop': float(report.distances['dist_phaseop']) if report.distances else float('nan'),
        'wall_ms': round((time.perf_counter() - started) * 1000.0, 3),
        'status': report.status,
        'stage': report.stage or '',
    })
    return row


def fit_slopes(frame: pd.DataFrame) -> Dict[str, Optional[float]]:
    """
    对成功的行拟合：log(查询数) 对 log(1/eps_eff) 的斜率（按结构分组后取平均），
    log₂(查询数) 对 k 的斜率（按 eps 分组后取平均）；没有 eps_eff 列时用 eps
    """
    ok = frame[frame['status'] == 'ok'].copy()
    slopes: Dict[str, Optional[float]] = {'slope_eps': None, 'slope_k': None, 'rows_ok': int(len(ok))}
    if ok.empty:
        return slopes
    ok['queries'] = ok['queries_fwd'] + ok['queries_inv']
    ok = ok[ok['queries'] > 0]
    x_eps = 'eps_eff' if 'eps_eff' in ok.columns else 'eps'

    def fit(groups, x: str, y_log) -> Optional[float]:
        values = []
        for _, g in groups:
            means = g.groupby(x)['queries'].apply(lambda q: float(np.mean(y_log(q))))
            if len(means) >= 2:
                xs = np.log(1.0 / means.index.to_numpy(dtype=float)) if x == x_eps else means.index.to_numpy(dtype=float)
                values.append(float(np.polyfit(xs, means.to_numpy(), 1)[0]))
        return float(np.mean(values)) if values else None

    slopes['slope_eps'] = fit(ok.groupby('k'), x_eps, np.log)
    slopes['slope_k'] = fit(ok.groupby('eps'), 'k', np.log2)
    return slopes


def run_sweep(grid: SweepGrid, params: LearnParams, jobs: int = 1,
              out: Optional[str] = None) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """
    有界线程池执行全部行，结果按网格顺序合并；空网格得到只有表头的 CSV

    :param out: CSV 路径；同时写出 <out>.summary.json
    """
    if grid.constants:
        known = {k: v for k, v in grid.constants.items() if k in LearnParams.__dataclass_fields__}
        params = replace(params, **known)
    rows = grid.rows()
    tracker = ProgressTracker(len(rows), f"扫描 {grid.learner}")
    info(f"扫描开始: 学习器={grid.learner}, 行数={len(rows)}, 并行={jobs}", LOG_NAME)

    def task(item: Tuple[int, Tuple[Dict[str, int], float, int]]) -> SweepRow:
        index, (structure, eps, seed) = item
        result = run_row(grid, index, structure, eps, seed, params)
        progress = tracker.update(task_id=str(index))
        if result['status'] != 'ok':
            tracker.mark_failed(str(index), result['stage'])
        info(f"第 {index} 行完成 ({progress['current']}/{progress['total']}): status={result['status']}", LOG_NAME)
        return result

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(task, enumerate(rows)))

    frame = pd.DataFrame(results, columns=COLUMNS)
    summary: Dict[str, Any] = {'schema': 'v1', 'learner': grid.learner, 'rows': len(rows),
                               'failed': int((frame['status'] != 'ok').sum()) if len(frame) else 0}
    summary.update(fit_slopes(frame) if len(frame) else {'slope_eps': None, 'slope_k': None, 'rows_ok': 0})
    info(f"扫描完成: 斜率(1/eps)={summary['slope_eps']}, 斜率(k)={summary['slope_k']}", LOG_NAME)
    if out:
        frame.to_csv(out, index=False)
        DataLoader().save_json(summary, summary_path(out), sort_keys=True)
    return frame, summary


def summary_path(csv_path: str) -> str:
    return csv_path + '.summary.json'
