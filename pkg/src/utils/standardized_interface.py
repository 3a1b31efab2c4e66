#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
标准化接口模块
学习报告、运行配置、扫描行等跨模块数据结构
报告中不写入时间戳，保证同一 (seed, 配置, 实例) 输出逐字节一致
"""

import json
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, TypedDict

from src.utils.exceptions import ValidationError

SCHEMA_VERSION = 'v1'

LEARNERS = ('kdim-fwd', 'kdim-inv', 'kdim-base', 'junta', 'blockdiag', 'composed')


class QueryCounts(TypedDict, total=False):
    """
    查询计数
    """
    forward: int  # U 查询次数
    inverse: int  # U† 查询次数
    controlled_fwd: int  # 受控 U
    controlled_inv: int  # 受控 U†


class WitnessInfo(TypedDict, total=False):
    """
    实例的真值见证
    """
    kind: str  # junta / kdim / shallow_doped
    n: int  # 量子比特数
    junta_qubits: List[int]  # junta 作用的比特（从 1 开始）
    a: int  # 辛对数
    b: int  # 迷向维数
    support: List[str]  # 支撑子群的生成元
    clifford: List[Dict[str, Any]]  # 把支撑化为 W_{a,b} 的 Clifford 线路
    depth: int  # 浅层线路深度
    t: int  # T 门个数
    t_positions: List[int]  # T 门作用的比特（从 1 开始）
    layers: Dict[str, List[Dict[str, Any]]]  # Q 层与 C 层的门列表
    direction: str  # QC 或 CQ


class SweepRow(TypedDict, total=False):
    """
    扫描结果中的一行
    """
    row: int  # 网格中的序号
    learner: str  # 学习器
    k: int  # Pauli 维数
    a: int  # 辛对数
    b: int  # 迷向维数
    eps: float  # 目标精度
    eps_eff: float  # 学习器实际使用的精度（块对角学习在 1/eps_cap 处截断）
    seed: int  # 随机种子
    queries_fwd: int  # 正向查询
    queries_inv: int  # 逆查询
    dist_phaseop: float  # 相位对齐算子距离
    wall_ms: float  # 耗时（毫秒）
    status: str  # ok / failed
    stage: str  # 失败阶段


def query_delta(before: Dict[str, int], after: Dict[str, int]) -> QueryCounts:
    """
    两次计数快照之差
    """
    return {k: int(after.get(k, 0) - before.get(k, 0)) for k in after}


@dataclass
class LearnReport:
    """
    学习器输出的报告
    distances 只在有真值时填写；序列化时展开为顶层的 dist_phaseop / diamond_upper 字段
    """
    learner: str = ''
    status: str = 'ok'
    stage: Optional[str] = None
    message: str = ''
    queries: QueryCounts = field(default_factory=dict)
    a: Optional[int] = None
    b: Optional[int] = None
    seed: Optional[int] = None
    support: List[str] = field(default_factory=list)
    blocks: List[Any] = field(default_factory=list)
    gates: List[Dict[str, Any]] = field(default_factory=list)
    distances: Optional[Dict[str, float]] = None
    details: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    schema: str = SCHEMA_VERSION

    def mark_failed(self, stage: str, message: str) -> None:
        self.status = 'failed'
        self.stage = stage
        self.message = message

    def to_dict(self) -> Dict[str, Any]:
        result = asdict(self)
        distances = result.pop('distances')
        if distances:
            result.update(distances)
        return {k: v for k, v in result.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True, default=float)

    def __bool__(self) -> bool:
        return self.status == 'ok'


@dataclass
class VerifyResult:
    """
    一个校验套件的结果
    """
    suite: str
    passed: bool = True
    checks: List[Dict[str, Any]] = field(default_factory=list)

    def record(self, name: str, ok: bool, **values: Any) -> bool:
        self.checks.append({'name': name, 'ok': bool(ok), **values})
        self.passed = self.passed and bool(ok)
        return bool(ok)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, default=float)

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class RunConfig:
    """
    一次运行的全部输入；校验后原样写入报告
    """
    seed: int = 0
    learner: str = 'kdim-inv'
    instance: Optional[str] = None
    eps: float = 0.1
    delta: float = 0.1
    constants: Dict[str, Any] = field(default_factory=dict)
    out: str = 'report.json'
    dense_cap: int = 12
    jobs: int = 1
    k_bound: Optional[int] = None
    d_bound: Optional[int] = None
    t_bound: Optional[int] = None

    def validate(self) -> 'RunConfig':
        """
        校验字段，非法时抛出 ValidationError
        """
        if self.learner not in LEARNERS:
            raise ValidationError(f"未知的学习器: {self.learner}，可选 {', '.join(LEARNERS)}", field='learner')
        if not 0 < self.eps < 1:
            raise ValidationError(f"eps={self.eps} 必须在 (0, 1) 内", field='eps')
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta={self.delta} 必须在 (0, 1) 内", field='delta')
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValidationError(f"seed={self.seed} 必须是 64 位无符号整数", field='seed')
        if self.dense_cap < 1:
            raise ValidationError("dense_cap 必须为正", field='dense_cap')
        if self.jobs < 1:
            raise ValidationError("jobs 必须为正", field='jobs')
        for name in ('k_bound', 'd_bound', 't_bound'):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValidationError(f"{name} 不能为负", field=name)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None}


class ProgressTracker:
    """
    进度跟踪器
    用于跟踪扫描等长时间运行任务的进度
    """

    def __init__(self, total: int, task_name: str = ""):
        """
        :param total: 总任务数
        :param task_name: 任务名称
        """
        self.total = total
        self.current = 0
        self.task_name = task_name
        self.start_time = datetime.now()
        self.completed_tasks: List[str] = []
        self.failed_tasks: Dict[str, str] = {}
        # 扫描线程共享同一个跟踪器
        self._lock = threading.Lock()

    def update(self, increment: int = 1, task_id: Optional[str] = None) -> Dict[str, Any]:
        with self._lock:
            self.current = min(self.current + increment, self.total)
            if task_id:
                self.completed_tasks.append(task_id)
            return self.get_progress()

    def mark_failed(self, task_id: str, error_message: str) -> None:
        with self._lock:
            self.failed_tasks[task_id] = error_message

    def get_progress(self) -> Dict[str, Any]:
        """
        获取当前进度

        :return: 进度信息字典
        """
        progress_percent = (self.current / self.total * 100) if self.total > 0 else 100.0
        elapsed_time = (datetime.now() - self.start_time).total_seconds()
        return {
            "task_name": self.task_name,
            "current": self.current,
            "total": self.total,
            "progress_percent": round(progress_percent, 2),
            "elapsed_time": round(elapsed_time, 2),
            "completed_tasks": len(self.completed_tasks),
            "failed_tasks": len(self.failed_tasks),
            "is_complete": self.current >= self.total
        }


__all__ = [
    'SCHEMA_VERSION',
    'LEARNERS',
    'QueryCounts',
    'WitnessInfo',
    'SweepRow',
    'query_delta',
    'LearnReport',
    'VerifyResult',
    'RunConfig',
    'ProgressTracker',
]
