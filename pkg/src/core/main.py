#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
主程序入口
子命令 gen / learn / sweep / verify；退出码 0 成功，1 学习失败，2 用法或配置错误
"""

import argparse
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.config.config_manager import ConfigManager, set_config_manager
from src.core.blockdiag_learner import LearnParams
from src.core.experiment_runner import LearnBounds, SweepGrid, execute_learner, run_sweep, summary_path
from src.core.verify_suites import SUITES, run_suite
from src.data.data_loader import DataLoader
from src.data.instance_generator import gen_instance
from src.utils.exceptions import (
    BaseError, ConfigError, DenseCapError, DimensionError, LearnerFailure, SubspaceError, ValidationError,
    format_error_message, handle_exception
)
from src.utils.logger import error, info, set_log_level
from src.utils.standardized_interface import LEARNERS, RunConfig

LOG_NAME = 'main'

EXIT_OK = 0
EXIT_LEARNER_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ValidationError, ConfigError, DenseCapError, DimensionError, SubspaceError)


def _common_flags() -> argparse.ArgumentParser:
    """
    各子命令共用的参数
    """
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--seed', type=int, help='随机种子（64 位无符号整数）')
    parser.add_argument('--eps', type=float, help='目标精度')
    parser.add_argument('--delta', type=float, help='失败概率')
    parser.add_argument('--learner', type=str, choices=LEARNERS, help='学习器')
    parser.add_argument('--config', '-c', type=str, help='配置文件（每行 section.key = value，或 JSON/YAML）')
    parser.add_argument('--out', '-o', type=str, help='输出路径')
    parser.add_argument('--dense-cap', type=int, help='稠密模拟的比特数上限')
    parser.add_argument('--jobs', type=int, help='扫描的并行数')
    parser.add_argument('--log-level', type=str, default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='日志级别（默认: INFO）')
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(description='低 Pauli 维数酉矩阵的过程层析')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', parents=[common], help='按规格生成实例与见证')
    gen.add_argument('spec', type=str, help='实例规格 JSON 文件')

    learn = sub.add_parser('learn', parents=[common], help='对实例运行学习器')
    learn.add_argument('instance', type=str, help='实例文件')
    learn.add_argument('--k-bound', type=int, help='Pauli 维数上界（junta 为比特数）')
    learn.add_argument('--a', type=int, help='块对角学习器的 a')
    learn.add_argument('--b', type=int, help='块对角学习器的 b')
    learn.add_argument('--d-bound', type=int, help='组合学习器的深度上界')
    learn.add_argument('--t-bound', type=int, help='组合学习器的 Clifford 零化度上界')
    learn.add_argument('--direction', type=str, choices=['QC', 'CQ'], help='组合顺序')

    sweep = sub.add_parser('sweep', parents=[common], help='扫描实验，输出 CSV')
    sweep.add_argument('grid', type=str, help='扫描网格（JSON 或 YAML）')

    verify = sub.add_parser('verify', parents=[common], help='运行不变量校验套件')
    verify.add_argument('suite', type=str, help=f"套件名: {', '.join(SUITES)}")
    verify.add_argument('--quick', action='store_true', help='缩小试验次数')
    return parser


def build_config(args: argparse.Namespace) -> ConfigManager:
    """
    命令行参数以 section_key 形式覆盖配置，并替换全局配置管理器
    """
    cli_args: Dict[str, Any] = {
        'run_seed': args.seed,
        'run_eps': args.eps,
        'run_delta': args.delta,
        'run_learner': args.learner,
        'run_jobs': args.jobs,
        'run_out': args.out,
        'dense_cap': args.dense_cap,
    }
    manager = ConfigManager(config_path=args.config, cli_args=cli_args)
    return set_config_manager(manager)


def _explicit(args: argparse.Namespace, name: str, fallback: Any) -> Any:
    # 显式给出的命令行值不经配置层的默认值回退，非法时由 RunConfig.validate 报错
    value = getattr(args, name, None)
    return fallback if value is None else value


def build_run_config(manager: ConfigManager, args: argparse.Namespace, instance: Optional[str] = None) -> RunConfig:
    run = manager.get_run_config()
    return RunConfig(
        seed=_explicit(args, 'seed', run['seed']), learner=run['learner'], instance=instance,
        eps=_explicit(args, 'eps', run['eps']), delta=_explicit(args, 'delta', run['delta']),
        constants=dict(manager.get_learner_config()), out=run['out'],
        dense_cap=_explicit(args, 'dense_cap', manager.get_dense_config()['cap']),
        jobs=_explicit(args, 'jobs', run['jobs']),
        k_bound=getattr(args, 'k_bound', None), d_bound=getattr(args, 'd_bound', None),
        t_bound=getattr(args, 't_bound', None),
    ).validate()


def cmd_gen(args: argparse.Namespace, manager: ConfigManager) -> int:
    loader = DataLoader(manager)
    kind, spec = loader.load_spec(args.spec)
    config = build_run_config(manager, args)
    instance = gen_instance(kind, spec, np.random.default_rng(config.seed))
    out = args.out or 'instance.json'
    instance_file, witness_file = loader.save_instance(instance, out)
    print(f"实例: {instance_file}\n见证: {witness_file}")
    return EXIT_OK


def cmd_learn(args: argparse.Namespace, manager: ConfigManager) -> int:
    """
    同一 (seed, 配置, 实例) 得到逐字节相同的报告；学习失败时仍写出带失败阶段的报告
    """
    loader = DataLoader(manager)
    config = build_run_config(manager, args, instance=args.instance)
    unitary, witness = loader.load_instance(args.instance)
    bounds = LearnBounds.from_witness(witness, k_bound=args.k_bound, a=args.a, b=args.b,
                                      d_bound=args.d_bound, t_bound=args.t_bound, direction=args.direction)
    params = LearnParams.from_config(manager, eps=config.eps, delta=config.delta)
    info(f"学习开始: 学习器={config.learner}, n={unitary.n}, eps={config.eps}, seed={config.seed}", LOG_NAME)
    outcome = execute_learner(config.learner, unitary, params, np.random.default_rng(config.seed), bounds,
                              witness_present=witness is not None)
    report = outcome.report
    report.seed = config.seed
    report.config = config.to_dict()
    loader.save_report(report, config.out)
    if not report:
        error(f"学习失败，阶段 {report.stage}: {report.message}", LOG_NAME, exc_info=False)
        return EXIT_LEARNER_FAILURE
    distance = report.distances['dist_phaseop'] if report.distances else None
    print(f"状态: {report.status}  查询: {dict(report.queries)}  dist_phaseop: {distance}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, manager: ConfigManager) -> int:
    loader = DataLoader(manager)
    path = args.grid
    if path.endswith(('.yaml', '.yml')):
        if not os.path.exists(path):
            raise ValidationError(f"文件不存在: {path}", field='path')
        with open(path, 'r', encoding='utf-8') as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ValidationError(f"扫描网格格式错误: {e}", field='grid', cause=e)
    else:
        data = loader.load_json(path)
    grid = SweepGrid.from_dict(data)
    config = build_run_config(manager, args)
    params = LearnParams.from_config(manager, eps=config.eps, delta=config.delta)
    out = args.out or 'sweep.csv'
    frame, summary = run_sweep(grid, params, jobs=config.jobs, out=out)
    print(f"扫描完成: {len(frame)} 行 -> {out}，摘要 -> {summary_path(out)}")
    print(f"斜率(log 1/eps): {summary['slope_eps']}  斜率(k): {summary['slope_k']}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, manager: ConfigManager) -> int:
    config = build_run_config(manager, args)
    result = run_suite(args.suite, seed=config.seed, quick=args.quick)
    for check in result.checks:
        print(f"{'✅' if check['ok'] else '❌'} {args.suite}.{check['name']}")
    if args.out:
        DataLoader(manager).save_json(result.to_dict(), args.out)
    return EXIT_OK if result.passed else EXIT_LEARNER_FAILURE


COMMANDS = {'gen': cmd_gen, 'learn': cmd_learn, 'sweep': cmd_sweep, 'verify': cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    :param argv: 参数列表，None 时取 sys.argv
    :return: 退出码
    """
    args = build_parser().parse_args(argv)
    set_log_level(args.log_level)
    try:
        manager = build_config(args)
        return COMMANDS[args.command](args, manager)
    except LearnerFailure as e:
        handle_exception(e, LOG_NAME)
        return EXIT_LEARNER_FAILURE
    except USAGE_ERRORS as e:
        print(format_error_message(e), file=sys.stderr)
        handle_exception(e, LOG_NAME)
        return EXIT_USAGE
    except BaseError as e:
        handle_exception(e, LOG_NAME)
        return EXIT_LEARNER_FAILURE
    except KeyboardInterrupt:
        error("用户中断操作", LOG_NAME, exc_info=False)
        return EXIT_LEARNER_FAILURE


if __name__ == '__main__':
    sys.exit(main())
