#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
异常处理模块
学习流水线各阶段的统一异常类和错误处理工具
"""

from typing import Optional, Dict, Any, Union

from src.utils.logger import exception as log_exception


class BaseError(Exception):
    """
    基础异常类
    所有自定义异常都继承自此类
    """

    default_code = 'UNKNOWN_ERROR'

    def __init__(self, message: str, code: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None,
                 cause: Optional[Exception] = None):
        """
        初始化基础异常

        :param message: 错误消息
        :param code: 错误代码，缺省为类的 default_code
        :param details: 错误详情
        :param cause: 原始异常
        """
        self.message = message
        self.code = code or self.default_code
        self.details = details or {}
        self.cause = cause
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"{self.__class__.__name__} [{self.code}]: {self.message}"

    def _put(self, key: str, value: Any) -> None:
        # 子类字段写入 details，已有值不覆盖
        if value is not None and key not in self.details:
            self.details[key] = value

    def to_dict(self) -> Dict[str, Any]:
        """
        将异常转换为字典格式

        :return: 异常信息字典
        """
        result = {
            'error': self.__class__.__name__,
            'code': self.code,
            'message': self.message
        }
        if self.details:
            result['details'] = self.details
        if self.cause:
            result['cause'] = str(self.cause)
        return result


class ConfigError(BaseError):
    """
    配置相关异常
    """
    default_code = 'CONFIG_ERROR'


class ValidationError(BaseError):
    """
    输入校验异常（非法规格、格式错误的JSON、未知的套件名等）
    """
    default_code = 'VALIDATION_ERROR'

    def __init__(self, message: str, field: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.field = field
        self._put('field', field)


class DimensionError(BaseError):
    """
    量子比特数或矩阵维度不匹配
    """
    default_code = 'DIMENSION_ERROR'

    def __init__(self, message: str, expected: Any = None, actual: Any = None, **kwargs):
        super().__init__(message, **kwargs)
        self.expected = expected
        self.actual = actual
        self._put('expected', expected)
        self._put('actual', actual)


class DenseCapError(BaseError):
    """
    超出稠密矩阵规模上限
    """
    default_code = 'DENSE_CAP_EXCEEDED'

    def __init__(self, message: str, n: Optional[int] = None, cap: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.n = n
        self.cap = cap
        self._put('n', n)
        self._put('cap', cap)


class SubspaceError(BaseError):
    """
    子空间关系不成立（T 不包含于 S、辛基关系被破坏）
    """
    default_code = 'SUBSPACE_ERROR'


class OracleAccessError(BaseError):
    """
    请求了预言机不允许的访问方式（例如无逆访问时请求 U†）
    """
    default_code = 'ORACLE_ACCESS_ERROR'

    def __init__(self, message: str, kind: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.kind = kind
        self._put('kind', kind)


class PostselectionError(BaseError):
    """
    后选择尝试次数耗尽
    """
    default_code = 'POSTSELECTION_EXHAUSTED'

    def __init__(self, message: str, attempts: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.attempts = attempts
        self._put('attempts', attempts)


class TomographyError(BaseError):
    """
    态层析失败（副本提供者耗尽等）
    """
    default_code = 'TOMOGRAPHY_ERROR'


class DegenerateInputError(BaseError):
    """
    极分解遇到奇异值过小的输入
    """
    default_code = 'DEGENERATE_INPUT'


class PhaseAlignmentError(BaseError):
    """
    相位对齐中出现退化元素
    """
    default_code = 'PHASE_ALIGNMENT_DEGENERATE'


class BootstrapError(BaseError):
    """
    自举过程失败（本征相位接近 ±π、基础估计聚类过于分散）
    """
    default_code = 'BOOTSTRAP_ERROR'


class LearnerFailure(BaseError):
    """
    学习算法失败，记录失败阶段
    组合学习器额外记录失败的 (i, P) 项
    """
    default_code = 'LEARNER_FAILURE'

    def __init__(self, message: str, stage: Optional[str] = None,
                 term: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.stage = stage
        self.term = term
        self._put('stage', stage)
        self._put('term', term)


def handle_exception(e: Exception, module_name: str = 'general',
                     re_raise: bool = False) -> Dict[str, Any]:
    """
    统一异常处理函数

    :param e: 捕获的异常
    :param module_name: 模块名称
    :param re_raise: 是否重新抛出异常
    :return: 错误信息字典
    """
    if isinstance(e, BaseError):
        error_info = e.to_dict()
        log_exception(str(e), module_name)
    else:
        error_info = {
            'error': e.__class__.__name__,
            'code': 'SYSTEM_ERROR',
            'message': str(e)
        }
        log_exception(f"未处理的异常: {str(e)}", module_name)

    if re_raise:
        raise e
    return error_info


def format_error_message(error: Union[Exception, Dict[str, Any]]) -> str:
    """
    格式化错误信息为可读字符串

    :param error: 错误对象或错误信息字典
    :return: 格式化后的错误字符串
    """
    if isinstance(error, BaseError):
        return str(error)
    if isinstance(error, Exception):
        return f"{error.__class__.__name__}: {str(error)}"
    if isinstance(error, dict):
        return f"{error.get('error', 'UnknownError')} [{error.get('code', 'UNKNOWN')}]: {error.get('message', '')}"
    return str(error)
