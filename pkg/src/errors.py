"""异常定义"""

from typing import Optional


class CompasError(Exception):
    """所有领域错误的基类"""


class NotationError(CompasError, ValueError):
    """节奏记谱 / 音高轨迹解析错误"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)


class CycleMismatchError(CompasError, ValueError):
    """两个节奏的拍数不同"""


class OnsetCountError(CompasError, ValueError):
    """重音数不满足所选置换距离变体的前提"""


class BudgetExceededError(CompasError, RuntimeError):
    """穷举规模超出预算"""

    def __init__(self, message: str, size: int = 0, budget: int = 0):
        self.size = size
        self.budget = budget
        super().__init__(message)


class UnitMismatchError(CompasError, ValueError):
    """音高单位不一致"""


class TreeError(CompasError, ValueError):
    """建树或Newick解析错误"""
