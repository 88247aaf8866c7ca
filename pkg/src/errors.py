"""
异常定义
模拟、分析与命令行共用的错误类型
"""
from typing import Optional, Any


class SimulationError(Exception):
    """模拟系统的基础异常"""


class ParameterError(SimulationError, ValueError):
    """物理参数或积分参数不合法"""


class ConfigError(SimulationError, ValueError):
    """运行配置（JSON / 命令行）解析或校验失败"""


class TrajectoryTooShort(SimulationError):
    """轨迹长度不足以计算周期平均"""


class NumericalFailure(SimulationError):
    """积分过程中出现 NaN / ∞"""

    def __init__(self, message: str, t: float, partial: Optional[Any] = None):
        """
        Args:
            message: 错误描述
            t: 出错时刻
            partial: 出错前已记录的部分轨迹（Trajectory 或 None）
        """
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t
        self.partial = partial
