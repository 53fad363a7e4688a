"""
graph_distil 异常模块
定义库代码抛出的错误类型，CLI据此映射退出码
"""


class DistilError(Exception):
    """所有 graph_distil 错误的基类"""


class SizeLimitError(DistilError):
    """请求超出内部规模限制（例如 n+k > 12 的全症状统计）"""


class InvalidCodeError(DistilError, ValueError):
    """图码无效（rank(A) < k）或标记无效"""


class NotSymplecticError(DistilError, ValueError):
    """矩阵不满足 MᵀΩM = Ω"""


class UnsupportedGateError(DistilError, ValueError):
    """门不在当前操作支持的门集合内"""


class ConfigError(DistilError, ValueError):
    """配置文件存在但无法解析或校验失败"""


class FixtureError(DistilError, KeyError):
    """未知的夹具标识"""


class ParseError(DistilError, ValueError):
    """graph6、JSON 或电路文件格式错误"""
