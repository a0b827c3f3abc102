"""
简单的配置管理 - 加载.env文件，并汇总求解器设置
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 20
PRIME_ORACLE_THRESHOLD = 13
DIRECT_THRESHOLD = 4096


def load_env_file(env_file=".env"):
    """加载.env文件到环境变量（不覆盖已存在的变量）"""
    if os.path.exists(env_file):
        with open(env_file, 'r', encoding='utf-8') as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith('#') and '=' in line:
                    key, value = line.split('=', 1)
                    key = key.strip()
                    value = value.strip().strip('"').strip("'")
                    if key and not os.getenv(key):
                        os.environ[key] = value


def _int_from_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", name, raw)
        return default


def get_oracle_cap() -> int:
    """PERMSUM_ORACLE_CAP 覆盖默认的 oracle 上限 20"""
    cap = _int_from_env("PERMSUM_ORACLE_CAP", DEFAULT_ORACLE_CAP)
    return max(1, cap)


@dataclass(frozen=True)
class SolverSettings:
    """
    求解器设置

    oracle_cap: 暴力 oracle 允许的最大 m
    seed: 随机搜索使用的种子
    debug: 每一步之后重新验证 Φ 与块不变量
    prime_oracle_threshold: p ≤ 该值时素数情形可直接回退到 oracle
    search_rounds: 素数情形随机重排的最大轮数（None 表示 p 轮）
    offset_budget: 每轮检查的位移个数上限
    direct_threshold: m ≥ 该值时先试一次随机重排 + 向量化对换
    """
    oracle_cap: int = DEFAULT_ORACLE_CAP
    seed: int = 0
    debug: bool = False
    prime_oracle_threshold: int = PRIME_ORACLE_THRESHOLD
    search_rounds: Optional[int] = None
    offset_budget: int = 64
    direct_threshold: int = DIRECT_THRESHOLD

    def with_overrides(self, **overrides) -> "SolverSettings":
        """只替换非 None 的字段"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self


def load_settings(env_file: str = ".env") -> SolverSettings:
    """从 .env / 环境变量读取设置"""
    load_env_file(env_file)
    debug_flag = os.getenv("PERMSUM_DEBUG", "").strip().lower() in {"1", "true", "yes", "on"}
    return SolverSettings(
        oracle_cap=get_oracle_cap(),
        seed=_int_from_env("PERMSUM_SEED", 0),
        debug=debug_flag,
        direct_threshold=_int_from_env("PERMSUM_DIRECT_THRESHOLD", DIRECT_THRESHOLD),
    )
