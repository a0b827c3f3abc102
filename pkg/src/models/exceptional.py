"""
Exceptional Structure Model
例外多重集的结构标签（齐次 / 非齐次）及其见证参数
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Optional

from ..core.residue import Modulus, gcd


class ExceptionKind(Enum):
    """例外结构类型"""
    HOMOGENEOUS = "homogeneous"
    INHOMOGENEOUS = "inhomogeneous"


@dataclass(frozen=True)
class ExceptionalStructure:
    """
    例外结构

    HOMOGENEOUS: m 为偶数，全部元素 mod 2^k 同为奇数 c
    INHOMOGENEOUS: {a ×(m−2), a+b, a−b}，(b, m) = 1，m 为偶数时 a 为偶数
    """
    kind: ExceptionKind
    modulus: Modulus
    c: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None

    def __post_init__(self):
        m = self.modulus.m
        if self.kind is ExceptionKind.HOMOGENEOUS:
            power = 2 ** self.modulus.k
            if self.modulus.k < 1 or self.c is None or self.c % 2 == 0 or not 0 <= self.c < power:
                raise ValueError(f"invalid homogeneous witness c={self.c} for m={m}")
        else:
            if self.a is None or self.b is None:
                raise ValueError("inhomogeneous structure needs both a and b")
            b = self.b % m
            if gcd(b, m) != 1:
                raise ValueError(f"b={self.b} is not coprime to m={m}")
            if self.modulus.is_even and self.a % 2:
                raise ValueError(f"a={self.a} must be even for even m={m}")
            object.__setattr__(self, "a", self.a % m)
            object.__setattr__(self, "b", min(b, (m - b) % m) if m > 1 else b)

    @property
    def is_homogeneous(self) -> bool:
        return self.kind is ExceptionKind.HOMOGENEOUS

    def describe(self) -> str:
        if self.is_homogeneous:
            return f"HOMOGENEOUS c={self.c} mod {2 ** self.modulus.k}"
        return f"INHOMOGENEOUS a={self.a} b={self.b}"

    def to_dict(self) -> Dict:
        data = {"kind": self.kind.value, "m": self.modulus.m}
        if self.is_homogeneous:
            data.update({"c": self.c, "mod": 2 ** self.modulus.k})
        else:
            data.update({"a": self.a, "b": self.b})
        return data


class _NonExceptional:
    """分类结果：非例外"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def describe(self) -> str:
        return "NONE"

    def __repr__(self) -> str:
        return "NON_EXCEPTIONAL"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_NonExceptional, ())


NON_EXCEPTIONAL = _NonExceptional()


@dataclass(frozen=True)
class ForcedSum:
    """
    例外结构的强制取值信息

    attainable: 已知可取到的值（奇数 m 的非齐次情形为 Z_m \\ {0}）
    forbidden: 不可取到的值
    congruence: 齐次情形下 Φ mod 2^k 的强制余数 (residue, modulus)
    """
    attainable: FrozenSet[int]
    forbidden: FrozenSet[int]
    congruence: Optional[tuple] = None
