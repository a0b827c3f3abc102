"""
Spectrum Oracle
暴力基准：多重数向量上的子集 DP，给出全部可达置换和并回溯见证排列
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import List, Optional, Sequence, Tuple

from ..core.residue import Modulus, factorize
from ..models.multiset import SumCertificate, ZMultiset, certify, sequence_sum
from ..utils.config import get_oracle_cap

logger = logging.getLogger(__name__)

NAIVE_LIMIT = 7


class OracleCapExceeded(ValueError):
    """m 超过 oracle 上限"""

    def __init__(self, m: int, cap: int):
        super().__init__(f"oracle cap exceeded: m={m} > cap={cap}")
        self.m = m
        self.cap = cap


@dataclass(frozen=True)
class Spectrum:
    """可达置换和集合；mask 的第 w 位为 1 当且仅当 w 可达"""
    modulus: Modulus
    mask: int

    @property
    def values(self) -> Tuple[int, ...]:
        return tuple(w for w in range(self.modulus.m) if (self.mask >> w) & 1)

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.modulus.m) - 1

    def __contains__(self, value) -> bool:
        return bool((self.mask >> (int(value) % self.modulus.m)) & 1)

    def __iter__(self):
        return iter(self.values)

    def describe(self) -> str:
        return "{" + ", ".join(str(w) for w in self.values) + "}"


def _rotate(mask: int, shift: int, m: int, full: int) -> int:
    if shift == 0:
        return mask
    return ((mask << shift) | (mask >> (m - shift))) & full


def _layout(elements: Sequence[int]) -> Tuple[List[int], List[int], List[int], int]:
    values: List[int] = []
    counts: List[int] = []
    for value in elements:
        if values and values[-1] == value:
            counts[-1] += 1
        else:
            values.append(value)
            counts.append(1)
    strides = []
    total = 1
    for count in counts:
        strides.append(total)
        total *= count + 1
    return values, counts, strides, total


def _build_table(m: int, elements: Tuple[int, ...]) -> Tuple[List[int], List[int], List[int], List[int]]:
    """
    f[S]：把系数 1..|S| 分配给多重数向量 S 所选元素后可达的和（位掩码）

    相同数值按规范顺序处理，只枚举多重数向量而不是子集
    """
    values, counts, strides, total = _layout(elements)
    full = (1 << m) - 1
    table = [0] * total
    table[0] = 1
    digits = [0] * len(values)
    position = 0
    for index in range(total):
        mask = table[index]
        if mask:
            for t, value in enumerate(values):
                if digits[t] < counts[t]:
                    shift = ((position + 1) * value) % m
                    table[index + strides[t]] |= _rotate(mask, shift, m, full)
        # odometer step
        for t in range(len(values)):
            if digits[t] < counts[t]:
                digits[t] += 1
                position += 1
                break
            position -= digits[t]
            digits[t] = 0
    return table, values, counts, strides


@lru_cache(maxsize=65536)
def _spectrum_mask(m: int, elements: Tuple[int, ...]) -> int:
    table, _, _, _ = _build_table(m, elements)
    return table[-1]


class SpectrumOracle:
    """
    子集 DP oracle
    与分类器、构造求解器完全独立，作为对照基准
    """

    def __init__(self, cap: Optional[int] = None):
        self.cap = cap if cap is not None else get_oracle_cap()
        self.calls = 0

    def _check_cap(self, M: ZMultiset):
        if M.m > self.cap:
            raise OracleCapExceeded(M.m, self.cap)

    def spectrum(self, M: ZMultiset) -> Spectrum:
        """
        计算多重集的精确谱

        Args:
            M: Z_m 上的多重集，m 不超过 cap

        Returns:
            Spectrum
        """
        self._check_cap(M)
        self.calls += 1
        return Spectrum(M.modulus, _spectrum_mask(M.m, M.elements))

    def has_zero(self, M: ZMultiset) -> bool:
        return 0 in self.spectrum(M)

    def witness(self, M: ZMultiset, target) -> Optional[SumCertificate]:
        """DP 回溯：若 target 可达，返回达到它的排列证书，否则 None"""
        self._check_cap(M)
        self.calls += 1
        m = M.m
        goal = int(target) % m
        if not (_spectrum_mask(m, M.elements) >> goal) & 1:
            return None

        table, values, counts, strides = _build_table(m, M.elements)
        digits = list(counts)
        index = len(table) - 1
        current = goal
        sequence = [0] * m
        for position in range(m, 0, -1):
            for t, value in enumerate(values):
                if digits[t] == 0:
                    continue
                previous = index - strides[t]
                previous_sum = (current - position * value) % m
                if (table[previous] >> previous_sum) & 1:
                    sequence[position - 1] = value
                    digits[t] -= 1
                    index = previous
                    current = previous_sum
                    break
            else:
                raise RuntimeError("spectrum table is inconsistent during backtracking")

        certificate = certify(M, sequence)
        logger.debug("oracle witness for %s -> %s", M, sequence)
        return certificate


def naive_spectrum(M: ZMultiset) -> Spectrum:
    """m! 枚举（仅 m ≤ 7），用来校验 DP"""
    if M.m > NAIVE_LIMIT:
        raise OracleCapExceeded(M.m, NAIVE_LIMIT)
    mask = 0
    for ordering in set(permutations(M.elements)):
        mask |= 1 << sequence_sum(ordering, M.m)
    return Spectrum(M.modulus, mask)


def spectrum(M: ZMultiset, cap: Optional[int] = None) -> Spectrum:
    return SpectrumOracle(cap).spectrum(M)


def witness(M: ZMultiset, target, cap: Optional[int] = None) -> Optional[SumCertificate]:
    return SpectrumOracle(cap).witness(M, target)


def has_zero(M: ZMultiset, cap: Optional[int] = None) -> bool:
    return SpectrumOracle(cap).has_zero(M)


def spectrum_of_values(m: int, values: Sequence[int], cap: Optional[int] = None) -> Spectrum:
    """未排序数值序列的便捷入口"""
    return spectrum(ZMultiset(factorize(m), tuple(v % m for v in values)), cap)
