"""
Exception Classifier
直接做结构模式匹配，判断多重集是否为例外多重集（不存在零置换和）
"""

from collections import Counter
from typing import Optional, Sequence, Tuple, Union

from ..core.residue import factorize, gcd
from ..models.exceptional import (
    NON_EXCEPTIONAL,
    ExceptionalStructure,
    ExceptionKind,
    ForcedSum,
    _NonExceptional,
)
from ..models.multiset import ZMultiset
from .spectrum_oracle import SpectrumOracle

Classification = Union[ExceptionalStructure, _NonExceptional]

ORACLE_ONLY_BELOW = 3


def shape_candidates(m: int, elements: Sequence[int]):
    """
    枚举 {a ×(m−2), x, y} 的所有分解 (a, x, y)
    """
    if m == 2:
        # m − 2 = 0: a ranges over all of Z_2
        for a in range(2):
            yield a, min(elements), max(elements)
        return
    counts = Counter(elements)
    if len(counts) > 3:
        return
    for a, multiplicity in counts.items():
        if multiplicity < m - 2:
            continue
        rest = Counter(counts)
        rest[a] -= m - 2
        leftovers = sorted(rest.elements())
        if len(leftovers) == 2:
            yield a, leftovers[0], leftovers[1]


def match_inhomogeneous(m: int, elements: Sequence[int], require_even_a: bool) -> Optional[Tuple[int, int]]:
    """
    匹配 {a ×(m−2), a+b, a−b}，(b, m) = 1

    Returns:
        (a, b) 或 None
    """
    if m < 2:
        return None
    for a, x, y in shape_candidates(m, elements):
        if require_even_a and a % 2:
            continue
        b = (x - a) % m
        if (a - b) % m == y and gcd(b, m) == 1:
            return a, b
    return None


def inhomogeneous_shape(M: ZMultiset) -> bool:
    """{a,…,a, a+b, a−b} 形状（b 任意，含 b = 0）"""
    m = M.m
    if m < 2:
        return False
    for a, x, y in shape_candidates(m, M.elements):
        if (x + y - 2 * a) % m == 0:
            return True
    return False


def shape_center(elements: Sequence[int], modulus: int) -> Optional[int]:
    """mod modulus 呈 {t ×(len−2), x, y} 且 x + y ≡ 2t 时返回 t"""
    residues = sorted(v % modulus for v in elements)
    for t, x, y in shape_candidates(len(residues), residues):
        if (x + y - 2 * t) % modulus == 0:
            return t
    return None


def uniform_mod_prime(M: ZMultiset) -> Optional[int]:
    """返回使全部元素 mod p 相同的素数 p | m（若存在）"""
    for p in M.modulus.primes:
        if len({v % p for v in M.elements}) == 1:
            return p
    return None


def _homogeneous_residue(M: ZMultiset) -> Optional[int]:
    if not M.modulus.is_even:
        return None
    power = 2 ** M.modulus.k
    residues = {v % power for v in M.elements}
    if len(residues) == 1:
        (c,) = residues
        if c % 2 == 1:
            return c
    return None


class ExceptionClassifier:
    """
    例外结构分类器
    m ≥ 3 时纯模式匹配；m ∈ {1, 2} 时交给 oracle
    """

    def __init__(self, oracle: Optional[SpectrumOracle] = None):
        self.oracle = oracle or SpectrumOracle()

    def classify(self, M: ZMultiset) -> Classification:
        """
        分类多重集

        Args:
            M: Z_m 上的多重集

        Returns:
            ExceptionalStructure 或 NON_EXCEPTIONAL
        """
        if M.m < ORACLE_ONLY_BELOW:
            return self._classify_by_oracle(M)

        c = _homogeneous_residue(M)
        if c is not None:
            return ExceptionalStructure(ExceptionKind.HOMOGENEOUS, M.modulus, c=c)

        match = match_inhomogeneous(M.m, M.elements, require_even_a=M.modulus.is_even)
        if match is not None:
            a, b = match
            return ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, M.modulus, a=a, b=b)
        return NON_EXCEPTIONAL

    def _classify_by_oracle(self, M: ZMultiset) -> Classification:
        if self.oracle.has_zero(M):
            return NON_EXCEPTIONAL
        c = _homogeneous_residue(M)
        if c is not None:
            return ExceptionalStructure(ExceptionKind.HOMOGENEOUS, M.modulus, c=c)
        match = match_inhomogeneous(M.m, M.elements, require_even_a=M.modulus.is_even)
        if match is not None:
            return ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, M.modulus, a=match[0], b=match[1])
        raise RuntimeError(f"{M} has no zero sum but matches no exceptional pattern")

    def classify_mod(self, elements: Sequence[int], d: int) -> Classification:
        """把一个块的元素 mod d 归约后，作为 Z_d 上的多重集分类"""
        if len(elements) != d:
            raise ValueError(f"block of {len(elements)} elements cannot be classified in Z_{d}")
        return self.classify(ZMultiset.from_values(d, elements))


def forced_sum(e: ExceptionalStructure) -> ForcedSum:
    """
    例外结构的强制取值

    非齐次：除 0 外全部可达
    齐次：m/2 可达，Φ ≡ c·2^(k−1) (mod 2^k)，所以不满足该同余的值都不可达
    """
    m = e.modulus.m
    if not e.is_homogeneous:
        return ForcedSum(attainable=frozenset(range(1, m)), forbidden=frozenset({0}))

    power = 2 ** e.modulus.k
    forced = (e.c * power // 2) % power
    forbidden = frozenset(w for w in range(m) if w % power != forced)
    return ForcedSum(attainable=frozenset({m // 2}), forbidden=forbidden, congruence=(forced, power))


_default_classifier: Optional[ExceptionClassifier] = None


def _classifier() -> ExceptionClassifier:
    global _default_classifier
    if _default_classifier is None:
        _default_classifier = ExceptionClassifier()
    return _default_classifier


def classify(M: ZMultiset) -> Classification:
    return _classifier().classify(M)


def classify_mod(elements: Sequence[int], d: int) -> Classification:
    return _classifier().classify_mod(elements, d)


def is_exceptional(M: ZMultiset) -> bool:
    return bool(classify(M))


def classify_values(m: int, values: Sequence[int]) -> Classification:
    return classify(ZMultiset(factorize(m), tuple(v % m for v in values)))
