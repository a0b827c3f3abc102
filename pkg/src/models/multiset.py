"""
Multiset Model
问题实例：多重集、排列、置换和、证书以及分块分解
"""

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.residue import Modulus, Residue, factorize, gcd


@dataclass(frozen=True)
class ZMultiset:
    """
    Z_m 中恰好 m 个元素的多重集（排序存储，保留重数）
    """
    modulus: Modulus
    elements: Tuple[int, ...]

    def __post_init__(self):
        m = self.modulus.m
        if len(self.elements) != m:
            raise ValueError(f"multiset of Z_{m} needs exactly {m} elements, got {len(self.elements)}")
        for value in self.elements:
            if not 0 <= value < m:
                raise ValueError(f"element {value} is not a residue of Z_{m}")
        object.__setattr__(self, "elements", tuple(sorted(self.elements)))

    @classmethod
    def from_values(cls, m: int, values: Iterable[int]) -> "ZMultiset":
        """按模 m 归约后构造"""
        return cls(factorize(m), tuple(int(v) % m for v in values))

    @property
    def m(self) -> int:
        return self.modulus.m

    def counts(self) -> Dict[int, int]:
        return dict(Counter(self.elements))

    def distinct(self) -> List[int]:
        return sorted(set(self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __str__(self) -> str:
        return f"{self.m}: " + ",".join(str(v) for v in self.elements)


@dataclass(frozen=True)
class Arrangement:
    """有序序列 (a_1, ..., a_m)，位置从 1 开始"""
    modulus: Modulus
    sequence: Tuple[int, ...]

    def __post_init__(self):
        m = self.modulus.m
        if len(self.sequence) != m:
            raise ValueError(f"arrangement of Z_{m} needs {m} entries, got {len(self.sequence)}")
        object.__setattr__(self, "sequence", tuple(int(v) % m for v in self.sequence))

    @classmethod
    def of(cls, parent: ZMultiset, sequence: Sequence[int]) -> "Arrangement":
        """从父多重集构造，并检查多重集相等"""
        arrangement = cls(parent.modulus, tuple(sequence))
        if tuple(sorted(arrangement.sequence)) != parent.elements:
            raise ValueError("sequence is not a rearrangement of the parent multiset")
        return arrangement

    @property
    def m(self) -> int:
        return self.modulus.m

    def multiset(self) -> ZMultiset:
        return ZMultiset(self.modulus, self.sequence)

    def rotate(self, r: int) -> "Arrangement":
        """循环平移：新序列从原来的第 r+1 个位置开始"""
        r %= self.m
        return Arrangement(self.modulus, self.sequence[r:] + self.sequence[:r])

    def __getitem__(self, position: int) -> int:
        """1-based access"""
        if not 1 <= position <= self.m:
            raise IndexError(f"position {position} outside 1..{self.m}")
        return self.sequence[position - 1]

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class SumCertificate:
    """排列 + 声明的置换和，任何验证者都可 O(m) 复核"""
    arrangement: Arrangement
    value: Residue
    parent: Optional[ZMultiset] = None

    def to_dict(self) -> Dict:
        return {
            "m": self.arrangement.m,
            "arrangement": list(self.arrangement.sequence),
            "value": int(self.value),
        }


@dataclass(frozen=True)
class BlockDecomposition:
    """
    把排列切成 p 个连续块 T_1..T_p，每块 m* = m/p 个元素

    Φ ≡ R + m*·Σ_{i=0}^{p-1} i·S_{i+1} (mod m)
    """
    p: int
    m: int
    m_star: int
    blocks: Tuple[Tuple[int, ...], ...]
    block_sums: Tuple[int, ...]
    inner_sums: Tuple[int, ...]
    R: int
    R_prime: Optional[int] = None
    arrangement: Optional[Arrangement] = field(default=None, compare=False)

    def block_range(self, index: int) -> range:
        """0-based 块编号对应的 1-based 位置区间"""
        start = index * self.m_star + 1
        return range(start, start + self.m_star)

    def reconstructed_sum(self) -> int:
        weighted = sum(i * s for i, s in enumerate(self.block_sums))
        return (self.R + self.m_star * weighted) % self.m


def sequence_sum(sequence: Sequence[int], m: int) -> int:
    """Σ i·a_i mod m for a plain sequence"""
    return sum(i * a for i, a in enumerate(sequence, 1)) % m


def perm_sum(a: Arrangement) -> Residue:
    """置换和 Φ = Σ i·a_i mod m"""
    return Residue(sequence_sum(a.sequence, a.m), a.m)


def translate(M: ZMultiset, c) -> ZMultiset:
    shift = int(c)
    return ZMultiset(M.modulus, tuple((v + shift) % M.m for v in M.elements))


def dilate(M: ZMultiset, c) -> ZMultiset:
    factor = int(c)
    if gcd(factor % M.m, M.m) != 1:
        raise ValueError(f"dilation factor {factor} is not a unit modulo {M.m}")
    return ZMultiset(M.modulus, tuple((v * factor) % M.m for v in M.elements))


def _class_key(value: int, p: int, k: int) -> Tuple[int, ...]:
    return tuple(value % p ** level for level in range(1, k + 1)) + (value,)


def separable_order(M: ZMultiset, p: int) -> Arrangement:
    """
    基数分组：先按 mod p 分组，再按 mod p^2, ..., mod p^k 细化，同类按数值升序
    """
    if p < 2 or M.m % p:
        raise ValueError(f"{p} does not divide {M.m}")
    k = M.modulus.exponent(p)
    ordered = sorted(M.elements, key=lambda v: _class_key(v, p, k))
    return Arrangement(M.modulus, tuple(ordered))


def _cyclically_contiguous(classes: Sequence[int]) -> bool:
    distinct = len(set(classes))
    if distinct <= 1:
        return True
    size = len(classes)
    boundaries = sum(1 for i in range(size) if classes[i] != classes[(i + 1) % size])
    return boundaries == distinct


def is_separable_cyclic(a: Arrangement, p: int) -> bool:
    """某个循环平移相对 p 可分 ⟺ 每一层 mod p^l 的同余类都是连续的循环弧"""
    if p < 2 or a.m % p:
        raise ValueError(f"{p} does not divide {a.m}")
    k = a.modulus.exponent(p)
    for level in range(1, k + 1):
        modulus = p ** level
        if not _cyclically_contiguous([v % modulus for v in a.sequence]):
            return False
    return True


def decompose_sequence(sequence: Sequence[int], m: int, p: int) -> BlockDecomposition:
    if p < 1 or m % p:
        raise ValueError(f"{p} does not divide {m}")
    m_star = m // p
    blocks = tuple(tuple(sequence[i * m_star:(i + 1) * m_star]) for i in range(p))
    block_sums = tuple(sum(block) % m for block in blocks)
    inner_sums = tuple(sequence_sum(block, m) for block in blocks)
    R = sum(inner_sums) % m
    R_prime = (R // m_star) % p if R % m_star == 0 else None
    return BlockDecomposition(p=p, m=m, m_star=m_star, blocks=blocks, block_sums=block_sums,
                              inner_sums=inner_sums, R=R, R_prime=R_prime)


def decompose(a: Arrangement, p: int) -> BlockDecomposition:
    """按 p 个连续块分解排列，计算 S_i, R_i, R 与 R'"""
    return replace(decompose_sequence(a.sequence, a.m, p), arrangement=a)


def braid_transpose(a: Arrangement, i: int, x: int) -> Tuple[Arrangement, Residue]:
    """
    交换 a_i 与 a_{i+x}

    Returns:
        (新排列, delta = x·(a_i − a_{i+x}) mod m)
    """
    j = i + x
    if not (1 <= i <= a.m and 1 <= j <= a.m):
        raise IndexError(f"positions {i} and {j} must lie in 1..{a.m}")
    values = list(a.sequence)
    delta = Residue(x * (values[i - 1] - values[j - 1]), a.m)
    values[i - 1], values[j - 1] = values[j - 1], values[i - 1]
    return Arrangement(a.modulus, tuple(values)), delta


def verify(c: SumCertificate) -> bool:
    """独立复核：重算 Φ，并与父多重集比较"""
    arrangement = c.arrangement
    if c.parent is not None:
        if c.parent.m != arrangement.m:
            return False
        if tuple(sorted(arrangement.sequence)) != c.parent.elements:
            return False
    return perm_sum(arrangement) == Residue(int(c.value), arrangement.m)


def certify(parent: ZMultiset, sequence: Sequence[int]) -> SumCertificate:
    arrangement = Arrangement.of(parent, sequence)
    return SumCertificate(arrangement=arrangement, value=perm_sum(arrangement), parent=parent)
