"""
Block Tools
块级工具：块内排列到指定余数、单次对换搜索、块保持置换使 d | R
"""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.residue import gcd, mod_inverse
from ..models.exceptional import ExceptionalStructure
from ..models.multiset import ZMultiset, sequence_sum
from .classifier import ExceptionClassifier, match_inhomogeneous

logger = logging.getLogger(__name__)


class ConstructionGap(RuntimeError):
    """构造分支穷尽了所有情形却没有得到结果"""

    def __init__(self, message: str, step: str = ""):
        super().__init__(message)
        self.step = step


def swap_delta(sequence: Sequence[int], i: int, j: int, modulus: int) -> int:
    """交换 1-based 位置 i < j 后 Φ 的增量 (j − i)(a_i − a_j)"""
    return ((j - i) * (sequence[i - 1] - sequence[j - 1])) % modulus


def swap(sequence: List[int], i: int, j: int) -> None:
    sequence[i - 1], sequence[j - 1] = sequence[j - 1], sequence[i - 1]


def find_transposition(sequence: Sequence[int],
                       modulus: int,
                       need: int,
                       lo: int = 1,
                       hi: Optional[int] = None,
                       offsets: Optional[Iterable[int]] = None,
                       exclude: Iterable[int] = (),
                       budget: Optional[int] = None) -> Optional[Tuple[int, int]]:
    """
    找一对位置 lo ≤ i < j ≤ hi，使交换后 Φ 增加 need (mod modulus)

    对每个位移 δ 先解出所需差值 a_i − a_j (mod modulus/gcd(δ, modulus))，
    再线性扫描该位移上的所有位置对

    Returns:
        (i, j) 或 None
    """
    hi = len(sequence) if hi is None else hi
    need %= modulus
    span = hi - lo
    excluded = set(exclude)
    checked = 0
    candidates = offsets if offsets is not None else range(1, span + 1)
    for delta in candidates:
        if delta <= 0 or delta > span:
            continue
        g = gcd(delta, modulus)
        if need % g:
            continue
        reduced = modulus // g
        wanted = ((need // g) * mod_inverse((delta // g) % reduced, reduced)) % reduced if reduced > 1 else 0
        for i in range(lo, hi - delta + 1):
            j = i + delta
            if i in excluded or j in excluded:
                continue
            difference = sequence[i - 1] - sequence[j - 1]
            if difference % modulus and difference % reduced == wanted:
                return i, j
            checked += 1
            if budget is not None and checked >= budget:
                return None
    return None


def lift_order(values: Sequence[int], residue_order: Sequence[int], d: int) -> List[int]:
    """把 Z_d 上的排列映射回原始元素（同余类内任意对应）"""
    pools: Dict[int, List[int]] = defaultdict(list)
    for value in values:
        pools[value % d].append(value)
    lifted = []
    for residue in residue_order:
        pool = pools.get(residue % d)
        if not pool:
            raise ConstructionGap(f"residue {residue} is not available when lifting a block order")
        lifted.append(pool.pop())
    return lifted


def nonzero_split(count: int, d: int) -> List[int]:
    """count ≥ 2 个非零剩余，和 ≡ 0 (mod d)，要求 d ≥ 3"""
    head = [1] * (count - 2)
    rest = (-(count - 2)) % d
    first = 1 if (rest - 1) % d else 2
    return head + [first, (rest - first) % d]


def chunks(sequence: Sequence[int], size: int) -> List[List[int]]:
    return [list(sequence[i:i + size]) for i in range(0, len(sequence), size)]


def block_residue_sum(sequence: Sequence[int], d: int, modulus: int) -> int:
    """R: 长为 d 的各块块内置换和之和 (mod modulus)"""
    return sum(sequence_sum(chunk, modulus) for chunk in chunks(sequence, d)) % modulus


class BlockArranger:
    """
    块内排列器
    递归调用求解引擎处理非例外块，例外块按结构直接放置
    """

    def __init__(self, engine, classifier: ExceptionClassifier):
        self.engine = engine
        self.classifier = classifier

    def classify(self, values: Sequence[int], d: int):
        return self.classifier.classify_mod(values, d)

    def zero(self, values: Sequence[int], d: int, run) -> List[int]:
        """块内排列使 Σ j·v_j ≡ 0 (mod d)；块必须非例外"""
        if d == 1:
            return list(values)
        block = ZMultiset.from_values(d, values)
        residue_order = self.engine.zero_sequence(block, run)
        return lift_order(values, residue_order, d)

    def target(self, values: Sequence[int], d: int, w: int, run,
               classification=None) -> Optional[List[int]]:
        """
        块内排列使 Σ j·v_j ≡ w (mod d)

        Returns:
            排列，或 None（无法构造，且无法由 oracle 判定）
        """
        w %= d
        if classification is None:
            classification = self.classify(values, d)
        if classification:
            return self.exceptional_target(values, d, classification, w, run)
        return self._nonexceptional_target(values, d, w, run)

    def _nonexceptional_target(self, values: Sequence[int], d: int, w: int, run) -> Optional[List[int]]:
        ordered = self.zero(values, d, run)
        if w == 0:
            return ordered
        pair = find_transposition(ordered, d, w, budget=run.settings.offset_budget * d)
        if pair is not None:
            swap(ordered, *pair)
            return ordered
        if d <= run.settings.oracle_cap:
            certificate = self.engine.oracle_witness(ZMultiset.from_values(d, values), w, run)
            if certificate is None:
                return None
            return lift_order(values, certificate.arrangement.sequence, d)
        return None

    def exceptional_target(self, values: Sequence[int], d: int, structure: ExceptionalStructure,
                           w: int, run) -> Optional[List[int]]:
        """
        例外块的显式放置

        非齐次：a+b 放在 i，a−b 放在 j，Φ ≡ a·T(d) + b(i − j)
        齐次：平移 −c 后块不再例外，求 Φ' ≡ w − c·T(d)
        """
        w %= d
        triangular = (d * (d + 1) // 2) % d
        if structure.is_homogeneous:
            c = structure.c
            shifted = [(v - c) % d for v in values]
            order = self.target(shifted, d, (w - c * triangular) % d, run)
            if order is None:
                return None
            return lift_order(values, [(u + c) % d for u in order], d)

        residues = [v % d for v in values]
        match = match_inhomogeneous(d, sorted(residues), require_even_a=d % 2 == 0)
        if match is None:
            raise ConstructionGap(f"block {residues} lost its inhomogeneous structure mod {d}")
        a, b = match
        plus, minus = (a + b) % d, (a - b) % d
        offset = ((w - a * triangular) * mod_inverse(b, d)) % d
        if offset == 0:
            return None
        pools: Dict[int, List[int]] = defaultdict(list)
        for value in values:
            pools[value % d].append(value)
        plus_value = pools[plus].pop()
        minus_value = pools[minus].pop()
        rest = [v for residue in sorted(pools) for v in pools[residue]]
        ordered: List[Optional[int]] = [None] * d
        ordered[0] = minus_value
        ordered[offset] = plus_value
        filler = iter(rest)
        for index in range(d):
            if ordered[index] is None:
                ordered[index] = next(filler)
        return ordered

    def reach_divisibility(self, sequence: Sequence[int], d: int, run) -> Optional[List[int]]:
        """
        块保持置换使 Σ R_i ≡ 0 (mod d)，块长 d 为奇数

        无例外块：每块递归求零
        至少两个例外块：例外块取和为 0 的非零目标
        恰一个例外块：另找一个非常数块提供非零值 v，例外块取 −v

        Returns:
            新序列；若恰一个例外块且其余块 mod d 都是常数，返回 None
        """
        if d == 1:
            return list(sequence)
        blocks = chunks(sequence, d)
        classes = [self.classify(block, d) for block in blocks]
        exceptional = [index for index, cls in enumerate(classes) if cls]
        result: List[List[int]] = [list(block) for block in blocks]

        if not exceptional:
            for index, block in enumerate(blocks):
                result[index] = self.zero(block, d, run)
        elif len(exceptional) >= 2:
            targets = nonzero_split(len(exceptional), d)
            for index, block in enumerate(blocks):
                if index not in exceptional:
                    result[index] = self.zero(block, d, run)
            for index, w in zip(exceptional, targets):
                placed = self.exceptional_target(blocks[index], d, classes[index], w, run)
                if placed is None:
                    raise ConstructionGap(f"exceptional block cannot take value {w} mod {d}")
                result[index] = placed
        else:
            special = exceptional[0]
            donor = next((index for index, block in enumerate(blocks)
                          if index != special and len({v % d for v in block}) > 1), None)
            if donor is None:
                return None
            for index, block in enumerate(blocks):
                if index != special:
                    result[index] = self.zero(block, d, run)
            donor_block = result[donor]
            position = next(i for i in range(d - 1) if (donor_block[i] - donor_block[i + 1]) % d)
            donor_block[position], donor_block[position + 1] = donor_block[position + 1], donor_block[position]
            value = sequence_sum(donor_block, d)
            placed = self.exceptional_target(blocks[special], d, classes[special], -value, run)
            if placed is None:
                raise ConstructionGap(f"exceptional block cannot compensate {value} mod {d}")
            result[special] = placed

        merged = [v for block in result for v in block]
        total = sum(sequence_sum(block, d) for block in result) % d
        if total:
            raise ConstructionGap(f"block step left R ≡ {total} (mod {d})")
        return merged
