"""
Odd Order Solver
m 为奇合数：可分排列 → 块内求解使 m* | R → 按 R' 调整块顺序，必要时换素数
"""

import logging
from collections import Counter, defaultdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..core.residue import crt, factorize, gcd, mod_inverse, triangular_sum_mod, valuation
from ..models.exceptional import ExceptionalStructure, ExceptionKind
from ..models.multiset import ZMultiset, decompose_sequence, separable_order, sequence_sum
from .block_tools import BlockArranger, ConstructionGap, chunks, swap
from .classifier import shape_candidates, shape_center

logger = logging.getLogger(__name__)

DOUBLE_EXCHANGE_LIMIT = 16
ESCALATION_BUDGET = 200000
LIFT_VERIFY_LIMIT = 4096


class UniformResidues(Exception):
    """全部元素 mod p 同余，无法再用可交换对换改变块和"""

    def __init__(self, p: int, residue: int):
        super().__init__(f"all elements are congruent to {residue} mod {p}")
        self.p = p
        self.residue = residue


class EscalationRequest(Exception):
    """当前素数下 R' ≡ 0 无法修复，需要换下一个素数"""

    def __init__(self, p: int, center: Optional[int] = None):
        super().__init__(f"prime {p} cannot finish the construction")
        self.p = p
        self.center = center


def _check_zero(sequence: Sequence[int], m: int, step: str) -> None:
    phi = sequence_sum(sequence, m)
    if phi:
        raise ConstructionGap(f"{step} ended with Φ ≡ {phi} (mod {m})", step=step)


def dilated_block_order(S: Sequence[int], target: int, p: int) -> List[int]:
    """
    块顺序 σ 使 Σ_i i·S[σ(i)] ≡ target ≠ 0 (mod p)，S 不全相同

    先找任一非零取值，再把系数按单位 k = target/value 伸缩
    """
    order = list(range(p))
    value = sum(i * S[index] for i, index in enumerate(order)) % p
    if value == 0:
        j = next(j for j in range(1, p) if (S[j] - S[0]) % p)
        order[0], order[j] = order[j], order[0]
        value = sum(i * S[index] for i, index in enumerate(order)) % p
    factor = (target * mod_inverse(value, p)) % p
    dilated: List[Optional[int]] = [None] * p
    for i, index in enumerate(order):
        dilated[(factor * i) % p] = index
    return dilated


def outlier_layout(M: ZMultiset) -> Optional[List[int]]:
    """
    M = {t×(m−2), x, y}：其余位置全放 t，x、y 的位置 i ≠ j 满足
    i(x − t) + j(y − t) ≡ −t·T(m) (mod m)

    不是该形状时返回 None；是该形状而返回 None 时 M 没有零置换和
    """
    m = M.m
    for t, x, y in shape_candidates(m, M.elements):
        u, w = (x - t) % m, (y - t) % m
        need = (-t * int(triangular_sum_mod(m))) % m
        g = gcd(u, m)
        step = m // g
        for j in range(1, m + 1):
            rhs = (need - j * w) % m
            if rhs % g:
                continue
            base = ((rhs // g) * mod_inverse((u // g) % step, step)) % step if step > 1 else 0
            for i in range(base or step, m + 1, step):
                if i == j:
                    continue
                sequence = [t] * m
                sequence[i - 1] = x
                sequence[j - 1] = y
                return sequence
    return None


class OddOrderSolver:
    """
    奇数阶构造

    对 m 的素因子从小到大尝试；一个素数走不通时换下一个，
    全部走不通时用 CRT 平移后按 gcd 分组直接放置
    """

    def __init__(self, engine, arranger: BlockArranger):
        self.engine = engine
        self.arranger = arranger

    def solve(self, M: ZMultiset, run) -> List[int]:
        primes = M.modulus.primes
        witnesses: Dict[int, int] = {}
        for p in primes:
            try:
                return self.solve_with_prime(M, p, run)
            except EscalationRequest as request:
                logger.info("m=%d: escalating past prime %d", M.m, request.p)
                if request.center is not None:
                    witnesses[p] = request.center
        if len(primes) < 2:
            result = self.finish_prime_power(M, run)
        else:
            result = self.finish_multiprime(M, run, witnesses)
        if isinstance(result, ExceptionalStructure):
            raise ConstructionGap(f"{M} reduced to an exceptional structure", step="escalation")
        return result

    def solve_with_prime(self, M: ZMultiset, p: int, run) -> List[int]:
        m_star = M.m // p
        sequence = list(separable_order(M, p).sequence)
        run.record("separable_order", f"first step (p={p})", sequence)
        sequence = self.divisible_blocks(sequence, m_star, run, f"second step (p={p})")
        return self.third_step(sequence, M, p, run)

    # ------------------------------------------------------------------
    # 第二步
    # ------------------------------------------------------------------

    def divisible_blocks(self, sequence: List[int], d: int, run, anchor: str) -> List[int]:
        """块保持置换使 d | R，必要时先做循环平移"""
        result = self.arranger.reach_divisibility(sequence, d, run)
        if result is None:
            result = self._rotation_fix(sequence, d, run)
        run.record("block_solve", anchor, result, block=d)
        return result

    def _rotation_fix(self, sequence: List[int], d: int, run) -> List[int]:
        blocks = chunks(sequence, d)
        special = next(index for index, block in enumerate(blocks) if self.arranger.classify(block, d))
        preferred = [special * d + offset for offset in range(d)]
        preferred_set = set(preferred)
        shifts = preferred + [r for r in range(len(sequence)) if r not in preferred_set]
        for r in shifts:
            if r == 0:
                continue
            rotated = sequence[r:] + sequence[:r]
            try:
                result = self.arranger.reach_divisibility(rotated, d, run)
            except ConstructionGap:
                continue
            if result is not None:
                logger.debug("rotation by %d breaks the lone exceptional block", r)
                run.record("rotate", "rotation fix", rotated)
                return result
        raise ConstructionGap(f"no rotation splits the exceptional block mod {d}", step="rotation fix")

    # ------------------------------------------------------------------
    # 第三步
    # ------------------------------------------------------------------

    def third_step(self, sequence: List[int], M: ZMultiset, p: int, run) -> List[int]:
        decomposition = decompose_sequence(sequence, M.m, p)
        if decomposition.R_prime is None:
            raise ConstructionGap("R is not divisible by m* after the second step", step="third step")
        if decomposition.R_prime:
            try:
                return self.fix_nonzero(sequence, M.m, p, run)
            except UniformResidues:
                return self.reduce_uniform(M, p, run)
        return self.fix_zero(sequence, M, p, run)

    def fix_nonzero(self, sequence: List[int], m: int, p: int, run) -> List[int]:
        """
        R' ≢ 0：块顺序取 Σ i·S_{i+1} ≡ −R' (mod p)

        Raises:
            UniformResidues: 全部元素 mod p 同余
        """
        sequence = list(sequence)
        m_star = m // p
        decomposition = decompose_sequence(sequence, m, p)
        target = (-decomposition.R_prime) % p
        S = [s % p for s in decomposition.block_sums]
        if len(set(S)) == 1:
            pair = next(((i, i + m_star) for i in range(1, m - m_star + 1)
                         if (sequence[i - 1] - sequence[i - 1 + m_star]) % p), None)
            if pair is None:
                raise UniformResidues(p, sequence[0] % p)
            swap(sequence, *pair)
            run.record("braid", "exchangeable pair", sequence, positions=pair)
            S = [sum(block) % p for block in chunks(sequence, m_star)]

        order = dilated_block_order(S, target, p)
        blocks = chunks(sequence, m_star)
        sequence = [v for index in order for v in blocks[index]]
        run.record("block_reorder", "dilated block order", sequence)
        _check_zero(sequence, m, "R' nonzero")
        return sequence

    def reduce_uniform(self, M: ZMultiset, p: int, run) -> List[int]:
        """全部 ≡ t (mod p)：M* = (M − t)/p ⊂ Z_{m*}，令 m* | Φ(M*) 即得 m | Φ(M)"""
        m = M.m
        m_star = m // p
        t = M.elements[0] % p
        if any((v - t) % p for v in M.elements):
            raise ConstructionGap("reduction needs every element congruent mod p", step="reduction")
        reduced_values = [((v - t) % m) // p for v in M.elements]
        levels = factorize(m_star).exponent(p)
        start = sorted(reduced_values, key=lambda u: tuple(u % p ** level for level in range(1, levels + 1)) + (u,))
        # blocks of size m* over a sequence of length m
        arranged = self.divisible_blocks(start, m_star, run.nested(), "reduced multiset")
        sequence = [(t + p * u) % m for u in arranged]
        run.record("lift", f"reduction by {p}", sequence)
        _check_zero(sequence, m, "reduction")
        return sequence

    def fix_zero(self, sequence: List[int], M: ZMultiset, p: int, run) -> List[int]:
        """
        R' ≡ 0：把块和 {S_i mod p} 作为 Z_p 上的多重集求零

        Raises:
            EscalationRequest: 所有修复都失败
        """
        m = M.m
        m_star = m // p
        sequence = list(sequence)
        S = [sum(block) % p for block in chunks(sequence, m_star)]

        order = self._prime_block_order(S, p, run)
        if order is not None:
            return self._apply_order(sequence, order, m, m_star, run, "block sums in Z_p")

        for i, j in self._exchangeable_swaps(sequence, S, m_star, p):
            swap(sequence, i, j)
            S = [sum(block) % p for block in chunks(sequence, m_star)]
            order = self._prime_block_order(S, p, run)
            if order is None:
                raise ConstructionGap("single exchange did not break the block sum structure")
            run.record("braid", "exchangeable pair", sequence, positions=(i, j))
            return self._apply_order(sequence, order, m, m_star, run, "block sums in Z_p")

        pairs = self._double_exchange(sequence, S, m_star, p)
        if pairs is not None:
            for i, j in pairs:
                swap(sequence, i, j)
            positions = sorted({position for pair in pairs for position in pair})
            run.record("double_braid", "two exchangeable pairs", sequence, positions=positions)
            S = [sum(block) % p for block in chunks(sequence, m_star)]
            order = self._prime_block_order(S, p, run)
            if order is None:
                raise ConstructionGap("double exchange did not break the block sum structure")
            return self._apply_order(sequence, order, m, m_star, run, "block sums in Z_p")

        lifted = self._lift_move(sequence, m, p)
        if lifted is not None:
            sequence, positions, step = lifted
            run.record(step, "R' made nonzero", sequence, positions=positions)
            return self._after_lift(sequence, M, p, run)

        q = M.modulus.prime_power(p)
        raise EscalationRequest(p, center=shape_center(M.elements, q))

    def _prime_block_order(self, S: Sequence[int], p: int, run) -> Optional[List[int]]:
        """
        S 在 Z_p 非例外时返回块顺序：标准解 (x_1..x_p) 对应块顺序 (x_p, x_1, ..., x_{p−1})
        """
        if self.arranger.classify(S, p):
            return None
        solution = self.engine.zero_sequence(ZMultiset.from_values(p, S), run)
        rotated = [solution[-1]] + list(solution[:-1])
        pools: Dict[int, List[int]] = defaultdict(list)
        for index, value in enumerate(S):
            pools[value % p].append(index)
        return [pools[value].pop() for value in rotated]

    def _apply_order(self, sequence: List[int], order: Sequence[int], m: int, m_star: int,
                     run, anchor: str) -> List[int]:
        blocks = chunks(sequence, m_star)
        arranged = [v for index in order for v in blocks[index]]
        run.record("block_reorder", anchor, arranged)
        _check_zero(arranged, m, "R' zero")
        return arranged

    def _exchangeable_swaps(self, sequence: Sequence[int], S: Sequence[int], m_star: int, p: int):
        """同列、mod p 不同的位置对，按 (块, 块, 差值) 去重，只给出能破坏例外结构的那些"""
        seen = set()
        for column in range(m_star):
            for b1 in range(p):
                x = sequence[b1 * m_star + column]
                for b2 in range(b1 + 1, p):
                    y = sequence[b2 * m_star + column]
                    difference = (x - y) % p
                    if not difference or (b1, b2, difference) in seen:
                        continue
                    seen.add((b1, b2, difference))
                    changed = list(S)
                    changed[b1] = (changed[b1] - difference) % p
                    changed[b2] = (changed[b2] + difference) % p
                    if not self.arranger.classify(changed, p):
                        yield b1 * m_star + column + 1, b2 * m_star + column + 1

    def _double_exchange(self, sequence: Sequence[int], S: Sequence[int], m_star: int,
                         p: int) -> Optional[List[Tuple[int, int]]]:
        """
        块和呈 {A,…,A, A+B, A−B}：T+ 与第三块在列 c1 交换，T− 与第三块在列 c2 交换
        """
        structure = self.arranger.classify(S, p)
        if not structure or structure.is_homogeneous:
            return None
        plus = (structure.a + structure.b) % p
        minus = (structure.a - structure.b) % p
        plus_block = next((i for i, s in enumerate(S) if s == plus), None)
        minus_block = next((i for i, s in enumerate(S) if s == minus and i != plus_block), None)
        if plus_block is None or minus_block is None:
            return None
        blocks = chunks(sequence, m_star)
        for third in range(p):
            if third in (plus_block, minus_block):
                continue
            plus_columns = [c for c in range(m_star) if (blocks[plus_block][c] - blocks[third][c]) % p]
            minus_columns = [c for c in range(m_star) if (blocks[minus_block][c] - blocks[third][c]) % p]
            for c1 in plus_columns[:DOUBLE_EXCHANGE_LIMIT]:
                for c2 in minus_columns[:DOUBLE_EXCHANGE_LIMIT]:
                    if c1 == c2:
                        continue
                    d1 = (blocks[plus_block][c1] - blocks[third][c1]) % p
                    d2 = (blocks[minus_block][c2] - blocks[third][c2]) % p
                    changed = list(S)
                    changed[plus_block] = (changed[plus_block] - d1) % p
                    changed[minus_block] = (changed[minus_block] - d2) % p
                    changed[third] = (changed[third] + d1 + d2) % p
                    if self.arranger.classify(changed, p):
                        continue
                    return [
                        (min(plus_block, third) * m_star + c1 + 1, max(plus_block, third) * m_star + c1 + 1),
                        (min(minus_block, third) * m_star + c2 + 1, max(minus_block, third) * m_star + c2 + 1),
                    ]
        return None

    def _ready(self, sequence: Sequence[int], m: int, p: int) -> bool:
        """m* | R，且 R' ≢ 0 时块和不全相同（或有可交换的不同对），R' ≡ 0 时块和非例外"""
        decomposition = decompose_sequence(sequence, m, p)
        if decomposition.R_prime is None:
            return False
        S = [s % p for s in decomposition.block_sums]
        if decomposition.R_prime:
            if len(set(S)) > 1:
                return True
            m_star = m // p
            return any((sequence[i] - sequence[i + m_star]) % p for i in range(m - m_star))
        return not self.arranger.classify(S, p)

    def _lift_move(self, sequence: Sequence[int], m: int, p: int):
        """
        R' ≡ 0 且块和例外时的逐层提升

        第 l 层 (l = 2..k)：mod p^(l−1) 同余、mod p^l 不同的一对元素，放在位置差
        p 进赋值为 k − l 的两处，交换后 Φ 变化 m*·单位，m* | R 保持；
        各层都不行时，把 mod p 偏离的两个元素挪到别的列

        Returns:
            (新序列, 改写的位置, 步骤名) 或 None
        """
        pair = self._level_transposition(sequence, m, p)
        if pair is not None:
            trial = list(sequence)
            swap(trial, *pair)
            return trial, pair, "lift"
        return self._shift_outliers(sequence, m, p)

    def _level_transposition(self, sequence: Sequence[int], m: int, p: int) -> Optional[Tuple[int, int]]:
        k = factorize(m).exponent(p)
        m_star = m // p
        checked = 0
        verified = 0
        for level in range(2, k + 1):
            low, high = p ** (level - 1), p ** level
            for delta in range(1, m):
                if delta % m_star == 0 or valuation(delta, p) != k - level:
                    continue
                for i in range(1, m - delta + 1):
                    j = i + delta
                    difference = sequence[i - 1] - sequence[j - 1]
                    checked += 1
                    if checked > ESCALATION_BUDGET or verified > LIFT_VERIFY_LIMIT:
                        return None
                    if difference % low or difference % high == 0:
                        continue
                    change = (delta * difference) % m
                    if change % m_star or change == 0:
                        continue
                    trial = list(sequence)
                    swap(trial, i, j)
                    verified += 1
                    if self._ready(trial, m, p):
                        logger.debug("lift at level %d: positions %d, %d", level, i, j)
                        return i, j
        return None

    def _shift_outliers(self, sequence: Sequence[int], m: int, p: int):
        """mod p 偏离多数的恰两个元素，各自在本块内换到新的列"""
        counts = Counter(v % p for v in sequence)
        t = max(sorted(counts), key=lambda residue: counts[residue])
        outliers = [i for i in range(1, m + 1) if sequence[i - 1] % p != t]
        if len(outliers) != 2:
            return None
        m_star = m // p
        first, second = outliers
        home = [(position - 1) // m_star * m_star for position in outliers]
        verified = 0
        for c1 in range(m_star):
            for c2 in range(m_star):
                targets = (home[0] + c1 + 1, home[1] + c2 + 1)
                if targets == (first, second) or targets[0] == targets[1]:
                    continue
                trial = list(sequence)
                swap(trial, first, targets[0])
                swap(trial, first if targets[0] == second else second, targets[1])
                verified += 1
                if verified > LIFT_VERIFY_LIMIT:
                    return None
                if self._ready(trial, m, p):
                    changed = [position for position in range(1, m + 1)
                               if trial[position - 1] != sequence[position - 1]]
                    return trial, changed, "shift_outliers"
        return None

    def _after_lift(self, sequence: List[int], M: ZMultiset, p: int, run) -> List[int]:
        m = M.m
        decomposition = decompose_sequence(sequence, m, p)
        if decomposition.R_prime:
            try:
                return self.fix_nonzero(sequence, m, p, run)
            except UniformResidues:
                return self.reduce_uniform(M, p, run)
        S = [s % p for s in decomposition.block_sums]
        order = self._prime_block_order(S, p, run)
        if order is None:
            raise ConstructionGap("lifted block sums are still exceptional", step="lift")
        return self._apply_order(sequence, order, m, m // p, run, "block sums in Z_p")

    # ------------------------------------------------------------------
    # 素数幂收尾
    # ------------------------------------------------------------------

    def finish_prime_power(self, M: ZMultiset, run) -> Union[List[int], ExceptionalStructure]:
        """
        m = p^k 且各层提升都失败：M 只能是 {t×(m−2), x, y}，
        直接解两个位置；无解时 M 就是非齐次例外结构

        Raises:
            ValueError: m 不是奇素数幂
        """
        modulus = M.modulus
        if len(modulus.primes) != 1 or modulus.is_even:
            raise ValueError(f"m={M.m} is not an odd prime power")
        sequence = outlier_layout(M)
        if sequence is not None:
            run.record("outlier_layout", "two outliers", sequence)
            _check_zero(sequence, M.m, "outlier layout")
            return sequence
        structure = self.arranger.classify(M.elements, M.m)
        if structure:
            return structure
        raise ConstructionGap(f"{M} escalated without the two-outlier shape", step="prime power")

    # ------------------------------------------------------------------
    # 多素数收尾
    # ------------------------------------------------------------------

    def finish_multiprime(self, M: ZMultiset, run,
                          witnesses: Optional[Dict[int, int]] = None) -> Union[List[int], ExceptionalStructure]:
        """
        M 对每个 p_i^{k_i} 都呈 {t×(m−2), x, y}、x + y ≡ 2t：CRT 平移到 t = 0，
        非零元 x 放在系数 ±m/gcd(m, x) 上

        Returns:
            零和序列；若剩下两个单位元则返回非齐次例外结构
        """
        m = M.m
        modulus = M.modulus
        if len(modulus.primes) < 2:
            raise ValueError(f"m={m} has fewer than two prime factors")
        centers = []
        powers = []
        for p in modulus.primes:
            q = modulus.prime_power(p)
            center = shape_center(M.elements, q)
            if center is None:
                raise ValueError(f"{M} is not exceptional modulo {q}")
            if witnesses and p in witnesses and (witnesses[p] - center) % q:
                raise ValueError(f"witness {witnesses[p]} disagrees with centre {center} modulo {q}")
            centers.append(center)
            powers.append(q)
        t, _ = crt(centers, powers)

        shifted = [(v - t) % m for v in M.elements]
        groups: Dict[int, List[int]] = defaultdict(list)
        for x in shifted:
            if x:
                groups[gcd(x, m)].append(x)

        units_left = groups.get(1, [])
        if len(units_left) == 2:
            if (units_left[0] + units_left[1]) % m:
                raise ValueError("the two remaining units are not negatives of each other")
            return ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, modulus, a=t, b=units_left[0])

        placed: Dict[int, int] = {}
        for g, members in sorted(groups.items()):
            if len(members) > 2:
                raise ValueError(f"{len(members)} elements share gcd {g} with m")
            base = m // g
            for coefficient, x in zip((base, m - base), members):
                coefficient = coefficient or m
                if coefficient in placed:
                    raise ValueError(f"coefficient {coefficient} assigned twice")
                placed[coefficient] = x

        sequence = [0] * m
        for coefficient, x in placed.items():
            sequence[coefficient - 1] = x
        sequence = [(x + t) % m for x in sequence]
        run.record("crt_layout", "multiprime placement", sequence)
        _check_zero(sequence, m, "multiprime placement")
        return sequence
