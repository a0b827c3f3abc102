"""
Even Order Solver
m = 2^k·n：k = 1 时奇偶分块，k > 1 时按 2 可分排列对半归纳，外加两个偶数元素的特殊情形
"""

import logging
from collections import Counter
from typing import List, Optional, Sequence, Tuple

from ..core.residue import factorize, mod_inverse
from ..models.exceptional import ExceptionalStructure
from ..models.multiset import ZMultiset, separable_order, sequence_sum
from ..models.outcome import EvenCaseContext
from .block_tools import BlockArranger, ConstructionGap, chunks, find_transposition, swap, swap_delta

logger = logging.getLogger(__name__)

EXCHANGE_LIMIT = 24
SEARCH_BUDGET = 200000


def _without(values: Sequence[int], removed: int) -> List[int]:
    rest = list(values)
    rest.remove(removed)
    return rest


def _exchange(first: Sequence[int], second: Sequence[int], x: int, y: int) -> Tuple[List[int], List[int]]:
    """first 中的 x 与 second 中的 y 互换"""
    return _without(first, x) + [y], _without(second, y) + [x]


def half_correction(sequence: Sequence[int], m: int, exclude: Sequence[int] = ()) -> Optional[Tuple[int, int]]:
    """
    Φ ≡ m/2 时找一次对换把它变成 0

    依次尝试位移 2^(k−s)·n (s = 1..k)，位移 m/2 即奇偶不同的配对；最后做一般搜索
    """
    modulus = factorize(m)
    half = m // 2
    excluded = set(exclude)
    for s in range(1, modulus.k + 1):
        x = 2 ** (modulus.k - s) * modulus.n
        for i in range(1, m - x + 1):
            if i in excluded or i + x in excluded:
                continue
            if (x * (sequence[i - 1] - sequence[i + x - 1])) % m == half:
                return i, i + x
    return find_transposition(sequence, m, half, exclude=excluded, budget=SEARCH_BUDGET)


class EvenOrderSolver:
    """偶数阶构造（m > 4）"""

    def __init__(self, engine, arranger: BlockArranger):
        self.engine = engine
        self.arranger = arranger

    def solve(self, M: ZMultiset, run) -> List[int]:
        if M.modulus.k == 1:
            return self.initial_step(M, run)
        return self.inductive_step(M, run)

    def _finish(self, sequence: List[int], m: int, run, anchor: str,
                exclude: Sequence[int] = ()) -> Optional[List[int]]:
        """m/2 | Φ 时补最后一次对换；做不到返回 None"""
        phi = sequence_sum(sequence, m)
        if phi == 0:
            return sequence
        if phi != m // 2:
            return None
        pair = half_correction(sequence, m, exclude)
        if pair is None:
            return None
        swap(sequence, *pair)
        run.record("braid", anchor, sequence, positions=pair)
        return sequence

    def _require(self, sequence: Optional[List[int]], m: int, step: str) -> List[int]:
        if sequence is None or sequence_sum(sequence, m):
            raise ConstructionGap(f"{step} did not reach zero", step=step)
        return sequence

    # ------------------------------------------------------------------
    # k = 1
    # ------------------------------------------------------------------

    def initial_step(self, M: ZMultiset, run) -> List[int]:
        """
        m = 2n (n 奇)：偶数在前，两个长为 n 的块分别处理，再用奇偶不同的配对修正 m/2
        """
        m = M.m
        n = m // 2
        evens = [v for v in M.elements if v % 2 == 0]
        odds = [v for v in M.elements if v % 2]
        sequence = evens + odds
        run.record("parity_order", "initial step", sequence)

        arranged = self.arranger.reach_divisibility(sequence, n, run)
        if arranged is None:
            return self._constant_partner(sequence, n, m, run)
        run.record("block_solve", "initial step", arranged, block=n)
        return self._require(self._finish(arranged, m, run, "parity braid"), m, "initial step")

    def _constant_partner(self, sequence: List[int], n: int, m: int, run) -> List[int]:
        """一块 mod n 例外、另一块 mod n 为常数：先交换一对元素破坏例外结构"""
        blocks = chunks(sequence, n)
        classes = [self.arranger.classify(block, n) for block in blocks]
        ex = 0 if classes[0] else 1
        other = 1 - ex
        X, Y = blocks[ex], blocks[other]
        structure = classes[ex]
        plus = (structure.a + structure.b) % n
        minus = (structure.a - structure.b) % n
        c = Y[0] % n

        for target, anchor in ((minus, "exchange with a-b"), (plus, "exchange with a+b")):
            if c == target:
                continue
            for x in sorted({v for v in X if v % n == target}):
                for y in sorted(set(Y)):
                    new_X, new_Y = _exchange(X, Y, x, y)
                    if self.arranger.classify(new_X, n) or self.arranger.classify(new_Y, n):
                        continue
                    halves = [[], []]
                    halves[ex] = self.arranger.zero(new_X, n, run)
                    halves[other] = self.arranger.zero(new_Y, n, run)
                    candidate = halves[0] + halves[1]
                    run.record("exchange", anchor, candidate)
                    result = self._finish(candidate, m, run, "parity braid")
                    if result is not None:
                        return result

        plus_value = next(v for v in X if v % n == plus)
        minus_value = next(v for v in X if v % n == minus)
        rest = sorted(_without(_without(X, plus_value), minus_value))
        if c != structure.a % n:
            partners = sorted(Y)[:2]
            first = rest + partners
            second = _without(_without(Y, partners[0]), partners[1]) + [plus_value, minus_value]
            if not self.arranger.classify(first, n) and not self.arranger.classify(second, n):
                candidate = self.arranger.zero(first, n, run) + self.arranger.zero(second, n, run)
                run.record("exchange", "two partners", candidate)
                result = self._finish(candidate, m, run, "parity braid")
                if result is not None:
                    return result

        others = sorted(rest + Y)
        for first, second in ((plus_value, minus_value), (minus_value, plus_value)):
            candidate = others[:n - 1] + [first] + others[n - 1:] + [second]
            if sequence_sum(candidate, n):
                continue
            run.record("layout", "pair at n and 2n", candidate)
            result = self._finish(candidate, m, run, "parity braid", exclude=(n, m))
            if result is not None:
                return result
        raise ConstructionGap("constant partner block admits no construction", step="initial step")

    # ------------------------------------------------------------------
    # k > 1
    # ------------------------------------------------------------------

    def inductive_step(self, M: ZMultiset, run) -> List[int]:
        """
        2 可分排列切成两半，每半 m* = m/2 个元素；两半都处理到 m* | R 后，Φ ∈ {0, m*}
        """
        m = M.m
        half = m // 2
        sequence = list(separable_order(M, 2).sequence)
        run.record("separable_order", "inductive step", sequence)
        first, second = sequence[:half], sequence[half:]
        c1 = self.arranger.classify(first, half)
        c2 = self.arranger.classify(second, half)

        halves = self._divisible_halves(first, second, c1, c2, half, run)
        if halves is not None:
            arranged = halves[0] + halves[1]
            run.record("half_solve", "inductive step", arranged, block=half)
            return self._require(self._finish(arranged, m, run, "braid cascade"), m, "inductive step")

        if c1:
            regular, exceptional, structure = second, first, c1
        else:
            regular, exceptional, structure = first, second, c2
        logger.debug("m=%d: regular half cannot reach m*/2, exceptional half %s", m, structure.describe())
        return self._exceptional_half(M, regular, exceptional, structure, run)

    def _divisible_halves(self, first, second, c1, c2, half: int, run) -> Optional[Tuple[List[int], List[int]]]:
        quarter = half // 2
        if not c1 and not c2:
            return self.arranger.zero(first, half, run), self.arranger.zero(second, half, run)
        if c1 and c2:
            placed = (self.arranger.exceptional_target(first, half, c1, quarter, run),
                      self.arranger.exceptional_target(second, half, c2, quarter, run))
            if None in placed:
                raise ConstructionGap("exceptional halves cannot both take m*/2", step="inductive step")
            return placed

        exceptional_first = bool(c1)
        structure = c1 or c2
        exceptional, regular = (first, second) if exceptional_first else (second, first)

        def ordered(regular_part, exceptional_part):
            if exceptional_first:
                return exceptional_part, regular_part
            return regular_part, exceptional_part

        if not structure.is_homogeneous:
            donor = self.arranger.zero(regular, half, run)
            position = next((i for i in range(half - 1) if (donor[i] - donor[i + 1]) % half), None)
            if position is not None:
                donor[position], donor[position + 1] = donor[position + 1], donor[position]
                value = sequence_sum(donor, half)
                placed = self.arranger.exceptional_target(exceptional, half, structure, -value, run)
                if placed is not None:
                    return ordered(donor, placed)

        regular_part = self.arranger.target(regular, half, quarter, run)
        if regular_part is None:
            return None
        placed = self.arranger.exceptional_target(exceptional, half, structure, quarter, run)
        if placed is None:
            raise ConstructionGap("exceptional half cannot take m*/2", step="inductive step")
        return ordered(regular_part, placed)

    def _exceptional_half(self, M: ZMultiset, regular: List[int], exceptional: List[int],
                          structure: ExceptionalStructure, run) -> List[int]:
        if structure.is_homogeneous:
            return self._homogeneous_half(M, regular, exceptional, structure, run)
        return self._inhomogeneous_half(M, regular, exceptional, structure, run)

    def _solve_exchange(self, regular: List[int], exceptional: List[int], m: int, run,
                        anchor: str) -> Optional[List[int]]:
        """交换后的两半都处理到 m* | R，然后补 m* 修正"""
        half = m // 2
        quarter = half // 2
        c_regular = self.arranger.classify(regular, half)
        c_exceptional = self.arranger.classify(exceptional, half)
        if not c_regular and not c_exceptional:
            parts = (self.arranger.zero(regular, half, run), self.arranger.zero(exceptional, half, run))
        else:
            parts = (self.arranger.target(regular, half, quarter, run, classification=c_regular),
                     self.arranger.target(exceptional, half, quarter, run, classification=c_exceptional))
            if None in parts:
                return None
        candidate = parts[0] + parts[1]
        if sequence_sum(candidate, half):
            return None
        run.record("exchange", anchor, candidate)
        return self._finish(candidate, m, run, "braid cascade")

    def _inhomogeneous_half(self, M: ZMultiset, regular: List[int], exceptional: List[int],
                            structure: ExceptionalStructure, run) -> List[int]:
        m = M.m
        half = m // 2
        pairs = [(u, e) for u in sorted(set(regular)) for e in sorted(set(exceptional)) if (u - e) % half]
        pairs.sort(key=lambda pair: (pair[0] - pair[1]) % 2)
        for u, e in pairs[:EXCHANGE_LIMIT]:
            new_regular, new_exceptional = _exchange(regular, exceptional, u, e)
            result = self._solve_exchange(new_regular, new_exceptional, m, run, "exchange into the exceptional half")
            if result is not None:
                return result

        plus = (structure.a + structure.b) % half
        minus = (structure.a - structure.b) % half
        q1 = next(v for v in exceptional if v % half == plus)
        q2 = next(v for v in exceptional if v % half == minus)
        rest = sorted(_without(_without(regular + exceptional, q1), q2))
        for first, second in ((q1, q2), (q2, q1)):
            candidate = [first] + rest[:half - 1] + [second] + rest[half - 1:]
            if sequence_sum(candidate, half):
                continue
            run.record("layout", "pair at 1 and 1+m*", candidate)
            result = self._finish(candidate, m, run, "adjacent swap", exclude=(1, half + 1))
            if result is not None:
                return result
        raise ConstructionGap("inhomogeneous half admits no construction", step="inductive step")

    def _homogeneous_half(self, M: ZMultiset, regular: List[int], exceptional: List[int],
                          structure: ExceptionalStructure, run) -> List[int]:
        m = M.m
        half = m // 2
        power = 2 ** structure.modulus.k
        c = structure.c % power
        stray = sorted({v for v in regular if v % 2 and v % power != c})

        if not stray:
            for q in sorted({v for v in regular if v % 2 == 0}):
                for e in sorted(set(exceptional))[:EXCHANGE_LIMIT]:
                    new_regular, new_exceptional = _exchange(regular, exceptional, q, e)
                    result = self._solve_exchange(new_regular, new_exceptional, m, run, "even element exchanged")
                    if result is not None:
                        return result
            if self.is_two_even_shape(M):
                return self.solve_atlast(M, run)
            raise ConstructionGap("homogeneous half with no usable exchange", step="inductive step")

        for odd in stray[:EXCHANGE_LIMIT]:
            for e in sorted(set(exceptional)):
                new_regular, new_exceptional = _exchange(regular, exceptional, odd, e)
                result = self._solve_exchange(new_regular, new_exceptional, m, run, "odd element exchanged")
                if result is not None:
                    return result
        raise ConstructionGap("homogeneous half with stray odd elements not resolved", step="inductive step")

    # ------------------------------------------------------------------
    # 两个偶数元素
    # ------------------------------------------------------------------

    @staticmethod
    def is_two_even_shape(M: ZMultiset) -> bool:
        """恰两个偶数元素，其余奇数元素 mod 2^(k−1) 同余"""
        modulus = M.modulus
        if modulus.k < 2:
            return False
        evens = [v for v in M.elements if v % 2 == 0]
        odds = [v for v in M.elements if v % 2]
        return len(evens) == 2 and len({v % (2 ** (modulus.k - 1)) for v in odds}) == 1

    def solve_atlast(self, M: ZMultiset, run) -> List[int]:
        """
        两个偶数 q1, q2 与 m−2 个 mod 2^(k−1) 同余的奇数

        奇数按 mod 2^k 分成 c 类（多数）与 c* 类；n = 1 时直接放置，
        否则先按块长 n 处理到 n | Φ，再解 (q1 − c)·l·n ≡ −Φ0 (mod 2^k)
        """
        modulus = M.modulus
        m, k, n = M.m, modulus.k, modulus.n
        if m <= 4 or not self.is_two_even_shape(M):
            raise ValueError(f"{M} is not a two-even-element multiset with m > 4")
        power = 2 ** k
        q1, q2 = [v for v in M.elements if v % 2 == 0]
        odds = [v for v in M.elements if v % 2]
        classes = Counter(v % power for v in odds)
        c = max(sorted(classes), key=lambda residue: classes[residue])
        c_star = (c + power // 2) % power
        c_type = sorted(v for v in odds if v % power == c)
        star_type = sorted(v for v in odds if v % power != c)

        if n == 1:
            return self._atlast_power_of_two(q1, q2, c_type, star_type, m, run)

        sequence = [q1, q2] + c_type + star_type
        run.record("parity_order", "two even elements", sequence)
        arranged = self.arranger.reach_divisibility(sequence, n, run)
        if arranged is not None:
            run.record("block_solve", "two even elements", arranged, block=n)
            return self._atlast_divisible(arranged, c, c_star, k, n, run)
        return self._atlast_exceptional_block(sequence, q1, q2, c, c_star, k, n, run)

    def _atlast_power_of_two(self, q1: int, q2: int, c_type: List[int], star_type: List[int],
                             m: int, run) -> List[int]:
        odds = list(c_type) + list(star_type)
        if c_type and star_type:
            odds = [c_type[0], star_type[0]] + c_type[1:] + star_type[1:]
        half = m // 2
        sequence: List[Optional[int]] = [None] * m
        sequence[half - 1] = q1
        sequence[m - 1] = q2
        filler = iter(odds)
        for index in range(m):
            if sequence[index] is None:
                sequence[index] = next(filler)
        run.record("layout", "evens at m/2 and m", sequence)
        result = self._finish(sequence, m, run, "odd distance swap", exclude=(half, m))
        return self._require(result, m, "two even elements")

    def _atlast_divisible(self, sequence: List[int], c: int, c_star: int, k: int, n: int, run) -> List[int]:
        m = len(sequence)
        power = 2 ** k
        evens = [i for i in range(1, m + 1) if sequence[i - 1] % 2 == 0]
        f, g = evens[0], evens[1]
        if f > n:
            raise ConstructionGap("even element left the first block", step="two even elements")
        phi = sequence_sum(sequence, m)
        if phi == 0:
            return sequence
        q = sequence[f - 1]
        l = (-phi * mod_inverse(((q - c) * n) % power, power)) % power
        context = EvenCaseContext(f=f, g=g, q1=q, q2=sequence[g - 1], c=c, c_star=c_star, k=k, n=n, l=l)
        logger.debug("two even elements: %s", context)
        j = f + l * n
        if l == 0 or j == g or j > m:
            raise ConstructionGap(f"no usable partner for l={l}", step="two even elements")
        swap(sequence, f, j)
        run.record("transposition", "solve for l", sequence, positions=(f, j))

        need = (-sequence_sum(sequence, m)) % m
        if need == 0:
            return sequence
        if f + n != j and swap_delta(sequence, f, f + n, m) == need:
            pair = (f, f + n)
        else:
            pair = find_transposition(sequence, m, need, budget=SEARCH_BUDGET)
        if pair is None:
            raise ConstructionGap("c* landed at the even position and cannot be moved", step="two even elements")
        swap(sequence, *pair)
        run.record("braid", "replace c* by c", sequence, positions=pair)
        return self._require(sequence, m, "two even elements")

    def _atlast_exceptional_block(self, sequence: List[int], q1: int, q2: int, c: int, c_star: int,
                                  k: int, n: int, run) -> List[int]:
        """一个块 mod n 例外、其余常数：先试着用一次对换破坏例外结构，否则用显式布局"""
        m = len(sequence)
        blocks = chunks(sequence, n)
        ex = next(index for index, block in enumerate(blocks) if self.arranger.classify(block, n))
        protected = {1, 2}
        ex_positions = [i for i in range(ex * n + 1, (ex + 1) * n + 1) if i not in protected]
        seen = set()
        tried = 0
        for i in ex_positions:
            for j in range(1, m + 1):
                if j in protected or (j - 1) // n == ex:
                    continue
                if (sequence[i - 1] - sequence[j - 1]) % n == 0:
                    continue
                key = (sequence[i - 1], sequence[j - 1], (j - 1) // n)
                if key in seen:
                    continue
                seen.add(key)
                tried += 1
                if tried > EXCHANGE_LIMIT * n:
                    break
                trial = list(sequence)
                swap(trial, min(i, j), max(i, j))
                try:
                    arranged = self.arranger.reach_divisibility(trial, n, run)
                except ConstructionGap:
                    continue
                if arranged is not None:
                    run.record("transposition", "break the exceptional block", trial, positions=(min(i, j), max(i, j)))
                    run.record("block_solve", "two even elements", arranged, block=n)
                    return self._atlast_divisible(arranged, c, c_star, k, n, run)
        return self._atlast_layout(sequence, q1, q2, k, n, run)

    def _atlast_layout(self, sequence: List[int], q1: int, q2: int, k: int, n: int, run) -> List[int]:
        """
        q1 所在块 {A×(n−1), q1} 与 q2 所在块 {A×(n−1), q2}，q 放在块尾，
        两块移到第 2^(k−1) 与第 2^k 个位置
        """
        m = len(sequence)
        blocks = chunks(sequence, n)
        first_rest = _without(_without(blocks[0], q1), q2)
        second = list(blocks[1])
        borrowed = second.pop()
        others = blocks[2:]
        count = 2 ** k
        for left, right in ((q1, q2), (q2, q1)):
            slots: List[Optional[List[int]]] = [None] * count
            slots[count // 2 - 1] = first_rest + [borrowed, left]
            slots[count - 1] = second + [right]
            remaining = iter(others)
            for index in range(count):
                if slots[index] is None:
                    slots[index] = next(remaining)
            candidate = [v for block in slots for v in block]
            if sequence_sum(candidate, n):
                continue
            run.record("layout", "evens at m/2 and m", candidate)
            result = self._finish(candidate, m, run, "c/c* swap", exclude=(m // 2, m))
            if result is not None:
                return result
        raise ConstructionGap("two even elements: explicit layout failed", step="two even elements")
