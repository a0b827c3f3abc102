"""
Prime Order Solver
m = p 为素数：规范排列 + 单次对换搜索，失败时随机重排
"""

import logging
from typing import List, Set

from ..core.residue import mod_inverse
from ..models.multiset import ZMultiset, sequence_sum
from .block_tools import ConstructionGap, find_transposition, swap

logger = logging.getLogger(__name__)

DISTINCT_DIFFERENCE_LIMIT = 48


class PrimeSolver:
    """
    素数阶求解器

    对 Φ ≠ 0 的排列，找位移 δ 与位置 i 使 δ·(a_i − a_{i+δ}) ≡ −Φ (mod p)。
    不同元素较少时由差值直接反推位移，否则抽样位移。
    """

    def __init__(self, engine):
        self.engine = engine

    def _offsets(self, sequence: List[int], p: int, need: int, rng, budget: int) -> List[int]:
        distinct = sorted(set(sequence))
        chosen: List[int] = []
        seen: Set[int] = set()
        if len(distinct) <= DISTINCT_DIFFERENCE_LIMIT:
            for u in distinct:
                for v in distinct:
                    difference = (u - v) % p
                    if difference == 0:
                        continue
                    delta = (need * mod_inverse(difference, p)) % p
                    if delta and delta not in seen:
                        seen.add(delta)
                        chosen.append(delta)
        if p - 1 <= budget:
            extra = range(1, p)
        else:
            extra = (int(x) for x in rng.integers(1, p, size=budget))
        for delta in extra:
            if delta not in seen:
                seen.add(delta)
                chosen.append(delta)
        return chosen

    def solve(self, M: ZMultiset, run) -> List[int]:
        """
        求 Φ ≡ 0 的排列（M 必须非例外）

        Returns:
            Z_p 上的序列
        """
        p = M.m
        settings = run.settings
        sequence = list(M.elements)
        run.record("canonical_order", "prime order", sequence)
        rounds = settings.search_rounds or p
        scan_budget = settings.offset_budget * p

        for attempt in range(rounds):
            phi = sequence_sum(sequence, p)
            if phi == 0:
                return sequence
            need = (-phi) % p
            offsets = self._offsets(sequence, p, need, run.rng, settings.offset_budget)
            pair = find_transposition(sequence, p, need, offsets=offsets, budget=scan_budget)
            if pair is not None:
                swap(sequence, *pair)
                run.record("transposition", "prime order", sequence, positions=pair)
                return sequence
            if p <= settings.prime_oracle_threshold and p <= settings.oracle_cap:
                break
            run.rng.shuffle(sequence)
            logger.debug("prime %d: reshuffle %d", p, attempt + 1)
            run.record("reshuffle", "prime order", sequence)

        if p <= settings.oracle_cap:
            certificate = self.engine.oracle_witness(M, 0, run)
            if certificate is not None:
                sequence = list(certificate.arrangement.sequence)
                run.record("oracle_witness", "prime order", sequence)
                return sequence
        raise ConstructionGap(f"no single transposition reached zero for {M}", step="prime order")
