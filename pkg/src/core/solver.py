"""
Permutational Sum Solver (核心协调器)
先分类，再按 m 的类型分派到素数 / 奇数 / 偶数构造，构造缺口由安全网兜底
"""

import logging
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from ..algorithms.block_tools import BlockArranger, ConstructionGap, block_residue_sum, find_transposition, swap
from ..algorithms.classifier import ExceptionClassifier
from ..algorithms.even_solver import EvenOrderSolver
from ..algorithms.odd_solver import EscalationRequest, OddOrderSolver, UniformResidues
from ..algorithms.prime_solver import PrimeSolver
from ..algorithms.spectrum_oracle import SpectrumOracle
from ..models.exceptional import ExceptionalStructure
from ..models.multiset import Arrangement, BlockDecomposition, ZMultiset, certify, sequence_sum, verify
from ..models.outcome import SolveOutcome, TraceStep, replay
from ..utils.config import SolverSettings
from .residue import factorize, gcd, mod_inverse

logger = logging.getLogger(__name__)

Strategy = Callable[[ZMultiset, "SolveRun"], List[int]]

__all__ = [
    "ConstructionGap",
    "EscalationRequest",
    "PermutationalSumSolver",
    "UniformResidues",
    "solve",
    "solve_values",
]


class StepTracer:
    """
    记录顶层步骤

    debug 模式下每一步之后复核：多重集不变、按记录重放得到当前序列、
    Φ 与重放结果一致、块步骤之后块长整除 R
    """

    def __init__(self, M: ZMultiset, debug: bool = False):
        self.multiset = M
        self.debug = debug
        self.steps: List[TraceStep] = []
        self._replayed: Optional[List[int]] = None

    def record(self, step: str, anchor: str, sequence, positions=None, block: Optional[int] = None) -> None:
        m = self.multiset.m
        if positions is None:
            written = list(range(1, len(sequence) + 1))
        else:
            written = sorted(set(positions))
        phi = sequence_sum(sequence, m)
        R = block_residue_sum(sequence, block, m) if block else None
        entry = TraceStep(
            step=step,
            anchor=anchor,
            positions=written,
            phi_after=phi,
            values=[sequence[p - 1] for p in written],
            block=block,
            R=R,
        )
        self.steps.append(entry)
        logger.debug("%-16s %-28s Φ=%d", step, anchor, phi)
        if self.debug:
            self._check(entry, sequence, full=positions is None)

    def _check(self, entry: TraceStep, sequence, full: bool) -> None:
        step = entry.step
        if tuple(sorted(sequence)) != self.multiset.elements:
            raise ConstructionGap(f"step {step} changed the multiset", step=step)
        if full or self._replayed is None:
            self._replayed = list(sequence) if full else None
        else:
            self._replayed = replay(self._replayed, [entry])
            if self._replayed != list(sequence):
                raise ConstructionGap(f"step {step} does not replay to the current sequence", step=step)
            if sequence_sum(self._replayed, self.multiset.m) != entry.phi_after:
                raise ConstructionGap(f"step {step} recorded the wrong Φ", step=step)
        if entry.block and entry.R % entry.block:
            raise ConstructionGap(f"step {step} left R ≡ {entry.R % entry.block} (mod {entry.block})", step=step)


@dataclass
class RunStats:
    fallbacks: int = 0
    oracle_calls: int = 0


class SolveRun:
    """一次求解的上下文：设置、随机数、计数器、子问题缓存，以及顶层才有的 tracer"""

    def __init__(self, settings: SolverSettings, rng, stats: RunStats, tracer: Optional[StepTracer] = None,
                 solved: Optional[Dict[Tuple[int, Tuple[int, ...]], List[int]]] = None):
        self.settings = settings
        self.rng = rng
        self.stats = stats
        self.tracer = tracer
        self.solved = solved if solved is not None else {}

    def record(self, step: str, anchor: str, sequence, positions=None, block: Optional[int] = None) -> None:
        if self.tracer is not None:
            self.tracer.record(step, anchor, sequence, positions, block)

    def nested(self) -> "SolveRun":
        return SolveRun(self.settings, self.rng, self.stats, solved=self.solved)

    @property
    def steps(self) -> List[TraceStep]:
        return self.tracer.steps if self.tracer is not None else []


class PermutationalSumSolver:
    """
    零置换和求解器

    每个非例外多重集都得到一条可复核的证书；
    例外多重集返回其结构
    """

    def __init__(self,
                 settings: Optional[SolverSettings] = None,
                 oracle: Optional[SpectrumOracle] = None,
                 classifier: Optional[ExceptionClassifier] = None):
        self.settings = settings or SolverSettings()
        self.oracle = oracle or SpectrumOracle(self.settings.oracle_cap)
        self.classifier = classifier or ExceptionClassifier(self.oracle)
        self.arranger = BlockArranger(self, self.classifier)
        self.prime_solver = PrimeSolver(self)
        self.odd_solver = OddOrderSolver(self, self.arranger)
        self.even_solver = EvenOrderSolver(self, self.arranger)

    # ------------------------------------------------------------------
    # 公共入口
    # ------------------------------------------------------------------

    def solve(self, M: ZMultiset) -> SolveOutcome:
        """
        求零置换和

        Args:
            M: Z_m 上的多重集

        Returns:
            SolveOutcome：证书或例外结构
        """
        return self._run(M, self._dispatch)

    def solve_prime(self, M: ZMultiset) -> SolveOutcome:
        if not M.modulus.is_prime:
            raise ValueError(f"m={M.m} is not prime")
        return self._run(M, self.prime_solver.solve)

    def solve_odd(self, M: ZMultiset) -> SolveOutcome:
        if M.modulus.is_even or M.m < 3:
            raise ValueError(f"m={M.m} is not an odd order ≥ 3")
        if M.modulus.is_prime:
            return self._run(M, self.prime_solver.solve)
        return self._run(M, self.odd_solver.solve)

    def solve_even(self, M: ZMultiset) -> SolveOutcome:
        if not M.modulus.is_even:
            raise ValueError(f"m={M.m} is not even")
        if M.m <= 4:
            return self._run(M, self._base_case)
        return self._run(M, self.even_solver.solve)

    def solve_atlast(self, M: ZMultiset) -> SolveOutcome:
        """两个偶数元素的情形；不满足前提时抛 ValueError"""
        if not EvenOrderSolver.is_two_even_shape(M) or M.m <= 4:
            raise ValueError(f"{M} does not have two even elements and m−2 odd elements agreeing mod 2^(k−1)")
        return self._run(M, self.even_solver.solve_atlast)

    def fix_R_nonzero(self, d: BlockDecomposition) -> Arrangement:
        """R' ≢ 0 时调整块顺序；全部元素 mod p 同余时抛 UniformResidues"""
        arrangement = self._decomposed_arrangement(d)
        if not d.R_prime:
            raise ValueError("fix_R_nonzero needs m* | R with R' ≢ 0 (mod p)")
        run = self._new_run(arrangement.multiset())
        sequence = self.odd_solver.fix_nonzero(list(arrangement.sequence), d.m, d.p, run)
        return Arrangement(arrangement.modulus, tuple(sequence))

    def fix_R_zero(self, d: BlockDecomposition) -> Union[Arrangement, EscalationRequest]:
        """R' ≡ 0 时修复；当前素数无能为力时返回 EscalationRequest"""
        arrangement = self._decomposed_arrangement(d)
        if d.R_prime is None or d.R_prime != 0:
            raise ValueError("fix_R_zero needs R ≡ 0 (mod m)")
        M = arrangement.multiset()
        run = self._new_run(M)
        try:
            sequence = self.odd_solver.fix_zero(list(arrangement.sequence), M, d.p, run)
        except EscalationRequest as request:
            return request
        return Arrangement(arrangement.modulus, tuple(sequence))

    def finish_prime_power(self, M: ZMultiset) -> SolveOutcome:
        """奇素数幂阶在各层提升都失败后的两位置放置"""
        run = self._new_run(M)
        result = self.odd_solver.finish_prime_power(M, run)
        if isinstance(result, ExceptionalStructure):
            return SolveOutcome(multiset=M, exception=result)
        return self._outcome(M, result, run)

    def finish_multiprime(self, M: ZMultiset, witnesses: Optional[Dict[int, int]] = None) -> SolveOutcome:
        """所有素数都要求换素数之后的直接放置"""
        run = self._new_run(M)
        result = self.odd_solver.finish_multiprime(M, run, witnesses)
        if isinstance(result, ExceptionalStructure):
            return SolveOutcome(multiset=M, exception=result)
        return self._outcome(M, result, run)

    # ------------------------------------------------------------------
    # 供各构造器回调
    # ------------------------------------------------------------------

    def zero_sequence(self, M: ZMultiset, run: SolveRun) -> List[int]:
        """
        子问题求零：不记录步骤，但共享随机数、计数器与缓存

        同一次求解内相同的子多重集只构造一次；走过安全网的结果不进缓存
        """
        key = (M.m, M.elements)
        if key in run.solved:
            return list(run.solved[key])
        if self.classifier.classify(M):
            raise ConstructionGap(f"sub-multiset {M} is exceptional", step="block")
        fallbacks = run.stats.fallbacks
        sequence = self._construct(M, run.nested(), self._dispatch)
        if run.stats.fallbacks == fallbacks:
            run.solved[key] = list(sequence)
        return sequence

    def oracle_witness(self, M: ZMultiset, target: int, run: SolveRun):
        run.stats.oracle_calls += 1
        return self.oracle.witness(M, target)

    # ------------------------------------------------------------------
    # 内部
    # ------------------------------------------------------------------

    def _new_run(self, M: ZMultiset) -> SolveRun:
        rng = np.random.default_rng(self.settings.seed)
        return SolveRun(self.settings, rng, RunStats(), StepTracer(M, self.settings.debug))

    def _run(self, M: ZMultiset, strategy: Strategy) -> SolveOutcome:
        structure = self.classifier.classify(M)
        if structure:
            logger.info("%s is exceptional: %s", M, structure.describe())
            return SolveOutcome(multiset=M, exception=structure)
        run = self._new_run(M)
        sequence = self._construct(M, run, strategy)
        return self._outcome(M, sequence, run)

    def _outcome(self, M: ZMultiset, sequence: List[int], run: SolveRun) -> SolveOutcome:
        certificate = certify(M, sequence)
        if not verify(certificate) or int(certificate.value) != 0:
            raise RuntimeError(f"certificate for {M} does not verify")
        return SolveOutcome(
            multiset=M,
            certificate=certificate,
            trace=run.steps,
            fallbacks=run.stats.fallbacks,
            oracle_calls=run.stats.oracle_calls,
        )

    def _dispatch(self, M: ZMultiset, run: SolveRun) -> List[int]:
        m = M.m
        if m <= 2 or m == 4:
            return self._base_case(M, run)
        if m >= self.settings.direct_threshold:
            sequence = self._direct_transposition(M, run)
            if sequence is not None:
                return sequence
        if M.modulus.is_prime:
            return self.prime_solver.solve(M, run)
        if not M.modulus.is_even:
            return self.odd_solver.solve(M, run)
        return self.even_solver.solve(M, run)

    def _direct_transposition(self, M: ZMultiset, run: SolveRun) -> Optional[List[int]]:
        """
        大 m 的捷径：随机重排后，对前 offset_budget 个位移向量化地找一次对换

        Returns:
            Φ ≡ 0 的序列；多重集取值太集中找不到时返回 None，交给结构化构造
        """
        m = M.m
        values = run.rng.permutation(np.asarray(M.elements, dtype=np.int64))
        positions = np.arange(1, m + 1, dtype=np.int64)
        phi = int((positions * values % m).sum() % m)
        sequence = values.tolist()
        if phi == 0:
            run.record("shuffled_order", "direct", sequence)
            return sequence
        need = (-phi) % m
        for delta in range(1, min(self.settings.offset_budget, m - 1) + 1):
            g = gcd(delta, m)
            if need % g:
                continue
            reduced = m // g
            wanted = ((need // g) * mod_inverse((delta // g) % reduced, reduced)) % reduced
            difference = values[:-delta] - values[delta:]
            hits = np.flatnonzero((difference % reduced == wanted) & (difference % m != 0))
            if hits.size:
                i = int(hits[0]) + 1
                run.record("shuffled_order", "direct", sequence)
                swap(sequence, i, i + delta)
                run.record("transposition", "direct", sequence, positions=(i, i + delta))
                return sequence
        logger.debug("m=%d: no direct transposition within %d offsets", m, self.settings.offset_budget)
        return None

    def _base_case(self, M: ZMultiset, run: SolveRun) -> List[int]:
        for ordering in sorted(set(permutations(M.elements))):
            if sequence_sum(ordering, M.m) == 0:
                sequence = list(ordering)
                run.record("base_case", f"order {M.m}", sequence)
                return sequence
        raise ConstructionGap(f"{M} has no zero arrangement", step="base case")

    def _construct(self, M: ZMultiset, run: SolveRun, strategy: Strategy) -> List[int]:
        m = M.m
        try:
            sequence = strategy(M, run)
            if tuple(sorted(sequence)) != M.elements:
                raise ConstructionGap("construction changed the multiset", step="final check")
            if sequence_sum(sequence, m):
                raise ConstructionGap(f"construction ended with Φ ≡ {sequence_sum(sequence, m)}",
                                      step="final check")
            return sequence
        except ConstructionGap as gap:
            run.stats.fallbacks += 1
            logger.warning("safety net for %s after %s: %s", M, gap.step or "construction", gap)
            sequence = self._safety_net(M, run)
            if sequence is None:
                raise
            run.record("safety_net", "fallback", sequence)
            return sequence

    def _safety_net(self, M: ZMultiset, run: SolveRun) -> Optional[List[int]]:
        if M.m <= self.settings.oracle_cap:
            certificate = self.oracle_witness(M, 0, run)
            return list(certificate.arrangement.sequence) if certificate is not None else None
        return self._random_search(M, run)

    def _random_search(self, M: ZMultiset, run: SolveRun) -> Optional[List[int]]:
        """随机重排 + 单次对换，轮数由 search_rounds 控制"""
        m = M.m
        sequence = list(M.elements)
        rounds = self.settings.search_rounds or 32
        budget = self.settings.offset_budget * m
        for _ in range(rounds):
            phi = sequence_sum(sequence, m)
            if phi == 0:
                return sequence
            pair = find_transposition(sequence, m, -phi, budget=budget)
            if pair is not None:
                swap(sequence, *pair)
                return sequence
            run.rng.shuffle(sequence)
        return None

    @staticmethod
    def _decomposed_arrangement(d: BlockDecomposition) -> Arrangement:
        if d.arrangement is None:
            raise ValueError("block decomposition carries no arrangement")
        return d.arrangement


_default_solver: Optional[PermutationalSumSolver] = None


def _solver() -> PermutationalSumSolver:
    global _default_solver
    if _default_solver is None:
        _default_solver = PermutationalSumSolver()
    return _default_solver


def solve(M: ZMultiset, settings: Optional[SolverSettings] = None) -> SolveOutcome:
    solver = PermutationalSumSolver(settings) if settings is not None else _solver()
    return solver.solve(M)


def solve_values(m: int, values, settings: Optional[SolverSettings] = None) -> SolveOutcome:
    return solve(ZMultiset(factorize(m), tuple(int(v) % m for v in values)), settings)


def solve_prime(M: ZMultiset) -> SolveOutcome:
    return _solver().solve_prime(M)


def solve_odd(M: ZMultiset) -> SolveOutcome:
    return _solver().solve_odd(M)


def solve_even(M: ZMultiset) -> SolveOutcome:
    return _solver().solve_even(M)


def solve_atlast(M: ZMultiset) -> SolveOutcome:
    return _solver().solve_atlast(M)


def fix_R_nonzero(d: BlockDecomposition) -> Arrangement:
    return _solver().fix_R_nonzero(d)


def fix_R_zero(d: BlockDecomposition) -> Union[Arrangement, EscalationRequest]:
    return _solver().fix_R_zero(d)


def finish_prime_power(M: ZMultiset) -> SolveOutcome:
    return _solver().finish_prime_power(M)


def finish_multiprime(M: ZMultiset, witnesses: Optional[Dict[int, int]] = None) -> SolveOutcome:
    return _solver().finish_multiprime(M, witnesses)
