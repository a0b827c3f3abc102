"""
Census
对给定 m 枚举（或随机抽样）全部多重集，交叉核对分类器、构造求解器与 oracle
"""

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from itertools import combinations_with_replacement, islice
from math import comb
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..core.residue import factorize, units
from ..core.solver import PermutationalSumSolver
from ..models.multiset import ZMultiset, verify
from ..utils.config import SolverSettings
from .classifier import (
    ExceptionClassifier,
    _homogeneous_residue,
    forced_sum,
    inhomogeneous_shape,
    match_inhomogeneous,
    uniform_mod_prime,
)
from .spectrum_oracle import OracleCapExceeded, SpectrumOracle

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 100000
CHUNKS_PER_WORKER = 4
SUMMARY_FIELDS = [
    "m", "total", "zero_solved", "homogeneous", "inhomogeneous",
    "mismatches", "fallbacks", "conjecture_violations", "seconds",
]


@dataclass
class CensusOptions:
    workers: int = 1
    reduce_symmetry: bool = False
    seed: int = 0
    oracle_cap: Optional[int] = None
    progress: bool = True


@dataclass
class CensusReport:
    """
    一个 m 的统计结果

    计数在约化模式下按轨道大小加权，所以与完整枚举的总数一致；
    异常列表只列出代表元
    """
    m: int
    total: int = 0
    zero_solved: int = 0
    homogeneous: int = 0
    inhomogeneous: int = 0
    mismatches: List[Dict[str, Any]] = field(default_factory=list)
    fallbacks: int = 0
    conjecture_violations: List[Dict[str, Any]] = field(default_factory=list)
    pattern_overlaps: int = 0
    law_violations: List[Dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0
    seed: Optional[int] = None
    samples: int = 0
    mode: str = "exhaustive"

    def merge(self, other: "CensusReport") -> "CensusReport":
        """可加合并；列表按多重集排序，保证与 worker 数无关"""
        self.total += other.total
        self.zero_solved += other.zero_solved
        self.homogeneous += other.homogeneous
        self.inhomogeneous += other.inhomogeneous
        self.fallbacks += other.fallbacks
        self.pattern_overlaps += other.pattern_overlaps
        self.samples += other.samples
        for name in ("mismatches", "conjecture_violations", "law_violations"):
            merged = getattr(self, name) + getattr(other, name)
            merged.sort(key=lambda entry: (entry["elements"], entry.get("reason", "")))
            setattr(self, name, merged)
        return self

    @property
    def clean(self) -> bool:
        return not (self.mismatches or self.conjecture_violations or self.law_violations or self.fallbacks)

    def summary_row(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "total": self.total,
            "zero_solved": self.zero_solved,
            "homogeneous": self.homogeneous,
            "inhomogeneous": self.inhomogeneous,
            "mismatches": len(self.mismatches),
            "fallbacks": self.fallbacks,
            "conjecture_violations": len(self.conjecture_violations),
            "seconds": round(self.seconds, 3),
        }

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ----------------------------------------------------------------------
# 枚举
# ----------------------------------------------------------------------

def multiset_count(m: int) -> int:
    """Z_m 中大小为 m 的多重集个数 C(2m−1, m)"""
    return comb(2 * m - 1, m)


def _symmetry_images(elements: Tuple[int, ...], m: int) -> set:
    shifts = range(m) if m % 2 else (0,)
    images = set()
    for u in units(m):
        scaled = [(v * u) % m for v in elements]
        for shift in shifts:
            images.add(tuple(sorted((v + shift) % m for v in scaled)))
    return images


def _weighted(m: int, start: int, stop: int, reduce_symmetry: bool) -> Iterator[Tuple[Tuple[int, ...], int]]:
    window = islice(combinations_with_replacement(range(m), m), start, stop)
    for elements in window:
        if not reduce_symmetry:
            yield elements, 1
            continue
        images = _symmetry_images(elements, m)
        if min(images) == elements:
            yield elements, len(images)


def enumerate_multisets(m: int, reduce_symmetry: bool = False) -> Iterator:
    """
    字典序枚举全部多重集

    约化模式下只给出单位伸缩（m 为奇数时再加平移）轨道的最小代表元，
    产出 (代表元, 轨道大小)
    """
    modulus = factorize(m)
    for elements, orbit in _weighted(m, 0, multiset_count(m), reduce_symmetry):
        M = ZMultiset(modulus, elements)
        yield (M, orbit) if reduce_symmetry else M


# ----------------------------------------------------------------------
# 单个多重集的核对
# ----------------------------------------------------------------------

def _entry(M: ZMultiset, reason: str, spectrum=None) -> Dict[str, Any]:
    entry = {"multiset": str(M), "elements": list(M.elements), "reason": reason}
    if spectrum is not None:
        entry["spectrum"] = list(spectrum.values)
    return entry


class CensusWorker:
    """进程内的检查器：每个 worker 各自构造求解器与 oracle"""

    def __init__(self, m: int, cap: int, seed: int):
        self.m = m
        self.oracle = SpectrumOracle(cap)
        self.classifier = ExceptionClassifier(self.oracle)
        self.solver = PermutationalSumSolver(SolverSettings(oracle_cap=cap, seed=seed),
                                             oracle=self.oracle, classifier=self.classifier)

    def check(self, M: ZMultiset, weight: int, report: CensusReport) -> None:
        structure = self.classifier.classify(M)
        spectrum = self.oracle.spectrum(M)
        report.total += weight

        if bool(structure) == (0 in spectrum):
            report.mismatches.append(_entry(M, f"classifier says {structure.describe()}", spectrum))

        homogeneous = _homogeneous_residue(M) is not None
        if homogeneous and match_inhomogeneous(M.m, M.elements, require_even_a=M.modulus.is_even):
            report.pattern_overlaps += weight

        if structure:
            if structure.is_homogeneous:
                report.homogeneous += weight
            else:
                report.inhomogeneous += weight
            law = forced_sum(structure)
            if not law.attainable <= set(spectrum.values) or law.forbidden & set(spectrum.values):
                kind = "homogeneous" if structure.is_homogeneous else "inhomogeneous"
                report.law_violations.append(_entry(M, f"{kind} spectrum law", spectrum))
        else:
            outcome = self.solver.solve(M)
            report.fallbacks += outcome.fallbacks
            if outcome.solved and verify(outcome.certificate) and int(outcome.certificate.value) == 0:
                report.zero_solved += weight
            else:
                report.mismatches.append(_entry(M, "solver produced no valid certificate", spectrum))

        if not spectrum.is_full and not (inhomogeneous_shape(M) or uniform_mod_prime(M)):
            report.conjecture_violations.append(_entry(M, "spectrum not full", spectrum))


def _census_range(m: int, start: int, stop: int, reduce_symmetry: bool, cap: int, seed: int) -> CensusReport:
    worker = CensusWorker(m, cap, seed)
    report = CensusReport(m=m)
    modulus = factorize(m)
    for elements, weight in _weighted(m, start, stop, reduce_symmetry):
        worker.check(ZMultiset(modulus, elements), weight, report)
    return report


def _census_rows(m: int, rows: Sequence[Tuple[int, ...]], cap: int, seed: int) -> CensusReport:
    worker = CensusWorker(m, cap, seed)
    report = CensusReport(m=m)
    modulus = factorize(m)
    for row in rows:
        worker.check(ZMultiset(modulus, tuple(sorted(row))), 1, report)
        report.samples += 1
    return report


def _ranges(total: int, pieces: int) -> List[Tuple[int, int]]:
    pieces = max(1, min(pieces, total))
    size = -(-total // pieces)
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def _gather(tasks: List[Tuple], target, workers: int, report: CensusReport,
            progress: bool, description: str) -> CensusReport:
    if workers <= 1:
        for args in tqdm(tasks, desc=description, disable=not progress):
            report.merge(target(*args))
        return report

    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(target, *args) for args in tasks]
        for future in tqdm(as_completed(futures), total=len(futures), desc=description, disable=not progress):
            report.merge(future.result())
    return report


def _resolve_cap(m: int, options: CensusOptions) -> int:
    cap = options.oracle_cap if options.oracle_cap is not None else SpectrumOracle().cap
    if m > cap:
        raise OracleCapExceeded(m, cap)
    return cap


def run_census(m: int, options: Optional[CensusOptions] = None) -> CensusReport:
    """
    完整枚举 m 的全部多重集

    Args:
        m: 群的阶
        options: worker 数、是否按对称约化、种子、oracle 上限

    Returns:
        合并后的 CensusReport
    """
    options = options or CensusOptions()
    cap = _resolve_cap(m, options)
    started = time.perf_counter()
    report = CensusReport(m=m, seed=options.seed,
                          mode="reduced" if options.reduce_symmetry else "exhaustive")
    pieces = max(1, options.workers) * CHUNKS_PER_WORKER
    tasks = [(m, start, stop, options.reduce_symmetry, cap, options.seed)
             for start, stop in _ranges(multiset_count(m), pieces)]
    _gather(tasks, _census_range, options.workers, report, options.progress, f"census m={m}")
    report.seconds = time.perf_counter() - started
    logger.info("census m=%d: %s", m, report.summary_row())
    return report


def run_random_census(m: int, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      options: Optional[CensusOptions] = None) -> CensusReport:
    """按种子随机抽取 samples 个多重集做同样的核对"""
    options = options or CensusOptions(seed=seed)
    cap = _resolve_cap(m, options)
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, m, size=(samples, m))
    rows = [tuple(int(v) for v in row) for row in draws]
    report = CensusReport(m=m, seed=seed, mode="random")
    pieces = max(1, options.workers) * CHUNKS_PER_WORKER
    tasks = [(m, rows[start:stop], cap, seed) for start, stop in _ranges(len(rows), pieces)]
    _gather(tasks, _census_rows, options.workers, report, options.progress, f"random m={m}")
    report.seconds = time.perf_counter() - started
    return report


def conjecture_check(m: int, options: Optional[CensusOptions] = None) -> List[Dict[str, Any]]:
    """谱不满但不属于两类预测形状的多重集"""
    return run_census(m, options).conjecture_violations


# ----------------------------------------------------------------------
# 报告
# ----------------------------------------------------------------------

def _anomalies(report: CensusReport) -> Iterable[Dict[str, Any]]:
    for kind, entries in (("mismatch", report.mismatches),
                          ("conjecture_violation", report.conjecture_violations),
                          ("law_violation", report.law_violations)):
        for entry in entries:
            yield {"kind": kind, "m": report.m, **entry}


def write_reports(reports: Sequence[CensusReport], out_dir) -> List[Path]:
    """
    每个 m 写一个 census-m<NN>.jsonl（异常逐行 + 最后一行汇总），
    另写一个 census-summary.csv
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        path = directory / f"census-m{report.m:02d}.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            for anomaly in _anomalies(report):
                f.write(json.dumps(anomaly, ensure_ascii=False) + "\n")
            summary = {"kind": "summary", **report.summary_row(), "mode": report.mode,
                       "seed": report.seed, "samples": report.samples,
                       "pattern_overlaps": report.pattern_overlaps,
                       "law_violations": len(report.law_violations)}
            f.write(json.dumps(summary, ensure_ascii=False) + "\n")
        written.append(path)

    summary_path = directory / "census-summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        for report in reports:
            writer.writerow(report.summary_row())
    written.append(summary_path)
    logger.info("census reports written to %s", directory)
    return written
