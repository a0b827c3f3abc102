"""
permsum - 主程序
零置换和的构造求解、例外分类、精确谱、普查与证书校验
"""

import argparse
import logging
import sys
import time
from typing import List, Optional

import numpy as np

from src.algorithms.block_tools import ConstructionGap
from src.algorithms.census import DEFAULT_SAMPLES, CensusOptions, run_census, run_random_census, write_reports
from src.algorithms.classifier import ExceptionClassifier
from src.algorithms.spectrum_oracle import SpectrumOracle
from src.core.residue import factorize
from src.core.solver import PermutationalSumSolver
from src.models.multiset import ZMultiset, certify, verify
from src.models.outcome import SCHEMA_VERSION, TraceStep, replay
from src.utils.config import load_settings
from src.utils.input_handler import InputHandler, MultisetParseError
from src.utils.output_formatter import OutputFormatter

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXCEPTIONAL = 2

RANDOM_CENSUS_FROM = 13

logger = logging.getLogger("permsum")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="随机搜索与抽样的种子")
    common.add_argument("--oracle-cap", type=int, help="暴力 oracle 允许的最大 m")
    common.add_argument("--json", action="store_true", help="输出 JSON")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")
    common.add_argument("--debug", action="store_true", help="每一步之后复核多重集")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("multiset", nargs="?", help="'<m>: a1, a2, ...'，'-' 或缺省时读 stdin")
    source.add_argument("--file", help="从文件读取")

    parser = argparse.ArgumentParser(prog="permsum", description="Zero permutational sums in Z_m")
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve_parser = subparsers.add_parser("solve", parents=[common, source], help="构造零置换和")
    solve_parser.add_argument("--explain", action="store_true", help="打印证明步骤")
    solve_parser.add_argument("--save", help="把结果 JSON 写入文件")

    subparsers.add_parser("classify", parents=[common, source], help="判断例外结构")
    subparsers.add_parser("spectrum", parents=[common, source], help="精确谱（m ≤ oracle 上限）")
    subparsers.add_parser("verify", parents=[common, source], help="校验 solve --json 的输出")

    census_parser = subparsers.add_parser("census", parents=[common], help="普查")
    census_parser.add_argument("--m", type=int, nargs="+", help="要普查的 m")
    census_parser.add_argument("--max-m", type=int, help="普查 1..max-m")
    census_parser.add_argument("--workers", type=int, default=1)
    census_parser.add_argument("--reduce-symmetry", action="store_true", help="只检查对称轨道代表元")
    census_parser.add_argument("--samples", type=int, help="随机抽样个数（m ≥ 13 默认随机）")
    census_parser.add_argument("--out", help="报告输出目录")

    bench_parser = subparsers.add_parser("bench", parents=[common], help="随机实例基准")
    bench_parser.add_argument("m", type=int)
    bench_parser.add_argument("--count", type=int, default=1000)
    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _multiset_of(data) -> ZMultiset:
    m = int(data["m"])
    return ZMultiset(factorize(m), tuple(int(v) % m for v in data["multiset"]))


def _trace_reaches(M: ZMultiset, trace, arrangement: List[int]) -> bool:
    """按 trace 回放，终点必须就是声明的排列"""
    try:
        steps = [TraceStep.from_dict(step) for step in trace]
        return replay(list(M.elements), steps) == arrangement
    except (KeyError, IndexError, TypeError, ValueError):
        return False


def cmd_solve(args, solver, handler, formatter) -> int:
    M = handler.read_multiset(args.multiset, args.file)
    outcome = solver.solve(M)
    if args.json:
        formatter.print_json(outcome.to_dict())
    else:
        formatter.print_solve_result(outcome, explain=args.explain)
    if args.save:
        formatter.save_result_to_file(outcome.to_dict(), args.save)
    return EXIT_OK if outcome.solved else EXIT_EXCEPTIONAL


def cmd_classify(args, solver, handler, formatter) -> int:
    M = handler.read_multiset(args.multiset, args.file)
    classification = solver.classifier.classify(M)
    if args.json:
        formatter.print_json({
            "v": SCHEMA_VERSION,
            "m": M.m,
            "multiset": list(M.elements),
            "classification": classification.describe(),
            "exception": classification.to_dict() if classification else None,
        })
    else:
        formatter.print_classification(classification)
    return EXIT_EXCEPTIONAL if classification else EXIT_OK


def cmd_spectrum(args, solver, handler, formatter) -> int:
    M = handler.read_multiset(args.multiset, args.file)
    spectrum = solver.oracle.spectrum(M)
    if args.json:
        formatter.print_json({
            "v": SCHEMA_VERSION,
            "m": M.m,
            "multiset": list(M.elements),
            "spectrum": list(spectrum.values),
            "full": spectrum.is_full,
        })
    else:
        formatter.print_spectrum(spectrum)
    return EXIT_OK


def cmd_verify(args, solver, handler, formatter) -> int:
    data = handler.read_result(args.multiset, args.file)
    M = _multiset_of(data)
    if data["status"] == "solved":
        claimed = data.get("certificate") or {}
        try:
            certificate = certify(M, claimed.get("arrangement", []))
        except ValueError as error:
            formatter.print_verification(False, str(error))
            return EXIT_ERROR
        ok = verify(certificate) and int(certificate.value) == 0 and int(claimed.get("value", -1)) == 0
        if ok and data.get("trace"):
            ok = _trace_reaches(M, data["trace"], list(certificate.arrangement.sequence))
        formatter.print_verification(ok, f"Φ = {int(certificate.value)} (mod {M.m})")
        return EXIT_OK if ok else EXIT_ERROR

    classification = solver.classifier.classify(M)
    claimed = data.get("exception")
    ok = bool(classification) and claimed == classification.to_dict()
    formatter.print_verification(ok, classification.describe())
    return EXIT_OK if ok else EXIT_ERROR


def _census_moduli(args) -> List[int]:
    if args.m:
        return sorted(set(args.m))
    if args.max_m:
        return list(range(1, args.max_m + 1))
    raise MultisetParseError("census needs --m or --max-m")


def cmd_census(args, solver, handler, formatter) -> int:
    settings = solver.settings
    options = CensusOptions(
        workers=max(1, args.workers),
        reduce_symmetry=args.reduce_symmetry,
        seed=settings.seed,
        oracle_cap=settings.oracle_cap,
        progress=not args.json,
    )
    reports = []
    for m in _census_moduli(args):
        if args.samples or m >= RANDOM_CENSUS_FROM:
            report = run_random_census(m, args.samples or DEFAULT_SAMPLES, settings.seed, options)
        else:
            report = run_census(m, options)
        reports.append(report)
        if not args.json:
            formatter.print_census_report(report)
    if args.out:
        write_reports(reports, args.out)
    if args.json:
        formatter.print_json({"v": SCHEMA_VERSION, "reports": [report.to_dict() for report in reports]})
    return EXIT_OK if all(report.clean for report in reports) else EXIT_ERROR


def cmd_bench(args, solver, handler, formatter) -> int:
    m = args.m
    factorize(m)
    rng = np.random.default_rng(solver.settings.seed)
    draws = rng.integers(0, m, size=(args.count, m))
    latencies = []
    exceptional = 0
    fallbacks = 0
    started = time.perf_counter()
    for row in draws:
        M = ZMultiset.from_values(m, row.tolist())
        tick = time.perf_counter()
        outcome = solver.solve(M)
        latencies.append(time.perf_counter() - tick)
        exceptional += 0 if outcome.solved else 1
        fallbacks += outcome.fallbacks
    elapsed = time.perf_counter() - started
    p50, p99 = np.percentile(np.array(latencies) * 1000.0, [50, 99]) if latencies else (0.0, 0.0)
    stats = {
        "m": m,
        "count": args.count,
        "instances_per_second": args.count / elapsed if elapsed > 0 else 0.0,
        "p50_ms": float(p50),
        "p99_ms": float(p99),
        "exceptional": exceptional,
        "fallbacks": fallbacks,
    }
    if args.json:
        formatter.print_json({"v": SCHEMA_VERSION, **stats})
    else:
        formatter.print_bench(stats)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "census": cmd_census,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None, stdin=None) -> int:
    """主程序入口"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    settings = load_settings().with_overrides(
        oracle_cap=args.oracle_cap,
        seed=args.seed,
        debug=True if args.debug else None,
    )
    oracle = SpectrumOracle(settings.oracle_cap)
    solver = PermutationalSumSolver(settings, oracle=oracle, classifier=ExceptionClassifier(oracle))
    handler = InputHandler(stdin)
    formatter = OutputFormatter()

    try:
        return COMMANDS[args.command](args, solver, handler, formatter)
    except KeyboardInterrupt:
        formatter.print_error("用户中断了程序")
        return EXIT_ERROR
    except (ValueError, OSError, ConstructionGap) as error:
        formatter.print_error(str(error))
        logger.debug("command %s failed", args.command, exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
