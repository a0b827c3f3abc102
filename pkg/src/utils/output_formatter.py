"""
输出格式化器 (Output Formatter)
结果行保持机器可读，解释、普查、基准部分带标题
"""

import json
import sys
from typing import Any, Dict, Sequence

from ..algorithms.census import CensusReport
from ..algorithms.spectrum_oracle import Spectrum
from ..models.outcome import SolveOutcome


def format_arrangement(sequence: Sequence[int]) -> str:
    return ",".join(str(v) for v in sequence)


class OutputFormatter:
    """
    结果输出格式化器
    """

    def __init__(self):
        pass

    def print_solve_result(self, outcome: SolveOutcome, explain: bool = False):
        """
        打印求解结果：排列或例外结构；explain 时附上步骤记录
        """
        if outcome.solved:
            print(format_arrangement(outcome.certificate.arrangement.sequence))
        else:
            print(outcome.exception.describe())
        if explain:
            self._print_trace(outcome)

    def _print_trace(self, outcome: SolveOutcome):
        """打印证明步骤"""
        print(f"\n🧭 {outcome.multiset}")
        print("-" * 60)
        if not outcome.solved:
            print(f"例外结构，无零置换和：{outcome.exception.describe()}")
            return
        for index, step in enumerate(outcome.trace, 1):
            positions = format_arrangement(step.positions[:12])
            if len(step.positions) > 12:
                positions += ",…"
            print(f"{index:>3}. {step.step:<16} {step.anchor:<32} Φ={step.phi_after:<6} @ {positions}")
        print("-" * 60)
        print(f"🛟 安全网: {outcome.fallbacks} 次   🔮 oracle: {outcome.oracle_calls} 次")

    def print_classification(self, classification):
        print(classification.describe())

    def print_spectrum(self, spectrum: Spectrum):
        print(spectrum.describe())

    def print_verification(self, ok: bool, detail: str):
        print(("OK " if ok else "FAIL ") + detail)

    def print_census_report(self, report: CensusReport):
        """打印一个 m 的普查汇总"""
        print(f"\n📊 m = {report.m} ({report.mode})")
        print("-" * 40)
        print(f"  多重集总数: {report.total}")
        print(f"  构造求解:   {report.zero_solved}")
        print(f"  齐次例外:   {report.homogeneous}")
        print(f"  非齐次例外: {report.inhomogeneous}")
        print(f"  安全网:     {report.fallbacks}")
        print(f"  模式重叠:   {report.pattern_overlaps}")
        if report.mode == "random":
            print(f"  样本数:     {report.samples} (seed {report.seed})")
        print(f"  ⏱️ 耗时:    {report.seconds:.2f} 秒")
        for title, entries in (("不一致", report.mismatches),
                               ("猜想反例", report.conjecture_violations),
                               ("谱定律违例", report.law_violations)):
            if entries:
                print(f"  ❗ {title}: {len(entries)}")
                for entry in entries[:5]:
                    print(f"     {entry['multiset']}  {entry['reason']}")
        if report.clean:
            print("  ✅ 全部一致")

    def print_bench(self, stats: Dict[str, Any]):
        """打印基准结果"""
        print(f"\n⚡ bench m = {stats['m']}, {stats['count']} 个随机实例")
        print("-" * 40)
        print(f"  吞吐量: {stats['instances_per_second']:.1f} 个/秒")
        print(f"  p50:    {stats['p50_ms']:.3f} ms")
        print(f"  p99:    {stats['p99_ms']:.3f} ms")
        print(f"  例外:   {stats['exceptional']}   安全网: {stats['fallbacks']}")

    def print_json(self, data: Dict[str, Any]):
        print(json.dumps(data, ensure_ascii=False, indent=2))

    def print_error(self, message: str):
        print(f"❌ {message}", file=sys.stderr)

    def save_result_to_file(self, result: Dict[str, Any], filename: str = "permsum_result.json"):
        """保存结果到文件"""
        try:
            with open(filename, 'w', encoding='utf-8') as f:
                json.dump(result, f, ensure_ascii=False, indent=2, default=str)
            print(f"💾 结果已保存到 {filename}", file=sys.stderr)
        except OSError as e:
            print(f"\n❌ 保存文件失败: {e}", file=sys.stderr)
