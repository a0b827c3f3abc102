"""
Solve Outcome Model
构造求解的结果：零和证书或例外结构，以及可重放的证明步骤记录
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .exceptional import ExceptionalStructure
from .multiset import SumCertificate, ZMultiset

SCHEMA_VERSION = 1


@dataclass
class TraceStep:
    """
    一个证明步骤

    step: 步骤标签（如 "braid", "block_solve"）
    anchor: 对应的论证环节
    positions: 被写入的 1-based 位置
    values: 写入这些位置的值（用于重放）
    phi_after: 该步之后整条序列的置换和
    block, R: 块步骤的块长与块内置换和之和 R (mod m)，其余步骤为 None
    """
    step: str
    anchor: str
    positions: List[int]
    phi_after: int
    values: List[int] = field(default_factory=list)
    block: Optional[int] = None
    R: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "step": self.step,
            "anchor": self.anchor,
            "positions": list(self.positions),
            "values": list(self.values),
            "phi_after": self.phi_after,
        }
        if self.block is not None:
            data["block"] = self.block
            data["R"] = self.R
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TraceStep":
        block = data.get("block")
        return cls(
            step=data["step"],
            anchor=data.get("anchor", ""),
            positions=list(data.get("positions", [])),
            phi_after=int(data.get("phi_after", 0)),
            values=list(data.get("values", [])),
            block=int(block) if block is not None else None,
            R=int(data["R"]) if block is not None else None,
        )


@dataclass
class SolveOutcome:
    """
    求解结果：certificate 与 exception 恰有一个非空
    """
    multiset: ZMultiset
    certificate: Optional[SumCertificate] = None
    exception: Optional[ExceptionalStructure] = None
    trace: List[TraceStep] = field(default_factory=list)
    fallbacks: int = 0
    oracle_calls: int = 0

    @property
    def solved(self) -> bool:
        return self.certificate is not None

    @property
    def status(self) -> str:
        return "solved" if self.solved else "exceptional"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "v": SCHEMA_VERSION,
            "m": self.multiset.m,
            "multiset": list(self.multiset.elements),
            "status": self.status,
            "fallbacks": self.fallbacks,
            "trace": [step.to_dict() for step in self.trace],
        }
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_dict()
        if self.exception is not None:
            data["exception"] = self.exception.to_dict()
        return data


@dataclass(frozen=True)
class EvenCaseContext:
    """
    两个偶数元素 q1, q2 加 m−2 个奇数元素的情形

    f, g: q1, q2 的位置
    c, c_star: mod 2^k 的两个奇数剩余类，c_star ≡ c + 2^(k−1)
    l: 同余式 (q1 − c)·l·n ≡ −Φ0 (mod 2^k) 的解
    """
    f: int
    g: int
    q1: int
    q2: int
    c: int
    c_star: int
    k: int
    n: int
    l: int = 0

    def __post_init__(self):
        power = 2 ** self.k
        if self.c % 2 == 0:
            raise ValueError(f"c={self.c} must be odd")
        if (self.c_star - self.c - power // 2) % power:
            raise ValueError(f"c*={self.c_star} is not c + 2^(k-1) mod 2^k")
        if self.n % 2 == 0:
            raise ValueError(f"n={self.n} must be odd")


def replay(initial: Sequence[int], trace: Sequence[TraceStep]) -> List[int]:
    """
    从初始序列出发依次写入每一步的值，得到最终序列

    Raises:
        IndexError: 位置不在 1..m 内
        ValueError: 位置与取值个数不一致
    """
    sequence = list(initial)
    size = len(sequence)
    for step in trace:
        if len(step.positions) != len(step.values):
            raise ValueError(f"step {step.step} writes {len(step.values)} values to {len(step.positions)} positions")
        for position in step.positions:
            if not 1 <= position <= size:
                raise IndexError(f"step {step.step} writes position {position} outside 1..{size}")
        for position, value in zip(step.positions, step.values):
            sequence[position - 1] = value
    return sequence
