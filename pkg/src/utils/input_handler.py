"""
用户输入处理器 (Input Handler)
解析 "<m>: a1, a2, ..." 形式的多重集，以及 solve --json 产生的证书文件
"""

import json
import os
import re
import sys
from typing import Any, Dict, List, Optional, TextIO

from ..core.residue import factorize
from ..models.multiset import ZMultiset
from ..models.outcome import SCHEMA_VERSION

_INTEGER = re.compile(r"^[+-]?\d+$")


class MultisetParseError(ValueError):
    """输入不符合 <m> ':' <int> (',' <int>)* 语法"""

    def __init__(self, message: str, token: Optional[str] = None):
        if token is not None:
            message = f"{message}: {token!r}"
        super().__init__(message)
        self.token = token


def _integer(token: str, what: str) -> int:
    cleaned = token.strip()
    if not _INTEGER.match(cleaned):
        raise MultisetParseError(f"{what} is not an integer", cleaned)
    return int(cleaned)


def parse_multiset(text: str) -> ZMultiset:
    """
    解析多重集文本

    Args:
        text: 例如 "4: 0, 1, 2, 3"；空白不敏感，元素按 mod m 归约

    Returns:
        ZMultiset
    """
    compact = "".join(text.split())
    if ":" not in compact:
        raise MultisetParseError("expected '<m>: a1, a2, ...'", compact or text)
    head, _, body = compact.partition(":")
    m = _integer(head, "modulus")
    if m < 1:
        raise MultisetParseError("modulus must be positive", head)
    if not body:
        raise MultisetParseError(f"no elements given for m={m}")
    tokens = body.split(",")
    values: List[int] = []
    for token in tokens:
        if token == "":
            raise MultisetParseError("empty element", body)
        values.append(_integer(token, "element") % m)
    if len(values) != m:
        raise MultisetParseError(f"Z_{m} needs exactly {m} elements, got {len(values)}")
    return ZMultiset(factorize(m), tuple(values))


def _check_certificate(certificate: Any) -> None:
    if not isinstance(certificate, dict):
        raise MultisetParseError("certificate must be a JSON object", json.dumps(certificate))
    arrangement = certificate.get("arrangement")
    if not isinstance(arrangement, list) or not all(type(v) is int for v in arrangement):
        raise MultisetParseError("certificate arrangement must be a list of integers", json.dumps(arrangement))
    if type(certificate.get("value")) is not int:
        raise MultisetParseError("certificate value must be an integer", json.dumps(certificate.get("value")))


class InputHandler:
    """
    输入处理器
    三种来源恰选其一：命令行字符串、--file 路径、'-' 或缺省时读 stdin
    """

    def __init__(self, stdin: Optional[TextIO] = None):
        self.stdin = stdin

    def read_text(self, inline: Optional[str] = None, path: Optional[str] = None) -> str:
        from_stdin = inline is None or inline == "-"
        if path is not None and not from_stdin:
            raise MultisetParseError("give either an inline multiset or --file, not both")
        if path is not None:
            with open(path, "r", encoding="utf-8") as f:
                return f.read()
        if not from_stdin:
            return inline
        stream = self.stdin if self.stdin is not None else sys.stdin
        return stream.read()

    def read_multiset(self, inline: Optional[str] = None, path: Optional[str] = None) -> ZMultiset:
        return parse_multiset(self.read_text(inline, path))

    def read_result(self, inline: Optional[str] = None, path: Optional[str] = None) -> Dict[str, Any]:
        """
        读取 solve --json 的输出（证书或例外结构）

        位置参数若是已存在的文件，按路径读取；否则当作内联 JSON
        """
        if path is None and inline not in (None, "-") and os.path.isfile(inline):
            inline, path = None, inline
        text = self.read_text(inline, path)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as error:
            raise MultisetParseError(f"result is not valid JSON ({error.msg})") from error
        if not isinstance(data, dict):
            raise MultisetParseError("result must be a JSON object")
        if data.get("v") != SCHEMA_VERSION:
            raise MultisetParseError("unsupported result schema version", str(data.get("v")))
        for key in ("m", "multiset", "status"):
            if key not in data:
                raise MultisetParseError("result is missing a field", key)
        if data["status"] == "solved":
            _check_certificate(data.get("certificate"))
        return data
