"""
命令行测试：各子命令的输出与退出码
"""

import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import io
import json

import pytest

from main import EXIT_ERROR, EXIT_EXCEPTIONAL, EXIT_OK, main
from src.models.multiset import sequence_sum
from src.utils.input_handler import InputHandler, MultisetParseError, parse_multiset


def run_cli(capsys, argv, stdin_text=None):
    stdin = io.StringIO(stdin_text) if stdin_text is not None else None
    code = main(argv, stdin=stdin)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_multiset():
    M = parse_multiset(" 4 :  7, -1 ,2,2\n")
    assert M.m == 4
    assert M.elements == (2, 2, 3, 3)
    with pytest.raises(MultisetParseError):
        parse_multiset("3: 0, 1")
    with pytest.raises(MultisetParseError):
        parse_multiset("3 0 1 2")
    with pytest.raises(MultisetParseError) as error:
        parse_multiset("3: 0, x, 2")
    assert error.value.token == "x"
    with pytest.raises(MultisetParseError):
        parse_multiset("0: ")
    with pytest.raises(MultisetParseError):
        parse_multiset("3: 0,,1,2")


def test_input_sources(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("3: 0,0,0", encoding="utf-8")
    handler = InputHandler(io.StringIO("3: 1,1,1"))
    assert handler.read_multiset(path=str(path)).elements == (0, 0, 0)
    assert handler.read_multiset("-").elements == (1, 1, 1)
    with pytest.raises(MultisetParseError):
        handler.read_multiset("3: 0,0,0", str(path))


def test_solve_prints_zero_arrangement(capsys):
    code, out, _ = run_cli(capsys, ["solve", "6: 1,1,1,1,2,0"])
    assert code == EXIT_OK
    values = [int(v) for v in out.strip().split(",")]
    assert sorted(values) == [0, 1, 1, 1, 1, 2]
    assert sequence_sum(values, 6) == 0


def test_solve_exceptional(capsys):
    code, out, _ = run_cli(capsys, ["solve", "5: 1,1,1,2,0"])
    assert code == EXIT_EXCEPTIONAL
    assert out.strip() == "INHOMOGENEOUS a=1 b=1"


def test_solve_explain(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--explain", "7: 0,0,1,2,2,3,6"])
    assert code == EXIT_OK
    assert "Φ=" in out


def test_solve_from_stdin(capsys):
    code, out, _ = run_cli(capsys, ["solve"], stdin_text="3: 0,0,0\n")
    assert code == EXIT_OK
    assert out.strip() == "0,0,0"


@pytest.mark.parametrize("multiset, expected, exit_code", [
    ("6: 1,1,1,1,1,1", "HOMOGENEOUS c=1 mod 2", EXIT_EXCEPTIONAL),
    ("6: 0,0,0,0,1,5", "INHOMOGENEOUS a=0 b=1", EXIT_EXCEPTIONAL),
    ("4: 1,1,3,3", "NONE", EXIT_OK),
])
def test_classify(capsys, multiset, expected, exit_code):
    code, out, _ = run_cli(capsys, ["classify", multiset])
    assert code == exit_code
    assert out.strip() == expected


def test_classify_json(capsys):
    code, out, _ = run_cli(capsys, ["classify", "--json", "12: 1,1,1,1,1,1,1,1,1,1,1,1"])
    assert code == EXIT_EXCEPTIONAL
    data = json.loads(out)
    assert data["classification"] == "HOMOGENEOUS c=1 mod 4"
    assert data["exception"] == {"kind": "homogeneous", "m": 12, "c": 1, "mod": 4}


def test_spectrum(capsys):
    code, out, _ = run_cli(capsys, ["spectrum", "3: 0,1,2"])
    assert code == EXIT_OK
    assert out.strip() == "{1, 2}"

    code, out, _ = run_cli(capsys, ["spectrum", "--json", "4: 1,1,1,1"])
    assert json.loads(out)["spectrum"] == [2]


def test_spectrum_over_cap(capsys):
    code, _, err = run_cli(capsys, ["spectrum", "--oracle-cap", "5", "6: 0,0,0,0,0,0"])
    assert code == EXIT_ERROR
    assert "oracle cap exceeded" in err


def test_bad_input_is_an_error(capsys):
    code, _, err = run_cli(capsys, ["solve", "3: 0,1"])
    assert code == EXIT_ERROR
    assert "exactly 3 elements" in err


def test_verify_round_trip(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--json", "6: 1,1,1,1,2,0"])
    assert code == EXIT_OK
    result = json.loads(out)
    assert result["status"] == "solved"

    code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(result))
    assert code == EXIT_OK
    assert out.startswith("OK")

    tampered = dict(result)
    arrangement = list(result["certificate"]["arrangement"])
    arrangement[0], arrangement[-1] = arrangement[-1], arrangement[0]
    if sequence_sum(arrangement, 6) == 0:
        arrangement = [0, 1, 1, 1, 1, 2]
    tampered["certificate"] = {"m": 6, "arrangement": arrangement, "value": 0}
    code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(tampered))
    assert code == EXIT_ERROR
    assert out.startswith("FAIL")


def test_verify_exceptional_result(capsys, tmp_path):
    code, out, _ = run_cli(capsys, ["solve", "--json", "5: 1,1,1,2,0"])
    assert code == EXIT_EXCEPTIONAL
    path = tmp_path / "result.json"
    path.write_text(out, encoding="utf-8")

    code, out, _ = run_cli(capsys, ["verify", "--file", str(path)])
    assert code == EXIT_OK
    assert out.strip() == "OK INHOMOGENEOUS a=1 b=1"

    forged = json.loads(path.read_text(encoding="utf-8"))
    forged["multiset"] = [0, 0, 0, 0, 0]
    code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(forged))
    assert code == EXIT_ERROR
    assert out.startswith("FAIL")


def test_verify_rejects_other_schema(capsys):
    code, _, err = run_cli(capsys, ["verify"], stdin_text=json.dumps({"v": 2, "m": 3}))
    assert code == EXIT_ERROR
    assert "schema" in err


def test_census_json(capsys, tmp_path):
    code, out, _ = run_cli(capsys, ["census", "--m", "3", "4", "--json", "--out", str(tmp_path)])
    assert code == EXIT_OK
    reports = json.loads(out)["reports"]
    assert [report["m"] for report in reports] == [3, 4]
    assert reports[0]["total"] == 10
    assert (tmp_path / "census-summary.csv").exists()


def test_census_needs_a_range(capsys):
    code, _, err = run_cli(capsys, ["census"])
    assert code == EXIT_ERROR
    assert "--m" in err


def test_bench_json(capsys):
    code, out, _ = run_cli(capsys, ["bench", "7", "--count", "20", "--json"])
    assert code == EXIT_OK
    stats = json.loads(out)
    assert stats["count"] == 20
    assert stats["m"] == 7
    assert stats["p99_ms"] >= stats["p50_ms"]


def test_verify_checks_the_trace(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--json", "9: 0,0,0,3,3,3,6,6,6"])
    assert code == EXIT_OK
    result = json.loads(out)
    assert result["trace"]

    code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(result))
    assert code == EXIT_OK

    forged = json.loads(json.dumps(result))
    forged["trace"][0]["values"] = [0] * 9
    forged["trace"] = forged["trace"][:1]
    code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(forged))
    assert code == EXIT_ERROR
    assert out.startswith("FAIL")


def test_solve_save(capsys, tmp_path):
    path = tmp_path / "saved.json"
    code, out, err = run_cli(capsys, ["solve", "--save", str(path), "6: 1,1,1,1,2,0"])
    assert code == EXIT_OK
    saved = json.loads(path.read_text(encoding="utf-8"))
    assert saved["status"] == "solved"
    assert ",".join(str(v) for v in saved["certificate"]["arrangement"]) == out.strip()
    assert str(path) in err


def test_verify_reads_a_positional_path(capsys, tmp_path):
    code, out, _ = run_cli(capsys, ["solve", "--json", "6: 1,1,1,1,2,0"])
    assert code == EXIT_OK
    path = tmp_path / "cert.json"
    path.write_text(out, encoding="utf-8")

    code, out, _ = run_cli(capsys, ["verify", str(path)])
    assert code == EXIT_OK
    assert out.startswith("OK")

    code, _, err = run_cli(capsys, ["verify", str(tmp_path / "missing.json")])
    assert code == EXIT_ERROR
    assert "JSON" in err


@pytest.mark.parametrize("certificate", [[1, 2], None, {"arrangement": "1,2", "value": 0},
                                         {"arrangement": [0, 1, 2], "value": "0"}])
def test_verify_rejects_malformed_certificate(capsys, certificate):
    result = {"v": 1, "m": 3, "multiset": [0, 1, 2], "status": "solved", "certificate": certificate}
    code, out, err = run_cli(capsys, ["verify"], stdin_text=json.dumps(result))
    assert code == EXIT_ERROR
    assert "certificate" in err
    assert out == ""


def test_verify_rejects_trace_outside_the_sequence(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--json", "9: 0,0,0,3,3,3,6,6,6"])
    result = json.loads(out)
    for bad in (0, -1, 10):
        forged = json.loads(json.dumps(result))
        forged["trace"][0]["positions"][0] = bad
        code, out, _ = run_cli(capsys, ["verify"], stdin_text=json.dumps(forged))
        assert code == EXIT_ERROR
        assert out.startswith("FAIL")
