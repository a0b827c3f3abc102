"""
暴力 oracle 测试：子集 DP 与 m! 枚举一致，见证排列可复核
"""

import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import pytest
from hypothesis import given, settings, strategies as st

from src.algorithms.spectrum_oracle import (
    OracleCapExceeded,
    SpectrumOracle,
    has_zero,
    naive_spectrum,
    spectrum,
    spectrum_of_values,
    witness,
)
from src.core.residue import triangular_sum_mod, units
from src.models.multiset import ZMultiset, decompose_sequence, perm_sum, translate, verify


def create_test_multiset(m, values):
    return ZMultiset.from_values(m, values)


@st.composite
def tiny_multisets(draw, max_m=6):
    m = draw(st.integers(min_value=1, max_value=max_m))
    values = draw(st.lists(st.integers(min_value=0, max_value=m - 1), min_size=m, max_size=m))
    return ZMultiset.from_values(m, values)


@pytest.mark.parametrize("m, values, expected", [
    (3, [0, 1, 2], (1, 2)),
    (4, [1, 1, 1, 1], (2,)),
    (5, [0, 0, 0, 0, 0], (0,)),
    (5, [1, 1, 1, 2, 0], (1, 2, 3, 4)),
    (1, [0], (0,)),
])
def test_spectrum_examples(m, values, expected):
    assert spectrum(create_test_multiset(m, values)).values == expected


def test_spectrum_describe_and_flags():
    result = spectrum_of_values(3, [0, 1, 2])
    assert result.describe() == "{1, 2}"
    assert result.size == 2
    assert not result.is_full
    assert 0 not in result
    assert spectrum_of_values(4, [0, 0, 1, 2]).is_full


def test_witness_examples():
    assert witness(create_test_multiset(3, [0, 1, 2]), 0) is None

    zeros = witness(create_test_multiset(3, [0, 0, 0]), 0)
    assert zeros.arrangement.sequence == (0, 0, 0)

    M = create_test_multiset(6, [1, 1, 1, 1, 2, 0])
    certificate = witness(M, 0)
    assert certificate is not None
    assert verify(certificate)
    assert int(certificate.value) == 0
    assert certificate.arrangement.multiset() == M


def test_has_zero_examples():
    assert not has_zero(create_test_multiset(6, [1] * 6))
    assert has_zero(create_test_multiset(7, [0] * 7))
    assert not has_zero(create_test_multiset(6, [0, 0, 0, 0, 1, 5]))


def test_cap_is_enforced():
    oracle = SpectrumOracle(5)
    with pytest.raises(OracleCapExceeded) as error:
        oracle.spectrum(create_test_multiset(6, [0] * 6))
    assert error.value.m == 6
    assert error.value.cap == 5
    with pytest.raises(ValueError):
        oracle.witness(create_test_multiset(6, [0] * 6), 0)


def test_cap_from_environment(monkeypatch):
    monkeypatch.setenv("PERMSUM_ORACLE_CAP", "9")
    assert SpectrumOracle().cap == 9
    monkeypatch.setenv("PERMSUM_ORACLE_CAP", "not a number")
    assert SpectrumOracle().cap == 20


def test_calls_are_counted():
    oracle = SpectrumOracle(10)
    M = create_test_multiset(4, [0, 1, 2, 3])
    oracle.spectrum(M)
    oracle.has_zero(M)
    oracle.witness(M, 1)
    assert oracle.calls == 3


@settings(max_examples=120, deadline=None)
@given(tiny_multisets())
def test_dp_agrees_with_enumeration(M):
    assert spectrum(M).values == naive_spectrum(M).values


@settings(max_examples=60, deadline=None)
@given(tiny_multisets(max_m=9))
def test_every_attainable_value_has_a_witness(M):
    oracle = SpectrumOracle(9)
    result = oracle.spectrum(M)
    for w in range(M.m):
        certificate = oracle.witness(M, w)
        if w in result:
            assert verify(certificate)
            assert perm_sum(certificate.arrangement) == w
        else:
            assert certificate is None


@settings(max_examples=60, deadline=None)
@given(tiny_multisets(max_m=9), st.data())
def test_unit_multiples_of_attainable_values(M, data):
    result = spectrum(M)
    u = data.draw(st.sampled_from(units(M.m)))
    for w in result.values:
        assert (u * w) % M.m in result


@settings(max_examples=60, deadline=None)
@given(tiny_multisets(max_m=8), st.integers(min_value=0, max_value=20))
def test_spectrum_translation_law(M, c):
    shift = c * int(triangular_sum_mod(M.m))
    moved = spectrum(translate(M, c))
    assert set(moved.values) == {(w + shift) % M.m for w in spectrum(M).values}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([4, 6, 8, 10, 12]).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), min_size=m, max_size=m))))
def test_two_block_sumset_completion(case):
    m, values = case
    half = m // 2
    first = create_test_multiset(half, values[:half])
    second = create_test_multiset(half, values[half:])
    C, D = spectrum(first).values, spectrum(second).values
    if len(C) + len(D) <= half:
        return
    for target in range(half):
        c = next(c for c in C if (target - c) % half in D)
        left = witness(first, c).arrangement.sequence
        right = witness(second, (target - c) % half).arrangement.sequence
        # 块内取值相对原序列只差 half 的倍数
        sequence = _lift_block(values[:half], left, half) + _lift_block(values[half:], right, half)
        assert sorted(sequence) == sorted(values)
        assert decompose_sequence(sequence, m, 2).R % half == target


def _lift_block(original, arranged, modulus):
    """把 Z_modulus 上的排列还原成原块中的数值"""
    pool = sorted(original)
    lifted = []
    for residue in arranged:
        value = next(v for v in pool if v % modulus == residue)
        pool.remove(value)
        lifted.append(value)
    return lifted
