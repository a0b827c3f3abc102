"""
多重集模型测试：置换和、平移伸缩、可分排序、分块分解、证书
"""

import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import pytest
from hypothesis import given, settings, strategies as st

from src.core.residue import Residue, factorize, triangular_sum_mod, units
from src.models.multiset import (
    Arrangement,
    SumCertificate,
    ZMultiset,
    braid_transpose,
    certify,
    decompose,
    dilate,
    is_separable_cyclic,
    perm_sum,
    separable_order,
    translate,
    verify,
)


def create_test_arrangement(m, sequence):
    return Arrangement(factorize(m), tuple(sequence))


@st.composite
def sequences_with_divisor(draw, max_m=24):
    m = draw(st.integers(min_value=2, max_value=max_m))
    p = draw(st.sampled_from(factorize(m).primes))
    sequence = draw(st.lists(st.integers(min_value=0, max_value=m - 1), min_size=m, max_size=m))
    return m, p, sequence


def test_multiset_cardinality_and_range():
    with pytest.raises(ValueError):
        ZMultiset(factorize(3), (0, 1))
    with pytest.raises(ValueError):
        ZMultiset(factorize(3), (0, 1, 3))
    M = ZMultiset.from_values(4, [7, -1, 2, 2])
    assert M.elements == (2, 2, 3, 3)
    assert str(M) == "4: 2,2,3,3"
    assert M.counts() == {2: 2, 3: 2}


def test_perm_sum_examples():
    assert perm_sum(create_test_arrangement(5, [0, 0, 0, 0, 0])) == 0
    assert int(perm_sum(create_test_arrangement(3, [0, 1, 2]))) == 2
    assert int(perm_sum(create_test_arrangement(4, [1, 1, 1, 1]))) == 2


def test_arrangement_positions_are_one_based():
    a = create_test_arrangement(4, [3, 1, 0, 2])
    assert a[1] == 3
    assert a[4] == 2
    with pytest.raises(IndexError):
        _ = a[0]
    assert a.rotate(1).sequence == (1, 0, 2, 3)


def test_arrangement_of_checks_parent():
    M = ZMultiset.from_values(3, [0, 1, 1])
    with pytest.raises(ValueError):
        Arrangement.of(M, [0, 1, 2])
    assert Arrangement.of(M, [1, 0, 1]).multiset() == M


def test_translate_and_dilate():
    M = ZMultiset.from_values(5, [0, 0, 1, 2, 4])
    assert translate(M, 1).elements == (0, 1, 1, 2, 3)
    N = ZMultiset.from_values(3, [0, 1, 4])
    assert dilate(N, 2).elements == (0, 2, 2)
    assert dilate(M, 1) == M
    with pytest.raises(ValueError):
        dilate(N, 3)


def test_separable_order_examples():
    M = ZMultiset.from_values(9, range(9))
    ordered = separable_order(M, 3)
    assert ordered.sequence == (0, 3, 6, 1, 4, 7, 2, 5, 8)
    assert is_separable_cyclic(ordered, 3)

    odd = ZMultiset.from_values(4, [1, 1, 3, 3])
    assert separable_order(odd, 2).sequence == (1, 1, 3, 3)
    with pytest.raises(ValueError):
        separable_order(odd, 3)


def test_is_separable_cyclic_examples():
    assert is_separable_cyclic(create_test_arrangement(4, [1, 1, 3, 3]), 2)
    assert not is_separable_cyclic(create_test_arrangement(4, [1, 3, 1, 3]), 2)
    assert is_separable_cyclic(create_test_arrangement(8, [5] * 8), 2)
    # cyclic wrap counts as contiguous
    assert is_separable_cyclic(create_test_arrangement(4, [3, 1, 1, 3]), 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=40).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), min_size=m, max_size=m))))
def test_separable_order_is_separable(case):
    m, values = case
    M = ZMultiset.from_values(m, values)
    for p in M.modulus.primes:
        assert is_separable_cyclic(separable_order(M, p), p)


def test_decompose_example():
    d = decompose(create_test_arrangement(6, [1, 1, 2, 2, 0, 0]), 3)
    assert d.m_star == 2
    assert d.blocks == ((1, 1), (2, 2), (0, 0))
    assert d.block_sums == (2, 4, 0)
    assert d.R == 3
    assert d.R_prime is None
    assert d.block_range(1) == range(3, 5)
    assert d.reconstructed_sum() == int(perm_sum(d.arrangement))

    zero = decompose(create_test_arrangement(4, [0, 0, 0, 0]), 2)
    assert zero.block_sums == (0, 0)
    assert zero.R == 0
    assert zero.R_prime == 0


@settings(max_examples=80, deadline=None)
@given(sequences_with_divisor())
def test_block_identity(case):
    m, p, sequence = case
    a = create_test_arrangement(m, sequence)
    d = decompose(a, p)
    assert d.reconstructed_sum() == int(perm_sum(a))


@settings(max_examples=80, deadline=None)
@given(sequences_with_divisor(), st.data())
def test_braid_delta_matches_new_sum(case, data):
    m, _, sequence = case
    a = create_test_arrangement(m, sequence)
    i = data.draw(st.integers(min_value=1, max_value=m - 1))
    x = data.draw(st.integers(min_value=1, max_value=m - i))
    moved, delta = braid_transpose(a, i, x)
    assert perm_sum(moved) == perm_sum(a) + delta
    assert moved.multiset() == a.multiset()


def test_braid_of_equal_elements():
    a = create_test_arrangement(5, [2, 1, 2, 3, 4])
    moved, delta = braid_transpose(a, 1, 2)
    assert delta == 0
    assert moved == a
    with pytest.raises(IndexError):
        braid_transpose(a, 4, 3)


def test_verify_certificates():
    M = ZMultiset.from_values(3, [0, 0, 0])
    good = certify(M, [0, 0, 0])
    assert verify(good)

    altered = SumCertificate(create_test_arrangement(3, [0, 0, 1]), Residue(1, 3), parent=M)
    assert not verify(altered)

    off_by_one = SumCertificate(good.arrangement, Residue(1, 3), parent=M)
    assert not verify(off_by_one)
    assert good.to_dict() == {"m": 3, "arrangement": [0, 0, 0], "value": 0}


@settings(max_examples=80, deadline=None)
@given(sequences_with_divisor(), st.integers(min_value=0, max_value=50))
def test_translation_law(case, c):
    m, _, sequence = case
    a = create_test_arrangement(m, sequence)
    moved = create_test_arrangement(m, [(v + c) % m for v in sequence])
    assert perm_sum(moved) == perm_sum(a) + c * int(triangular_sum_mod(m))


@settings(max_examples=80, deadline=None)
@given(sequences_with_divisor(), st.data())
def test_dilation_law(case, data):
    m, _, sequence = case
    u = data.draw(st.sampled_from(units(m)))
    a = create_test_arrangement(m, sequence)
    scaled = create_test_arrangement(m, [(v * u) % m for v in sequence])
    assert perm_sum(scaled) == perm_sum(a) * u
    assert dilate(a.multiset(), u) == scaled.multiset()


def _deviating_blocks(blocks, modulus):
    """返回 (r, 含非 r 元素的块数)，r 取遍每块都出现的 mod modulus 余数"""
    shared = set.intersection(*({v % modulus for v in block} for block in blocks))
    return [(r, sum(1 for block in blocks if any(v % modulus != r for v in block))) for r in sorted(shared)]


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=3, max_value=36).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), min_size=m, max_size=m))), st.data())
def test_block_residue_property(case, data):
    m, values = case
    M = ZMultiset.from_values(m, values)
    p = data.draw(st.sampled_from(M.modulus.primes))
    ordered = list(separable_order(M, p).sequence)
    shift = data.draw(st.integers(min_value=0, max_value=m - 1))
    rotated = ordered[shift:] + ordered[:shift]
    cuts = sorted(data.draw(st.sets(st.integers(min_value=1, max_value=m - 1), min_size=2, max_size=m - 1)))
    bounds = [0] + cuts + [m]
    blocks = [rotated[lo:hi] for lo, hi in zip(bounds, bounds[1:])]
    # 块内打乱不改变块的内容
    blocks = [data.draw(st.permutations(block)) for block in blocks]
    for level in range(1, M.modulus.exponent(p) + 1):
        for _, deviating in _deviating_blocks(blocks, p ** level):
            assert deviating <= 2


def test_block_residue_property_example():
    # 0 mod 3 出现在每一块里，只有首尾两块混入了别的余数
    blocks = [[0, 3, 1], [6, 0, 3], [3, 6, 2]]
    assert _deviating_blocks(blocks, 3) == [(0, 2)]
    # 不可分的排列可以违反
    assert _deviating_blocks([[0, 1], [0, 2], [0, 1]], 3) == [(0, 3)]
