"""
例外结构分类器测试
"""

import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import pytest
from hypothesis import given, settings, strategies as st

from src.algorithms.classifier import (
    ExceptionClassifier,
    classify,
    classify_mod,
    classify_values,
    forced_sum,
    inhomogeneous_shape,
    is_exceptional,
    shape_center,
    uniform_mod_prime,
)
from src.algorithms.census import enumerate_multisets
from src.algorithms.spectrum_oracle import SpectrumOracle
from src.core.residue import factorize, units
from src.models.exceptional import NON_EXCEPTIONAL, ExceptionalStructure, ExceptionKind
from src.models.multiset import ZMultiset, dilate, translate


def create_test_multiset(m, values):
    return ZMultiset.from_values(m, values)


@st.composite
def small_multisets(draw, max_m=8):
    m = draw(st.integers(min_value=1, max_value=max_m))
    values = draw(st.lists(st.integers(min_value=0, max_value=m - 1), min_size=m, max_size=m))
    return ZMultiset.from_values(m, values)


@pytest.mark.parametrize("m, values, expected", [
    (5, [1, 1, 1, 2, 0], "INHOMOGENEOUS a=1 b=1"),
    (4, [1, 1, 3, 3], "NONE"),
    (6, [1, 1, 1, 1, 1, 1], "HOMOGENEOUS c=1 mod 2"),
    (6, [0, 0, 0, 0, 1, 5], "INHOMOGENEOUS a=0 b=1"),
    (5, [0, 0, 0, 0, 0], "NONE"),
    (12, [1] * 12, "HOMOGENEOUS c=1 mod 4"),
    (15, [2] * 13 + [9, 10], "INHOMOGENEOUS a=2 b=7"),
    (3, [0, 1, 2], "INHOMOGENEOUS a=0 b=1"),
    (2, [1, 1], "HOMOGENEOUS c=1 mod 2"),
    (2, [0, 1], "NONE"),
    (1, [0], "NONE"),
])
def test_classify_examples(m, values, expected):
    assert classify(create_test_multiset(m, values)).describe() == expected


def test_even_inhomogeneous_needs_even_center():
    # a = 1 is odd, so {1 ×4, 2, 0} is not exceptional in Z_6
    assert classify_values(6, [1, 1, 1, 1, 2, 0]) is NON_EXCEPTIONAL
    assert is_exceptional(create_test_multiset(6, [2, 2, 2, 2, 3, 1]))


def test_classify_mod_examples():
    assert classify_mod([7, 7, 12], 3) is NON_EXCEPTIONAL
    assert classify_mod([2, 2, 2], 3) is NON_EXCEPTIONAL
    assert classify_mod([0, 1, 2], 3).describe() == "INHOMOGENEOUS a=0 b=1"
    with pytest.raises(ValueError):
        classify_mod([0, 1], 3)


def test_structure_rejects_bad_witnesses():
    with pytest.raises(ValueError):
        ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, factorize(6), a=0, b=3)
    with pytest.raises(ValueError):
        ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, factorize(6), a=1, b=1)
    with pytest.raises(ValueError):
        ExceptionalStructure(ExceptionKind.HOMOGENEOUS, factorize(5), c=1)
    with pytest.raises(ValueError):
        ExceptionalStructure(ExceptionKind.HOMOGENEOUS, factorize(8), c=2)


def test_structure_to_dict():
    homogeneous = classify(create_test_multiset(12, [5] * 12))
    assert homogeneous.to_dict() == {"kind": "homogeneous", "m": 12, "c": 1, "mod": 4}
    inhomogeneous = classify(create_test_multiset(5, [1, 1, 1, 2, 0]))
    assert inhomogeneous.to_dict() == {"kind": "inhomogeneous", "m": 5, "a": 1, "b": 1}


def test_forced_sum_values():
    odd = ExceptionalStructure(ExceptionKind.INHOMOGENEOUS, factorize(5), a=0, b=1)
    assert forced_sum(odd).attainable == frozenset({1, 2, 3, 4})
    assert forced_sum(odd).forbidden == frozenset({0})

    six = ExceptionalStructure(ExceptionKind.HOMOGENEOUS, factorize(6), c=1)
    law = forced_sum(six)
    assert 3 in law.attainable
    assert 0 in law.forbidden

    four = forced_sum(classify(create_test_multiset(4, [1, 1, 1, 1])))
    assert four.congruence == (2, 4)
    assert four.forbidden == frozenset({0, 1, 3})


def test_forced_sum_matches_oracle():
    oracle = SpectrumOracle(12)
    for m, values in [(5, [1, 1, 1, 2, 0]), (6, [1] * 6), (8, [3] * 8), (6, [0, 0, 0, 0, 1, 5])]:
        M = create_test_multiset(m, values)
        law = forced_sum(classify(M))
        spectrum = set(oracle.spectrum(M).values)
        assert law.attainable <= spectrum
        assert not law.forbidden & spectrum


def test_shape_helpers():
    assert inhomogeneous_shape(create_test_multiset(5, [0, 0, 0, 0, 0]))
    assert inhomogeneous_shape(create_test_multiset(6, [1, 1, 1, 1, 2, 0]))
    assert not inhomogeneous_shape(create_test_multiset(4, [0, 1, 2, 3]))
    assert uniform_mod_prime(create_test_multiset(6, [0, 2, 2, 4, 4, 0])) == 2
    assert uniform_mod_prime(create_test_multiset(6, [0, 1, 2, 3, 4, 5])) is None
    assert shape_center([3, 3, 3, 4, 2], 5) == 3
    assert shape_center([0, 1, 2, 3, 4], 5) is None


@settings(max_examples=150, deadline=None)
@given(small_multisets())
def test_exceptional_iff_no_zero_sum(M):
    oracle = SpectrumOracle(8)
    structure = ExceptionClassifier(oracle).classify(M)
    assert bool(structure) == (not oracle.has_zero(M))


@settings(max_examples=80, deadline=None)
@given(small_multisets(max_m=12), st.data())
def test_dilation_invariance(M, data):
    u = data.draw(st.sampled_from(units(M.m)))
    if M.m == 1:
        return
    assert bool(classify(dilate(M, u))) == bool(classify(M))


@pytest.mark.parametrize("m, a, b", [(5, 1, 2), (7, 3, 1), (9, 4, 2), (15, 2, 7)])
def test_odd_translation_moves_center(m, a, b):
    M = create_test_multiset(m, [a] * (m - 2) + [a + b, a - b])
    for c in range(m):
        shifted = classify(translate(M, c))
        assert shifted.a == (a + c) % m
        assert shifted.b == min(b, m - b)


@pytest.mark.slow
@pytest.mark.parametrize("m", range(1, 10))
def test_exhaustive_agreement(m):
    oracle = SpectrumOracle(12)
    classifier = ExceptionClassifier(oracle)
    for M in enumerate_multisets(m):
        assert bool(classifier.classify(M)) == (not oracle.has_zero(M)), str(M)
