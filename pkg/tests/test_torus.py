import cmath
from fractions import Fraction
from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusflow.errors import DimensionError
from torusflow.torus import (
    GeneratorVector,
    TorusElement,
    Weight,
    character_eval,
    default_generator,
    exponent,
    is_generic,
    pairing,
)

from oracles import cp_default_weights

ints = st.integers(-6, 6)
fracs = st.fractions(min_value=-3, max_value=3, max_denominator=50)
angles = st.floats(0, 1, exclude_max=True, allow_nan=False)


def weights(r):
    return st.lists(ints, min_size=r, max_size=r).map(Weight)


def generators(r):
    return st.lists(fracs, min_size=r, max_size=r).map(GeneratorVector)


def elements(r):
    return st.lists(angles, min_size=r, max_size=r).map(TorusElement)


@pytest.mark.parametrize("m, expected", [
    ((1, 0), Fraction(1, 3)),
    ((-1, 1), Fraction(-4, 21)),
    ((0, 0), Fraction(0)),
])
def test_pairing_examples(m, expected):
    assert pairing(Weight(m), GeneratorVector.parse("1/3,1/7")) == expected


def test_pairing_rejects_rank_mismatch():
    with pytest.raises(DimensionError):
        pairing(Weight((1, 0, 0)), GeneratorVector.parse("1/3,1/7"))
    with pytest.raises(DimensionError):
        character_eval(Weight((1,)), TorusElement((0.1, 0.2)))


@pytest.mark.parametrize("m, theta, expected", [
    ((1, 0), (0.25, 0.0), 1j),
    ((0, 0), (0.3, 0.9), 1.0),
    ((1, 1), (0.5, 0.5), 1.0),
])
def test_character_examples(m, theta, expected):
    assert abs(character_eval(Weight(m), TorusElement(theta)) - expected) < 1e-12


def test_exponent_examples():
    a0 = GeneratorVector.parse("1/3,1/7")
    e = exponent(Weight((1, 0)), a0)
    assert e.value == Fraction(1, 3) and e.scaled == pytest.approx(2 * pi / 3, rel=1e-15)
    e = exponent(Weight((0, 1)), a0)
    assert e.value == Fraction(1, 7) and e.scaled == pytest.approx(2 * pi / 7, rel=1e-15)
    e = exponent(Weight((0, 0)), a0)
    assert e.value == 0 and e.scaled == 0.0


def _cp2_weight_set():
    w = cp_default_weights(2)
    return {Weight(np.subtract(w[j], w[i])) for i in range(3) for j in range(3) if i != j}


def test_is_generic_on_cp2_weights():
    weights = _cp2_weight_set()
    assert len(weights) == 6
    assert is_generic(GeneratorVector.parse("1/3,1/7"), weights).generic
    verdict = is_generic(GeneratorVector.parse("1/3,1/3"), weights)
    assert not verdict.generic
    assert Weight((1, -1)) in verdict.witnesses and Weight((-1, 1)) in verdict.witnesses
    assert all(pairing(m, GeneratorVector.parse("1/3,1/3")) == 0 for m in verdict.witnesses)


def test_is_generic_vacuous_and_zero_weight_flagged():
    assert is_generic(GeneratorVector.parse("1"), []).generic
    verdict = is_generic(GeneratorVector.parse("1/3,1/7"), [Weight((0, 0)), Weight((1, 0))])
    assert verdict.generic
    assert verdict.zero_weights == [Weight((0, 0))]


def test_generator_parsing_and_serialization():
    a0 = GeneratorVector.parse("1/3, -2/6 0.5")
    assert list(a0) == [Fraction(1, 3), Fraction(-1, 3), Fraction(1, 2)]
    assert a0.to_json() == ["1/3", "-1/3", "1/2"]
    assert list(-a0) == [Fraction(-1, 3), Fraction(1, 3), Fraction(-1, 2)]
    with pytest.raises(ValueError):
        GeneratorVector.parse("")
    assert list(default_generator(2)) == [Fraction(1, 3), Fraction(1, 7)]


def test_torus_element_reduction_and_exp():
    t = TorusElement((1.25, -0.25))
    assert t.angles == pytest.approx((0.25, 0.75))
    t = TorusElement.exp(GeneratorVector.parse("1/3,1/7"), 3)
    assert t.angles == pytest.approx((0.0, 3 / 7))


@given(weights(3), weights(3), elements(3))
def test_characters_are_multiplicative(m1, m2, t):
    lhs = character_eval(m1, t) * character_eval(m2, t)
    assert abs(lhs - character_eval(m1 + m2, t)) < 1e-12
    assert abs(abs(character_eval(m1, t)) - 1) < 1e-12


@given(weights(2), elements(2), elements(2))
def test_characters_are_homomorphisms_of_the_torus(m, t, u):
    assert abs(character_eval(m, t * u) - character_eval(m, t) * character_eval(m, u)) < 1e-12
    assert abs(character_eval(m, t * t.inverse()) - 1) < 1e-12


@given(weights(2), generators(2), st.floats(-10, 10, allow_nan=False))
def test_character_along_one_parameter_subgroup(m, a0, s):
    expected = cmath.exp(2j * pi * s * float(pairing(m, a0)))
    assert abs(character_eval(m, TorusElement.exp(a0, s)) - expected) < 1e-12


@given(weights(3), weights(3), generators(3), generators(3), ints)
def test_pairing_is_bilinear(m1, m2, a, b, k):
    assert pairing(m1 + m2, a) == pairing(m1, a) + pairing(m2, a)
    summed = GeneratorVector(x + y for x, y in zip(a, b))
    assert pairing(m1, summed) == pairing(m1, a) + pairing(m1, b)
    assert pairing(Weight(k * c for c in m1), a) == k * pairing(m1, a)


@given(st.lists(weights(2), max_size=6), generators(2))
def test_genericity_witnesses_are_exactly_the_zero_pairings(ws, a0):
    verdict = is_generic(a0, ws)
    zero = {m for m in ws if not m.is_zero() and pairing(m, a0) == 0}
    assert set(verdict.witnesses) == zero
    assert verdict.generic == (not zero)
