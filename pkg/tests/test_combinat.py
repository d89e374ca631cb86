from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from regcomp.arith import fmt, parse_number, rising
from regcomp.combinat import (
    Composition,
    DistributionTable,
    Partition,
    binary_decode,
    binary_encode,
    enumerate_compositions,
    enumerate_partitions,
    first_part_marginal,
    last_part_marginal,
    multinomial_count,
    point_mass,
    reverse_pushforward,
    sb_reduce_pushforward,
    shape_count,
    symmetrize,
    uniform_composition_table,
)

compositions = st.lists(st.integers(1, 6), min_size=1, max_size=6).map(Composition)


def test_binary_code_example():
    assert binary_encode((3, 1, 2)) == "100110"
    assert binary_decode("100110") == Composition((3, 1, 2))


@given(compositions)
def test_binary_code_round_trip(c):
    bits = binary_encode(c)
    assert len(bits) == c.n and bits.count("1") == c.k
    assert binary_decode(bits) == c


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        Composition((2, 0, 1))
    with pytest.raises(ValueError):
        binary_decode("0110")
    with pytest.raises(ValueError):
        enumerate_compositions(25)


def test_enumeration_orders():
    assert enumerate_compositions(3) == [(3,), (2, 1), (1, 2), (1, 1, 1)]
    assert enumerate_partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


@pytest.mark.parametrize("n", range(1, 11))
def test_counts(n):
    comps = enumerate_compositions(n)
    assert len(set(comps)) == 2 ** (n - 1)
    parts = enumerate_partitions(n)
    assert len(parts) == [1, 2, 3, 5, 7, 11, 15, 22, 30, 42][n - 1]
    # Bell numbers
    assert sum(shape_count(p) for p in parts) == [1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975][n - 1]


def test_multinomial_and_shape_counts():
    assert multinomial_count((2, 1)) == 3
    assert shape_count((2, 1)) == 3
    assert shape_count((1, 1, 1)) == 1
    assert shape_count((2, 2)) == 3


@given(compositions)
def test_partition_arrangements_are_distinct_orderings(c):
    lam = Partition(c)
    arr = lam.arrangements()
    assert len(arr) == len(set(arr))
    assert c in arr
    assert all(Partition(a) == lam for a in arr)


def test_tail_and_head_sums():
    c = Composition((2, 4, 2, 1, 1))
    assert c.tail_sums() == (10, 8, 4, 2, 1)
    assert c.head_sums() == (2, 6, 8, 9, 10)


def test_uniform_table_is_not_consistent():
    # deleting a ball from uniform compositions of 3 gives P((2)) = 1/4 + 2*(1/4)(1/3)
    out = sb_reduce_pushforward(uniform_composition_table(3))
    assert out.is_normalized()
    assert out[(2,)] == Fraction(5, 12)


def test_pushforward_of_point_mass():
    out = sb_reduce_pushforward(point_mass((2, 1)))
    assert out[(1, 1)] == Fraction(2, 3)
    assert out[(2,)] == Fraction(1, 3)


def test_symmetrize_and_marginals():
    t = uniform_composition_table(3)
    s = symmetrize(t)
    assert s[(2, 1)] == Fraction(1, 2) and s.is_normalized()
    assert first_part_marginal(t) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    assert last_part_marginal(t) == first_part_marginal(reverse_pushforward(t))


def test_table_json_round_trip():
    t = uniform_composition_table(4)
    assert DistributionTable.from_json(t.to_json()).equals(t)
    assert t.to_dict()["entries"][0] == {"parts": [4], "p": "1/8"}


def test_table_validation():
    with pytest.raises(ValueError):
        DistributionTable(3, "composition", {(2, 2): Fraction(1)})
    with pytest.raises(ValueError):
        DistributionTable(2, "composition", {(2,): -0.5})
    assert DistributionTable(2, "composition", {(2,): -1e-15, (1, 1): 1.0})[(2,)] == 0.0


@given(st.fractions(min_value=-5, max_value=5, max_denominator=50))
def test_fraction_format_round_trip(x):
    assert parse_number(fmt(x)) == x


def test_float_format():
    assert fmt(0.1) == "0.10000000000000001"
    assert parse_number("0.5") == 0.5 and isinstance(parse_number("0.5"), float)


def test_rising():
    assert rising(Fraction(1, 2), 3) == Fraction(15, 8)
    assert rising(3, 0) == 1
