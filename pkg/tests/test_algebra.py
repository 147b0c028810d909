import math

import pytest
from hypothesis import given, strategies as st

from signedq.algebra import BOOLEAN, COUNTING, MAX_TROPICAL, SETUNION, TROPICAL, instance, names
from signedq.errors import ParseError, SemiringOverflow, UnknownSemiring

ALL = (BOOLEAN, COUNTING, TROPICAL, MAX_TROPICAL, SETUNION)

values = {
    "boolean": st.booleans(),
    "counting": st.integers(-1000, 1000),
    "tropical": st.one_of(st.integers(-50, 50).map(float), st.just(math.inf)),
    "max_tropical": st.one_of(st.integers(-50, 50).map(float), st.just(-math.inf)),
    "setunion": st.one_of(st.none(), st.frozensets(st.integers(0, 6), max_size=4)),
}


def test_registry():
    assert names() == sorted(s.name for s in ALL)
    assert instance("counting") is COUNTING
    with pytest.raises(UnknownSemiring):
        instance("reals")


@pytest.mark.parametrize("s", ALL, ids=lambda s: s.name)
def test_semiring_laws(s):
    @given(values[s.name], values[s.name], values[s.name])
    def check(a, b, c):
        assert s.plus(a, b) == s.plus(b, a)
        assert s.times(a, b) == s.times(b, a)
        assert s.plus(s.plus(a, b), c) == s.plus(a, s.plus(b, c))
        assert s.times(s.times(a, b), c) == s.times(a, s.times(b, c))
        assert s.plus(a, s.zero) == a
        assert s.times(a, s.one) == a
        assert s.times(a, s.zero) == s.zero
        assert s.times(a, s.plus(b, c)) == s.plus(s.times(a, b), s.times(a, c))

    check()


@pytest.mark.parametrize("s", ALL, ids=lambda s: s.name)
def test_format_parse_round_trip(s):
    @given(values[s.name])
    def check(a):
        assert s.parse(s.format(a)) == a

    check()


def test_capabilities():
    assert COUNTING.has_additive_inverse and not COUNTING.plus_idempotent
    assert COUNTING.plus(7, COUNTING.neg(7)) == 0
    for s in (BOOLEAN, TROPICAL, MAX_TROPICAL, SETUNION):
        assert s.plus_idempotent and not s.has_additive_inverse
        with pytest.raises(TypeError):
            s.neg(s.one)


def test_counting_overflow_is_checked():
    big = (1 << 63) - 1
    with pytest.raises(SemiringOverflow):
        COUNTING.plus(big, 1)
    with pytest.raises(SemiringOverflow):
        COUNTING.times(big, 2)
    with pytest.raises(SemiringOverflow):
        COUNTING.parse(str(1 << 64))


@pytest.mark.parametrize(
    "s, text",
    [(COUNTING, "1.5"), (BOOLEAN, "maybe"), (TROPICAL, "nan"), (SETUNION, "1;2"), (SETUNION, "{a}")],
)
def test_bad_values(s, text):
    with pytest.raises(ParseError):
        s.parse(text)


def test_setunion_zero_is_absorbing_and_distinct_from_empty_set():
    assert SETUNION.zero is None
    assert SETUNION.one == frozenset()
    assert SETUNION.times(frozenset({1}), None) is None
    assert SETUNION.plus(None, frozenset()) == frozenset()
    assert not SETUNION.is_zero(frozenset())
    assert SETUNION.format(None) == "none"
    assert SETUNION.parse("{3;1}") == frozenset({1, 3})


def test_sum_and_product():
    assert COUNTING.sum([1, 2, 3]) == 6
    assert COUNTING.product([2, 3, 4]) == 24
    assert TROPICAL.sum([]) == math.inf
    assert TROPICAL.product([1.0, 2.5]) == 3.5
