"""Value tagging, tag-aware equality and the total order."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphetl.values import (
    index_key,
    is_value,
    sort_key,
    tag_name,
    values_equal,
)

values = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.floats(allow_nan=False),
    st.text(max_size=30),
)


def test_tags_are_distinct_across_python_equalities():
    assert not values_equal(1, 1.0)
    assert not values_equal(1, True)
    assert not values_equal(0, False)
    assert not values_equal("1", 1)
    assert values_equal(1, 1)
    assert values_equal(None, None)


def test_index_keys_do_not_collide_like_python_hashes():
    keys = {index_key(v) for v in (1, 1.0, True, "1")}
    assert len(keys) == 4


def test_tag_names():
    assert tag_name(None) == "null"
    assert tag_name(True) == "bool"
    assert tag_name(3) == "int"
    assert tag_name(3.0) == "float"
    assert tag_name("x") == "text"


def test_rejects_non_scalar():
    assert not is_value([1])
    with pytest.raises(TypeError):
        sort_key([1])  # type: ignore[arg-type]


@given(values, values)
def test_equality_matches_key_equality(a, b):
    assert values_equal(a, b) == (index_key(a) == index_key(b))


@given(values, values, values)
def test_sort_key_is_a_total_order(a, b, c):
    ka, kb, kc = sort_key(a), sort_key(b), sort_key(c)
    assert (ka <= kb) or (kb <= ka)
    if ka <= kb and kb <= kc:
        assert ka <= kc


@given(values)
def test_sort_key_consistent_with_equality(a):
    assert sort_key(a) == sort_key(a)
