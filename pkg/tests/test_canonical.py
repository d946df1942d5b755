"""Canonical serialization: byte stability, float exactness, rejections."""

import json
import math
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbench import canonical_dumps as dumps
from perturbench import canonical_loads as loads
from perturbench import fingerprint


def test_sorted_keys_and_layout():
    text = dumps({"b": 1, "a": {"d": 2, "c": 3}})
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"c"') < text.index('"d"')
    assert text.endswith("\n")


def test_numeric_lists_inline():
    text = dumps({"v": [1.0, 2.0, 3.0]})
    line = [ln for ln in text.splitlines() if '"v"' in ln][0]
    assert "[" in line and "]" in line


def test_int_float_distinct():
    assert '"x": 1\n' in dumps({"x": 1})
    assert '"x": 1.0\n' in dumps({"x": 1.0})
    assert loads(dumps({"x": 1.0}))["x"] == 1.0
    assert isinstance(loads(dumps({"x": 1}))["x"], int)
    assert isinstance(loads(dumps({"x": 1.0}))["x"], float)


def test_float_round_trip_exact():
    import random

    r = random.Random(5)
    for _ in range(1000):
        x = struct.unpack("<d", struct.pack("<Q", r.getrandbits(64)))[0]
        if math.isnan(x) or math.isinf(x):
            continue
        assert loads(dumps([x]))[0] == x


def test_byte_stability():
    doc = {"a": [1, 2.5, -3], "b": {"nested": ["x", True, None]}, "c": 0.1}
    once = dumps(doc)
    assert dumps(loads(once)) == once


def test_non_finite_rejected():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            dumps({"x": bad})


def test_non_string_keys_rejected():
    with pytest.raises((TypeError, ValueError)):
        dumps({1: "a"})


def test_utf8_raw():
    text = dumps({"s": "café"})
    assert "café" in text
    assert "\\u" not in text


def test_fingerprint_stable_and_sensitive():
    a = {"x": [1, 2, 3], "y": "z"}
    assert fingerprint(a) == fingerprint({"y": "z", "x": [1, 2, 3]})
    assert fingerprint(a) != fingerprint({"x": [1, 2, 4], "y": "z"})


def test_loads_is_plain_json_superset():
    # canonical output parses with the stock json module too
    doc = {"k": [1.5, 2], "s": "text", "flag": False}
    assert json.loads(dumps(doc)) == doc


json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**53), max_value=2**53),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=20),
)
json_trees = st.recursive(
    json_scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=5),
        st.dictionaries(st.text(max_size=8), inner, max_size=5),
    ),
    max_leaves=25,
)


@given(json_trees)
@settings(max_examples=200)
def test_round_trip_property(doc):
    assert loads(dumps(doc)) == doc
    assert dumps(loads(dumps(doc))) == dumps(doc)
