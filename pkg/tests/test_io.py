import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aloha_tf.io import format_value, jsonable, read_csv, to_csv, to_json
from aloha_tf.model import Regime


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(v):
    assert float(format_value(v)) == v


@pytest.mark.parametrize("value,text", [
    (math.inf, "inf"), (-math.inf, "-inf"), (math.nan, "nan"), (True, "true"),
    (np.bool_(False), "false"), (3, "3"), (np.int64(4), "4"), (None, ""),
    (Regime.EQUAL_RATE, Regime.EQUAL_RATE.value),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_csv_round_trip():
    rows = [{"a": 0.1, "b": -math.inf}, {"a": 1 / 3, "b": 2}]
    text = to_csv(rows, ("a", "b"))
    assert "\r" not in text
    back = read_csv(text)
    assert float(back[1]["a"]) == 1 / 3
    assert back[0]["b"] == "-inf"


def test_json_non_finite():
    text = to_json({"x": np.float64(-math.inf), "y": np.arange(2), "z": (1.5, None)})
    assert json.loads(text) == {"x": "-inf", "y": [0, 1], "z": [1.5, None]}


def test_jsonable_enum():
    assert jsonable({"r": Regime.TWO_VALUE}) == {"r": Regime.TWO_VALUE.value}
