import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from smoothpen import reporting
from smoothpen.lab import Relation, relation_csv_rows


@given(st.floats(allow_nan=False))
def test_float_round_trip(v):
    text = reporting.dumps({"v": v})
    back = reporting.decode_float(json.loads(text)["v"])
    assert back == v and isinstance(back, float)


def test_non_finite_encoded_as_strings():
    doc = json.loads(reporting.dumps([math.inf, -math.inf, math.nan, None, True, 3]))
    assert doc[:3] == ["inf", "-inf", "nan"]
    assert doc[3:] == [None, True, 3]
    assert math.isnan(reporting.decode_float("nan"))


def test_numpy_values():
    doc = json.loads(reporting.dumps({"a": np.array([1.5, 2.0]), "b": np.int64(4),
                                      "c": np.bool_(False)}))
    assert doc == {"a": [1.5, 2.0], "b": 4, "c": False}


def test_seventeen_digits():
    assert reporting.fmt17(0.1) == "0.10000000000000001"
    assert "0.10000000000000001" in reporting.dumps([0.1])


def test_envelope_has_schema_version():
    doc = reporting.envelope("solve", {"x": 1})
    assert doc["schema_version"] == 1 and doc["command"] == "solve"


NAMES = st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs")), min_size=1)


@given(st.lists(st.tuples(NAMES, st.floats(allow_nan=False),
                          st.floats(allow_nan=False), st.floats(0, 1),
                          st.sampled_from([True, False, None])), max_size=10))
def test_relation_csv_round_trip(items):
    rows = [Relation(name, lhs, rhs, tol, "=", passed) for name, lhs, rhs, tol, passed in items]
    rel = relation_csv_rows("p,1", "fam,\"x\"", rows)
    text = reporting.csv_text(rel, reporting.RELATION_FIELDS)
    back = reporting.read_relation_csv(text)
    assert len(back) == len(rows)
    for r, b in zip(rows, back):
        assert b["relation"] == r.name
        assert (b["lhs"], b["rhs"], b["tol"], b["pass"]) == (r.lhs, r.rhs, r.tol, r.passed)
        assert b["problem"] == "p,1"
