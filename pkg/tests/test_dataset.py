import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussdag.dataset import format_dataset, ingest_dataset, parse_dataset
from gaussdag.errors import MissingValue, NonFinite, ParseError


def test_header_only():
    ds = parse_dataset("a,b\n")
    assert ds.m == 0 and ds.n == 2 and ds.values.shape == (0, 2)


def test_single_column():
    ds = parse_dataset("x\n1.0\n2.0")
    assert ds.names == ("x",)
    np.testing.assert_array_equal(ds.values, [[1.0], [2.0]])


def test_missing_value_location():
    with pytest.raises(MissingValue) as exc:
        parse_dataset("x,y\n1.0,")
    assert exc.value.line == 2 and exc.value.column == 2
    assert "row 1" in str(exc.value)


def test_comments_and_scientific():
    ds = parse_dataset("# generated\nx,y\n\n1e-3, -2.5E2\n# tail\n")
    np.testing.assert_array_equal(ds.values, [[1e-3, -250.0]])


@pytest.mark.parametrize("text,err", [
    ("x,y\n1,inf\n", NonFinite),
    ("x,y\n1,nan\n", NonFinite),
    ("x,y\n1,abc\n", ParseError),
    ("x,y\n1,2,3\n", ParseError),
    ("x,x\n1,2\n", ParseError),
    ("1x,y\n1,2\n", ParseError),
    ("# only a comment\n", ParseError),
])
def test_errors(text, err):
    with pytest.raises(err):
        parse_dataset(text)


def test_file_round_trip(tmp_path):
    X = np.random.default_rng(1).standard_normal((20, 3)) * 1e5
    path = tmp_path / "d.csv"
    path.write_text(format_dataset(["a", "b", "c"], X))
    ds = ingest_dataset(path)
    assert np.array_equal(ds.values, X)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(0, 6), st.integers(1, 4)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_round_trip_exact(X):
    names = [f"v{i}" for i in range(X.shape[1])]
    ds = parse_dataset(format_dataset(names, X))
    assert np.array_equal(ds.values, X)
