import pytest

from finitepop.core import SchemaError
from finitepop.fixtures import p8_future, p8_observed
from finitepop.io import (
    load_future_csv,
    load_observed_csv,
    save_future_csv,
    save_observed_csv,
)


def test_observed_roundtrip(tmp_path):
    d = p8_observed()
    path = tmp_path / "obs.csv"
    save_observed_csv(d, path)
    assert load_observed_csv(path).rows == d.rows


def test_observed_roundtrip_with_instrument(tmp_path):
    d = p8_observed(with_instrument=True)
    path = tmp_path / "obs.csv"
    save_observed_csv(d, path)
    back = load_observed_csv(path)
    assert back.has_instrument
    assert back.rows == d.rows


def test_future_roundtrip(tmp_path):
    f = p8_future()
    path = tmp_path / "fut.csv"
    save_future_csv(f, path)
    back = load_future_csv(path)
    assert back.apo(1) == 7.0
    assert back.ate() == 3.0
    assert [u.x for u in back.units] == [u.x for u in f.units]


def test_missing_header_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,treat,y\n1,1,2.0\n")
    with pytest.raises(SchemaError, match="line 1"):
        load_observed_csv(path)


def test_bad_value_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,t,y\n1,1,2.0\n2,1,not_a_number\n")
    with pytest.raises(SchemaError, match="line 3"):
        load_observed_csv(path)


def test_bad_covariate_number_reports_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,t,y,xn_age\n1,1,2.0,forty\n")
    with pytest.raises(SchemaError, match="xn_age"):
        load_observed_csv(path)


def test_empty_observed_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("id,t,y\n")
    with pytest.raises(SchemaError, match="no data rows"):
        load_observed_csv(path)


def test_future_requires_id(tmp_path):
    path = tmp_path / "fut.csv"
    path.write_text("xc_level,y_t0\na,1.0\n")
    with pytest.raises(SchemaError, match="line 1"):
        load_future_csv(path)


def test_future_without_oracle_columns(tmp_path):
    path = tmp_path / "fut.csv"
    path.write_text("id,xc_level\n11,a\n12,b\n")
    back = load_future_csv(path)
    assert back.oracle is None
    assert len(back) == 2


def test_float_precision_survives_roundtrip(tmp_path):
    from finitepop.core import Covariate, ObservedDataset, Row

    y = 1.0 / 3.0
    d = ObservedDataset(
        (Row(1, Covariate.of(v=0.1), 1, y), Row(2, Covariate.of(v=0.1), 0, 2.0))
    )
    path = tmp_path / "obs.csv"
    save_observed_csv(d, path)
    assert load_observed_csv(path).rows[0].y == y
