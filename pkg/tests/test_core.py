import math

import pytest

from finitepop.core import (
    Covariate,
    CovariatePartition,
    ObservedDataset,
    Row,
    SupportError,
    ToleranceBudget,
    approx_eq,
    common_support_check,
    empirical_propensity,
    mean_y,
)
from finitepop.fixtures import XA, XB, p8_future, p8_observed


def test_approx_eq_is_strict():
    assert not approx_eq(1.0, 1.0, 0.0)
    assert approx_eq(3.0, 3.4, 0.5)
    assert not approx_eq(3.0, 3.5, 0.5)


def test_approx_eq_rejects_negative_eps():
    with pytest.raises(ValueError):
        approx_eq(0.0, 0.0, -1.0)


def test_covariate_normalizes_field_order():
    assert Covariate.of(a=1, b="x") == Covariate.of(b="x", a=1.0)


def test_covariate_rejects_bool_fields():
    with pytest.raises(ValueError):
        Covariate.of(flag=True)


def test_covariate_numeric_equality_is_bitwise():
    assert Covariate.of(v=0.1 + 0.2) != Covariate.of(v=0.3)


def test_subgroup_filters():
    d = p8_observed()
    assert d.subgroup(t=1) == frozenset({1, 3})
    assert d.subgroup(x=XA) == frozenset({1, 2})
    assert d.subgroup(t=0, x=XB) == frozenset({4})
    assert d.subgroup(t=1, x=XB) == frozenset({3})


def test_subgroup_unknown_treatment_errors():
    with pytest.raises(ValueError):
        p8_observed().subgroup(t=7)


def test_treatment_partition():
    d = p8_observed()
    all_units = frozenset(r.unit for r in d.rows)
    groups = [d.subgroup(t=t) for t in sorted(d.treatments)]
    assert frozenset().union(*groups) == all_units
    assert sum(len(g) for g in groups) == len(all_units)


def test_duplicate_unit_ids_rejected():
    r = Row(unit=1, x=XA, t=1, y=2.0)
    with pytest.raises(ValueError):
        ObservedDataset((r, r))


def test_declared_treatment_set_enforced():
    with pytest.raises(ValueError):
        ObservedDataset((Row(unit=1, x=XA, t=3, y=2.0),))


def test_empirical_propensity_p8():
    d = p8_observed()
    prop = empirical_propensity(d, 1)
    assert prop == {XA: 0.5, XB: 0.5}


def test_propensities_sum_to_one_per_x():
    d = p8_observed()
    for x in d.xs():
        total = math.fsum(empirical_propensity(d, t)[x] for t in sorted(d.treatments))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_empty_treated_cell_gives_zero_propensity():
    rows = (
        Row(unit=1, x=XA, t=0, y=1.0),
        Row(unit=2, x=XB, t=1, y=2.0),
        Row(unit=3, x=XB, t=0, y=3.0),
    )
    d = ObservedDataset(rows)
    assert empirical_propensity(d, 1)[XA] == 0.0


def test_common_support_p8_ok():
    report = common_support_check(p8_observed())
    assert report.ok
    assert report.violations == ()


def test_common_support_missing_control():
    d = p8_observed()
    rows = tuple(r for r in d.rows if r.unit != 2)  # drop the control at x=a
    report = common_support_check(ObservedDataset(rows))
    assert not report.ok
    assert report.violations == ((repr(XA), 0),)


def test_common_support_empty_dataset():
    report = common_support_check(ObservedDataset(()))
    assert not report.ok
    assert report.note is not None


def test_mean_y_empty_errors():
    with pytest.raises(SupportError):
        mean_y(())


def test_partition_cells_must_be_exhaustive():
    part = CovariatePartition.from_members({"only_a": [XA]})
    with pytest.raises(ValueError):
        part.cell_of(XB)


def test_partition_singletons_and_single_cell():
    part = CovariatePartition.singletons([XA, XB, XA])
    assert len(part.cells) == 2
    whole = CovariatePartition.single_cell()
    assert whole.cell_of(XA).name == whole.cell_of(XB).name == "all"


def test_partition_groups_partition_the_data():
    d = p8_observed()
    part = CovariatePartition.singletons(d.xs())
    units = [d.subgroup(cell=c) for c in part.cells]
    assert frozenset().union(*units) == frozenset(r.unit for r in d.rows)
    assert sum(len(u) for u in units) == len(d)


def test_oracle_reads_are_stable():
    f = p8_future()
    assert f.oracle.y(11, 1) == f.oracle.y(11, 1) == 10.0


def test_future_population_apo_ate():
    f = p8_future()
    assert f.apo(1) == 7.0
    assert f.apo(0) == 4.0
    assert f.ate() == 3.0


def test_tolerance_budget_rejects_negative():
    with pytest.raises(ValueError):
        ToleranceBudget(eps=-0.1)


def test_instrument_detection():
    assert not p8_observed().has_instrument
    d = p8_observed(with_instrument=True)
    assert d.has_instrument
    assert d.instrument_values() == (0, 1)
