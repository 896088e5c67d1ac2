import math

import numpy as np
import pytest

from finitepop.core import Covariate, ObservedDataset, Row, SupportError
from finitepop.estimate import Policy
from finitepop.regress import (
    RankDeficiencyError,
    check_linear_identification,
    fit_linear,
    iv_regression_policy_apo,
    ovb_consistency_check,
    xt_covariance,
)


def grid_data(a=2.0, beta=3.0, c=1.0):
    """Full (x, t) grid so x and t are exactly uncorrelated."""
    rows = []
    unit = 0
    for xv in (0.0, 1.0, 2.0, 3.0):
        for t in (0, 1):
            rows.append(Row(unit, Covariate.of(x=xv), t, a * xv + beta * t + c))
            unit += 1
    return ObservedDataset(tuple(rows))


def test_fit_exact_linear():
    m = fit_linear(grid_data())
    assert m.a["x"] == pytest.approx(2.0, abs=1e-9)
    assert m.beta == pytest.approx(3.0, abs=1e-9)
    assert m.c == pytest.approx(1.0, abs=1e-9)


def test_fit_constant_outcome():
    rows = tuple(
        Row(i, Covariate.of(x=float(i % 3)), i % 2, 5.0) for i in range(12)
    )
    m = fit_linear(ObservedDataset(rows))
    assert m.a["x"] == pytest.approx(0.0, abs=1e-9)
    assert m.beta == pytest.approx(0.0, abs=1e-9)
    assert m.c == pytest.approx(5.0, abs=1e-9)


def test_fit_single_treatment_rank_deficient():
    rows = tuple(Row(i, Covariate.of(x=float(i)), 1, float(i)) for i in range(6))
    with pytest.raises(RankDeficiencyError):
        fit_linear(ObservedDataset(rows))


def test_fit_categorical_one_hot():
    rows = []
    unit = 0
    for level, effect in (("lo", 0.0), ("hi", 4.0)):
        for t in (0, 1):
            for _ in range(2):
                rows.append(Row(unit, Covariate.of(g=level), t, effect + 2.0 * t + 1.0))
                unit += 1
    m = fit_linear(ObservedDataset(tuple(rows)))
    # "hi" is the first level lexicographically, so it is dropped; "lo" is kept
    assert m.a["g=lo"] == pytest.approx(-4.0, abs=1e-9)
    assert m.beta == pytest.approx(2.0, abs=1e-9)


def test_residual_orthogonality():
    rng = np.random.default_rng(5)
    rows = tuple(
        Row(i, Covariate.of(x=float(rng.uniform())), int(rng.integers(2)),
            float(rng.normal()))
        for i in range(40)
    )
    d = ObservedDataset(rows)
    m = fit_linear(d)
    resid = np.asarray([r.y - m.predict(r.x, float(r.t)) for r in d.rows])
    xs = np.asarray([r.x.get("x") for r in d.rows])
    ts = np.asarray([float(r.t) for r in d.rows])
    for col in (xs, ts, np.ones_like(xs)):
        assert abs(float(resid @ col)) <= 1e-8 * max(1.0, float(np.abs(col).sum()))


def test_identification_exact_fixture():
    d = grid_data()
    rep = check_linear_identification(fit_linear(d), d, 1e-9)
    assert rep.identification_ok
    assert rep.max_cell_residual == pytest.approx(0.0, abs=1e-9)


def test_identification_perturbed_beta_fails():
    d = grid_data()
    m = fit_linear(d)
    bad = type(m)(m.a, m.beta + 1.0, m.c, m.encoding)
    rep = check_linear_identification(bad, d, 0.5)
    assert not rep.identification_ok
    assert rep.max_cell_residual == pytest.approx(1.0, abs=1e-9)


def test_identification_infinite_tolerance():
    d = grid_data()
    m = fit_linear(d)
    bad = type(m)(m.a, m.beta + 100.0, m.c, m.encoding)
    assert check_linear_identification(bad, d, math.inf).identification_ok


def test_ovb_balanced_design_zero():
    d = grid_data()
    assert ovb_consistency_check(d, fit_linear(d)) <= 1e-9
    assert abs(xt_covariance(d)["x"]) <= 1e-12


def test_ovb_full_confounding():
    # x = t exactly: y = 2x + 3t + 1 = 5t + 1, so the short slope absorbs a
    rows = tuple(
        Row(i, Covariate.of(x=float(t)), t, 2.0 * t + 3.0 * t + 1.0)
        for i, t in enumerate([0, 1, 0, 1, 0, 1])
    )
    d = ObservedDataset(rows)
    long_model = fit_linear(grid_data())  # the true model fitted on a clean grid
    assert ovb_consistency_check(d, long_model) == pytest.approx(2.0, abs=1e-9)


def test_ovb_no_covariate_effect():
    d = grid_data(a=0.0)
    assert ovb_consistency_check(d, fit_linear(d)) <= 1e-9


def test_ovb_constant_treatment_degenerate():
    rows = tuple(Row(i, Covariate.of(x=float(i)), 1, float(i)) for i in range(4))
    with pytest.raises(RankDeficiencyError):
        ovb_consistency_check(ObservedDataset(rows), fit_linear(grid_data()))


def iv_arms(mean_t1=0.8, mean_t0=0.2):
    """Ten rows per z arm with the stated mean treatments and distinct y means."""
    rows = []
    unit = 0
    for z, mean_t, y in ((1, mean_t1, 9.0), (0, mean_t0, 3.0)):
        n_treated = round(10 * mean_t)
        for j in range(10):
            rows.append(Row(unit, Covariate.of(x=0.0), int(j < n_treated), y, z=z))
            unit += 1
    return ObservedDataset(tuple(rows))


def test_iv_regression_selects_matching_arm():
    got = iv_regression_policy_apo(iv_arms(), 0.8, 0.05)
    assert got.estimate == pytest.approx(9.0)


def test_iv_regression_no_arm_in_range():
    with pytest.raises(SupportError, match="0.2"):
        iv_regression_policy_apo(iv_arms(), 0.5, 0.05)


def test_iv_regression_tie_prefers_larger_z():
    d = iv_arms(mean_t1=0.5, mean_t0=0.5)
    got = iv_regression_policy_apo(d, 0.5, 0.1)
    assert got.estimate == pytest.approx(9.0)  # z=1 arm outcome mean


def test_iv_regression_infinite_gamma_nearest_arm():
    got = iv_regression_policy_apo(iv_arms(), 0.3, math.inf)
    assert got.estimate == pytest.approx(3.0)  # z=0 arm (mean t 0.2) is nearest


def test_iv_regression_policy_target():
    pol = Policy(assign=lambda x: 1)
    got = iv_regression_policy_apo(
        iv_arms(mean_t1=1.0), pol, 0.05, profile={Covariate.of(x=0.0): 1.0}
    )
    assert got.estimate == pytest.approx(9.0)
