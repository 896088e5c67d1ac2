"""Point estimators: RCT, matching (exact and coarsened), plug-in, doubly
robust, treatment-effect differences, difference-in-differences, and policy
values for deterministic and stochastic treatment rules.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from .core import (
    Covariate,
    CovariatePartition,
    FuturePopulation,
    ObservedDataset,
    PredictorError,
    SupportError,
    SupportReport,
    common_support_check,
    empirical_propensity,
    mean_y,
)

_IDENTITY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Predictors


class Predictor:
    """An evaluable rule p(x, t) -> real."""

    def __call__(self, x: Covariate, t: int) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class RctConstant(Predictor):
    """Per-treatment constant: the observed treatment-group mean outcome."""

    values: Mapping[int, float]

    @classmethod
    def fit(cls, data: ObservedDataset) -> "RctConstant":
        values = {}
        for t in sorted(data.treatments):
            rows = data.rows_where(t=t)
            if not rows:
                raise PredictorError(f"no observed rows for treatment {t}")
            values[t] = mean_y(rows)
        return cls(values)

    def __call__(self, x: Covariate, t: int) -> float:
        try:
            return self.values[t]
        except KeyError:
            raise PredictorError(f"no constant for treatment {t}") from None


@dataclass(frozen=True)
class ExactMatching(Predictor):
    """Point-wise average predictor: observed treated-group mean per covariate value."""

    table: Mapping[tuple[Covariate, int], float]

    @classmethod
    def fit(cls, data: ObservedDataset) -> "ExactMatching":
        table = {}
        for x in data.xs():
            for t in sorted(data.treatments):
                rows = data.rows_where(t=t, x=x)
                if not rows:
                    raise PredictorError(f"empty cell at x={x!r}, t={t} (common support)")
                table[(x, t)] = mean_y(rows)
        return cls(table)

    def __call__(self, x: Covariate, t: int) -> float:
        try:
            return self.table[(x, t)]
        except KeyError:
            raise PredictorError(f"matching predictor has no cell for x={x!r}, t={t}") from None


@dataclass(frozen=True)
class CoarsenedMatching(Predictor):
    """Cell-wise average predictor over a covariate partition."""

    partition: CovariatePartition
    table: Mapping[tuple[str, int], float]

    @classmethod
    def fit(cls, data: ObservedDataset, partition: CovariatePartition) -> "CoarsenedMatching":
        table = {}
        for cell in partition.cells:
            if not data.rows_where(cell=cell):
                continue
            for t in sorted(data.treatments):
                rows = data.rows_where(t=t, cell=cell)
                if not rows:
                    raise PredictorError(f"empty cell at U={cell.name}, t={t} (common support)")
                table[(cell.name, t)] = mean_y(rows)
        return cls(partition, table)

    def __call__(self, x: Covariate, t: int) -> float:
        cell = self.partition.cell_of(x)
        try:
            return self.table[(cell.name, t)]
        except KeyError:
            raise PredictorError(f"coarsened predictor has no cell for U={cell.name}, t={t}") from None


@dataclass(frozen=True)
class Tabular(Predictor):
    """User-supplied (x, t) -> value table."""

    table: Mapping[tuple[Covariate, int], float]

    def __call__(self, x: Covariate, t: int) -> float:
        try:
            return self.table[(x, t)]
        except KeyError:
            raise PredictorError(f"table has no entry for x={x!r}, t={t}") from None


@dataclass(frozen=True)
class External(Predictor):
    """Opaque callable, e.g. a fitted ML model."""

    fn: Callable[[Covariate, int], float] = field(compare=False)

    def __call__(self, x: Covariate, t: int) -> float:
        return float(self.fn(x, t))


# ---------------------------------------------------------------------------
# Policies


@dataclass(frozen=True)
class Policy:
    """A treatment rule: deterministic x -> t, or stochastic x -> distribution over T."""

    assign: Callable[[Covariate], int] | None = field(default=None, compare=False)
    probabilities: Callable[[Covariate], Mapping[int, float]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self) -> None:
        if (self.assign is None) == (self.probabilities is None):
            raise ValueError("give exactly one of assign and probabilities")

    @property
    def deterministic(self) -> bool:
        return self.assign is not None

    def probs(self, x: Covariate) -> dict[int, float]:
        assert self.probabilities is not None
        probs = dict(self.probabilities(x))
        total = math.fsum(probs.values())
        if any(p < 0 for p in probs.values()) or abs(total - 1.0) > 1e-9:
            raise ValueError(f"invalid probability vector {probs} at x={x!r}")
        return probs


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Guarantee:
    eps: float
    delta: float
    form: str = "eps_plus_delta"

    @property
    def bound(self) -> float:
        return self.eps + self.delta

    def to_json(self) -> dict:
        return {"eps": self.eps, "delta": self.delta, "bound": self.bound, "form": self.form}


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    method: str
    treatment: int | None = None
    guarantee: Guarantee | None = None
    support: SupportReport | None = None
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "treatment": self.treatment,
            "estimate": self.estimate,
            "guarantee": self.guarantee.to_json() if self.guarantee else None,
            "support": self.support.to_json() if self.support else None,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Estimators


def rct_estimate(data: ObservedDataset, t: int) -> EstimateReport:
    """Observed treatment-group mean outcome (the degenerate constant predictor plugged in)."""
    data.check_treatment(t)
    rows = data.rows_where(t=t)
    if not rows:
        raise SupportError(f"no observed rows for treatment {t}")
    return EstimateReport(mean_y(rows), "rct", t)


def _assert_identity(lhs: float, rhs: float, label: str) -> None:
    scale = max(1.0, abs(lhs), abs(rhs))
    if abs(lhs - rhs) > _IDENTITY_RTOL * scale:
        raise AssertionError(f"{label}: {lhs!r} != {rhs!r}")


def exact_matching_estimate(data: ObservedDataset, t: int) -> EstimateReport:
    """Inverse-propensity-weighted sum over the treated rows, x-wise.

    Algebraically identical to averaging the exact-matching predictor over all
    observed rows; the identity is asserted internally.
    """
    data.check_treatment(t)
    support = common_support_check(data)
    bad = [v for v in support.violations if v[1] == t]
    if bad:
        raise SupportError(f"common support fails for t={t} at {', '.join(v[0] for v in bad)}")
    prop = empirical_propensity(data, t)
    ht = math.fsum(r.y / prop[r.x] for r in data.rows_where(t=t)) / len(data)
    predictor = ExactMatching.fit(data)
    plug = math.fsum(predictor(r.x, t) for r in data.rows) / len(data)
    _assert_identity(ht, plug, "Horvitz-Thompson / matching plug-in identity")
    return EstimateReport(ht, "exact_matching", t, support=support)


def coarsened_matching_estimate(
    data: ObservedDataset, partition: CovariatePartition, t: int
) -> EstimateReport:
    """Inverse cell-propensity weighted sum over the treated rows."""
    data.check_treatment(t)
    support = common_support_check(data, partition)
    bad = [v for v in support.violations if v[1] == t]
    if bad:
        raise SupportError(f"empty treated cell for t={t}: {', '.join(v[0] for v in bad)}")
    prop = empirical_propensity(data, t, partition)
    ht = math.fsum(
        r.y / prop[partition.cell_of(r.x).name] for r in data.rows_where(t=t)
    ) / len(data)
    predictor = CoarsenedMatching.fit(data, partition)
    plug = math.fsum(predictor(r.x, t) for r in data.rows) / len(data)
    _assert_identity(ht, plug, "coarsened Horvitz-Thompson / plug-in identity")
    return EstimateReport(ht, "coarsened_matching", t, support=support)


def plugin_estimate(p: Predictor, data: ObservedDataset, t: int) -> EstimateReport:
    """Mean prediction over the observed covariates."""
    data.check_treatment(t)
    if len(data) == 0:
        raise SupportError("empty dataset")
    est = math.fsum(p(r.x, t) for r in data.rows) / len(data)
    return EstimateReport(est, "plugin", t)


def doubly_robust_estimate(
    p: Predictor,
    w: Callable[[Covariate, int], float],
    data: ObservedDataset,
    t: int,
) -> EstimateReport:
    """Observed-composition-weighted sum of the augmented cell targets.

    Per covariate value x the target is p(x,t) plus w(x,t) times the residual
    sum over the treated rows at x, normalized by the size of the whole x group
    (not the treated subgroup).
    """
    data.check_treatment(t)
    if len(data) == 0:
        raise SupportError("empty dataset")
    terms = []
    for x in data.xs():
        x_rows = data.rows_where(x=x)
        t_rows = data.rows_where(t=t, x=x)
        px = p(x, t)
        resid = math.fsum(r.y - px for r in t_rows) / len(x_rows)
        gamma = px + w(x, t) * resid
        terms.append(len(x_rows) / len(data) * gamma)
    return EstimateReport(math.fsum(terms), "doubly_robust", t)


def ate_estimate(apo1: EstimateReport, apo0: EstimateReport) -> EstimateReport:
    """Difference of two APO estimates; guarantee budgets add."""
    if apo1.method != apo0.method:
        raise ValueError(
            f"mismatched method families: {apo1.method} vs {apo0.method}"
        )
    guarantee = None
    if apo1.guarantee and apo0.guarantee:
        guarantee = Guarantee(
            apo1.guarantee.eps + apo0.guarantee.eps,
            apo1.guarantee.delta + apo0.guarantee.delta,
        )
    return EstimateReport(
        apo1.estimate - apo0.estimate, f"ate_{apo1.method}", guarantee=guarantee
    )


# ---------------------------------------------------------------------------
# Difference-in-differences


@dataclass(frozen=True)
class PanelDataset:
    """Three-group, two-step panel.

    Groups A and B are observed at both steps (A under t=1 at step 1, B under
    t=0); group C is observed at step 0 and is the target at step 1.
    """

    a_step0: tuple[float, ...]
    a_step1: tuple[float, ...]
    b_step0: tuple[float, ...]
    b_step1: tuple[float, ...]
    c_step0: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("a_step0", "a_step1", "b_step0", "b_step1", "c_step0"):
            if not getattr(self, name):
                raise ValueError(f"panel group {name} is empty")


def did_predict(panel: PanelDataset) -> tuple[EstimateReport, EstimateReport]:
    """Predicted step-1 mean for group C under t=1 (via A) and under t=0 (via B)."""
    def m(v):
        return math.fsum(v) / len(v)

    via_a = m(panel.a_step1) - m(panel.a_step0) + m(panel.c_step0)
    via_b = m(panel.b_step1) - m(panel.b_step0) + m(panel.c_step0)
    return (
        EstimateReport(via_a, "did_via_a", 1),
        EstimateReport(via_b, "did_via_b", 0),
    )


# ---------------------------------------------------------------------------
# Policy values

EstimatorSelector = str | Callable[[ObservedDataset, int], EstimateReport]

_NAMED_ESTIMATORS: dict[str, Callable[[ObservedDataset, int], EstimateReport]] = {
    "rct": rct_estimate,
    "matching": exact_matching_estimate,
}


def _resolve_estimator(selector: EstimatorSelector) -> Callable[[ObservedDataset, int], EstimateReport]:
    if callable(selector):
        return selector
    try:
        return _NAMED_ESTIMATORS[selector]
    except KeyError:
        raise ValueError(f"unknown estimator selector {selector!r}") from None


def policy_value_estimate(
    policy: Policy,
    estimator: EstimatorSelector,
    data: ObservedDataset,
    future: FuturePopulation | Mapping[Covariate, float],
) -> EstimateReport:
    """Value of a deterministic treatment rule via its level sets.

    Splits the observed data by the rule's level sets, runs the chosen APO
    estimator within each sub-population for its own treatment, and combines
    with the future composition weights.  The future side is either a full
    population or an explicit covariate-profile weighting.
    """
    if not policy.deterministic:
        raise ValueError("policy_value_estimate requires a deterministic policy")
    run = _resolve_estimator(estimator)

    if isinstance(future, FuturePopulation):
        profile: dict[Covariate, float] = {}
        for u in future.units:
            profile[u.x] = profile.get(u.x, 0.0) + 1.0 / len(future)
    else:
        total = math.fsum(future.values())
        if total <= 0:
            raise ValueError("future profile weights must have positive total")
        profile = {x: wt / total for x, wt in future.items()}

    level_sets: dict[int, list[Covariate]] = {}
    for x in set(list(profile) + list(data.xs())):
        level_sets.setdefault(policy.assign(x), []).append(x)

    terms = []
    for t, xs in sorted(level_sets.items()):
        data.check_treatment(t)
        weight = math.fsum(profile.get(x, 0.0) for x in xs)
        sub_rows = tuple(r for r in data.rows if r.x in set(xs))
        if not sub_rows:
            if weight == 0:
                continue
            raise SupportError(
                f"policy level set for t={t} is empty in the observed data but has "
                f"future weight {weight}"
            )
        if weight == 0:
            continue
        sub = ObservedDataset(sub_rows, data.treatments)
        try:
            report = run(sub, t)
        except SupportError as exc:
            raise SupportError(f"level set t={t}: {exc}") from exc
        terms.append(weight * report.estimate)
    return EstimateReport(math.fsum(terms), "policy_value")


def stochastic_policy_value(
    p: Predictor, policy: Policy, data: ObservedDataset
) -> EstimateReport:
    """Predictor-based value of a stochastic treatment rule over the observed covariates."""
    if policy.deterministic:
        raise ValueError("stochastic_policy_value requires a stochastic policy")
    if len(data) == 0:
        raise SupportError("empty dataset")
    total = math.fsum(
        math.fsum(prob * p(r.x, t) for t, prob in policy.probs(r.x).items())
        for r in data.rows
    )
    return EstimateReport(total / len(data), "stochastic_policy_value")
