"""Auditors for the testable assumption quantities.

Each auditor returns the realized discrepancy as a real number rather than a
pass/fail flag, so callers can verify guarantees of the form
"estimate error <= audited stable-prediction gap + audited calibration gap"
without choosing a budget up front.  Sums are accumulated with compensated
summation (math.fsum).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

from .core import (
    CovariatePartition,
    FuturePopulation,
    ObservedDataset,
    OracleError,
    SchemaError,
    SupportError,
    mean_y,
)

WeightLike = Callable[[object, int], float] | float | None


@dataclass(frozen=True)
class AuditResult:
    """Realized discrepancies of one assumption, with optional per-cell breakdown."""

    name: str
    per_treatment: dict = field(default_factory=dict)
    details: dict | None = None

    @property
    def headline(self) -> float:
        """Largest absolute discrepancy across keys."""
        if not self.per_treatment:
            return 0.0
        return max(abs(v) for v in self.per_treatment.values())

    def to_json(self) -> dict:
        return {
            "assumption": self.name,
            "per_treatment": {str(k): v for k, v in self.per_treatment.items()},
            "cells": {str(k): v for k, v in (self.details or {}).items()},
        }


def audit_sp(p, data: ObservedDataset, future: FuturePopulation) -> AuditResult:
    """Stable-predictions gap |mean of p over future - mean of p over observed| per treatment.

    Uses covariates only; the future oracle is neither needed nor consulted.
    """
    if len(data) == 0:
        raise SupportError("observed dataset is empty")
    per = {}
    for t in sorted(data.treatments):
        mu = math.fsum(p(u.x, t) for u in future.units) / len(future)
        mu_hat = math.fsum(p(r.x, t) for r in data.rows) / len(data)
        per[t] = abs(mu - mu_hat)
    return AuditResult("stable_predictions", per)


def audit_cfd(p, future: FuturePopulation, treatments=(0, 1)) -> AuditResult:
    """Calibration-on-future-data gap |true APO - mean prediction over future| per treatment."""
    if future.oracle is None:
        raise OracleError("CFD unobservable without ground truth")
    per = {}
    for t in treatments:
        mu_y = future.apo(t)
        mu_p = math.fsum(p(u.x, t) for u in future.units) / len(future)
        per[t] = abs(mu_y - mu_p)
    return AuditResult("calibration_on_future_data", per)


def avg_signed_difference(
    data: ObservedDataset,
    future: FuturePopulation,
    t: int,
    partition: CovariatePartition | None = None,
) -> float:
    """Future-composition-weighted signed gap between true and observed group means.

    Per covariate value (or partition cell when one is given), takes the true
    future mean outcome under t minus the observed treated-group mean, weighted
    by the group's share of the future population.  Signed: opposite-sign local
    gaps cancel.
    """
    oracle = future.require_oracle()
    data.check_treatment(t)
    if partition is None:
        groups = [(repr(x), future.units_where(x=x), data.rows_where(t=t, x=x))
                  for x in future.xs()]
    else:
        groups = []
        for cell in partition.cells:
            units = future.units_where(cell=cell)
            if units:
                groups.append((cell.name, units, data.rows_where(t=t, cell=cell)))
    terms = []
    for label, units, obs_rows in groups:
        if not obs_rows:
            raise SupportError(f"no observed rows with t={t} in group {label} (common support)")
        mu = math.fsum(oracle.y(u.unit, t) for u in units) / len(units)
        mu_hat = mean_y(obs_rows)
        terms.append(len(units) / len(future) * (mu - mu_hat))
    return math.fsum(terms)


def audit_ml_groupwise(
    p,
    data: ObservedDataset,
    future: FuturePopulation,
    partition: CovariatePartition,
) -> AuditResult:
    """Area-wise residual-transfer gaps for an arbitrary predictor.

    Per cell and treatment: mean future residual (prediction minus true outcome
    over the cell's future units) minus mean observed residual over the cell's
    treated observed rows.  Headline per treatment is the max absolute cell gap.
    """
    oracle = future.require_oracle()
    details: dict[tuple[str, int], float] = {}
    per: dict[int, float] = {}
    for t in sorted(data.treatments):
        worst = 0.0
        for cell in partition.cells:
            units = future.units_where(cell=cell)
            obs_rows = data.rows_where(t=t, cell=cell)
            if not units or not obs_rows:
                raise SupportError(
                    f"cell {cell.name}: empty on {'future' if not units else 'observed'} side"
                )
            fut_resid = math.fsum(p(u.x, t) - oracle.y(u.unit, t) for u in units) / len(units)
            obs_resid = math.fsum(p(r.x, t) - r.y for r in obs_rows) / len(obs_rows)
            details[(cell.name, t)] = fut_resid - obs_resid
            worst = max(worst, abs(fut_resid - obs_resid))
        per[t] = worst
    return AuditResult("groupwise_residual_transfer", per, details)


def audit_dr_condition(
    data: ObservedDataset,
    future: FuturePopulation,
    t: int,
    f: WeightLike = None,
) -> float:
    """Weighted signed sum of x-wise mean-outcome gaps, with observed-composition weights.

    Per covariate value: (observed share of x) * (true future mean under t minus
    observed treated mean) * f(x, t).  f defaults to the constant one; a scalar
    is treated as a constant function.  Note the weights come from the observed
    composition, unlike avg_signed_difference which weights by the future one.
    """
    oracle = future.require_oracle()
    data.check_treatment(t)
    if f is None:
        fn = lambda x, t: 1.0
    elif callable(f):
        fn = f
    else:
        fn = lambda x, t, _c=float(f): _c
    terms = []
    for x in future.xs():
        units = future.units_where(x=x)
        obs_rows = data.rows_where(t=t, x=x)
        if not obs_rows:
            raise SupportError(f"no observed rows with t={t} at x={x!r} (common support)")
        n_x = len(data.rows_where(x=x))
        mu = math.fsum(oracle.y(u.unit, t) for u in units) / len(units)
        mu_hat = mean_y(obs_rows)
        terms.append(n_x / len(data) * (mu - mu_hat) * fn(x, t))
    return math.fsum(terms)


def audit_dominance(future: FuturePopulation) -> AuditResult:
    """Group-sum treatment-effect signs on the instrument-defined switch groups.

    For the groups that take t=0 under z=1 and t=1 under z=0, returns the sum of
    y(i,1) minus the sum of y(i,0) over the group.  Dominance holds iff both are
    >= 0; empty groups count as holding.
    """
    oracle = future.require_oracle()
    future.require_instrument_oracle()
    per: dict[tuple[int, int], float] = {}
    for (t, z) in ((0, 1), (1, 0)):
        ids = future.compliance_group(t, z)
        per[(t, z)] = math.fsum(oracle.y(i, 1) - oracle.y(i, 0) for i in ids)
    holds = all(v >= 0 for v in per.values())
    return AuditResult("dominance", per, details={"holds": holds})


def dominance_holds(result: AuditResult) -> bool:
    return bool(result.details and result.details.get("holds"))


def audit_compliance_stability(data: ObservedDataset, future: FuturePopulation) -> AuditResult:
    """Gap between future and observed compliance-group shares, per (t, z)."""
    future.require_instrument_oracle()
    if not data.has_instrument:
        raise SchemaError("observed data has no instrument column z")
    per: dict[tuple[int, int], float] = {}
    for z in data.instrument_values():
        for t in sorted(data.treatments):
            i_share = len(future.compliance_group(t, z)) / len(future)
            j_share = len(data.rows_where(t=t, z=z)) / len(data)
            per[(t, z)] = abs(i_share - j_share)
    return AuditResult("compliance_stability", per)
