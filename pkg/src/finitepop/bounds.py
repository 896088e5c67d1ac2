"""Partial identification: the instrument-based lower bound on the ATE and the
Robins-Manski style interval bounds on APOs from bounded outcomes.

The exclusion restriction and dominance are never assumed silently: data-mode
reports carry an explicit "assumed, untestable" marker, and oracle mode can
audit them (see finitepop.audit.audit_dominance).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

from .core import Covariate, ObservedDataset, SchemaError, SupportError, mean_y

ZWisePredictor = Callable[[Covariate, int], float]


@dataclass(frozen=True)
class OutcomeBounds:
    """Hard bounds on every possible outcome value."""

    k0: float
    k1: float

    def __post_init__(self) -> None:
        if self.k0 > self.k1:
            raise ValueError(f"k0={self.k0} must be <= k1={self.k1}")

    def validate(self, data: ObservedDataset) -> None:
        for r in data.rows:
            if not (self.k0 <= r.y <= self.k1):
                raise ValueError(
                    f"observed outcome {r.y} of unit {r.unit} outside [{self.k0}, {self.k1}]"
                )


@dataclass(frozen=True)
class BoundReport:
    lower: float
    upper: float | None
    eps: float
    delta: float
    method: str
    treatment: int | None = None
    assumed: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.upper is not None and self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "treatment": self.treatment,
            "lower": self.lower,
            "upper": self.upper,
            "eps": self.eps,
            "delta": self.delta,
            "assumed": list(self.assumed),
        }


_IV_ASSUMED = ("exclusion_restriction", "dominance")


def iv_ate_lower_bound(
    py: ZWisePredictor, data: ObservedDataset, eps: float, delta: float
) -> BoundReport:
    """ATE lower bound from instrument-wise predictions.

    The contrast of the mean z=1 and z=0 predictions over the observed
    covariates, minus 2*(eps + delta).  Exclusion and dominance are assumed,
    not tested; oracle mode can audit them separately.
    """
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be nonnegative")
    data.require_instrument()
    zs = data.instrument_values()
    for z in (0, 1):
        if z not in zs:
            raise SchemaError(f"instrument value z={z} missing from the data")
    mean1 = math.fsum(py(r.x, 1) for r in data.rows) / len(data)
    mean0 = math.fsum(py(r.x, 0) for r in data.rows) / len(data)
    lower = mean1 - mean0 - 2 * (eps + delta)
    return BoundReport(lower, None, eps, delta, "iv_ate_lower_bound", assumed=_IV_ASSUMED)


def iv_ate_lower_bound_randomized(
    data: ObservedDataset, eps: float, delta: float
) -> BoundReport:
    """ATE lower bound for a randomised instrument: the z-arm mean-outcome contrast."""
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be nonnegative")
    data.require_instrument()
    arm = {}
    for z in (0, 1):
        rows = data.rows_where(z=z)
        if not rows:
            raise SupportError(f"no observed rows with z={z}")
        arm[z] = mean_y(rows)
    lower = arm[1] - arm[0] - 2 * (eps + delta)
    return BoundReport(
        lower, None, eps, delta, "iv_ate_lower_bound_randomized", assumed=_IV_ASSUMED
    )


def robins_manski_bounds(
    data: ObservedDataset, t: int, bounds: OutcomeBounds, delta: float
) -> BoundReport:
    """APO interval from bounded outcomes and a randomised instrument.

    For t=1 the interval combines the share assigned z=1 that took t=0 (bounded
    by the outcome range) with the observed mean of those who took t=1 under
    z=1; for t=0 the symmetric construction uses the z=0 arm.  Relies on stable
    compliance-group shares between observed and future populations.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    data.require_instrument()
    data.check_treatment(t)
    bounds.validate(data)
    if t == 1:
        edge_rows = data.rows_where(t=0, z=1)   # assigned z=1, took control
        mean_rows = data.rows_where(t=1, z=1)
        mean_label = "(t=1, z=1)"
    elif t == 0:
        edge_rows = data.rows_where(t=1, z=0)   # assigned z=0, took treatment
        mean_rows = data.rows_where(t=0, z=0)
        mean_label = "(t=0, z=0)"
    else:
        raise ValueError("interval bounds are defined for binary treatments only")
    if not mean_rows:
        raise SupportError(f"group {mean_label} is empty")
    edge_share = len(edge_rows) / len(data)
    mean_share = len(mean_rows) / len(data)
    observed_mean = mean_y(mean_rows)
    lower = edge_share * bounds.k0 - delta + mean_share * observed_mean
    upper = edge_share * bounds.k1 + delta + mean_share * observed_mean
    return BoundReport(
        lower,
        upper,
        0.0,
        delta,
        "robins_manski",
        treatment=t,
        assumed=("instrument_randomization", "compliance_stability", "exclusion_restriction"),
    )
