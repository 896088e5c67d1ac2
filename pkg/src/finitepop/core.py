"""Finite-population data model, index-set algebra, and approximate equality.

Everything here is immutable after construction and safe to share across
workers.  All operations are pure functions.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType


class FinitePopError(Exception):
    """Base class for all errors raised by this package."""


class SupportError(FinitePopError):
    """A required (x, t) or (cell, t) subgroup is empty."""


class OracleError(FinitePopError):
    """A ground-truth oracle is required but missing (or incomplete)."""


class PredictorError(FinitePopError):
    """A predictor could not be built or evaluated."""


class SchemaError(FinitePopError):
    """Malformed input file or configuration."""


def approx_eq(r: float, s: float, eps: float) -> bool:
    """Whether |r - s| < eps.  The inequality is strict."""
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    return abs(r - s) < eps


@dataclass(frozen=True, order=True)
class Covariate:
    """A record of named covariate fields with exact, hashable equality.

    Categorical fields are strings, numeric fields are floats compared
    bitwise.  Fuzzy grouping of numeric values must go through an explicit
    CovariatePartition.
    """

    items: tuple[tuple[str, str | float], ...]

    @classmethod
    def of(cls, **fields: str | float) -> "Covariate":
        norm: list[tuple[str, str | float]] = []
        for name, value in sorted(fields.items()):
            if isinstance(value, bool) or not isinstance(value, (str, int, float)):
                raise ValueError(f"covariate field {name!r} must be str or real, got {value!r}")
            norm.append((name, value if isinstance(value, str) else float(value)))
        return cls(tuple(norm))

    def get(self, name: str) -> str | float:
        for k, v in self.items:
            if k == name:
                return v
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def as_dict(self) -> dict[str, str | float]:
        return dict(self.items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.items)
        return f"Covariate({inner})"


@dataclass(frozen=True)
class Row:
    unit: int
    x: Covariate
    t: int
    y: float
    z: int | None = None


@dataclass(frozen=True)
class ObservedDataset:
    """Observed triples (x_i, t_i, y_i), optionally carrying an instrument z_i.

    The declared treatment set is explicit; rows must stay inside it.
    """

    rows: tuple[Row, ...]
    treatments: frozenset[int] = frozenset({0, 1})

    def __post_init__(self) -> None:
        if len(self.treatments) < 2:
            raise ValueError("treatment set must have at least two levels")
        ids = [r.unit for r in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("unit ids must be unique")
        for r in self.rows:
            if r.t not in self.treatments:
                raise ValueError(f"row {r.unit}: treatment {r.t} not in declared set")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def has_instrument(self) -> bool:
        return len(self.rows) > 0 and all(r.z is not None for r in self.rows)

    def require_instrument(self) -> None:
        if not self.has_instrument:
            raise SchemaError("dataset has no instrument column z")

    def instrument_values(self) -> tuple[int, ...]:
        self.require_instrument()
        return tuple(sorted({r.z for r in self.rows}))  # type: ignore[arg-type]

    def xs(self) -> tuple[Covariate, ...]:
        return tuple(sorted(set(r.x for r in self.rows)))

    def check_treatment(self, t: int) -> None:
        if t not in self.treatments:
            raise ValueError(f"unknown treatment id {t}; declared set is {sorted(self.treatments)}")

    def rows_where(
        self,
        t: int | None = None,
        x: Covariate | None = None,
        cell: "PartitionCell | None" = None,
        z: int | None = None,
    ) -> tuple[Row, ...]:
        if x is not None and cell is not None:
            raise ValueError("give at most one of x and cell")
        if t is not None:
            self.check_treatment(t)
        out = []
        for r in self.rows:
            if t is not None and r.t != t:
                continue
            if x is not None and r.x != x:
                continue
            if cell is not None and not cell.contains(r.x):
                continue
            if z is not None and r.z != z:
                continue
            out.append(r)
        return tuple(out)

    def subgroup(
        self,
        t: int | None = None,
        x: Covariate | None = None,
        cell: "PartitionCell | None" = None,
    ) -> frozenset[int]:
        """Index set J_t, J^x, J_t^x, J^U or J_t^U, depending on the filters."""
        return frozenset(r.unit for r in self.rows_where(t=t, x=x, cell=cell))


def mean_y(rows: Iterable[Row]) -> float:
    rows = tuple(rows)
    if not rows:
        raise SupportError("mean over an empty subgroup")
    return math.fsum(r.y for r in rows) / len(rows)


@dataclass(frozen=True)
class OutcomeOracle:
    """Ground-truth outcome function y(i, t) for a future population.

    Immutable; total on units x treatments in simulation mode.  Outcomes
    depend only on the unit's own treatment.
    """

    table: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))

    def y(self, unit: int, t: int) -> float:
        try:
            return self.table[(unit, t)]
        except KeyError:
            raise OracleError(f"outcome oracle undefined at unit={unit}, t={t}") from None


@dataclass(frozen=True)
class ComplianceOracle:
    """Ground-truth compliance s(i, z): the treatment taken under instrument z."""

    table: Mapping[tuple[int, int], int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))

    def s(self, unit: int, z: int) -> int:
        try:
            return self.table[(unit, z)]
        except KeyError:
            raise OracleError(f"compliance oracle undefined at unit={unit}, z={z}") from None


@dataclass(frozen=True)
class Unit:
    unit: int
    x: Covariate


@dataclass(frozen=True)
class FuturePopulation:
    """The deployment population: unit ids with covariates, plus optional oracles."""

    units: tuple[Unit, ...]
    oracle: OutcomeOracle | None = None
    instrument_oracle: ComplianceOracle | None = None

    def __post_init__(self) -> None:
        if not self.units:
            raise ValueError("future population must be nonempty")
        ids = [u.unit for u in self.units]
        if len(set(ids)) != len(ids):
            raise ValueError("unit ids must be unique")

    def __len__(self) -> int:
        return len(self.units)

    def xs(self) -> tuple[Covariate, ...]:
        return tuple(sorted(set(u.x for u in self.units)))

    def units_where(
        self, x: Covariate | None = None, cell: "PartitionCell | None" = None
    ) -> tuple[Unit, ...]:
        if x is not None and cell is not None:
            raise ValueError("give at most one of x and cell")
        out = []
        for u in self.units:
            if x is not None and u.x != x:
                continue
            if cell is not None and not cell.contains(u.x):
                continue
            out.append(u)
        return tuple(out)

    def require_oracle(self) -> OutcomeOracle:
        if self.oracle is None:
            raise OracleError("operation requires the outcome oracle (oracle mode only)")
        return self.oracle

    def require_instrument_oracle(self) -> ComplianceOracle:
        if self.instrument_oracle is None:
            raise OracleError("operation requires the compliance oracle (oracle mode only)")
        return self.instrument_oracle

    def apo(self, t: int) -> float:
        """True average potential outcome under treatment t, from the oracle."""
        oracle = self.require_oracle()
        return math.fsum(oracle.y(u.unit, t) for u in self.units) / len(self.units)

    def ate(self, t1: int = 1, t0: int = 0) -> float:
        return self.apo(t1) - self.apo(t0)

    def compliance_group(self, t: int, z: int) -> frozenset[int]:
        """I_tz: future units that take treatment t when assigned instrument z."""
        so = self.require_instrument_oracle()
        return frozenset(u.unit for u in self.units if so.s(u.unit, z) == t)

    def mean_outcome_under_z(self, z: int) -> float:
        """Mean of y(i, s(i, z)) over the population: the outcome of assigning z."""
        oracle = self.require_oracle()
        so = self.require_instrument_oracle()
        return math.fsum(oracle.y(u.unit, so.s(u.unit, z)) for u in self.units) / len(self.units)


@dataclass(frozen=True)
class PartitionCell:
    name: str
    contains: Callable[[Covariate], bool] = field(compare=False)


@dataclass(frozen=True)
class CovariatePartition:
    """Named cells that must be pairwise disjoint and exhaustive on the data at hand."""

    cells: tuple[PartitionCell, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.cells]
        if len(set(names)) != len(names):
            raise ValueError("partition cell names must be unique")
        if not self.cells:
            raise ValueError("partition must have at least one cell")

    @classmethod
    def from_members(cls, members: Mapping[str, Iterable[Covariate]]) -> "CovariatePartition":
        cells = []
        for name, xs in members.items():
            xset = frozenset(xs)
            cells.append(PartitionCell(name, lambda x, _s=xset: x in _s))
        return cls(tuple(cells))

    @classmethod
    def singletons(cls, xs: Iterable[Covariate]) -> "CovariatePartition":
        return cls.from_members({f"x{i}": [x] for i, x in enumerate(sorted(set(xs)))})

    @classmethod
    def single_cell(cls) -> "CovariatePartition":
        return cls((PartitionCell("all", lambda x: True),))

    def cell_of(self, x: Covariate) -> PartitionCell:
        hits = [c for c in self.cells if c.contains(x)]
        if len(hits) != 1:
            raise ValueError(
                f"covariate {x!r} matched {len(hits)} partition cells; cells must be "
                "disjoint and exhaustive"
            )
        return hits[0]

    def validate_on(self, xs: Iterable[Covariate]) -> None:
        for x in xs:
            self.cell_of(x)


@dataclass(frozen=True)
class ToleranceBudget:
    """The scalars attached to stable-prediction, calibration and treatment-average slack."""

    eps: float = 0.0
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.eps < 0 or self.delta < 0 or self.gamma < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class SupportReport:
    ok: bool
    violations: tuple[tuple[str, int], ...] = ()
    note: str | None = None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [list(v) for v in self.violations],
            "note": self.note,
        }


def empirical_propensity(
    data: ObservedDataset,
    t: int,
    partition: CovariatePartition | None = None,
) -> dict[Covariate, float] | dict[str, float]:
    """Observed treated fraction per covariate value, or per cell if a partition is given.

    Empty numerators give 0; estimators that divide by a propensity must check
    support themselves.
    """
    data.check_treatment(t)
    if partition is None:
        out_x: dict[Covariate, float] = {}
        for x in data.xs():
            denom = len(data.rows_where(x=x))
            out_x[x] = len(data.rows_where(t=t, x=x)) / denom
        return out_x
    out_c: dict[str, float] = {}
    for cell in partition.cells:
        denom = len(data.rows_where(cell=cell))
        if denom == 0:
            continue
        out_c[cell.name] = len(data.rows_where(t=t, cell=cell)) / denom
    return out_c


def common_support_check(
    data: ObservedDataset,
    partition: CovariatePartition | None = None,
) -> SupportReport:
    """List every (x-or-cell, t) pair with no observed rows; ok iff none."""
    if len(data) == 0:
        return SupportReport(ok=False, note="empty dataset: every cell is vacuously absent")
    violations: list[tuple[str, int]] = []
    if partition is None:
        keys = [(repr(x), x, None) for x in data.xs()]
    else:
        keys = [(c.name, None, c) for c in partition.cells if data.rows_where(cell=c)]
    for label, x, cell in keys:
        for t in sorted(data.treatments):
            if not data.rows_where(t=t, x=x, cell=cell):
                violations.append((label, t))
    return SupportReport(ok=not violations, violations=tuple(violations))
