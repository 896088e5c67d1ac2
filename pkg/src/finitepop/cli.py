"""Batch front end: estimators, auditors, bounds and sweeps over config files.

Verbs: ``run``, ``audit``, ``simulate``, ``sweep``.  Configuration is a YAML
or JSON key-value tree carrying ``schema: 1``; selected keys can be overridden
by ``FINITEPOP_``-prefixed environment variables and those in turn by command
line flags.  Reports are JSON with floats rendered to 17 significant digits,
so a rerun with identical inputs produces a byte-identical file.

Exit codes: 0 success (in oracle mode additionally every verdict passed),
1 at least one oracle verdict failed, 2 configuration or input schema
violation (no report is written), 3 method precondition failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .audit import (
    AuditResult,
    audit_cfd,
    audit_compliance_stability,
    audit_dominance,
    audit_dr_condition,
    audit_ml_groupwise,
    audit_sp,
    avg_signed_difference,
    dominance_holds,
)
from .bounds import OutcomeBounds, iv_ate_lower_bound_randomized, robins_manski_bounds
from .core import (
    Covariate,
    CovariatePartition,
    FinitePopError,
    FuturePopulation,
    ObservedDataset,
    SchemaError,
    SupportError,
)
from .estimate import (
    CoarsenedMatching,
    ExactMatching,
    RctConstant,
    Tabular,
    ate_estimate,
    coarsened_matching_estimate,
    doubly_robust_estimate,
    exact_matching_estimate,
    plugin_estimate,
    rct_estimate,
)
from .io import load_future_csv, load_observed_csv, save_future_csv, save_observed_csv
from .simulate import InstrumentSpec, ScenarioSpec, generate, scenario_seed

EXIT_OK = 0
EXIT_VERDICT_FAIL = 1
EXIT_SCHEMA = 2
EXIT_PRECONDITION = 3

_SLACK = 1e-10


class ConfigError(SchemaError):
    """Schema violation in a config file, carrying a line number."""

    def __init__(self, msg: str, line: int = 1):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class PreconditionError(FinitePopError):
    """A method's precondition failed; names the method and the cause."""


# ----------------------------------------------------------------------------
# deterministic JSON rendering


def _render(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            out.append('"%s"' % repr(obj))
        else:
            out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _render(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            _render(str(k), out)
            out.append(":")
            _render(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(obj) -> str:
    out: list[str] = []
    _render(obj, out)
    return "".join(out) + "\n"


def _write_report(report: dict, out_path: str | None) -> None:
    text = render_report(report)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------
# config loading


def _key_line(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.lstrip().lstrip('"').lstrip("'")
        if stripped.startswith(key) and ":" in stripped:
            return i
    return 1


def load_config(path: str) -> tuple[dict, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = 1
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise ConfigError(f"config parse error: {exc}", line) from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a key-value mapping")
    if "schema" not in cfg:
        raise ConfigError("missing required key 'schema'")
    if cfg["schema"] != 1:
        raise ConfigError(
            f"unsupported schema version {cfg['schema']!r}, expected 1",
            _key_line(text, "schema"),
        )
    return cfg, text


def _apply_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    """Flags beat environment, environment beats the config file."""
    merged = dict(cfg)
    env_keys = {
        "FINITEPOP_MODE": ("mode", str),
        "FINITEPOP_SEED": ("seed", int),
        "FINITEPOP_OUT": ("out", str),
        "FINITEPOP_REPLICATIONS": ("replications", int),
    }
    for env, (key, cast) in env_keys.items():
        if env in os.environ:
            try:
                merged[key] = cast(os.environ[env])
            except ValueError:
                raise ConfigError(f"environment variable {env} is not a valid {cast.__name__}")
    for key in ("mode", "seed", "out", "replications"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _require(cfg: dict, key: str, text: str):
    if key not in cfg:
        raise ConfigError(f"missing required key {key!r}", _key_line(text, "schema"))
    return cfg[key]


def _covariate_from_fields(fields: dict) -> Covariate:
    return Covariate.of(**fields)


def load_partition_file(path: str) -> CovariatePartition:
    cfg, _ = load_config(path)
    cells = cfg.get("cells")
    if not isinstance(cells, dict) or not cells:
        raise ConfigError("partition file needs a nonempty 'cells' mapping")
    members = {}
    for name, xs in cells.items():
        if not isinstance(xs, list):
            raise ConfigError(f"partition cell {name!r} must list covariate records")
        members[str(name)] = [_covariate_from_fields(f) for f in xs]
    return CovariatePartition.from_members(members)


def load_predictor_table(path: str) -> Tabular:
    cfg, _ = load_config(path)
    entries = cfg.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("predictor file needs a nonempty 'entries' list")
    table = {}
    for e in entries:
        try:
            table[(_covariate_from_fields(e["x"]), int(e["t"]))] = float(e["p"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"bad predictor entry {e!r}: need x, t, p")
    return Tabular(table)


# ----------------------------------------------------------------------------
# scenario specs from config trees


def spec_from_config(cfg: dict) -> ScenarioSpec:
    def pairs(v):
        if v is None or isinstance(v, (int, float)):
            return v
        return tuple(sorted((str(k), _tupled(val)) for k, val in dict(v).items()))

    def _tupled(v):
        return tuple(v) if isinstance(v, list) else v

    inst = None
    if cfg.get("instrument") is not None:
        icfg = dict(cfg["instrument"])
        take = icfg.get("take_probability", {0: 0.2, 1: 0.8})
        inst = InstrumentSpec(
            z_probability=float(icfg.get("z_probability", 0.5)),
            take_probability=tuple(sorted((int(z), float(p)) for z, p in dict(take).items())),
            dominance_break=float(icfg.get("dominance_break", 0.0)),
        )
    known = {
        "schema", "n_observed", "n_future", "levels", "base_outcomes", "noise_sd",
        "outcome_range", "assignment", "propensities", "observed_level_weights",
        "future_level_weights", "future_outcome_shift", "shared_unit_noise",
        "instrument", "seed",
    }
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown scenario keys: {sorted(extra)}")
    try:
        return ScenarioSpec(
            n_observed=int(cfg["n_observed"]),
            n_future=int(cfg["n_future"]),
            levels=tuple(str(v) for v in cfg["levels"]),
            base_outcomes=pairs(cfg["base_outcomes"]),
            noise_sd=float(cfg.get("noise_sd", 0.0)),
            outcome_range=tuple(cfg.get("outcome_range", (0.0, 10.0))),
            assignment=str(cfg.get("assignment", "rct")),
            propensities=pairs(cfg.get("propensities", 0.5)),
            observed_level_weights=pairs(cfg.get("observed_level_weights")),
            future_level_weights=pairs(cfg.get("future_level_weights")),
            future_outcome_shift=pairs(cfg.get("future_outcome_shift")),
            shared_unit_noise=bool(cfg.get("shared_unit_noise", False)),
            instrument=inst,
            seed=int(cfg.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario spec: {exc}") from None


# ----------------------------------------------------------------------------
# method runners

_ORACLE_ONLY_AUDITS = {
    "cfd": "CFD unobservable without ground truth",
    "signed_difference": "average signed difference needs the future outcome oracle",
    "ml_groupwise": "groupwise residual transfer needs the future outcome oracle",
    "dr_condition": "the doubly robust condition needs the future outcome oracle",
    "dominance": "dominance is defined on the future compliance and outcome oracles",
    "compliance_stability": "compliance stability needs the future compliance oracle",
}


def _auditing_predictor(method: str, data: ObservedDataset, params: dict):
    if method == "rct":
        return RctConstant.fit(data)
    if method == "matching":
        return ExactMatching.fit(data)
    if method == "coarsened":
        return CoarsenedMatching.fit(data, params["partition"])
    if method in ("plugin", "dr"):
        return params["predictor"]
    return None


def _method_params(mcfg: dict) -> dict:
    params: dict = {}
    if "partition" in mcfg:
        params["partition"] = load_partition_file(mcfg["partition"])
    if "predictor" in mcfg:
        params["predictor"] = load_predictor_table(mcfg["predictor"])
    for key in ("k0", "k1", "eps", "delta", "gamma"):
        if key in mcfg:
            params[key] = float(mcfg[key])
    return params


def _estimate(method: str, data: ObservedDataset, t: int, params: dict):
    if method == "rct":
        return rct_estimate(data, t)
    if method == "matching":
        return exact_matching_estimate(data, t)
    if method == "coarsened":
        return coarsened_matching_estimate(data, params["partition"], t)
    if method == "plugin":
        return plugin_estimate(params["predictor"], data, t)
    if method == "dr":
        w = _dr_weights(data, params)
        return doubly_robust_estimate(params["predictor"], w, data, t)
    raise PreconditionError(f"method {method}: unknown estimator")


def _dr_weights(data: ObservedDataset, params: dict):
    """Population-share correction weights |I^x|/|J_t^x| * |J|/|I|.

    Without a stated future composition the observed composition stands in
    for it, which reduces the weight to the inverse empirical propensity.
    """

    def w(x: Covariate, t: int) -> float:
        treated = len(data.rows_where(t=t, x=x))
        if treated == 0:
            raise SupportError(f"no observed rows with x={x!r}, t={t}")
        return len(data.rows_where(x=x)) / treated

    return w


def _dr_premise(data: ObservedDataset, future: FuturePopulation, params: dict, t: int):
    """Which audited arm, if any, covers a doubly robust verdict.

    Arm one needs the predictor to match observed cell means.  Arm two needs
    the supplied weights to equal the population-share correction and the
    f=1 audit condition to vanish.  Returns (budget, label) or (None, None).
    """
    p = params["predictor"]
    cell_gap = 0.0
    for x in data.xs():
        rows = data.rows_where(t=t, x=x)
        if rows:
            mean = math.fsum(r.y for r in rows) / len(rows)
            cell_gap = max(cell_gap, abs(p(x, t) - mean))
    sp = audit_sp(p, data, future).per_treatment[t]
    if cell_gap <= 1e-9:
        return sp + abs(avg_signed_difference(data, future, t)), "cell_mean_predictor"
    cond = audit_dr_condition(data, future, t)
    if abs(cond) <= 1e-9:
        return sp, "weighted_condition"
    return None, None


def _oracle_verdict(method, data, future, t, report, params):
    truth = future.apo(t)
    error = abs(report.estimate - truth)
    if method == "rct":
        p = RctConstant.fit(data)
        budget = audit_sp(p, data, future).per_treatment[t] + abs(
            audit_cfd(p, future).per_treatment[t]
        )
    elif method == "matching":
        p = ExactMatching.fit(data)
        budget = audit_sp(p, data, future).per_treatment[t] + abs(
            avg_signed_difference(data, future, t)
        )
    elif method == "coarsened":
        part = params["partition"]
        p = CoarsenedMatching.fit(data, part)
        budget = audit_sp(p, data, future).per_treatment[t] + abs(
            avg_signed_difference(data, future, t, partition=part)
        )
    elif method == "plugin":
        p = params["predictor"]
        part = params.get("partition") or CovariatePartition.singletons(
            set(data.xs()) | {u.x for u in future.units}
        )
        gaps = audit_ml_groupwise(p, data, future, part)
        budget = audit_sp(p, data, future).per_treatment[t] + abs(gaps.per_treatment[t])
    elif method == "dr":
        budget, label = _dr_premise(data, future, params, t)
        if budget is None:
            return {"truth": truth, "error": error, "budget": None, "pass": None,
                    "note": "no audited premise holds; bound not applicable"}
        return {"truth": truth, "error": error, "budget": budget,
                "pass": error <= budget + _SLACK, "premise": label}
    else:
        return None
    return {"truth": truth, "error": error, "budget": budget, "pass": error <= budget + _SLACK}


def run_methods(cfg: dict, data: ObservedDataset, future: FuturePopulation | None) -> dict:
    mode = cfg.get("mode", "data")
    methods_cfg = cfg.get("methods", [])
    if not isinstance(methods_cfg, list) or not methods_cfg:
        raise ConfigError("config needs a nonempty 'methods' list")
    oracle_mode = mode == "oracle"
    if oracle_mode:
        if future is None or future.oracle is None:
            raise PreconditionError("oracle mode requires a future population with outcomes")
    report: dict = {"methods": {}}
    all_pass = True
    for mcfg in methods_cfg:
        if isinstance(mcfg, str):
            mcfg = {"name": mcfg}
        name = mcfg.get("name")
        if name is None:
            raise ConfigError(f"method entry {mcfg!r} needs a 'name'")
        params = _method_params(mcfg)
        if name in ("rm_bounds", "iv_lower"):
            entry = _run_bound_method(name, mcfg, params, data, future, oracle_mode)
        else:
            entry = _run_point_method(name, params, data, future, oracle_mode)
        for v in entry.get("verdicts", {}).values():
            if v and v.get("pass") is False:
                all_pass = False
        report["methods"][name] = entry
    if oracle_mode:
        report["ground_truth"] = {
            "apo": {str(t): future.apo(t) for t in (0, 1)},
            "ate": future.ate(),
        }
    report["ok"] = all_pass
    return report


def _run_point_method(name, params, data, future, oracle_mode) -> dict:
    try:
        per_t = {t: _estimate(name, data, t, params) for t in sorted(data.treatments)}
    except FinitePopError as exc:
        raise PreconditionError(f"method {name}: {exc}") from None
    entry: dict = {"per_treatment": {str(t): r.to_json() for t, r in per_t.items()}}
    if 0 in per_t and 1 in per_t:
        entry["ate"] = ate_estimate(per_t[1], per_t[0]).to_json()
    if oracle_mode:
        verdicts = {}
        for t, r in per_t.items():
            try:
                verdicts[str(t)] = _oracle_verdict(name, data, future, t, r, params)
            except FinitePopError as exc:
                raise PreconditionError(f"method {name}: {exc}") from None
        entry["verdicts"] = verdicts
        if 0 in per_t and 1 in per_t:
            v1, v0 = verdicts["1"], verdicts["0"]
            if v1 and v0 and v1["budget"] is not None and v0["budget"] is not None:
                err = abs((per_t[1].estimate - per_t[0].estimate) - future.ate())
                budget = v1["budget"] + v0["budget"]
                entry["verdicts"]["ate"] = {
                    "truth": future.ate(), "error": err, "budget": budget,
                    "pass": err <= budget + 2 * _SLACK,
                }
    return entry


def _run_bound_method(name, mcfg, params, data, future, oracle_mode) -> dict:
    try:
        if name == "rm_bounds":
            ob = OutcomeBounds(params["k0"], params["k1"])
            delta = params.get("delta", 0.0)
            per_t = {
                t: robins_manski_bounds(data, t, ob, delta)
                for t in sorted(data.treatments)
            }
            entry = {"per_treatment": {str(t): b.to_json() for t, b in per_t.items()}}
            if oracle_mode:
                entry["verdicts"] = {
                    str(t): {
                        "truth": future.apo(t),
                        "pass": b.lower - _SLACK <= future.apo(t) <= b.upper + _SLACK,
                    }
                    for t, b in per_t.items()
                }
            return entry
        if name == "iv_lower":
            b = iv_ate_lower_bound_randomized(data, params["eps"], params["delta"])
            entry = {"ate_lower": b.to_json()}
            if oracle_mode:
                entry["verdicts"] = {
                    "ate": {"truth": future.ate(), "pass": future.ate() >= b.lower - _SLACK}
                }
            return entry
    except KeyError as exc:
        raise ConfigError(f"method {name} needs parameter {exc.args[0]!r}")
    except FinitePopError as exc:
        raise PreconditionError(f"method {name}: {exc}") from None
    raise PreconditionError(f"method {name}: unknown bound")


# ----------------------------------------------------------------------------
# verbs


def _load_inputs(cfg: dict, text: str) -> tuple[ObservedDataset, FuturePopulation | None]:
    observed_path = _require(cfg, "observed", text)
    data = load_observed_csv(observed_path)
    future = None
    if cfg.get("future"):
        future = load_future_csv(cfg["future"])
    return data, future


def cmd_run(cfg: dict, text: str) -> int:
    data, future = _load_inputs(cfg, text)
    report = run_methods(cfg, data, future)
    report["metadata"] = _metadata(cfg)
    _write_report(report, cfg.get("out"))
    return EXIT_OK if report["ok"] else EXIT_VERDICT_FAIL


def cmd_audit(cfg: dict, text: str) -> int:
    data, future = _load_inputs(cfg, text)
    mode = cfg.get("mode", "data")
    audits = cfg.get("audits") or cfg.get("methods")
    if not isinstance(audits, list) or not audits:
        raise ConfigError("config needs a nonempty 'audits' list")
    if future is None:
        raise ConfigError("audits compare against a future population; set 'future'")
    predictor_kind = cfg.get("predictor", "matching")
    if isinstance(predictor_kind, str) and predictor_kind.endswith((".json", ".yaml", ".yml")):
        p = load_predictor_table(predictor_kind)
    else:
        params = {}
        if "partition" in cfg:
            params["partition"] = load_partition_file(cfg["partition"])
        p = _auditing_predictor(predictor_kind, data, params)
        if p is None:
            raise ConfigError(f"unknown auditing predictor {predictor_kind!r}")
    results = {}
    for name in audits:
        if mode != "oracle" and name in _ORACLE_ONLY_AUDITS:
            raise PreconditionError(f"audit {name}: {_ORACLE_ONLY_AUDITS[name]}")
        try:
            if name == "sp":
                res = audit_sp(p, data, future)
            elif name == "cfd":
                res = audit_cfd(p, future)
            elif name == "signed_difference":
                res = AuditResult(
                    name="avg_signed_difference",
                    per_treatment={
                        t: avg_signed_difference(data, future, t)
                        for t in sorted(data.treatments)
                    },
                )
            elif name == "ml_groupwise":
                part = None
                if "partition" in cfg:
                    part = load_partition_file(cfg["partition"])
                if part is None:
                    part = CovariatePartition.singletons(
                        set(data.xs()) | {u.x for u in future.units}
                    )
                res = audit_ml_groupwise(p, data, future, part)
            elif name == "dr_condition":
                res = AuditResult(
                    name="dr_condition",
                    per_treatment={
                        t: audit_dr_condition(data, future, t)
                        for t in sorted(data.treatments)
                    },
                )
            elif name == "dominance":
                res = audit_dominance(future)
            elif name == "compliance_stability":
                res = audit_compliance_stability(data, future)
            else:
                raise ConfigError(f"unknown audit {name!r}")
        except ConfigError:
            raise
        except FinitePopError as exc:
            raise PreconditionError(f"audit {name}: {exc}") from None
        results[name] = res.to_json()
    report = {"audits": results, "metadata": _metadata(cfg), "ok": True}
    _write_report(report, cfg.get("out"))
    return EXIT_OK


def cmd_simulate(cfg: dict, text: str) -> int:
    spec_cfg = {k: v for k, v in cfg.items() if k not in ("mode", "out", "replications")}
    if "seed" in cfg:
        spec_cfg["seed"] = cfg["seed"]
    spec = spec_from_config(spec_cfg)
    scenario = generate(spec)
    out_dir = Path(cfg.get("out") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    save_observed_csv(scenario.observed, out_dir / "observed.csv")
    save_future_csv(scenario.future, out_dir / "future.csv")
    sidecar = {
        "ground_truth": scenario.ground_truth,
        "spec": dataclasses.asdict(spec),
        "metadata": _metadata(cfg),
    }
    (out_dir / "ground_truth.json").write_text(render_report(sidecar), encoding="utf-8")
    return EXIT_OK


def _quantile(sorted_vals: list[float], q: float) -> float:
    if not sorted_vals:
        return float("nan")
    pos = q * (len(sorted_vals) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def cmd_sweep(cfg: dict, text: str) -> int:
    replications = int(cfg.get("replications", 0))
    master_seed = int(cfg.get("seed", 0))
    scenario_cfg = _require(cfg, "scenario", text)
    methods = cfg.get("methods", ["rct", "matching"])
    base_spec = spec_from_config(dict(scenario_cfg))
    per_method: dict[str, dict] = {}
    dominance_failures = 0
    has_instrument = base_spec.instrument is not None
    for i in range(replications):
        spec = dataclasses.replace(base_spec, seed=scenario_seed(master_seed, i))
        scenario = generate(spec)
        run_cfg = {"mode": "oracle", "methods": list(methods)}
        sub = run_methods(run_cfg, scenario.observed, scenario.future)
        for name, entry in sub["methods"].items():
            bucket = per_method.setdefault(name, {"errors": [], "passes": 0, "judged": 0})
            for t, verdict in entry.get("verdicts", {}).items():
                if verdict is None or verdict.get("pass") is None:
                    continue
                bucket["judged"] += 1
                bucket["passes"] += int(verdict["pass"])
                if "error" in verdict:
                    bucket["errors"].append(verdict["error"])
        if has_instrument:
            if not dominance_holds(audit_dominance(scenario.future)):
                dominance_failures += 1
    summary: dict = {}
    for name, bucket in sorted(per_method.items()):
        errs = sorted(bucket["errors"])
        summary[name] = {
            "pass_rate": bucket["passes"] / bucket["judged"] if bucket["judged"] else None,
            "judged": bucket["judged"],
            "error_q50": _quantile(errs, 0.5),
            "error_q90": _quantile(errs, 0.9),
            "error_max": errs[-1] if errs else float("nan"),
        }
    report = {
        "replications": replications,
        "seed": master_seed,
        "summary": summary,
        "metadata": _metadata(cfg),
    }
    if has_instrument and replications:
        report["dominance_fail_rate"] = dominance_failures / replications
    _write_report(report, cfg.get("out"))
    return EXIT_OK


def _metadata(cfg: dict) -> dict:
    return {"tool": "finitepop", "version": __version__, "mode": cfg.get("mode", "data")}


# ----------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finitepop",
        description="Estimate, bound and audit treatment effects on finite populations.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("run", "audit", "simulate", "sweep"):
        sp = sub.add_parser(verb)
        sp.add_argument("--config", required=True, help="YAML or JSON config, schema 1")
        sp.add_argument("--mode", choices=["data", "oracle"], default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--replications", type=int, default=None)
    return parser


_VERBS = {"run": cmd_run, "audit": cmd_audit, "simulate": cmd_simulate, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, text = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        return _VERBS[args.verb](cfg, text)
    except SchemaError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except FinitePopError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
