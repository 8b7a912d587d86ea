"""Analysis configuration and the batch metric suite.

An analysis config names the model, the target event, the per-variable
reference and failure states, the soft-evidence delta, and the path sets of
interest.  `run_metric_suite` computes every importance metric over that
configuration in a deterministic order, so repeated runs produce identical
reports.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from causalsafety.network import CausalNetwork, SCHEMA_VERSION, SchemaError, _require
from causalsafety.intervention import PathSet
from causalsafety.metrics import (
    ASSOCIATIONAL,
    INTERVENTIONAL,
    MetricValue,
    TargetEvent,
    TornadoRow,
    ace_rce,
    birnbaum_cbn,
    event_probability,
    path_metrics,
    rce_dichotomic,
    rce_pairwise,
    rrw,
    rrw_dichotomic,
    tornado,
)


class ConfigError(ValueError):
    """The analysis configuration is malformed or inconsistent with the model."""


@dataclass(frozen=True)
class VariableRoles:
    reference: str
    failure: str


@dataclass(frozen=True)
class AnalysisConfig:
    model: str
    target: TargetEvent
    variables: tuple[tuple[str, VariableRoles], ...]
    delta: float = 0.01
    path_sets: tuple[tuple[str, str], ...] = ()  # (name, arrow-chain text)
    format: str = "json"

    def roles(self, variable: str) -> VariableRoles:
        for name, r in self.variables:
            if name == variable:
                return r
        raise KeyError(variable)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)


def parse_analysis_config(text: str) -> AnalysisConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    try:
        schema = _require(doc, "schema", int, "config")
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {schema}")
        model = _require(doc, "model", str, "config")
        raw_target = _require(doc, "target", dict, "config")
        target = TargetEvent(_require(raw_target, "variable", str, "target"),
                             _require(raw_target, "state", str, "target"))
        raw_vars = _require(doc, "variables", dict, "config")
        variables = []
        for name, roles in raw_vars.items():
            if not isinstance(roles, dict):
                raise ConfigError(f"variables[{name!r}] must be an object")
            variables.append((name, VariableRoles(
                _require(roles, "reference", str, f"variables[{name!r}]"),
                _require(roles, "failure", str, f"variables[{name!r}]"))))
        delta = doc.get("delta", 0.01)
        if not isinstance(delta, (int, float)) or not 0.0 < delta <= 0.05:
            raise ConfigError(f"delta must be a number in (0, 0.05], got {delta!r}")
        path_sets = []
        for i, raw in enumerate(doc.get("path_sets", [])):
            if not isinstance(raw, dict):
                raise ConfigError(f"path_sets[{i}] must be an object")
            path_sets.append((_require(raw, "name", str, f"path_sets[{i}]"),
                              _require(raw, "paths", str, f"path_sets[{i}]")))
        fmt = doc.get("format", "json")
        if fmt not in ("json", "csv", "svg"):
            raise ConfigError(f"format must be json, csv or svg, got {fmt!r}")
    except SchemaError as exc:
        raise ConfigError(str(exc)) from None
    return AnalysisConfig(model, target, tuple(variables), float(delta),
                          tuple(path_sets), fmt)


def load_analysis_config(path) -> AnalysisConfig:
    with open(path, encoding="utf-8") as f:
        return parse_analysis_config(f.read())


def check_config(config: AnalysisConfig, network: CausalNetwork) -> None:
    """Every referenced variable and state must resolve against the model."""
    def state_of(variable: str, state: str, what: str) -> None:
        try:
            var = network.variable(variable)
        except KeyError:
            raise ConfigError(f"{what}: unknown variable {variable!r}") from None
        if state not in var.states:
            raise ConfigError(f"{what}: {state!r} is not a state of {variable!r} "
                              f"(states: {', '.join(var.states)})")

    state_of(config.target.variable, config.target.state, "target")
    for name, roles in config.variables:
        state_of(name, roles.reference, f"variables[{name!r}].reference")
        state_of(name, roles.failure, f"variables[{name!r}].failure")
    for name, text in config.path_sets:
        try:
            pathset = PathSet.parse(text)
            pathset.validate_against(network)
        except ValueError as exc:
            raise ConfigError(f"path set {name!r}: {exc}") from None


@dataclass(frozen=True)
class MetricReport:
    """All metric values of one suite run, in deterministic order."""

    target: TargetEvent
    baseline: float
    values: tuple[MetricValue, ...]
    errors: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def select(self, metric: str) -> list[MetricValue]:
        return [v for v in self.values if v.metric == metric]

    def find(self, metric: str, variable: str, detail_contains: str = "") -> MetricValue:
        for v in self.values:
            if v.metric == metric and v.variable == variable and detail_contains in v.detail:
                return v
        raise KeyError(f"{metric}[{variable} ~{detail_contains}]")


def run_metric_suite(network: CausalNetwork, config: AnalysisConfig) -> MetricReport:
    """BB, RRW/IRRW, categorical and dichotomic ACE/RCE, the pairwise RCE2
    grid, and path metrics for every configured path set.

    Per-subject errors are collected, not raised, so one degenerate subject
    cannot abort a sweep.
    """
    check_config(config, network)
    target = config.target
    values: list[MetricValue] = []
    errors: list[tuple[str, str]] = []

    def run(subject: str, fn, *args, **kwargs):
        try:
            out = fn(*args, **kwargs)
        except ValueError as exc:
            errors.append((subject, str(exc)))
            return
        if isinstance(out, MetricValue):
            values.append(out)
        else:
            values.extend(out)

    baseline = event_probability(network, target)
    for name, roles in config.variables:
        run(f"BB {name}", birnbaum_cbn, network, target, name, roles.failure,
            delta=config.delta)
        run(f"RRW {name}", rrw, network, target, name, roles.reference, ASSOCIATIONAL)
        run(f"IRRW {name}", rrw, network, target, name, roles.reference, INTERVENTIONAL)
        for state in network.variable(name).states:
            run(f"ACE/RCE {name}={state}", ace_rce, network, target, name, state,
                roles.reference)
            run(f"RCE_D {name}={state}", rce_dichotomic, network, target, name, state)
            run(f"RRW_D {name}={state}", rrw_dichotomic, network, target, name, state,
                ASSOCIATIONAL)
            run(f"IRRW_D {name}={state}", rrw_dichotomic, network, target, name, state,
                INTERVENTIONAL)

    for (v1, r1), (v2, r2) in itertools.combinations(config.variables, 2):
        for s1 in network.variable(v1).states:
            for s2 in network.variable(v2).states:
                run(f"RCE2 {v1}={s1},{v2}={s2}", rce_pairwise, network, target,
                    (v1, s1, r1.reference), (v2, s2, r2.reference))

    for name, text in config.path_sets:
        pathset = PathSet.parse(text)
        source = pathset.source
        try:
            reference = config.roles(source).reference
        except KeyError:
            errors.append((f"paths {name}", f"source {source!r} has no configured reference"))
            continue
        for state in network.variable(source).states:
            run(f"paths {name} {source}={state}", path_metrics, network, target,
                pathset, state, reference, label=name)

    return MetricReport(target, baseline, tuple(values), tuple(errors))


def tornado_rows(network: CausalNetwork, config: AnalysisConfig) -> list[TornadoRow]:
    """Tornado sweep over every state of every configured variable."""
    check_config(config, network)
    subjects = [(name, state)
                for name, _ in config.variables
                for state in network.variable(name).states]
    return tornado(network, config.target, subjects)


def pairwise_grid(network: CausalNetwork, config: AnalysisConfig) -> list[MetricValue]:
    """The full pairwise-intervention RCE2 grid used for the heat map."""
    check_config(config, network)
    out = []
    for (v1, r1), (v2, r2) in itertools.combinations(config.variables, 2):
        for s1 in network.variable(v1).states:
            for s2 in network.variable(v2).states:
                out.append(rce_pairwise(network, config.target,
                                        (v1, s1, r1.reference), (v2, s2, r2.reference)))
    return out
