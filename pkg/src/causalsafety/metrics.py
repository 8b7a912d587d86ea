"""Causal and associational importance metrics over a causal network.

Conventions shared by all metrics here:

* The analysis target is one event Y, e.g. Fusion=FN.
* Ratios with a zero denominator and nonzero numerator are +infinity
  (reports print "inf"); 0/0 is undefined and reported as such, never an
  exception, so ranked sweeps stay total.
* Every MetricValue carries the exact probabilities it was computed from.

The risk-reduction metrics exist in an associational flavor (conditioning,
comparable to classic fault-tree usage) and an interventional flavor
(graph mutilation).  For root variables the two coincide; for confounded
variables they diverge, which is the point of the comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from causalsafety.network import CausalNetwork
from causalsafety.inference import Distribution, marginal, restricted_marginal
from causalsafety.intervention import (
    InterventionValue,
    PathSet,
    interventional_marginal,
    negated_state_distribution,
    path_specific_marginal,
)

ASSOCIATIONAL = "associational"
INTERVENTIONAL = "interventional"


@dataclass(frozen=True)
class TargetEvent:
    """The analysed outcome event, e.g. the fused detector reporting FN."""

    variable: str
    state: str

    def __str__(self) -> str:
        return f"{self.variable}={self.state}"


@dataclass(frozen=True)
class MetricValue:
    """One named metric result with query provenance.

    value is a float, +infinity, or None when the metric is undefined
    (0/0); numerator and denominator are set for ratio-shaped metrics.
    `variable` and `detail` fill the report columns (metric, variable,
    state/path, ...); for pairwise metrics `variable` joins both names.
    """

    metric: str
    variable: str
    detail: str
    value: float | None
    numerator: float | None = None
    denominator: float | None = None
    queries: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    @property
    def is_undefined(self) -> bool:
        return self.value is None

    def query(self, label: str) -> float:
        for key, val in self.queries:
            if key == label:
                return val
        raise KeyError(label)

    def __str__(self) -> str:
        if self.value is None:
            shown = "undefined"
        elif math.isinf(self.value):
            shown = "inf"
        else:
            shown = f"{self.value:.6g}"
        return f"{self.metric}[{self.variable} {self.detail}] = {shown}"


@dataclass(frozen=True)
class TornadoRow:
    """Conditional versus interventional target probability for one subject."""

    variable: str
    state: str
    conditional: float
    interventional: float
    baseline: float

    @property
    def label(self) -> str:
        return f"{self.variable}={self.state}"


def _ratio(numerator: float, denominator: float) -> float | None:
    if denominator == 0.0:
        return math.inf if numerator > 0.0 else None
    return numerator / denominator


def _mode_check(mode: str) -> None:
    if mode not in (ASSOCIATIONAL, INTERVENTIONAL):
        raise ValueError(f"mode must be {ASSOCIATIONAL!r} or {INTERVENTIONAL!r}, got {mode!r}")


def event_probability(network: CausalNetwork, target: TargetEvent) -> float:
    return marginal(network, target.variable).p(target.state)


def _do_probability(network: CausalNetwork, target: TargetEvent,
                    interventions: dict[str, InterventionValue]) -> float:
    return interventional_marginal(network, target.variable, interventions).p(target.state)


def _value_label(value: InterventionValue) -> str:
    if isinstance(value, Distribution):
        return "~(" + ", ".join(f"{s}:{p:.6g}" for s, p in zip(value.states, value.probabilities)) + ")"
    return value


def rrw(network: CausalNetwork, target: TargetEvent, variable: str,
        reference_state: str, mode: str = ASSOCIATIONAL) -> MetricValue:
    """Risk reduction worth against a reference state.

    associational:  P(Y) / P(Y | X=x_ref)        (RRW)
    interventional: P(Y) / P(Y | do(X=x_ref))    (IRRW)
    """
    _mode_check(mode)
    baseline = event_probability(network, target)
    if mode == ASSOCIATIONAL:
        den = marginal(network, target.variable, {variable: reference_state}).p(target.state)
        metric, den_label = "RRW", f"P({target}|{variable}={reference_state})"
    else:
        den = _do_probability(network, target, {variable: reference_state})
        metric, den_label = "IRRW", f"P({target}|do({variable}={reference_state}))"
    return MetricValue(
        metric, variable, f"ref={reference_state}", _ratio(baseline, den),
        numerator=baseline, denominator=den,
        queries=((f"P({target})", baseline), (den_label, den)))


def ace_rce(network: CausalNetwork, target: TargetEvent, variable: str, state: str,
            reference: InterventionValue) -> tuple[MetricValue, MetricValue]:
    """Average and relative causal effect of X=state against a reference.

    ACE = P(Y|do(X=x)) - P(Y|do(X=x_ref)); RCE is the corresponding ratio.
    The reference is a state label or, for dichotomic analysis, a
    distribution such as the negated-state marginal.
    """
    p_x = _do_probability(network, target, {variable: state})
    p_ref = _do_probability(network, target, {variable: reference})
    ref_label = _value_label(reference)
    detail = f"{state} vs {ref_label}"
    queries = ((f"P({target}|do({variable}={state}))", p_x),
               (f"P({target}|do({variable}={ref_label}))", p_ref))
    ace = MetricValue("ACE", variable, detail, p_x - p_ref, queries=queries)
    rce = MetricValue("RCE", variable, detail, _ratio(p_x, p_ref),
                      numerator=p_x, denominator=p_ref, queries=queries)
    return ace, rce


def rce_dichotomic(network: CausalNetwork, target: TargetEvent, variable: str,
                   state: str) -> MetricValue:
    """RCE of X=state against the stochastic do(X=not-state) intervention."""
    negated = negated_state_distribution(network, variable, state)
    p_x = _do_probability(network, target, {variable: state})
    p_not = _do_probability(network, target, {variable: negated})
    return MetricValue(
        "RCE_D", variable, f"{state} vs not-{state}", _ratio(p_x, p_not),
        numerator=p_x, denominator=p_not,
        queries=((f"P({target}|do({variable}={state}))", p_x),
                 (f"P({target}|do({variable}=not-{state}))", p_not)))


def rrw_dichotomic(network: CausalNetwork, target: TargetEvent, variable: str,
                   state: str, mode: str = ASSOCIATIONAL) -> MetricValue:
    """Dichotomic risk reduction worth: baseline risk over risk given not-state.

    associational:  P(Y) / P(Y | X != state)
    interventional: P(Y) / P(Y | do(X = not-state))  with the negated-marginal do
    """
    _mode_check(mode)
    baseline = event_probability(network, target)
    if mode == ASSOCIATIONAL:
        den = restricted_marginal(network, target.variable, variable, state).p(target.state)
        metric, den_label = "RRW_D", f"P({target}|{variable}!={state})"
    else:
        negated = negated_state_distribution(network, variable, state)
        den = _do_probability(network, target, {variable: negated})
        metric, den_label = "IRRW_D", f"P({target}|do({variable}=not-{state}))"
    return MetricValue(
        metric, variable, f"{state} vs not-{state}", _ratio(baseline, den),
        numerator=baseline, denominator=den,
        queries=((f"P({target})", baseline), (den_label, den)))


def birnbaum_cbn(network: CausalNetwork, target: TargetEvent, variable: str,
                 failure_state: str, delta: float = 0.01,
                 mode: str = ASSOCIATIONAL) -> MetricValue:
    """Sensitivity of P(Y) to the failure-state marginal of one variable,
    estimated as a central difference quotient under small soft evidence.

    The variable's observational marginal is shifted by +/- delta on the
    failure state, renormalizing the remaining states proportionally.  In the
    associational mode (the fault-tree-comparable one) the shifted marginal
    reweights the conditionals P(Y|X=s); in the interventional mode it is
    applied as a stochastic do.  Both are linear in the shifted marginal, so
    the quotient is exact rather than delta-dependent.
    """
    _mode_check(mode)
    if not 0.0 < delta <= 0.05:
        raise ValueError(f"delta must be in (0, 0.05], got {delta}")
    var = network.variable(variable)
    fail_idx = var.index(failure_state)
    obs = marginal(network, variable)
    q = list(obs.probabilities)
    q_fail = q[fail_idx]
    if q_fail + delta > 1.0 or q_fail - delta < 0.0:
        raise ValueError(
            f"delta={delta} pushes P({variable}={failure_state})={q_fail:.6g} outside [0, 1]")

    def shifted(sign: float) -> list[float]:
        scale = (1.0 - q_fail - sign * delta) / (1.0 - q_fail)
        return [q_fail + sign * delta if i == fail_idx else q[i] * scale
                for i in range(len(q))]

    if mode == ASSOCIATIONAL:
        per_state = {
            s: marginal(network, target.variable, {variable: s}).p(target.state)
            for i, s in enumerate(var.states) if q[i] > 0.0}
        kind = ""
    else:
        per_state = {
            s: _do_probability(network, target, {variable: s})
            for i, s in enumerate(var.states) if q[i] > 0.0}
        kind = "do:"
    plus = shifted(+1.0)
    minus = shifted(-1.0)
    p_plus = sum(w * per_state[s] for s, w in zip(var.states, plus) if w > 0.0)
    p_minus = sum(w * per_state[s] for s, w in zip(var.states, minus) if w > 0.0)

    queries = [(f"P({target}|{kind}{variable}={s})", p) for s, p in per_state.items()]
    queries += [(f"P({target}|+delta)", p_plus), (f"P({target}|-delta)", p_minus),
                ("delta", delta)]
    return MetricValue(
        "BB" if mode == ASSOCIATIONAL else "BB_do",
        variable, f"failure={failure_state}",
        (p_plus - p_minus) / (2.0 * delta),
        numerator=p_plus - p_minus, denominator=2.0 * delta,
        queries=tuple(queries))


def rce_pairwise(network: CausalNetwork, target: TargetEvent,
                 first: tuple[str, str, InterventionValue],
                 second: tuple[str, str, InterventionValue]) -> MetricValue:
    """RCE under a simultaneous pair of interventions:
    P(Y|do(X1=x1, X2=x2)) / P(Y|do(X1=ref1, X2=ref2))."""
    var1, state1, ref1 = first
    var2, state2, ref2 = second
    if var1 == var2:
        raise ValueError("pairwise interventions need two distinct variables")
    num = _do_probability(network, target, {var1: state1, var2: state2})
    den = _do_probability(network, target, {var1: ref1, var2: ref2})
    detail = f"{state1}&{state2} vs {_value_label(ref1)}&{_value_label(ref2)}"
    return MetricValue(
        "RCE2", f"{var1}&{var2}", detail, _ratio(num, den),
        numerator=num, denominator=den,
        queries=((f"P({target}|do({var1}={state1},{var2}={state2}))", num),
                 (f"P({target}|do({var1}={_value_label(ref1)},{var2}={_value_label(ref2)}))", den)))


def path_metrics(network: CausalNetwork, target: TargetEvent, pathset: PathSet,
                 active_state: str, reference: InterventionValue,
                 label: str | None = None) -> tuple[MetricValue, MetricValue, MetricValue]:
    """Absolute and relative path-specific effect plus the share of the total
    causal effect carried by the path set (APE, RPE, APE/ACE)."""
    source = pathset.source
    p_pi = path_specific_marginal(network, target.variable, pathset,
                                  active_state, reference).p(target.state)
    p_ref = _do_probability(network, target, {source: reference})
    p_act = _do_probability(network, target, {source: active_state})
    ref_label = _value_label(reference)
    path_label = label or str(pathset)
    detail = f"{path_label}: {source}={active_state} vs {ref_label}"
    queries = ((f"P({target}|do_pi({source}=({active_state},{ref_label})))", p_pi),
               (f"P({target}|do({source}={ref_label}))", p_ref),
               (f"P({target}|do({source}={active_state}))", p_act))
    ape_value = p_pi - p_ref
    ace_value = p_act - p_ref
    ape = MetricValue("APE", source, detail, ape_value, queries=queries)
    rpe = MetricValue("RPE", source, detail, _ratio(p_pi, p_ref),
                      numerator=p_pi, denominator=p_ref, queries=queries)
    share = MetricValue("APE/ACE", source, detail,
                        _ratio(ape_value, ace_value) if ace_value != 0.0 else None,
                        numerator=ape_value, denominator=ace_value, queries=queries)
    return ape, rpe, share


def tornado(network: CausalNetwork, target: TargetEvent,
            subjects: Sequence[tuple[str, str]]) -> list[TornadoRow]:
    """Conditional and interventional target probability per subject state,
    sorted by interventional distance from the baseline, largest first."""
    baseline = event_probability(network, target)
    rows = []
    for variable, state in subjects:
        if variable == target.variable:
            raise ValueError(f"subject {variable!r} is the target variable")
        conditional = marginal(network, target.variable, {variable: state}).p(target.state)
        caused = _do_probability(network, target, {variable: state})
        rows.append(TornadoRow(variable, state, conditional, caused, baseline))
    rows.sort(key=lambda r: (-abs(r.interventional - r.baseline), r.variable, r.state))
    return rows
