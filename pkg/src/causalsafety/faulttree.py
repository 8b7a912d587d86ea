"""Classical fault-tree analysis and its causal-network counterpart.

Basic events are independent; gates are perfect AND/OR.  Top-event
probability is exact for shared-event DAGs via Shannon expansion: repeated
events are pinned to 0/1 recursively, and once every remaining event occurs
at most once the independent bottom-up rule (AND = product,
OR = 1 - product of complements) applies.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from causalsafety.metrics import MetricValue, _ratio
from causalsafety.network import (
    CausalNetwork,
    Cpt,
    SCHEMA_VERSION,
    SchemaError,
    Variable,
    Violation,
    _require,
)

AND = "and"
OR = "or"

# State labels used when a fault tree is converted to a causal network.
OCCURS = "occurs"
ABSENT = "absent"


class InvalidFaultTreeError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid fault tree: " + "; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class BasicEvent:
    name: str
    probability: float


@dataclass(frozen=True)
class Gate:
    name: str
    kind: str  # AND | OR
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class FaultTree:
    events: tuple[BasicEvent, ...]
    gates: tuple[Gate, ...]
    top: str

    @cached_property
    def _events_by_name(self) -> dict[str, BasicEvent]:
        return {e.name: e for e in self.events}

    @cached_property
    def _gates_by_name(self) -> dict[str, Gate]:
        return {g.name: g for g in self.gates}

    def is_gate(self, name: str) -> bool:
        return name in self._gates_by_name

    def probability(self, event_name: str) -> float:
        return self._events_by_name[event_name].probability


def validate_fault_tree(tree: FaultTree) -> list[Violation]:
    out: list[Violation] = []
    names: set[str] = set()
    for e in tree.events:
        if not e.name:
            out.append(Violation(e.name, "event name must be nonempty"))
        if e.name in names:
            out.append(Violation(e.name, "duplicate name"))
        names.add(e.name)
        if not (0.0 <= e.probability <= 1.0) or not math.isfinite(e.probability):
            out.append(Violation(e.name, "probability must lie in [0, 1]",
                                 f"{e.probability!r}"))
    for g in tree.gates:
        if not g.name:
            out.append(Violation(g.name, "gate name must be nonempty"))
        if g.name in names:
            out.append(Violation(g.name, "duplicate name"))
        names.add(g.name)
        if g.kind not in (AND, OR):
            out.append(Violation(g.name, "gate kind must be 'and' or 'or'", g.kind))
        if len(g.inputs) < 2:
            out.append(Violation(g.name, "gates need at least two inputs",
                                 f"got {len(g.inputs)}"))
        for inp in g.inputs:
            if inp not in tree._events_by_name and inp not in tree._gates_by_name:
                out.append(Violation(g.name, "unresolvable input", inp))
    if tree.top not in tree._gates_by_name:
        out.append(Violation(tree.top, "top must name a gate"))

    # cycle check over the gate graph
    state: dict[str, int] = {}

    def visit(name: str) -> bool:
        if not tree.is_gate(name):
            return False
        mark = state.get(name, 0)
        if mark == 1:
            return True
        if mark == 2:
            return False
        state[name] = 1
        hit = any(visit(i) for i in tree._gates_by_name[name].inputs)
        state[name] = 2
        return hit

    for g in tree.gates:
        if visit(g.name):
            out.append(Violation(g.name, "gate graph must be acyclic"))
            break
    return out


def parse_fault_tree(text: str) -> FaultTree:
    """Parse the fault-tree JSON document form."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    schema = _require(doc, "schema", int, "document")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {schema}, expected {SCHEMA_VERSION}")
    events = []
    for i, re_ in enumerate(_require(doc, "events", list, "document")):
        if not isinstance(re_, dict):
            raise SchemaError(f"events[{i}] must be an object")
        name = _require(re_, "name", str, f"events[{i}]")
        p = re_.get("p")
        if not isinstance(p, (int, float)):
            raise SchemaError(f"events[{i}]: 'p' must be a number")
        events.append(BasicEvent(name, float(p)))
    gates = []
    for i, rg in enumerate(_require(doc, "gates", list, "document")):
        if not isinstance(rg, dict):
            raise SchemaError(f"gates[{i}] must be an object")
        name = _require(rg, "name", str, f"gates[{i}]")
        kind = _require(rg, "kind", str, f"gates[{i}]")
        inputs = _require(rg, "inputs", list, f"gates[{i}]")
        if not all(isinstance(x, str) for x in inputs):
            raise SchemaError(f"gates[{i}]: inputs must be strings")
        gates.append(Gate(name, kind, tuple(inputs)))
    top = _require(doc, "top", str, "document")
    tree = FaultTree(tuple(events), tuple(gates), top)
    violations = validate_fault_tree(tree)
    if violations:
        raise InvalidFaultTreeError(violations)
    return tree


def serialize_fault_tree(tree: FaultTree, metadata: Mapping[str, str] | None = None) -> str:
    doc = {
        "schema": SCHEMA_VERSION,
        "events": [{"name": e.name, "p": e.probability} for e in tree.events],
        "gates": [{"name": g.name, "kind": g.kind, "inputs": list(g.inputs)} for g in tree.gates],
        "top": tree.top,
        "metadata": dict(metadata or {}),
    }
    return json.dumps(doc, indent=2)


def load_fault_tree(path) -> FaultTree:
    with open(path, encoding="utf-8") as f:
        return parse_fault_tree(f.read())


def _occurrence_counts(tree: FaultTree) -> dict[str, int]:
    """How often each basic event appears in the unfolded tree under the top."""
    mult: dict[str, int] = {tree.top: 1}
    order: list[str] = []
    seen: set[str] = set()

    def topo(name: str) -> None:
        if name in seen or not tree.is_gate(name):
            return
        seen.add(name)
        for i in tree._gates_by_name[name].inputs:
            topo(i)
        order.append(name)

    topo(tree.top)
    counts: dict[str, int] = {e.name: 0 for e in tree.events}
    for gate_name in reversed(order):
        m = mult.get(gate_name, 0)
        if m == 0:
            continue
        for inp in tree._gates_by_name[gate_name].inputs:
            if tree.is_gate(inp):
                mult[inp] = mult.get(inp, 0) + m
            else:
                counts[inp] += m
    return counts


def _bottom_up(tree: FaultTree, pinned: Mapping[str, float]) -> float:
    cache: dict[str, float] = {}

    def value(name: str) -> float:
        if name in pinned:
            return pinned[name]
        if not tree.is_gate(name):
            return tree.probability(name)
        if name in cache:
            return cache[name]
        gate = tree._gates_by_name[name]
        if gate.kind == AND:
            p = math.prod(value(i) for i in gate.inputs)
        else:
            p = 1.0 - math.prod(1.0 - value(i) for i in gate.inputs)
        cache[name] = p
        return p

    return value(tree.top)


def _shannon(tree: FaultTree, pinned: dict[str, float], shared: list[str]) -> float:
    if not shared:
        return _bottom_up(tree, pinned)
    event = shared[0]
    rest = shared[1:]
    p = tree.probability(event)
    high = _shannon(tree, {**pinned, event: 1.0}, rest)
    low = _shannon(tree, {**pinned, event: 0.0}, rest)
    return p * high + (1.0 - p) * low


def top_event_probability(tree: FaultTree, pinned: Mapping[str, float] | None = None) -> float:
    """Exact top-event probability, optionally with events pinned to 0/1.

    Events occurring more than once under the top are Shannon-expanded
    (lexicographic order); the remainder is evaluated bottom-up, which is
    exact because the surviving events are independent and unrepeated.
    """
    pinned = dict(pinned or {})
    counts = _occurrence_counts(tree)
    shared = sorted(e for e, c in counts.items() if c > 1 and e not in pinned)
    return _shannon(tree, pinned, shared)


def minimal_cut_sets(tree: FaultTree) -> frozenset[frozenset[str]]:
    """All minimal sets of basic events that force the top event
    (top-down gate expansion with absorption)."""
    work: list[frozenset[str]] = [frozenset({tree.top})]
    seen: set[frozenset[str]] = set()
    complete: set[frozenset[str]] = set()
    while work:
        product = work.pop()
        if product in seen:
            continue
        seen.add(product)
        gates_here = sorted(n for n in product if tree.is_gate(n))
        if not gates_here:
            complete.add(product)
            continue
        gate = tree._gates_by_name[gates_here[0]]
        rest = product - {gate.name}
        if gate.kind == AND:
            work.append(rest | set(gate.inputs))
        else:
            work.extend(rest | {i} for i in gate.inputs)
    minimal = {s for s in complete
               if not any(t < s for t in complete)}
    return frozenset(minimal)


def birnbaum_fta(tree: FaultTree, event: str) -> MetricValue:
    """Exact Birnbaum importance: P(T | event occurs) - P(T | event absent)."""
    if not any(e.name == event for e in tree.events):
        raise KeyError(f"no basic event named {event!r}")
    p_high = top_event_probability(tree, {event: 1.0})
    p_low = top_event_probability(tree, {event: 0.0})
    return MetricValue(
        "BB", event, "occurs vs absent", p_high - p_low,
        queries=((f"P(top|{event}=1)", p_high), (f"P(top|{event}=0)", p_low)))


def rrw_fta(tree: FaultTree, event: str) -> MetricValue:
    """Risk reduction worth: P(T) / P(T | event absent); +infinity when the
    event sits in every minimal cut set."""
    if not any(e.name == event for e in tree.events):
        raise KeyError(f"no basic event named {event!r}")
    baseline = top_event_probability(tree)
    p_low = top_event_probability(tree, {event: 0.0})
    return MetricValue(
        "RRW", event, "absent", _ratio(baseline, p_low),
        numerator=baseline, denominator=p_low,
        queries=(("P(top)", baseline), (f"P(top|{event}=0)", p_low)))


def fault_tree_to_cbn(tree: FaultTree) -> CausalNetwork:
    """Structural bridge: events become parentless binary variables, gates
    become deterministic AND/OR truth tables; the top variable's marginal
    equals the fault tree's top-event probability."""
    variables = []
    cpts = []
    for e in tree.events:
        variables.append(Variable(e.name, (OCCURS, ABSENT)))
        cpts.append(Cpt(e.name, (), ((e.probability, 1.0 - e.probability),)))
    for g in tree.gates:
        variables.append(Variable(g.name, (OCCURS, ABSENT)))
        rows = []
        for combo in _binary_combinations(len(g.inputs)):
            occurs = all(c == 0 for c in combo) if g.kind == AND \
                else any(c == 0 for c in combo)
            rows.append((1.0, 0.0) if occurs else (0.0, 1.0))
        cpts.append(Cpt(g.name, tuple(g.inputs), tuple(rows)))
    return CausalNetwork(tuple(variables), tuple(cpts))


def _binary_combinations(k: int) -> Iterable[tuple[int, ...]]:
    # last input varies fastest, matching the CPT row convention
    for i in range(2 ** k):
        yield tuple((i >> (k - 1 - j)) & 1 for j in range(k))
