"""Discrete causal network data model, JSON serialization and validation.

A network is a DAG of categorical variables, each carrying one conditional
probability table (CPT).  Row ordering convention: one row per combination
of parent states, with the *last listed parent varying fastest*; one column
per child state.  Networks are immutable after construction and safe to
share across threads.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1

# Row sums further than this from 1.0 are rejected; closer ones are
# silently renormalized on load.
NORMALIZATION_TOLERANCE = 1e-9


class SchemaError(ValueError):
    """Malformed document: bad JSON, missing keys, wrong types or schema version."""


class InvalidNetworkError(ValueError):
    """A structurally parseable network that violates the model invariants."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network: {lines}")


class CycleError(ValueError):
    """The directed graph implied by the CPT parent lists contains a cycle."""


@dataclass(frozen=True)
class Violation:
    """One broken invariant, naming the offending variable and the rule."""

    variable: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.variable}: {self.rule}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown state {state!r} for variable {self.name!r}") from None

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Cpt:
    """One conditional probability table: P(child | parents)."""

    child: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    @cached_property
    def table(self) -> np.ndarray:
        arr = np.asarray(self.rows, dtype=float)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class CausalNetwork:
    """Immutable DAG of categorical variables with one CPT per variable."""

    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...]

    @cached_property
    def _variables_by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def _cpts_by_child(self) -> dict[str, Cpt]:
        return {c.child: c for c in self.cpts}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        try:
            return self._variables_by_name[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def cpt(self, name: str) -> Cpt:
        try:
            return self._cpts_by_child[name]
        except KeyError:
            raise KeyError(f"no CPT for variable {name!r}") from None

    def states(self, name: str) -> tuple[str, ...]:
        return self.variable(name).states

    def parents(self, name: str) -> tuple[str, ...]:
        return self.cpt(name).parents

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {v.name: [] for v in self.variables}
        for c in self.cpts:
            for p in c.parents:
                if p in kids:
                    kids[p].append(c.child)
        return {k: tuple(v) for k, v in kids.items()}

    def children(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self._children.get(name, ())

    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple((p, c.child) for c in self.cpts for p in c.parents)

    def roots(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not self.cpt(v.name).parents)

    def descendants(self, name: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(self.children(name))
        while stack:
            node = stack.pop()
            if node not in seen:
                seen.add(node)
                stack.extend(self._children.get(node, ()))
        return frozenset(seen)

    def replace_cpt(self, new_cpt: Cpt) -> "CausalNetwork":
        """A copy of this network with one CPT swapped out."""
        self.variable(new_cpt.child)
        cpts = tuple(new_cpt if c.child == new_cpt.child else c for c in self.cpts)
        return CausalNetwork(self.variables, cpts)


@dataclass(frozen=True)
class NetworkDocument:
    schema_version: int
    network: CausalNetwork
    metadata: Mapping[str, str] = field(default_factory=dict)


def validate(network: CausalNetwork) -> list[Violation]:
    """Check every model invariant; an empty list means the network is valid.

    Violations are data, not exceptions: callers building ad-hoc networks can
    inspect everything that is wrong in one pass.
    """
    out: list[Violation] = []
    seen_names: set[str] = set()
    for v in network.variables:
        if not v.name:
            out.append(Violation(v.name, "variable name must be nonempty"))
        if v.name in seen_names:
            out.append(Violation(v.name, "duplicate variable name"))
        seen_names.add(v.name)
        if len(v.states) < 2:
            out.append(Violation(v.name, "at least two states required",
                                 f"got {len(v.states)}"))
        if any(not s for s in v.states):
            out.append(Violation(v.name, "state labels must be nonempty"))
        if len(set(v.states)) != len(v.states):
            out.append(Violation(v.name, "duplicate state labels"))

    cpt_children = [c.child for c in network.cpts]
    for name in network.names:
        n = cpt_children.count(name)
        if n == 0:
            out.append(Violation(name, "missing CPT"))
        elif n > 1:
            out.append(Violation(name, "more than one CPT"))
    for c in network.cpts:
        if c.child not in seen_names:
            out.append(Violation(c.child, "CPT for unknown variable"))

    for c in network.cpts:
        if c.child not in network._variables_by_name:
            continue
        child = network.variable(c.child)
        bad_parent = False
        for p in c.parents:
            if p not in network._variables_by_name:
                out.append(Violation(c.child, "parent references unknown variable", p))
                bad_parent = True
        if len(set(c.parents)) != len(c.parents):
            out.append(Violation(c.child, "duplicate parent"))
            bad_parent = True
        if bad_parent:
            continue
        expected_rows = 1
        for p in c.parents:
            expected_rows *= network.variable(p).cardinality
        if len(c.rows) != expected_rows:
            out.append(Violation(c.child, "row count must equal product of parent state counts",
                                 f"expected {expected_rows}, got {len(c.rows)}"))
        for i, row in enumerate(c.rows):
            if len(row) != child.cardinality:
                out.append(Violation(c.child, "row length must equal state count",
                                     f"row {i} has {len(row)} entries"))
                continue
            if any(not np.isfinite(x) or x < 0.0 or x > 1.0 for x in row):
                out.append(Violation(c.child, "probabilities must lie in [0, 1]", f"row {i}"))
                continue
            total = float(sum(row))
            if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
                out.append(Violation(c.child, "row must sum to 1",
                                     f"row {i} sums to {total:.12g}"))

    try:
        topological_order(network)
    except CycleError as exc:
        out.append(Violation(str(exc.args[1]) if len(exc.args) > 1 else "<graph>",
                             "graph must be acyclic", str(exc.args[0])))
    except KeyError:
        pass  # unknown parents already reported above
    return out


def topological_order(network: CausalNetwork) -> list[str]:
    """Parents-before-children ordering, lexicographic among ready nodes."""
    ready: list[str] = []
    pending: dict[str, int] = {}
    for v in network.variables:
        try:
            degree = len(network.cpt(v.name).parents)
        except KeyError:
            degree = 0
        pending[v.name] = degree
        if degree == 0:
            heapq.heappush(ready, v.name)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for child in network._children.get(name, ()):
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != len(network.variables):
        stuck = sorted(n for n, d in pending.items() if d > 0)
        raise CycleError(f"cycle through {', '.join(stuck)}", stuck[0] if stuck else "<graph>")
    return order


# Row sums within this slack of 1.0 are float round-off, not data imprecision;
# such rows are stored verbatim, which keeps renormalization idempotent and
# parse/serialize round-trips exact.
_EXACT_SUM_SLACK = 1e-12


def _normalized_rows(rows: Iterable[Sequence[float]]) -> tuple[tuple[float, ...], ...]:
    out = []
    for row in rows:
        arr = np.asarray(row, dtype=float)
        total = float(arr.sum())
        if abs(total - 1.0) > _EXACT_SUM_SLACK:
            arr = arr / total
        out.append(tuple(float(x) for x in arr))
    return tuple(out)


def _normalized(network: CausalNetwork) -> CausalNetwork:
    cpts = tuple(Cpt(c.child, c.parents, _normalized_rows(c.rows)) for c in network.cpts)
    return CausalNetwork(network.variables, cpts)


def _require(mapping: Mapping, key: str, kind: type, where: str):
    if key not in mapping:
        raise SchemaError(f"{where}: missing key {key!r}")
    value = mapping[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: {key!r} must be a {kind.__name__}")
    return value


def parse_document(text: str) -> NetworkDocument:
    """Parse and validate a serialized network document.

    Raises SchemaError for syntactic problems (position-reported where JSON
    itself is broken) and InvalidNetworkError when the content violates the
    model invariants.  Rows within the normalization tolerance are silently
    renormalized.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    schema = _require(doc, "schema", int, "document")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {schema}, expected {SCHEMA_VERSION}")

    raw_vars = _require(doc, "variables", list, "document")
    variables = []
    for i, rv in enumerate(raw_vars):
        if not isinstance(rv, dict):
            raise SchemaError(f"variables[{i}] must be an object")
        name = _require(rv, "name", str, f"variables[{i}]")
        states = _require(rv, "states", list, f"variables[{i}]")
        if not all(isinstance(s, str) for s in states):
            raise SchemaError(f"variables[{i}]: states must be strings")
        variables.append(Variable(name, tuple(states)))

    raw_cpts = _require(doc, "cpts", list, "document")
    cpts = []
    for i, rc in enumerate(raw_cpts):
        if not isinstance(rc, dict):
            raise SchemaError(f"cpts[{i}] must be an object")
        child = _require(rc, "variable", str, f"cpts[{i}]")
        parents = _require(rc, "parents", list, f"cpts[{i}]")
        if not all(isinstance(p, str) for p in parents):
            raise SchemaError(f"cpts[{i}]: parents must be strings")
        rows = _require(rc, "rows", list, f"cpts[{i}]")
        parsed_rows = []
        for j, row in enumerate(rows):
            if not isinstance(row, list) or not all(isinstance(x, (int, float)) for x in row):
                raise SchemaError(f"cpts[{i}] row {j}: rows must be lists of numbers")
            parsed_rows.append(tuple(float(x) for x in row))
        cpts.append(Cpt(child, tuple(parents), tuple(parsed_rows)))

    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()):
        raise SchemaError("metadata must map strings to strings")

    network = CausalNetwork(tuple(variables), tuple(cpts))
    violations = validate(network)
    if violations:
        raise InvalidNetworkError(violations)
    return NetworkDocument(schema, _normalized(network), dict(metadata))


def parse_network(text: str) -> CausalNetwork:
    """Parse a serialized document and return its validated network."""
    return parse_document(text).network


def serialize_network(network: CausalNetwork, metadata: Mapping[str, str] | None = None) -> str:
    """Serialize to the canonical JSON document form (UTF-8, decimal literals)."""
    doc = {
        "schema": SCHEMA_VERSION,
        "variables": [{"name": v.name, "states": list(v.states)} for v in network.variables],
        "cpts": [{"variable": c.child, "parents": list(c.parents),
                  "rows": [list(r) for r in c.rows]} for c in network.cpts],
        "metadata": dict(metadata or {}),
    }
    return json.dumps(doc, indent=2)


def load_network(path) -> CausalNetwork:
    """Read a network document from a file path."""
    with open(path, encoding="utf-8") as f:
        return parse_network(f.read())
