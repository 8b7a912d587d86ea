"""Exact and sampling-based inference over causal networks.

`marginal` is the production path (variable elimination, min-fill ordering);
`enumerate_marginal` is the brute-force oracle kept deliberately independent
of it; `forward_sample` provides the Monte Carlo cross-check and training
data for `fit_cpts`.
"""
from __future__ import annotations

import csv
import io
import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from causalsafety.network import CausalNetwork, Cpt, topological_order

# Pinned random source: NumPy PCG64 via default_rng, so sample sets are
# reproducible across machines for a fixed (network, n, seed).
RNG_ALGORITHM = "numpy-pcg64"


class ContradictoryEvidenceError(ValueError):
    """The evidence assignment has probability zero under the network."""


@dataclass(frozen=True)
class Distribution:
    """A distribution over one variable's states."""

    variable: str
    states: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.states) != len(self.probabilities):
            raise ValueError(f"{self.variable}: {len(self.states)} states but "
                             f"{len(self.probabilities)} probabilities")
        if any(p < 0 for p in self.probabilities):
            raise ValueError(f"{self.variable}: negative probability")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError(f"{self.variable}: probabilities sum to {sum(self.probabilities)!r}")

    def p(self, state: str) -> float:
        try:
            return self.probabilities[self.states.index(state)]
        except ValueError:
            raise ValueError(f"unknown state {state!r} for {self.variable!r}") from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, self.probabilities))


@dataclass
class Factor:
    """Dense nonnegative table over an ordered variable scope."""

    scope: tuple[str, ...]
    values: np.ndarray

    def select(self, var: str, index: int) -> "Factor":
        axis = self.scope.index(var)
        scope = self.scope[:axis] + self.scope[axis + 1:]
        return Factor(scope, np.take(self.values, index, axis=axis))

    def sum_out(self, var: str) -> "Factor":
        axis = self.scope.index(var)
        scope = self.scope[:axis] + self.scope[axis + 1:]
        return Factor(scope, self.values.sum(axis=axis))


def _product(a: Factor, b: Factor) -> Factor:
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    a_vals = a.values.reshape(a.values.shape + (1,) * (len(scope) - len(a.scope)))
    order = sorted(range(len(b.scope)), key=lambda i: scope.index(b.scope[i]))
    b_vals = np.transpose(b.values, order)
    # insert singleton axes for scope variables missing from b
    b_shape = []
    j = 0
    permuted_scope = [b.scope[i] for i in order]
    for v in scope:
        if j < len(permuted_scope) and permuted_scope[j] == v:
            b_shape.append(b_vals.shape[j])
            j += 1
        else:
            b_shape.append(1)
    return Factor(scope, a_vals * b_vals.reshape(b_shape))


def _cpt_factor(network: CausalNetwork, cpt: Cpt) -> Factor:
    scope = cpt.parents + (cpt.child,)
    shape = tuple(network.variable(v).cardinality for v in scope)
    return Factor(scope, cpt.table.reshape(shape))


def _check_evidence(network: CausalNetwork, evidence: Mapping[str, str]) -> dict[str, int]:
    out = {}
    for var, state in evidence.items():
        out[var] = network.variable(var).index(state)
    return out


def _min_fill_order(scopes: list[tuple[str, ...]], to_eliminate: set[str]) -> list[str]:
    """Greedy min-fill elimination order with lexicographic tie-breaking.

    Fully deterministic (sorted iteration everywhere) so that repeated runs
    produce bit-identical results regardless of hash randomization.
    """
    neighbors: dict[str, set[str]] = {}

    def connect(a: str, b: str) -> None:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)

    for scope in scopes:
        for a, b in itertools.combinations(scope, 2):
            connect(a, b)
    for v in to_eliminate:
        neighbors.setdefault(v, set())

    order = []
    remaining = set(to_eliminate)
    while remaining:
        def fill_cost(v: str) -> int:
            adj = sorted(neighbors[v])
            return sum(1 for a, b in itertools.combinations(adj, 2)
                       if b not in neighbors[a])

        best = min(sorted(remaining), key=fill_cost)
        order.append(best)
        adj = sorted(neighbors[best])
        for a, b in itertools.combinations(adj, 2):
            connect(a, b)
        for u in adj:
            neighbors[u].discard(best)
        del neighbors[best]
        remaining.discard(best)
    return order


def _eliminate(network: CausalNetwork, target: str, evidence: dict[str, str],
               extra_factors: list[Factor],
               elimination_order: Sequence[str] | None = None) -> np.ndarray:
    """Sum-product elimination of everything but the target; returns the
    unnormalized vector over the target's states."""
    if target in evidence:
        raise ValueError(f"target {target!r} also appears in evidence")
    ev_idx = _check_evidence(network, evidence)
    network.variable(target)

    factors = list(extra_factors)
    for cpt in network.cpts:
        f = _cpt_factor(network, cpt)
        for var, idx in ev_idx.items():
            if var in f.scope:
                f = f.select(var, idx)
        factors.append(f)

    to_eliminate = set(network.names) - {target} - set(evidence)
    if elimination_order is None:
        order = _min_fill_order([f.scope for f in factors], to_eliminate)
    else:
        if set(elimination_order) != to_eliminate:
            raise ValueError("elimination_order must cover exactly the non-target, "
                             "non-evidence variables")
        order = list(elimination_order)

    for var in order:
        touching = [f for f in factors if var in f.scope]
        rest = [f for f in factors if var not in f.scope]
        if not touching:
            continue
        combined = touching[0]
        for f in touching[1:]:
            combined = _product(combined, f)
        factors = rest + [combined.sum_out(var)]

    result = factors[0]
    for f in factors[1:]:
        result = _product(result, f)
    if result.scope != (target,):
        raise AssertionError(f"elimination left scope {result.scope!r}")
    return np.asarray(result.values, dtype=float)


def marginal(network: CausalNetwork, target: str,
             evidence: Mapping[str, str] | None = None,
             elimination_order: Sequence[str] | None = None) -> Distribution:
    """Exact P(target | evidence) by variable elimination.

    An explicit elimination_order (a permutation of the variables to
    eliminate) overrides the min-fill heuristic; the result is identical
    either way, which the test suite exercises.
    """
    evidence = dict(evidence or {})
    vec = _eliminate(network, target, evidence, [], elimination_order)
    mass = float(vec.sum())
    if mass <= 0.0:
        raise ContradictoryEvidenceError(f"evidence {evidence!r} has probability zero")
    return Distribution(target, network.variable(target).states,
                        tuple(float(x) for x in vec / mass))


def joint_probability(network: CausalNetwork, assignment: Mapping[str, str]) -> float:
    """Probability of one full assignment: the product of its CPT entries."""
    missing = set(network.names) - set(assignment)
    if missing:
        raise ValueError(f"assignment misses variables: {', '.join(sorted(missing))}")
    p = 1.0
    for cpt in network.cpts:
        row = 0
        for parent in cpt.parents:
            row = row * network.variable(parent).cardinality \
                + network.variable(parent).index(assignment[parent])
        p *= cpt.table[row, network.variable(cpt.child).index(assignment[cpt.child])]
    return float(p)


def enumerate_marginal(network: CausalNetwork, target: str,
                       evidence: Mapping[str, str] | None = None) -> Distribution:
    """Brute-force P(target | evidence) by summing the full joint.

    Oracle for `marginal`; only sensible for small state spaces.
    """
    evidence = dict(evidence or {})
    if target in evidence:
        raise ValueError(f"target {target!r} also appears in evidence")
    _check_evidence(network, evidence)
    var = network.variable(target)
    names = list(network.names)
    acc = np.zeros(var.cardinality)
    state_lists = [network.variable(n).states for n in names]
    for combo in itertools.product(*state_lists):
        a = dict(zip(names, combo))
        if any(a[k] != v for k, v in evidence.items()):
            continue
        acc[var.index(a[target])] += joint_probability(network, a)
    mass = float(acc.sum())
    if mass <= 0.0:
        raise ContradictoryEvidenceError(f"evidence {evidence!r} has probability zero")
    return Distribution(target, var.states, tuple(float(x) for x in acc / mass))


def restricted_marginal(network: CausalNetwork, target: str, variable: str,
                        excluded_state: str,
                        evidence: Mapping[str, str] | None = None) -> Distribution:
    """P(target | variable != excluded_state, evidence).

    Event conditioning on the complement of one state, realized as an
    indicator likelihood on that variable inside the elimination run.
    """
    evidence = dict(evidence or {})
    if variable in evidence:
        raise ValueError(f"{variable!r} cannot both carry evidence and be restricted")
    var = network.variable(variable)
    mask = np.ones(var.cardinality)
    mask[var.index(excluded_state)] = 0.0
    vec = _eliminate(network, target, evidence, [Factor((variable,), mask)])
    mass = float(vec.sum())
    if mass <= 0.0:
        raise ContradictoryEvidenceError(
            f"conditioning on {variable}!={excluded_state} has probability zero")
    return Distribution(target, network.variable(target).states,
                        tuple(float(x) for x in vec / mass))


@dataclass(frozen=True)
class SampleSet:
    """Complete assignments drawn from a network, stored as state codes."""

    columns: tuple[str, ...]
    codes: np.ndarray  # shape (n, len(columns)), dtype int
    states: tuple[tuple[str, ...], ...]  # per column
    seed: int | None

    def __len__(self) -> int:
        return int(self.codes.shape[0])

    def labels(self, row: int) -> tuple[str, ...]:
        return tuple(self.states[j][c] for j, c in enumerate(self.codes[row]))

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.columns.index(name)]

    def frequency(self, variable: str, state: str) -> float:
        j = self.columns.index(variable)
        code = self.states[j].index(state)
        return float(np.mean(self.codes[:, j] == code))

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        f = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            writer = csv.writer(f)
            writer.writerow(self.columns)
            for i in range(len(self)):
                writer.writerow(self.labels(i))
        finally:
            if own:
                f.close()

    @classmethod
    def from_csv(cls, path_or_file, network: CausalNetwork, seed: int | None = None) -> "SampleSet":
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        f = open(path_or_file, newline="", encoding="utf-8") if own else path_or_file
        try:
            reader = csv.reader(f)
            header = next(reader)
            columns = tuple(header)
            states = tuple(network.variable(c).states for c in columns)
            lookup = [{s: i for i, s in enumerate(st)} for st in states]
            rows = []
            for line, rec in enumerate(reader, start=2):
                if len(rec) != len(columns):
                    raise ValueError(f"line {line}: expected {len(columns)} cells, got {len(rec)}")
                try:
                    rows.append([lookup[j][cell] for j, cell in enumerate(rec)])
                except KeyError as exc:
                    raise ValueError(f"line {line}: unknown state {exc.args[0]!r}") from None
            codes = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(columns))
            return cls(columns, codes, states, seed)
        finally:
            if own:
                f.close()


def forward_sample(network: CausalNetwork, n: int, seed: int) -> SampleSet:
    """n i.i.d. ancestral samples; deterministic for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    order = topological_order(network)
    col_of = {name: j for j, name in enumerate(order)}
    codes = np.zeros((n, len(order)), dtype=np.int64)
    for name in order:
        cpt = network.cpt(name)
        cdf = np.cumsum(cpt.table, axis=1)
        row_idx = np.zeros(n, dtype=np.int64)
        for parent in cpt.parents:
            row_idx = row_idx * network.variable(parent).cardinality + codes[:, col_of[parent]]
        u = rng.random(n)
        codes[:, col_of[name]] = (u[:, None] > cdf[row_idx]).sum(axis=1)
    states = tuple(network.variable(name).states for name in order)
    codes.setflags(write=False)
    return SampleSet(tuple(order), codes, states, seed)


class FitWarning(UserWarning):
    """Raised (as a warning) for parent configurations with no data support."""


def fit_cpts(structure: CausalNetwork, data: SampleSet,
             laplace_alpha: float = 1.0) -> CausalNetwork:
    """Maximum-likelihood CPT estimation with Laplace smoothing.

    Each row becomes (count + alpha) / (row total + alpha * n_states).  With
    alpha = 0, parent configurations that never occur in the data leave the
    row undefined; those rows are reported via FitWarning and set uniform.
    """
    if laplace_alpha < 0:
        raise ValueError("laplace_alpha must be nonnegative")
    missing = set(structure.names) - set(data.columns)
    if missing:
        raise ValueError(f"data misses variables: {', '.join(sorted(missing))}")
    col_of = {name: data.columns.index(name) for name in structure.names}
    for name in structure.names:
        want = structure.variable(name).states
        got = data.states[col_of[name]]
        if want != got:
            raise ValueError(f"{name}: data states {got} do not match structure {want}")

    new_cpts = []
    unsupported: list[str] = []
    for cpt in structure.cpts:
        child = structure.variable(cpt.child)
        k = child.cardinality
        n_rows = 1
        for p in cpt.parents:
            n_rows *= structure.variable(p).cardinality
        cell = np.zeros(len(data), dtype=np.int64)
        for p in cpt.parents:
            cell = cell * structure.variable(p).cardinality + data.codes[:, col_of[p]]
        cell = cell * k + data.codes[:, col_of[cpt.child]]
        counts = np.bincount(cell, minlength=n_rows * k).astype(float).reshape(n_rows, k)
        totals = counts.sum(axis=1, keepdims=True)
        smoothed = counts + laplace_alpha
        denom = totals + laplace_alpha * k
        with np.errstate(invalid="ignore", divide="ignore"):
            table = np.where(denom > 0, smoothed / np.where(denom > 0, denom, 1.0), np.nan)
        for r in range(n_rows):
            if denom[r, 0] == 0:
                table[r] = 1.0 / k
                unsupported.append(f"{cpt.child} row {r}")
        rows = tuple(tuple(float(x) for x in row) for row in table)
        new_cpts.append(Cpt(cpt.child, cpt.parents, rows))
    if unsupported:
        warnings.warn(
            f"no data support, rows set uniform: {', '.join(unsupported)}", FitWarning)
    return CausalNetwork(structure.variables, tuple(new_cpts))


def samples_to_csv_text(samples: SampleSet) -> str:
    buf = io.StringIO()
    samples.to_csv(buf)
    return buf.getvalue()
