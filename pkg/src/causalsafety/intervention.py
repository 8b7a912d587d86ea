"""Graph mutilation: hard, stochastic, multiple and path-specific interventions.

An intervention severs a variable's incoming edges and replaces its CPT by a
parentless one (a point mass for a hard do, a given distribution for a
stochastic do).  Interventions are passed as a mapping from variable name to
either a state label or a Distribution over that variable's states.

Path-specific queries split the source variable into an active copy and a
reference copy and reroute its outgoing edges; valid only when the requested
path set is identifiable (no excluded source-to-sink path shares its first
edge with an included one, assuming no latent confounding).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from causalsafety.network import CausalNetwork, Cpt, Variable
from causalsafety.inference import Distribution, marginal

InterventionValue = Union[str, Distribution]


class UnidentifiablePathError(ValueError):
    """The path set cannot be answered exactly by first-edge splitting."""


def _replacement_row(network: CausalNetwork, name: str, value: InterventionValue) -> tuple[float, ...]:
    var = network.variable(name)
    if isinstance(value, Distribution):
        if value.variable != name:
            raise ValueError(f"distribution is over {value.variable!r}, not {name!r}")
        if value.states != var.states:
            raise ValueError(f"distribution states {value.states} do not match "
                             f"{name!r} states {var.states}")
        return value.probabilities
    idx = var.index(value)
    return tuple(1.0 if i == idx else 0.0 for i in range(var.cardinality))


def mutilate(network: CausalNetwork, interventions: Mapping[str, InterventionValue]) -> CausalNetwork:
    """Replace each intervened variable's CPT by a parentless one."""
    out = network
    for name, value in interventions.items():
        out = out.replace_cpt(Cpt(name, (), (_replacement_row(network, name, value),)))
    return out


def interventional_marginal(network: CausalNetwork, target: str,
                            interventions: Mapping[str, InterventionValue],
                            evidence: Mapping[str, str] | None = None) -> Distribution:
    """P(target | do(interventions), evidence) via truncated factorization."""
    if target in interventions:
        raise ValueError(f"target {target!r} is intervened on")
    return marginal(mutilate(network, interventions), target, evidence)


def negated_state_distribution(network: CausalNetwork, variable: str,
                               excluded_state: str) -> Distribution:
    """The observational marginal restricted to states != excluded, renormalized.

    This is the stochastic intervention realizing do(X = not-x) for the
    dichotomic reading of a categorical variable.
    """
    var = network.variable(variable)
    idx = var.index(excluded_state)
    obs = marginal(network, variable)
    rest = [0.0 if i == idx else p for i, p in enumerate(obs.probabilities)]
    total = sum(rest)
    if total <= 0.0:
        raise ValueError(f"all probability mass of {variable!r} sits on {excluded_state!r}")
    probs = [p / total for p in rest]
    probs[max(range(len(probs)), key=probs.__getitem__)] += 1.0 - sum(probs)
    return Distribution(variable, var.states, tuple(probs))


@dataclass(frozen=True)
class CausalPath:
    """A directed path, stored as its ordered node sequence."""

    nodes: tuple[str, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"path revisits a node: {'->'.join(self.nodes)}")

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))

    @property
    def first_edge(self) -> tuple[str, str]:
        return (self.nodes[0], self.nodes[1])

    def __str__(self) -> str:
        return "->".join(self.nodes)

    @classmethod
    def parse(cls, text: str) -> "CausalPath":
        nodes = tuple(part.strip() for part in text.split("->"))
        if any(not n for n in nodes):
            raise ValueError(f"malformed path {text!r}")
        return cls(nodes)


@dataclass(frozen=True)
class PathSet:
    """A set of directed causal paths sharing one source and one sink."""

    source: str
    sink: str
    paths: tuple[CausalPath, ...]

    def __post_init__(self):
        for p in self.paths:
            if p.nodes[0] != self.source or p.nodes[-1] != self.sink:
                raise ValueError(f"path {p} does not run {self.source}->...->{self.sink}")
        if len(set(self.paths)) != len(self.paths):
            raise ValueError("duplicate path in path set")

    def first_edges(self) -> frozenset[tuple[str, str]]:
        return frozenset(p.first_edge for p in self.paths)

    def __str__(self) -> str:
        return "; ".join(str(p) for p in self.paths)

    @classmethod
    def parse(cls, text: str, source: str | None = None, sink: str | None = None) -> "PathSet":
        """Parse the textual form `A->B->C; A->D->C`.

        With no paths given, source and sink must be supplied (the empty
        path set is a valid scope: it means "no paths carry the effect").
        """
        chunks = [c.strip() for c in text.split(";") if c.strip()]
        paths = tuple(CausalPath.parse(c) for c in chunks)
        if not paths:
            if source is None or sink is None:
                raise ValueError("empty path set needs explicit source and sink")
            return cls(source, sink, ())
        return cls(source or paths[0].nodes[0], sink or paths[0].nodes[-1], paths)

    def validate_against(self, network: CausalNetwork) -> None:
        edges = set(network.edges())
        for p in self.paths:
            for e in p.edges:
                if e not in edges:
                    raise ValueError(f"edge {e[0]}->{e[1]} of path {p} not in network")


def all_causal_paths(network: CausalNetwork, source: str, sink: str) -> tuple[CausalPath, ...]:
    """Every directed path from source to sink, in deterministic order."""
    network.variable(source)
    network.variable(sink)
    found: list[CausalPath] = []

    def walk(node: str, trail: list[str]) -> None:
        if node == sink:
            found.append(CausalPath(tuple(trail)))
            return
        for child in sorted(network.children(node)):
            if child not in trail:
                walk(child, trail + [child])

    walk(source, [source])
    return tuple(found)


def check_path_identifiability(network: CausalNetwork, pathset: PathSet) -> tuple[bool, list[str]]:
    """Sufficient condition for exact path-specific effects on a DAG without
    latent confounding: no excluded source-to-sink causal path may start with
    the same edge as an included one."""
    pathset.validate_against(network)
    everything = all_causal_paths(network, pathset.source, pathset.sink)
    included = set(pathset.paths)
    for p in pathset.paths:
        if p not in everything:
            raise ValueError(f"{p} is not a causal path from "
                             f"{pathset.source} to {pathset.sink}")
    chosen_first = pathset.first_edges()
    diagnostics = []
    for p in everything:
        if p not in included and p.first_edge in chosen_first:
            diagnostics.append(
                f"excluded path {p} shares first edge "
                f"{p.first_edge[0]}->{p.first_edge[1]} with the path set")
    return (not diagnostics), diagnostics


def _active_copy_name(network: CausalNetwork, source: str) -> str:
    name = f"{source}_active"
    taken = set(network.names)
    while name in taken:
        name += "_"
    return name


def split_for_paths(network: CausalNetwork, pathset: PathSet, active_state: str,
                    reference: InterventionValue) -> CausalNetwork:
    """Split the source into an active copy (point mass on active_state) and a
    reference copy (hard state or stochastic distribution).

    Each outgoing edge of the source is rerouted to the active copy iff it is
    the first edge of some path in the set; other children keep reading the
    reference copy.  The reference copy keeps the source's name, so queries
    about other variables are unaffected.
    """
    ok, diagnostics = check_path_identifiability(network, pathset)
    if not ok:
        raise UnidentifiablePathError("; ".join(diagnostics))
    source = pathset.source
    var = network.variable(source)
    var.index(active_state)

    active_name = _active_copy_name(network, source)
    active_row = tuple(1.0 if s == active_state else 0.0 for s in var.states)
    reference_row = _replacement_row(network, source, reference)

    routed = {child for (_, child) in pathset.first_edges()}
    variables = network.variables + (Variable(active_name, var.states),)
    cpts: list[Cpt] = []
    for cpt in network.cpts:
        if cpt.child == source:
            cpts.append(Cpt(source, (), (reference_row,)))
        elif cpt.child in routed and source in cpt.parents:
            parents = tuple(active_name if p == source else p for p in cpt.parents)
            cpts.append(Cpt(cpt.child, parents, cpt.rows))
        else:
            cpts.append(cpt)
    cpts.append(Cpt(active_name, (), (active_row,)))
    return CausalNetwork(variables, tuple(cpts))


def path_specific_marginal(network: CausalNetwork, target: str, pathset: PathSet,
                           active_state: str, reference: InterventionValue) -> Distribution:
    """P(target | do over the path set only): marginal in the split network."""
    return marginal(split_for_paths(network, pathset, active_state, reference), target)
