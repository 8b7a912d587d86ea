"""Causal Bayesian network engine for safety analysis.

Exact inference, causal interventions (hard, stochastic, multiple,
path-specific), a classical fault-tree counterpart, and the causal safety
importance metrics built on top of them.
"""
from causalsafety.network import (
    CausalNetwork,
    Cpt,
    CycleError,
    InvalidNetworkError,
    NetworkDocument,
    SchemaError,
    Variable,
    Violation,
    load_network,
    parse_document,
    parse_network,
    serialize_network,
    topological_order,
    validate,
)
from causalsafety.inference import (
    ContradictoryEvidenceError,
    Distribution,
    Factor,
    FitWarning,
    SampleSet,
    enumerate_marginal,
    fit_cpts,
    forward_sample,
    joint_probability,
    marginal,
    restricted_marginal,
)
from causalsafety.intervention import (
    CausalPath,
    PathSet,
    UnidentifiablePathError,
    all_causal_paths,
    check_path_identifiability,
    interventional_marginal,
    mutilate,
    negated_state_distribution,
    path_specific_marginal,
    split_for_paths,
)
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
from causalsafety.faulttree import (
    BasicEvent,
    FaultTree,
    Gate,
    InvalidFaultTreeError,
    birnbaum_fta,
    fault_tree_to_cbn,
    load_fault_tree,
    minimal_cut_sets,
    parse_fault_tree,
    rrw_fta,
    serialize_fault_tree,
    top_event_probability,
    validate_fault_tree,
)
from causalsafety.analysis import (
    AnalysisConfig,
    ConfigError,
    MetricReport,
    VariableRoles,
    load_analysis_config,
    parse_analysis_config,
    pairwise_grid,
    run_metric_suite,
    tornado_rows,
)

__version__ = "0.1.0"
