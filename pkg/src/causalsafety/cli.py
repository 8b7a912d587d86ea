"""Command-line front end.

Model arguments accept a filesystem path or the bare name of a bundled
model (e.g. `perception.cbn.json`).  Exit codes: 0 success, 1 validation or
model error, 2 usage or configuration error, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from causalsafety import models, reproduce
from causalsafety.analysis import (
    AnalysisConfig,
    ConfigError,
    load_analysis_config,
    pairwise_grid,
    run_metric_suite,
    tornado_rows,
)
from causalsafety.faulttree import (
    InvalidFaultTreeError,
    birnbaum_fta,
    fault_tree_to_cbn,
    load_fault_tree,
    minimal_cut_sets,
    rrw_fta,
    top_event_probability,
    validate_fault_tree,
)
from causalsafety.inference import (
    ContradictoryEvidenceError,
    SampleSet,
    fit_cpts,
    forward_sample,
    marginal,
)
from causalsafety.intervention import (
    PathSet,
    UnidentifiablePathError,
    interventional_marginal,
    path_specific_marginal,
)
from causalsafety.metrics import TargetEvent, path_metrics
from causalsafety.network import (
    InvalidNetworkError,
    SchemaError,
    load_network,
    serialize_network,
    validate,
)
from causalsafety.reports import (
    cut_sets_to_json,
    metric_values_to_csv,
    metric_values_to_json,
    report_to_csv,
    report_to_json,
    tornado_to_csv,
    tornado_to_json,
    tornado_to_svg,
)

import json


class UsageError(Exception):
    """Bad flag combinations or malformed flag values (exit code 2)."""


def _resolve_model(path_text: str, base: Path | None = None) -> Path:
    candidates = [Path(path_text)]
    if base is not None:
        candidates.append(base / path_text)
    for p in candidates:
        if p.exists():
            return p
    if path_text in models.ALL_FILES:
        return models.bundled_path(path_text)
    raise FileNotFoundError(f"cannot read model {path_text!r} "
                            f"(not a file, not a bundled model)")


def _parse_assignment(text: str, flag: str) -> tuple[str, str]:
    if "=" not in text:
        raise UsageError(f"{flag} expects VAR=STATE, got {text!r}")
    var, _, state = text.partition("=")
    if not var or not state:
        raise UsageError(f"{flag} expects VAR=STATE, got {text!r}")
    return var, state


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_validate(args) -> int:
    path = _resolve_model(args.model)
    text = path.read_text(encoding="utf-8")
    if args.fault_tree:
        try:
            from causalsafety.faulttree import parse_fault_tree
            tree = parse_fault_tree(text)
        except InvalidFaultTreeError as exc:
            for v in exc.violations:
                print(v)
            return 1
        print(f"OK: {len(tree.events)} basic events, {len(tree.gates)} gates, "
              f"top {tree.top!r}")
        return 0
    try:
        from causalsafety.network import parse_network
        network = parse_network(text)
    except InvalidNetworkError as exc:
        for v in exc.violations:
            print(v)
        return 1
    assert not validate(network)
    print(f"OK: {len(network.variables)} variables, {len(network.edges())} edges")
    return 0


def cmd_query(args) -> int:
    network = load_network(_resolve_model(args.model))
    evidence = dict(_parse_assignment(e, "--evidence") for e in args.evidence)
    do = dict(_parse_assignment(d, "--do") for d in args.do)
    if args.paths:
        if evidence or do:
            raise UsageError("--paths cannot be combined with --evidence/--do")
        if not args.active or not args.ref:
            raise UsageError("--paths requires --active and --ref")
        pathset = PathSet.parse(args.paths)
        dist = path_specific_marginal(network, args.target, pathset, args.active, args.ref)
        heading = (f"P({args.target} | do_pi({pathset.source}=({args.active},{args.ref})), "
                   f"paths {pathset})")
    elif do:
        dist = interventional_marginal(network, args.target, do, evidence)
        parts = [f"do({v}={s})" for v, s in do.items()]
        parts += [f"{v}={s}" for v, s in evidence.items()]
        heading = f"P({args.target} | {', '.join(parts)})"
    else:
        dist = marginal(network, args.target, evidence)
        cond = ", ".join(f"{v}={s}" for v, s in evidence.items())
        heading = f"P({args.target}{' | ' + cond if cond else ''})"
    if args.format == "json":
        print(json.dumps({"query": heading, "distribution": dist.as_dict()}, indent=2))
    else:
        print(heading)
        for state, p in zip(dist.states, dist.probabilities):
            print(f"  {state:12s} {p:.10g}")
    return 0


def _load_config(path_text: str) -> tuple[AnalysisConfig, "object"]:
    config_path = Path(path_text)
    if not config_path.exists() and path_text in models.ALL_FILES:
        config_path = models.bundled_path(path_text)
    if not config_path.exists():
        raise FileNotFoundError(f"cannot read config {path_text!r}")
    config = load_analysis_config(config_path)
    network = load_network(_resolve_model(config.model, base=config_path.parent))
    return config, network


def cmd_metrics(args) -> int:
    config, network = _load_config(args.config)
    report = run_metric_suite(network, config)
    fmt = args.format or config.format
    if fmt == "csv":
        _write_out(report_to_csv(report), args.output)
    else:
        _write_out(report_to_json(report), args.output)
    if report.errors:
        for subject, message in report.errors:
            print(f"error [{subject}]: {message}", file=sys.stderr)
    return 0


def cmd_tornado(args) -> int:
    config, network = _load_config(args.config)
    rows = tornado_rows(network, config)
    fmt = args.format or config.format
    if fmt == "svg":
        _write_out(tornado_to_svg(rows, title=f"P({config.target}) per subject"), args.output)
    elif fmt == "csv":
        _write_out(tornado_to_csv(rows), args.output)
    else:
        _write_out(tornado_to_json(rows), args.output)
    return 0


def cmd_pairwise(args) -> int:
    config, network = _load_config(args.config)
    grid = pairwise_grid(network, config)
    if (args.format or config.format) == "csv":
        _write_out(metric_values_to_csv(grid), args.output)
    else:
        _write_out(json.dumps(metric_values_to_json(grid), indent=2), args.output)
    return 0


def cmd_paths(args) -> int:
    config, network = _load_config(args.config)
    values = []
    for name, text in config.path_sets:
        pathset = PathSet.parse(text)
        reference = config.roles(pathset.source).reference
        for state in network.variable(pathset.source).states:
            values.extend(path_metrics(network, config.target, pathset, state,
                                       reference, label=name))
    if (args.format or config.format) == "csv":
        _write_out(metric_values_to_csv(values), args.output)
    else:
        _write_out(json.dumps(metric_values_to_json(values), indent=2), args.output)
    return 0


def cmd_ft(args) -> int:
    tree = load_fault_tree(_resolve_model(args.tree))
    if args.ft_command == "eval":
        print(f"P(top={tree.top}) = {top_event_probability(tree):.10e}")
        return 0
    if args.ft_command == "cutsets":
        print(cut_sets_to_json(minimal_cut_sets(tree)))
        return 0
    if args.ft_command == "importance":
        values = []
        for event in tree.events:
            values.append(birnbaum_fta(tree, event.name))
            values.append(rrw_fta(tree, event.name))
        if args.format == "csv":
            _write_out(metric_values_to_csv(values), args.output)
        else:
            _write_out(json.dumps(metric_values_to_json(values), indent=2), args.output)
        return 0
    if args.ft_command == "to-cbn":
        network = fault_tree_to_cbn(tree)
        _write_out(serialize_network(network, {"source": "fault-tree conversion"}),
                   args.output)
        return 0
    raise UsageError(f"unknown ft subcommand {args.ft_command!r}")


def cmd_sample(args) -> int:
    network = load_network(_resolve_model(args.model))
    samples = forward_sample(network, args.n, args.seed)
    if args.output:
        samples.to_csv(args.output)
        print(f"wrote {len(samples)} samples to {args.output}")
    else:
        samples.to_csv(sys.stdout)
    return 0


def cmd_fit(args) -> int:
    structure = load_network(_resolve_model(args.model))
    with open(args.data, newline="", encoding="utf-8") as f:
        data = SampleSet.from_csv(f, structure)
    fitted = fit_cpts(structure, data, laplace_alpha=args.alpha)
    _write_out(serialize_network(fitted, {"source": f"fitted from {Path(args.data).name}",
                                          "laplace_alpha": str(args.alpha)}), args.output)
    return 0


def cmd_reproduce(args) -> int:
    results = reproduce.run(only=args.only)
    print(reproduce.format_results(results))
    return 0 if all(r.passed for r in results) else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalsafety",
        description="Causal Bayesian network safety analysis: queries, "
                    "importance metrics, fault trees, and the published-value "
                    "reproduction suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file against the invariants")
    p.add_argument("model")
    p.add_argument("--fault-tree", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("query", help="conditional, interventional or path-specific marginal")
    p.add_argument("model")
    p.add_argument("-t", "--target", required=True)
    p.add_argument("-e", "--evidence", action="append", default=[], metavar="VAR=STATE")
    p.add_argument("--do", action="append", default=[], metavar="VAR=STATE")
    p.add_argument("--paths", help="semicolon-separated arrow chains, e.g. 'A->B->C; A->C'")
    p.add_argument("--active", help="active source state for --paths")
    p.add_argument("--ref", help="reference source state for --paths")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("metrics", help="run the full importance-metric suite from a config")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("tornado", help="conditional vs interventional sweep")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv", "svg"))
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_tornado)

    p = sub.add_parser("pairwise", help="pairwise-intervention RCE2 grid")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_pairwise)

    p = sub.add_parser("paths", help="path-specific effect metrics for configured path sets")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_paths)

    p = sub.add_parser("ft", help="fault-tree analysis")
    ft_sub = p.add_subparsers(dest="ft_command", required=True)
    for name, help_text in (("eval", "top-event probability"),
                            ("cutsets", "minimal cut sets"),
                            ("importance", "Birnbaum and risk-reduction-worth per event"),
                            ("to-cbn", "convert to a causal network document")):
        q = ft_sub.add_parser(name, help=help_text)
        q.add_argument("tree")
        q.add_argument("--format", choices=("json", "csv"), default="json")
        q.add_argument("-o", "--output")
        q.set_defaults(fn=cmd_ft)

    p = sub.add_parser("sample", help="forward-sample a model to CSV")
    p.add_argument("model")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("fit", help="fit CPTs from a sample CSV onto a model's structure")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("reproduce", help="recompute and check every published value")
    p.add_argument("--only", choices=reproduce.SECTIONS)
    p.set_defaults(fn=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, InvalidNetworkError, InvalidFaultTreeError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, PermissionError) as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 1
    except (ContradictoryEvidenceError, UnidentifiablePathError) as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
