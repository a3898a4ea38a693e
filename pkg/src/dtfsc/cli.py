"""Command-line surface tying the pipeline together.

Exit codes: 0 on success, 1 when a verification check finds a
counterexample, 2 on usage or schema errors.  Output paths honor the
DTFSC_OUT_DIR environment variable when they are bare file names.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench, formats
from .dtcontroller import build_dtfsc, build_from_tables, check_faithful
from .dot import dist_label, dtfsc_to_dot, fsc_to_dot, skip_fsc_to_dot, tree_to_dot
from .errors import DtfscError, SchemaError
from .fsc import Fsc, controller_wins, extract_tables
from .pomdp import Pomdp
from .report import PLAIN_VARIANT, SKIP_VARIANT, build_report, render_figure, to_csv
from .sim import DEFAULT_HORIZON, simulate
from .skipfsc import SkipFsc, check_equiv, extract_skip_tables, to_skip_fsc
from .synth import synthesize

USAGE_ERROR = 2
COUNTEREXAMPLE = 1


def out_path(name: str | Path) -> Path:
    path = Path(name)
    if path.parent == Path(".") and "DTFSC_OUT_DIR" in os.environ:
        return Path(os.environ["DTFSC_OUT_DIR"]) / path
    return path


def _load_model(path) -> Pomdp:
    return formats.load_typed(path, "pomdp")


def _print_counterexample(ce) -> None:
    print("counterexample:")
    for z, a in ce.steps:
        print(f"  observe {list(z)}")
        print(f"  act {a}")
    print(f"  observe {list(ce.observation)}")
    print(f"  table controller acts {ce.fsc_action}, skip controller acts {ce.skip_action}")


def cmd_gen_bench(args) -> int:
    if args.family == "maze":
        model = bench.gen_maze()
    elif args.family == "obstacle":
        model = bench.gen_obstacle(args.n)
    else:
        model = bench.gen_refuel(args.n, args.energy)
    formats.save_object(out_path(args.out), model)
    print(f"wrote {model.name or args.family}: {model.num_states} states")
    return 0


def cmd_synth(args) -> int:
    model = _load_model(args.model)
    fsc, idx = synthesize(model)
    formats.save_object(out_path(args.out_fsc), fsc)
    formats.save_object(out_path(args.out_index), idx)
    print(f"synthesized {fsc.num_nodes} nodes; initial node {fsc.init_node}")
    return 0


def cmd_to_dtfsc(args) -> int:
    model = _load_model(args.model)
    fsc = formats.load_typed(args.fsc, "fsc")
    dtfsc = build_dtfsc(fsc, model, impurity=args.impurity, jobs=args.jobs)
    formats.save_object(out_path(args.out), dtfsc)
    trees = sum(1 for t in dtfsc.action_trees if t is not None)
    print(f"compiled {trees} node(s) into {2 * trees} trees")
    return 0


def cmd_skipify(args) -> int:
    model = _load_model(args.model)
    fsc = formats.load_typed(args.fsc, "fsc")
    idx = formats.load_typed(args.index, "iteration-index")
    sf = to_skip_fsc(fsc, idx, model)
    formats.save_object(out_path(args.out), sf)
    skips = sum(1 for a in sf.gamma.values() if not isinstance(a, int))
    print(f"wrote skip controller with {skips} skip entries")
    return 0


def cmd_verify(args) -> int:
    model = _load_model(args.model)
    fsc = formats.load_typed(args.fsc, "fsc")

    tables = extract_tables(fsc, model)
    dtfsc = build_dtfsc(fsc, model, impurity=args.impurity)
    mismatch = check_faithful(tables, dtfsc, model)
    if mismatch is not None:
        print(
            f"faithfulness violated at node {mismatch.node}: input "
            f"{list(mismatch.row_input)} maps to {mismatch.table_label} in the "
            f"table but {mismatch.tree_label} in the tree"
        )
        return COUNTEREXAMPLE
    print("faithful: tree evaluation matches every table row")

    if args.index is not None:
        idx = formats.load_typed(args.index, "iteration-index")
        sf = to_skip_fsc(fsc, idx, model)
        ce = check_equiv(fsc, sf, model)
        if ce is not None:
            _print_counterexample(ce)
            return COUNTEREXAMPLE
        print("equivalent: skip conversion preserves the policy")
        stables = extract_skip_tables(sf, model)
        sdt = build_from_tables(
            stables, model, sf.num_nodes, sf.init_node, impurity=args.impurity
        )
        smismatch = check_faithful(stables, sdt, model)
        if smismatch is not None:
            print(f"skip faithfulness violated at node {smismatch.node}")
            return COUNTEREXAMPLE
        print("faithful: skip controller trees match every table row")

    if controller_wins(fsc, model):
        print("winning: targets reached with probability one from the start")
        return 0
    print("counterexample: the controller does not reach the targets almost surely")
    return COUNTEREXAMPLE


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    controller = formats.load_object(args.controller)
    if not isinstance(controller, (Fsc, SkipFsc)) and not hasattr(
        controller, "action_trees"
    ):
        raise SchemaError("kind: expected a controller document")
    results = simulate(controller, model, args.episodes, args.seed, args.horizon)
    for i, r in enumerate(results):
        print(f"episode {i}: {r.outcome} after {r.steps} steps")
    hits = sum(1 for r in results if r.outcome == "target-hit")
    print(f"{hits}/{len(results)} episodes hit a target (seed {args.seed})")
    return 0


def cmd_report(args) -> int:
    model = _load_model(args.model)
    fsc = formats.load_typed(args.fsc, "fsc")
    name = args.benchmark or model.name or "model"
    reports = []
    tables = extract_tables(fsc, model)
    dtfsc = build_dtfsc(fsc, model, impurity=args.impurity)
    reports.append(build_report(name, tables, dtfsc, PLAIN_VARIANT))
    if args.index is not None:
        idx = formats.load_typed(args.index, "iteration-index")
        sf = to_skip_fsc(fsc, idx, model)
        stables = extract_skip_tables(sf, model)
        sdt = build_from_tables(
            stables, model, sf.num_nodes, sf.init_node, impurity=args.impurity
        )
        reports.append(build_report(name, stables, sdt, SKIP_VARIANT))
    csv_text = to_csv(reports)
    target = out_path(args.out)
    target.write_text(csv_text)
    print(csv_text, end="")
    if not args.no_figure:
        figure = target.with_suffix(".png")
        render_figure(reports, figure)
        print(f"figure written to {figure}")
    return 0


def cmd_export_dot(args) -> int:
    obj = formats.load_object(args.input)
    if isinstance(obj, Fsc):
        model = _load_model(_require(args.model, "--model is required for fsc input"))
        text = fsc_to_dot(obj, model)
    elif isinstance(obj, SkipFsc):
        model = _load_model(_require(args.model, "--model is required for skip-fsc input"))
        text = skip_fsc_to_dot(obj, model)
    elif hasattr(obj, "action_trees"):
        if args.tree is not None:
            kind, _, node = args.tree.partition(":")
            n = int(node)
            tree = (obj.action_trees if kind == "action" else obj.transition_trees)[n]
            if tree is None:
                raise SchemaError(f"nodes[{n}]: no tree stored for this node")
            overrides = None
            if kind == "action" and obj.action_dists:
                labels = tree.label_names
                skip_pos = labels.index("skip") if "skip" in labels else len(labels)
                overrides = {
                    skip_pos + 1 + k: dist_label(d, labels[:skip_pos])
                    for k, d in enumerate(obj.action_dists)
                }
            text = tree_to_dot(tree, f"{kind}_{n}", leaf_overrides=overrides)
        else:
            text = dtfsc_to_dot(obj)
    else:
        raise SchemaError("kind: cannot export this document as DOT")
    out_path(args.out).write_text(text)
    print(f"wrote {args.out}")
    return 0


def _require(value, message):
    if value is None:
        raise SchemaError(message)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtfsc",
        description="decision-tree representations of finite-state POMDP controllers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-bench", help="write a benchmark model")
    p.add_argument("family", choices=["maze", "obstacle", "refuel"])
    p.add_argument("--n", type=int, default=6, help="grid side")
    p.add_argument("--energy", type=int, default=8, help="tank capacity (refuel)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_bench)

    p = sub.add_parser("synth", help="synthesize a winning controller")
    p.add_argument("--model", required=True)
    p.add_argument("--out-fsc", required=True)
    p.add_argument("--out-index", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("to-dtfsc", help="compile controller tables to trees")
    p.add_argument("--model", required=True)
    p.add_argument("--fsc", required=True)
    p.add_argument("--impurity", choices=["entropy", "gini"], default="entropy")
    p.add_argument("--jobs", type=int, default=1, help="parallel tree learning")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_to_dtfsc)

    p = sub.add_parser("skipify", help="convert a layered controller to skip form")
    p.add_argument("--model", required=True)
    p.add_argument("--fsc", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_skipify)

    p = sub.add_parser(
        "verify", help="faithfulness, skip equivalence, and the winning check"
    )
    p.add_argument("--model", required=True)
    p.add_argument("--fsc", required=True)
    p.add_argument("--index")
    p.add_argument("--impurity", choices=["entropy", "gini"], default="entropy")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="episodic rollouts of any controller")
    p.add_argument("--model", required=True)
    p.add_argument("--controller", required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="size metrics as CSV plus a figure")
    p.add_argument("--model", required=True)
    p.add_argument("--fsc", required=True)
    p.add_argument("--index", help="also report the skip variant")
    p.add_argument("--benchmark", help="row label (defaults to the model name)")
    p.add_argument("--impurity", choices=["entropy", "gini"], default="entropy")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-dot", help="render a controller or tree as DOT")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", help="needed for table-based controllers")
    p.add_argument("--tree", help="action:N or transition:N inside a dtfsc")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except DtfscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return COUNTEREXAMPLE


if __name__ == "__main__":
    sys.exit(main())
