"""Command-line front end: ``graph-al {gen,train,eval,baseline,sweep,oracle}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from pathlib import Path

from .baselines import BASELINES, AgeWeights, baseline_selector, grid_search_age_weights
from .classifier import ClassifierConfig
from .data_io import (CheckpointError, SbmConfig, generate_sbm, load_checkpoint, load_graph,
                      save_checkpoint, save_graph)
from .graph import GraphError
from .report import (RESULT_COLUMNS, ci_halfwidth, line_chart_svg, result_rows, summary_rows,
                     write_csv)
from .state import parse_feature_mask
from .trainer import (NumericError, TrainConfig, evaluate_policy, evaluate_selector, oracle_table,
                      run_seed, train_policy)

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

log = logging.getLogger("graph_al")


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            yield f


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _classifier_config(args) -> ClassifierConfig:
    return ClassifierConfig(max_convergence_epochs=args.max_epochs, patience=args.patience)


def _budget(args, graph) -> int:
    return args.budget if args.budget is not None else 5 * graph.num_classes


def cmd_gen(args) -> int:
    try:
        cfg = SbmConfig(num_nodes=args.nodes, num_classes=args.classes, p_in=args.p_in, p_out=args.p_out,
                        feat_dim=args.feat_dim, noise_sigma=args.noise, class_sep=args.sep,
                        valid_frac=args.valid_frac, test_frac=args.test_frac, seed=args.seed,
                        name=args.name)
    except ValueError as e:
        raise UsageError(str(e)) from None
    save_graph(generate_sbm(cfg), args.out)
    return 0


def cmd_train(args) -> int:
    graphs = [load_graph(p) for p in args.graph]
    mask = parse_feature_mask(args.feature_mask)
    cfg = TrainConfig(episodes=args.episodes, batch_size=args.batch_size, lr=args.lr,
                      budget_per_class=args.budget_per_class,
                      budgets=[args.budget] * len(graphs) if args.budget is not None else None,
                      alpha=args.alpha, feature_mask=mask, arch=args.arch, seed=args.seed,
                      classifier=_classifier_config(args))

    def progress(row):
        if row["episode"] % 10 == 0:
            log.info("episode %d %s reward %.4f baseline %.4f", row["episode"], row["graph"],
                     row["mean_reward"], row["baseline"])

    policy, curve = train_policy(graphs, cfg, callback=progress)
    save_checkpoint(args.out, policy, args.alpha, mask, [g.name for g in graphs], args.seed, args.episodes)
    if args.curve:
        config = {"command": "train", **{k: v for k, v in vars(args).items() if k != "func"}}
        with _output(args.curve) as f:
            write_csv(f, curve, ("episode", "graph_id", "graph", "mean_reward", "baseline"), config)
    return 0


def _emit_results(args, rows, config):
    with _output(args.out) as f:
        write_csv(f, rows, RESULT_COLUMNS, config)


def cmd_eval(args) -> int:
    policy, meta = load_checkpoint(args.checkpoint, args.arch)
    graph = load_graph(args.graph)
    budget = _budget(args, graph)
    res = evaluate_policy(policy, graph, budget, args.runs, args.seed, meta["alpha"],
                          meta["feature_mask"], _classifier_config(args))
    method = "gpa" if policy.arch == "gcn" else "gpa-mlp"
    rows = result_rows(graph.name, method, budget, res) + summary_rows(graph.name, method, budget, res)
    config = {"command": "eval", **{k: v for k, v in vars(args).items() if k != "func"}, "budget": budget}
    _emit_results(args, rows, config)
    if args.sequences:
        _write_sequences(args.sequences, graph.name, method, res)
    return 0


def _write_sequences(path, graph_name, method, res):
    with _output(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["graph", "method", "run", "step", "node"])
        for r, seq in enumerate(res.sequences):
            for t, v in enumerate(seq):
                w.writerow([graph_name, method, r, t, v])


def _age_weights(args, budget_rule) -> AgeWeights:
    if args.age_weights:
        return AgeWeights.parse(args.age_weights)
    if args.age_train_graph:
        train = [load_graph(p) for p in args.age_train_graph]
        w, _ = grid_search_age_weights(train, [budget_rule(g) for g in train], args.age_grid_step,
                                       args.age_grid_runs, args.seed, _classifier_config(args))
        log.info("AGE weights from grid search: %s", w)
        return w
    return AgeWeights()


def cmd_baseline(args) -> int:
    graph = load_graph(args.graph)
    budget = _budget(args, graph)
    weights = _age_weights(args, lambda g: _budget(args, g)) if args.method == "age" else None
    res = evaluate_selector(graph, budget, lambda rng: baseline_selector(args.method, rng, weights, args.k),
                            args.runs, args.seed, _classifier_config(args))
    rows = result_rows(graph.name, args.method, budget, res) + summary_rows(graph.name, args.method, budget, res)
    config = {"command": "baseline", **{k: v for k, v in vars(args).items() if k != "func"},
              "budget": budget, "age_weights_used": None if weights is None else weights.as_array().tolist()}
    _emit_results(args, rows, config)
    if args.sequences:
        _write_sequences(args.sequences, graph.name, args.method, res)
    return 0


def cmd_sweep(args) -> int:
    graph = load_graph(args.graph)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in BASELINES and m != "gpa":
            raise UsageError(f"unknown method {m!r}")
    policy = meta = None
    if "gpa" in methods:
        if not args.checkpoint:
            raise UsageError("method gpa needs --checkpoint")
        policy, meta = load_checkpoint(args.checkpoint)
    weights = AgeWeights.parse(args.age_weights) if args.age_weights else None
    ccfg = _classifier_config(args)
    rows, series = [], {}
    for m in methods:
        means, halves = [], []
        for b in args.budgets:
            if m == "gpa":
                res = evaluate_policy(policy, graph, b, args.runs, args.seed, meta["alpha"],
                                      meta["feature_mask"], ccfg)
            else:
                res = evaluate_selector(graph, b, lambda rng, m=m: baseline_selector(m, rng, weights),
                                        args.runs, args.seed, ccfg)
            rows += result_rows(graph.name, m, b, res)
            means.append(res.mean_micro)
            halves.append(ci_halfwidth(res.micro))
        series[m] = (list(args.budgets), means, halves)
    config = {"command": "sweep", **{k: v for k, v in vars(args).items() if k != "func"}}
    _emit_results(args, rows, config)
    if args.svg:
        Path(args.svg).write_text(line_chart_svg(series, "query budget", "test micro-F1"), encoding="utf-8")
    return 0


def cmd_oracle(args) -> int:
    graph = load_graph(args.graph)
    cseed = run_seed(args.seed, args.run)
    table = oracle_table(graph, args.budget, cseed, _classifier_config(args), args.max_sequences)
    best = max(range(len(table)), key=lambda i: (table[i][1], -i))
    rows = [{"sequence": " ".join(map(str, seq)), "reward": r, "best": int(i == best)}
            for i, (seq, r) in enumerate(table)]
    config = {"command": "oracle", **{k: v for k, v in vars(args).items() if k != "func"},
              "classifier_seed": cseed}
    with _output(args.out) as f:
        write_csv(f, rows, ("sequence", "reward", "best"), config)
    print(f"best sequence {' '.join(map(str, table[best][0]))} reward {table[best][1]!r}", file=sys.stderr)
    return 0


def _add_classifier_flags(p):
    p.add_argument("--max-epochs", type=int, default=300, help="convergence epoch cap")
    p.add_argument("--patience", type=int, default=20, help="early-stopping patience")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graph-al", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a stochastic-block-model graph file")
    p.add_argument("--nodes", type=int, default=300)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--p-in", type=float, default=0.1)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--feat-dim", type=int, default=16)
    p.add_argument("--noise", type=float, default=2.0)
    p.add_argument("--sep", type=float, default=1.0, help="class-centroid norm")
    p.add_argument("--valid-frac", type=float, default=0.15)
    p.add_argument("--test-frac", type=float, default=0.30)
    p.add_argument("--name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a query policy on labeled source graphs")
    p.add_argument("--graph", action="append", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--curve", help="training-curve CSV path")
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--budget", type=int, help="per-graph budget (default 5 x classes)")
    p.add_argument("--budget-per-class", type=int, default=5)
    p.add_argument("--alpha", type=float, default=20.0)
    p.add_argument("--feature-mask", help="features to zero out, e.g. -entropy or -kl,-degree")
    p.add_argument("--arch", choices=("gcn", "mlp"), default="gcn")
    p.add_argument("--seed", type=int, default=0)
    _add_classifier_flags(p)
    p.set_defaults(func=cmd_train)

    for name, helptext in (("eval", "zero-shot evaluation of a trained policy"),
                           ("baseline", "evaluate a heuristic query strategy")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--graph", required=True)
        p.add_argument("--runs", type=int, default=100)
        p.add_argument("--budget", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="results CSV (default stdout)")
        p.add_argument("--sequences", help="also write the selected node sequences as CSV")
        _add_classifier_flags(p)
        if name == "eval":
            p.add_argument("--checkpoint", required=True)
            p.add_argument("--arch", choices=("gcn", "mlp"), help="require this policy architecture")
            p.set_defaults(func=cmd_eval)
        else:
            p.add_argument("--method", required=True, choices=BASELINES)
            p.add_argument("--k", type=int, help="k-means clusters (default: class count)")
            p.add_argument("--age-weights", help="entropy,centrality,density weights")
            p.add_argument("--age-train-graph", action="append",
                           help="grid-search AGE weights on these graphs and average them")
            p.add_argument("--age-grid-step", type=float, default=0.05)
            p.add_argument("--age-grid-runs", type=int, default=3)
            p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="methods x budgets benchmark with a line chart")
    p.add_argument("--graph", required=True)
    p.add_argument("--budgets", type=_int_list, default=[10, 20, 30, 50, 100])
    p.add_argument("--methods", default="random,uncertainty,centrality,coreset,age")
    p.add_argument("--checkpoint", help="policy checkpoint, needed for method gpa")
    p.add_argument("--age-weights")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="long-form results CSV (default stdout)")
    p.add_argument("--svg", help="line chart path")
    _add_classifier_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustively score every query sequence on a tiny graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--budget", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--run", type=int, default=0, help="evaluation run whose classifier seed to use")
    p.add_argument("--max-sequences", type=int, default=10_000)
    p.add_argument("--out")
    _add_classifier_flags(p)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphError, CheckpointError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
