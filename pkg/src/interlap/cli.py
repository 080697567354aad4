"""Command line entry point: ``interlap <command> [options]``.

Exit status is 0 on success, 1 for usage errors and 2 when the command
itself fails (bad input file, disconnected graph, solver failure, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .datasets import load_dataset, split_70_30, write_labels
from .eigen import smallest_k
from .embedding import augment_features, compute_adjacency_embedding, compute_ile, write_embedding
from .errors import InterlapError
from .graph import format_edge_list, read_edge_list
from .harness import GridConfig, emit_report, format_csv, format_markdown, run_grid
from .nn.models import ARCHS, OPTIMIZERS, ModelConfig, build_model
from .nn.train import train
from .operators import build
from .sbm import PRESETS, SbmSpec, generate
from .selection import correlation_screen, cross_validate, scree_elbow

logger = logging.getLogger("interlap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        # --t / --s must not be read as prefixes of --tol / --seed
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _global_options(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="RNG seed (default 0)")
    parser.add_argument("--tol", type=float, default=default(1e-8), help="eigensolver residual tolerance")
    parser.add_argument("--threads", type=int, default=default(1), help="worker threads for grids")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def _graph_options(p):
    p.add_argument("--edges", "-g", required=True, help="edge list file (u v [w] per line)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="interlap", description="Interpolated Laplacian embeddings and experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("embed", parents=[common], help="write an embedding CSV")
    _graph_options(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--adjacency", action="store_true", help="top-k adjacency eigenvectors instead")
    p.add_argument("--out", "-o", help="CSV path (default: stdout); a .json sidecar is written too")

    p = sub.add_parser("sbm", parents=[common], help="sample a stochastic block model")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--sizes", help="block sizes, e.g. 50,50 (instead of --preset)")
    p.add_argument("--probs", help="row-major probability matrix, e.g. 0.9,0.1,0.1,0.9")
    p.add_argument("--shuffle", action="store_true", help="randomly relabel nodes")
    p.add_argument("--out", "-o", help="edge list path (default: stdout)")
    p.add_argument("--labels-out", help="write node,label CSV here")

    p = sub.add_parser("train", parents=[common], help="train one model and print a JSON report")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--edges", "-g", help="edge list file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="sample an SBM instead of reading files")
    p.add_argument("--n", type=int, default=300, help="node count for --preset")
    p.add_argument("--labels", help="node,label CSV")
    p.add_argument("--features", help="feature CSV")
    p.add_argument("--degree-labels", type=float, help="label the top fraction of nodes by degree")
    p.add_argument("--arch", default="GCN", type=str.upper, choices=ARCHS + ("GRAPHSAGE",))
    p.add_argument("--variant", default="ile", type=str.lower, choices=("none", "adjacency", "ile"))
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--layers", type=int)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--optimizer", default="adam", choices=OPTIMIZERS)

    p = sub.add_parser("grid", parents=[common], help="run a GridConfig JSON file")
    p.add_argument("config", help="GridConfig JSON file")
    p.add_argument("--out", "-o", help="report path (default: stdout)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")

    p = sub.add_parser("select", parents=[common], help="choose k or (t, s)")
    p.add_argument("method", choices=("scree", "correlation", "cv"))
    _graph_options(p)
    p.add_argument("--labels", help="node,label CSV (correlation, cv)")
    p.add_argument("--features", help="feature CSV (cv)")
    p.add_argument("--t-values", type=_floats, default=[-1.0, -0.5, 0.5, 1.0])
    p.add_argument("--s-values", type=_floats, default=[-1.0, -0.5, 0.0, 0.5, 1.0])
    p.add_argument("--t", type=float, default=1.0, help="operator for the scree curve")
    p.add_argument("--s", type=float, default=1.0, help="operator for the scree curve")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--k-max", type=int, default=20, help="eigenvalues on the scree curve")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--arch", default="GCN", type=str.upper, choices=ARCHS + ("GRAPHSAGE",))
    p.add_argument("--out", "-o", help="score table CSV (default: stdout)")
    return parser


def _write(text: str, path) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_embed(args) -> None:
    g = read_edge_list(args.edges)
    if args.adjacency:
        emb = compute_adjacency_embedding(g, args.k, tol=args.tol, seed=args.seed)
    else:
        emb = compute_ile(g, args.t, args.s, args.k, tol=args.tol, seed=args.seed)
    if args.out:
        write_embedding(emb, args.out)
        return
    header = "node," + ",".join(f"ev_{j + 1}" for j in range(emb.coords.shape[1]))
    lines = [header] + [f"{u}," + ",".join(repr(float(x)) for x in row) for u, row in enumerate(emb.coords)]
    _write("\n".join(lines) + "\n", None)


def cmd_sbm(args) -> None:
    if args.sizes:
        sizes = [int(x) for x in args.sizes.split(",")]
        probs = _floats(args.probs or "")
        if len(probs) != len(sizes) ** 2:
            raise UsageError(f"--probs needs {len(sizes) ** 2} values for {len(sizes)} blocks")
        P = np.asarray(probs).reshape(len(sizes), len(sizes))
        spec = SbmSpec(sizes, P.tolist(), args.seed)
    elif args.preset:
        spec = PRESETS[args.preset](args.n, args.seed)
    else:
        raise UsageError("give --preset or --sizes/--probs")
    lg = generate(spec, shuffle=args.shuffle)
    _write(f"# n={lg.graph.n}\n# {lg.meta}\n" + format_edge_list(lg.graph), args.out)
    if args.labels_out:
        write_labels(lg.labels, args.labels_out)


def _load(args):
    if getattr(args, "preset", None):
        lg = generate(PRESETS[args.preset](args.n, args.seed), shuffle=True)
        return lg.graph, lg.labels, None
    if not args.labels and getattr(args, "degree_labels", None) is None:
        raise UsageError("--labels (or --degree-labels) is required with --edges")
    ds = load_dataset(
        args.edges,
        getattr(args, "features", None),
        args.labels,
        degree_label_fraction=getattr(args, "degree_labels", None),
    )
    return ds.graph, ds.labels, ds.features


def cmd_train(args) -> None:
    g, labels, features = _load(args)
    if args.variant == "none":
        X = features if features is not None else np.ones((g.n, 1))
    elif args.variant == "adjacency":
        X = augment_features(features, compute_adjacency_embedding(g, args.k, tol=args.tol, seed=args.seed))
    else:
        X = augment_features(features, compute_ile(g, args.t, args.s, args.k, tol=args.tol, seed=args.seed))
    cfg = ModelConfig(
        arch=args.arch,
        layers=args.layers,
        hidden_dim=args.hidden,
        lr=args.lr,
        epochs=args.epochs,
        weight_decay=args.weight_decay,
        seed=args.seed,
        optimizer=args.optimizer,
    )
    split = split_70_30(g.n, args.seed)
    model = build_model(cfg, X.shape[1], int(labels.max()) + 1, g)
    report = train(model, X, labels, split, cfg)
    _write(json.dumps(report.to_dict(), indent=2) + "\n", None)


def cmd_grid(args) -> None:
    cfg = GridConfig.from_json(args.config)
    report = run_grid(cfg, threads=args.threads)
    if args.out:
        emit_report(report, args.out, args.format)
    else:
        _write(format_csv(report) if args.format == "csv" else format_markdown(report), None)
    failed = sum(r.failed for r in report.rows)
    if failed:
        logger.warning("%d of %d cells failed", failed, len(report.rows))


def cmd_select(args) -> None:
    g = read_edge_list(args.edges)
    if args.method == "scree":
        k_max = min(args.k_max, g.n - 1)
        pairs = smallest_k(build(g, args.t, args.s), k_max, tol=args.tol, seed=args.seed)
        result = scree_elbow(pairs.eigenvalues, k_max, return_result=True)
        lines = ["k,eigenvalue,chord_distance"]
        lines += [
            f"{i},{float(pairs.eigenvalues[i - 1])!r},{d!r}" for i, d in sorted(result.scores.items())
        ]
        logger.info("elbow at k=%d", result.chosen)
        _write("\n".join(lines) + f"\n# chosen k={result.chosen}\n", args.out)
        return
    if not args.labels:
        raise UsageError(f"{args.method} selection needs --labels")
    ds = load_dataset(args.edges, args.features, args.labels)
    grid = [(t, s) for s in args.s_values for t in args.t_values]
    if args.method == "correlation":
        split = split_70_30(ds.n, args.seed)
        result = correlation_screen(ds.graph, ds.labels, grid, args.k, seed=args.seed, train_idx=split.train_idx)
    else:
        cfg = ModelConfig(arch=args.arch, seed=args.seed)
        result = cross_validate(
            ds.graph, ds.features, ds.labels, grid, args.k, folds=args.folds, cfg=cfg,
            seed=args.seed, threads=args.threads,
        )
    lines = ["t,s,score"] + [f"{t!r},{s!r},{v!r}" for (t, s), v in result.table()]
    t, s = result.chosen
    _write("\n".join(lines) + f"\n# chosen t={t!r} s={s!r}\n", args.out)


COMMANDS = {
    "embed": cmd_embed,
    "sbm": cmd_sbm,
    "train": cmd_train,
    "grid": cmd_grid,
    "select": cmd_select,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"interlap {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (InterlapError, OSError, ValueError) as exc:
        print(f"interlap {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
