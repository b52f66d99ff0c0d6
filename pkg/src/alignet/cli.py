"""Command-line experiment runner.

Subcommands: generate, train, evaluate, sweep, hypothesis-grid, ablation,
export-embeddings.  Flags mirror the run-config fields; metric output is CSV
on stdout (or --out) with the configuration echoed as a comment line, so any
run can be reproduced from its own output.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .config import RunConfig
from .evaluate import (
    FileSource,
    SyntheticSource,
    feature_role_grid,
    mode_grid,
    report_csv,
    resolve_source,
    rows_csv,
    run_experiment,
    sweep,
)
from .graphs import make_split, save_split
from .model import write_embeddings
from .objective import write_loss_trace
from .synth import DegreeParams, generate_synthetic
from .train import fit, load_checkpoint, save_checkpoint


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-emb", type=int, default=100, help="embedding dimension")
    p.add_argument("--d-hidden", type=int, default=256, help="features per first-layer head")
    p.add_argument("--heads", type=int, default=8, help="first-layer attention heads")
    p.add_argument("--lr", type=float, default=0.005, help="Adam learning rate")
    p.add_argument("--epochs", type=int, default=3000)
    p.add_argument("--alpha", type=float, default=1.0, help="anchor objective weight")
    p.add_argument("--beta", type=float, default=0.0005, help="L2 penalty weight")
    p.add_argument("--dropout", type=float, default=0.4, help="attention-coefficient dropout")
    p.add_argument("--lambda", dest="lam", type=float, default=0.8, help="training ratio")
    p.add_argument("--mode", default="sc+ad",
                   help="contribution mode: {sc,sd}+{ac,ad} (social/anchor x cross/direct)")
    p.add_argument("--feature-roles", default="both",
                   choices=("both", "initiator-only", "recipient-only"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layer2-activation", default="identity", choices=("identity", "softmax"))
    p.add_argument("--resample-negatives", action="store_true",
                   help="draw fresh loss negatives each epoch (evaluation set stays fixed)")
    p.add_argument("--patience", type=int, default=None,
                   help="stop after this many epochs without total-loss improvement")


def _add_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g1", help="first network edge TSV")
    p.add_argument("--g2", help="second network edge TSV")
    p.add_argument("--anchors", help="anchor TSV (g1 id <TAB> g2 id)")
    p.add_argument("--synthetic", action="store_true", help="generate the pair instead")
    p.add_argument("--n1", type=int, default=200)
    p.add_argument("--n2", type=int, default=200)
    p.add_argument("--anchor-frac", type=float, default=0.6)
    p.add_argument("--divergence", type=float, default=0.3)
    p.add_argument("--out-degree", type=int, default=5)
    p.add_argument("--data-seed", type=int, default=None,
                   help="pin the synthetic pair independently of --seed")


def _config(args) -> RunConfig:
    return RunConfig(
        d_emb=args.d_emb, d_hidden=args.d_hidden, heads=args.heads, lr=args.lr,
        epochs=args.epochs, alpha=args.alpha, beta=args.beta, dropout=args.dropout,
        lam=args.lam, seed=args.seed, feature_roles=args.feature_roles,
        layer2_activation=args.layer2_activation,
        resample_negatives=args.resample_negatives, patience=args.patience,
    ).with_(mode=args.mode)


def _source(args):
    if args.synthetic or not args.g1:
        return SyntheticSource(
            n1=args.n1, n2=args.n2, anchor_frac=args.anchor_frac,
            divergence=args.divergence, deg=DegreeParams(out_degree=args.out_degree),
            fixed_seed=args.data_seed,
        )
    if not (args.g1 and args.g2 and args.anchors):
        raise SystemExit("file input needs --g1, --g2 and --anchors")
    return FileSource(args.g1, args.g2, args.anchors)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> None:
    pair = generate_synthetic(
        args.n1, args.n2, args.anchor_frac,
        DegreeParams(out_degree=args.out_degree), args.divergence, args.seed,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    header = (f"# synthetic pair: n1={args.n1} n2={args.n2} anchor_frac={args.anchor_frac!r} "
              f"divergence={args.divergence!r} out_degree={args.out_degree} seed={args.seed}\n")
    for name, arr in (("g1.tsv", pair.g1.edges), ("g2.tsv", pair.g2.edges),
                      ("anchors.tsv", pair.anchors)):
        path = os.path.join(args.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header)
            for a, b in arr.tolist():
                fh.write(f"{a}\t{b}\n")
    print(f"wrote {pair.g1.edge_count} + {pair.g2.edge_count} edges and "
          f"{pair.anchor_count} anchors to {args.out_dir}", file=sys.stderr)


def _cmd_train(args) -> None:
    config = _config(args)
    pair = resolve_source(_source(args), config)
    split = make_split(pair, config.lam, config.seed)
    if args.split_out:
        save_split(split, args.split_out)
    init = None
    if args.resume:
        params, state, done = load_checkpoint(args.resume)
        init = (params, state, done)
        print(f"resuming from {args.resume} at epoch {done}", file=sys.stderr)
    t0 = time.perf_counter()
    sink: dict = {}
    params, _emb, trace = fit(pair, split, config, init=init, state_sink=sink)
    elapsed = time.perf_counter() - t0
    save_checkpoint(args.checkpoint, params, sink["adam"], sink["epoch"])
    if args.trace:
        write_loss_trace(trace, args.trace)
    last = trace[-1] if trace else None
    print(f"trained {len(trace)} epochs in {elapsed:.1f}s; final loss: {last}", file=sys.stderr)
    print(f"checkpoint written to {args.checkpoint}", file=sys.stderr)


def _cmd_evaluate(args) -> None:
    report = run_experiment(_config(args), _source(args))
    _emit(report_csv(report), args.out)
    print(f"wall time: {report.wall_time:.1f}s", file=sys.stderr)


def _cmd_sweep(args) -> None:
    base = _config(args)
    values = [float(v) if args.axis != "d" else int(v) for v in args.values.split(",")]
    rows = sweep(base, args.axis, values, args.repeats, _source(args))
    _emit(rows_csv(rows, f"sweep axis={args.axis} config: {base.echo()}"), args.out)


def _cmd_hypothesis_grid(args) -> None:
    base = _config(args)
    rows = mode_grid(base, args.repeats, _source(args))
    _emit(rows_csv(rows, f"hypothesis grid config: {base.echo()}"), args.out)


def _cmd_ablation(args) -> None:
    base = _config(args)
    rows = feature_role_grid(base, args.repeats, _source(args))
    _emit(rows_csv(rows, f"feature-role ablation config: {base.echo()}"), args.out)


def _cmd_export_embeddings(args) -> None:
    config = _config(args)
    pair = resolve_source(_source(args), config)
    split = make_split(pair, config.lam, config.seed)
    _params, emb, _trace = fit(pair, split, config)
    write_embeddings(emb, args.out)
    print(f"embeddings written to {args.out}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignet",
        description="Collective link prediction over two anchor-aligned directed networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic aligned pair as TSV files")
    p.add_argument("--n1", type=int, default=200)
    p.add_argument("--n2", type=int, default=200)
    p.add_argument("--anchor-frac", type=float, default=0.6)
    p.add_argument("--divergence", type=float, default=0.3)
    p.add_argument("--out-degree", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="synthetic_pair")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("train", help="train and write a checkpoint + loss trace")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--checkpoint", default="checkpoint.npz")
    p.add_argument("--trace", default=None, help="loss trace CSV path")
    p.add_argument("--split-out", default=None, help="save the link split for reproducibility")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("evaluate", help="end-to-end run; report test AUC of all subtasks")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("sweep", help="sweep one axis (d | alpha | beta)")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--axis", required=True, choices=("d", "alpha", "beta"))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("hypothesis-grid", help="run all four contribution modes")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_hypothesis_grid)

    p = sub.add_parser("ablation", help="single-role feature ablation")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_ablation)

    p = sub.add_parser("export-embeddings", help="train, then export embeddings as TSV")
    _add_config_flags(p)
    _add_source_flags(p)
    p.add_argument("--out", required=True, help="TSV output path")
    p.set_defaults(fn=_cmd_export_embeddings)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.fn(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
