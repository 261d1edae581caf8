"""Command-line pipeline: synth -> retrieve -> train -> rerank -> ensemble -> fuse -> eval.

Every command is a pure function from input files plus flags to output
files; rerunning with identical inputs produces byte-identical outputs.
Exit codes: 0 success, 1 usage error, 2 data error. A ``--config`` file of
``key=value`` lines may supply any flag of the chosen command; explicit
flags override config values.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import runio, synth
from .core import LtrError, RankedRun
from .data import (
    build_query_groups,
    featurize,
    group_triples,
    parse_collection,
    parse_queries,
    parse_top1000,
    parse_qrels,
    parse_triples,
    tokenize,
)
from .ensemble import RunSet, ensemble_reciprocal_rank, fuse_two_lists
from .losses import LossKind
from .metrics import mrr_at_k, recall_at_k
from .model import ARCHITECTURES, TrainConfig, load_checkpoint, rerank, train
from .retrieval import bm25_search, build_index

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_LOSS_CHOICES = tuple(kind.value for kind in LossKind)


class UsageError(Exception):
    """Bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_output_flags(sub, topk_default=1000):
    sub.add_argument("--out", help="output run file")
    sub.add_argument("--format", choices=runio.RUN_FORMATS, default="msmarco", help="run file format")
    sub.add_argument("--topk", type=int, default=topk_default, help="cut ranked lists at this depth when writing")
    sub.add_argument("--run-tag", default="ltrkit", help="tag column for trec-format output")


def build_parser() -> _Parser:
    parser = _Parser(prog="ltrkit", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", metavar="command")

    sub = commands.add_parser("synth", parents=[], help="generate a deterministic synthetic benchmark")
    sub.add_argument("--out-dir", help="directory for the generated files")
    sub.add_argument("--queries", type=int, help="number of queries")
    sub.add_argument("--docs-per-query", type=int, help="candidate pool size per query (one of them relevant)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--vocab-size", type=int, default=500)
    sub.set_defaults(func=cmd_synth)

    sub = commands.add_parser("retrieve", help="BM25 candidate retrieval over a collection")
    sub.add_argument("--collection", help="collection TSV (pid\\ttext)")
    sub.add_argument("--queries", help="queries TSV (qid\\ttext)")
    sub.add_argument("--k", type=int, default=1000, help="candidates to retrieve per query")
    _add_output_flags(sub)
    sub.set_defaults(func=cmd_retrieve)

    sub = commands.add_parser("train", help="train a scorer on a triples file")
    sub.add_argument("--triples", help="triples TSV (query\\tpositive\\tnegative)")
    sub.add_argument("--out", help="directory for checkpoints and the training log")
    sub.add_argument("--loss", choices=_LOSS_CHOICES, default="softmax")
    sub.add_argument("--list-size", type=int, default=12)
    sub.add_argument("--batch-size", type=int, default=32)
    sub.add_argument("--steps", type=int)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--checkpoint-every", type=int, default=50_000)
    sub.add_argument("--arch", choices=ARCHITECTURES, default="linear")
    sub.add_argument("--hidden-dim", type=int, default=64)
    sub.add_argument("--collection", help="optional collection TSV; enables corpus-statistics features")
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("rerank", help="rerank candidate pools with a trained scorer")
    sub.add_argument("--checkpoint", help="scorer checkpoint file")
    sub.add_argument("--candidates", help="candidates TSV (qid\\tpid\\tquery\\tpassage)")
    sub.add_argument("--collection", help="optional collection TSV; must match how the scorer was trained")
    _add_output_flags(sub)
    sub.set_defaults(func=cmd_rerank)

    sub = commands.add_parser("ensemble", help="average-reciprocal-rank ensemble of run files")
    sub.add_argument("--runs", nargs="+", help="run files to ensemble")
    _add_output_flags(sub)
    sub.set_defaults(func=cmd_ensemble)

    sub = commands.add_parser("fuse", help="fuse two run files by reciprocal rank")
    sub.add_argument("--run-a", help="first run file")
    sub.add_argument("--run-b", help="second run file")
    _add_output_flags(sub)
    sub.set_defaults(func=cmd_fuse)

    sub = commands.add_parser("eval", help="MRR@k evaluation of a run file")
    sub.add_argument("--run", help="run file to evaluate")
    sub.add_argument("--qrels", help="judgments file")
    sub.add_argument("--k", type=int, default=10)
    sub.add_argument("--recall-k", type=int, help="also report recall at this depth")
    sub.add_argument("--jsonl", help="write per-query records to this JSON-lines file")
    sub.set_defaults(func=cmd_eval)

    for _, sub in commands.choices.items():
        sub.add_argument("--config", help="key=value file supplying defaults for any flag")
    return parser


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _positive(args, *names):
    for name in names:
        value = getattr(args, name)
        if value is not None and value < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive, got {value}")


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(subparser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    actions = {action.dest: action for action in subparser._actions}
    defaults = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("help", "config", "func"):
            raise UsageError(f"unknown config key {key!r}")
        if action.nargs in ("+", "*"):
            value = raw.split()
        elif action.type is not None:
            try:
                value = action.type(raw)
            except ValueError:
                raise UsageError(f"config key {key!r}: cannot parse {raw!r}") from None
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: invalid choice {value!r} (choose from {list(action.choices)})")
        defaults[key] = value
    subparser.set_defaults(**defaults)


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        if getattr(args, "config", None):
            config = _load_config(args.config)
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(subparser, config)
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"ltrkit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LtrError, ValueError, OSError) as exc:
        print(f"ltrkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_synth(args) -> int:
    _require(args, "out_dir", "queries", "docs_per_query")
    if args.queries < 1 or args.docs_per_query < 1 or args.vocab_size < 1:
        raise UsageError("sizes must be positive")
    paths = synth.generate(args.out_dir, args.queries, args.docs_per_query, args.seed, args.vocab_size)
    _info(f"wrote synthetic benchmark ({args.queries} queries) to {args.out_dir}")
    for name, path in paths.items():
        _info(f"  {name}: {path}")
    return EXIT_OK


def _optional_index(collection_path):
    if collection_path is None:
        return None
    return build_index(parse_collection(collection_path))


def cmd_train(args) -> int:
    _require(args, "triples", "out", "steps")
    _positive(args, "list_size", "batch_size", "checkpoint_every", "hidden_dim")
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    if args.lr <= 0:
        raise UsageError("--lr must be positive")
    index = _optional_index(args.collection)
    config = TrainConfig(
        loss=args.loss,
        list_size=args.list_size,
        batch_size=args.batch_size,
        steps=args.steps,
        learning_rate=args.lr,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
    )
    lists = group_triples(
        parse_triples(args.triples),
        list_size=args.list_size,
        seed=args.seed,
        featurizer=lambda q, p: featurize(q, p, index),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_lines: list[str] = []
    train(
        lists,
        config,
        architecture=args.arch,
        hidden_dim=args.hidden_dim,
        checkpoint_dir=out_dir,
        on_step=lambda step, loss: log_lines.append(f"{step}\t{loss!r}"),
    )
    (out_dir / "train_log.tsv").write_text("\n".join(log_lines) + ("\n" if log_lines else ""), encoding="utf-8")
    if log_lines:
        _info(f"trained {args.steps} steps ({args.loss} loss); final step loss {log_lines[-1].split(chr(9))[1]}")
    _info(f"checkpoint: {out_dir / 'checkpoint-final.bin'}")
    return EXIT_OK


def cmd_rerank(args) -> int:
    _require(args, "checkpoint", "candidates", "out")
    index = _optional_index(args.collection)
    params = load_checkpoint(args.checkpoint)
    groups = build_query_groups(parse_top1000(args.candidates), index=index)
    run = rerank(params, groups)
    runio.write_run(run, args.out, args.format, args.topk, args.run_tag)
    _info(f"reranked {len(run)} queries -> {args.out}")
    return EXIT_OK


def cmd_retrieve(args) -> int:
    _require(args, "collection", "queries", "out")
    _positive(args, "k")
    index = build_index(parse_collection(args.collection))
    per_query = {}
    for qid, text in parse_queries(args.queries):
        per_query[qid] = bm25_search(index, tokenize(text), args.k)
    run = RankedRun(per_query)
    runio.write_run(run, args.out, args.format, args.topk, args.run_tag)
    _info(f"retrieved top-{args.k} for {len(run)} queries -> {args.out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    _require(args, "runs", "out")
    entries = [(f"{i}:{path}", runio.read_run(path)) for i, path in enumerate(args.runs, start=1)]
    result = ensemble_reciprocal_rank(RunSet(tuple(entries)))
    runio.write_run(result, args.out, args.format, args.topk, args.run_tag)
    _info(f"ensembled {len(entries)} runs -> {args.out}")
    return EXIT_OK


def cmd_fuse(args) -> int:
    _require(args, "run_a", "run_b", "out")
    result = fuse_two_lists(runio.read_run(args.run_a), runio.read_run(args.run_b))
    runio.write_run(result, args.out, args.format, args.topk, args.run_tag)
    _info(f"fused {args.run_a} + {args.run_b} -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    _require(args, "run", "qrels")
    _positive(args, "k", "recall_k")
    run = runio.read_run(args.run)
    judgments = parse_qrels(args.qrels)
    report = mrr_at_k(run, judgments, args.k)
    print(report.to_text())
    if args.recall_k is not None:
        print(f"recall@{args.recall_k}: {recall_at_k(run, judgments, args.recall_k):.4f}")
    if args.jsonl:
        Path(args.jsonl).write_text(report.to_jsonl() + "\n", encoding="utf-8")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
