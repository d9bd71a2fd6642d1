"""Command-line entry point: ``ptrparse <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from . import checkpoint
from .checkpoint import CheckpointError
from .decoder import beam_decode, greedy_decode
from .evaluation import action_stats, ner_prf, parseval
from .oracle import extract_oracle
from .pipeline import build_model, to_training_pairs
from .pointing import IllegalAction
from .scorer import ScorerConfig
from .trainer import TrainConfig, train
from .treebank import (
    SENTENCE,
    TreeError,
    emit_brackets,
    ner_to_tree,
    parse_brackets,
    postprocess,
    preprocess,
    read_records,
    read_trees,
    record_from_json,
    record_to_json,
    tree_to_entities,
)

THREADS_ENV = "PTRPARSE_THREADS"

# options that may also come from --config; None on the command line means unset
TRAIN_OPTIONS = {
    "epochs": ("train", "epochs"),
    "peak_lr": ("train", "peak_lr"),
    "max_tokens": ("train", "max_tokens_per_batch"),
    "warmup_fraction": ("train", "warmup_fraction"),
    "grad_clip": ("train", "grad_clip"),
    "eval_every": ("train", "eval_every"),
    "embed_dim": ("model", "embed_dim"),
    "encoder_hidden": ("model", "encoder_hidden"),
    "encoder_layers": ("model", "encoder_layers"),
    "decoder_hidden": ("model", "decoder_hidden"),
    "mlp_hidden": ("model", "mlp_hidden"),
    "label_embed_dim": ("model", "label_embed_dim"),
    "dropout": ("model", "dropout_rate"),
}


@contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as f:
            yield f


def _read_lines(path):
    if path == "-":
        return sys.stdin.read().splitlines()
    with open(path, encoding="utf-8") as f:
        return f.read().splitlines()


def _load_corpus(path, task, pos_tagged=False):
    lines = _read_lines(path)
    return read_records(lines) if task == "ner" else read_trees(lines, pos_tagged)


def _workers(args) -> int:
    if args.workers:
        return args.workers
    return int(os.environ.get(THREADS_ENV, "1"))


def _sentence_tokens(line: str, lineno: int):
    s = line.strip()
    try:
        if s.startswith("("):
            return parse_brackets(s).tokens
        if s.startswith("{"):
            return record_from_json(s).tokens
    except (TreeError, ValueError) as exc:
        raise TreeError(f"line {lineno}: {exc}") from None
    return tuple(s.split())


# ---------------------------------------------------------------------------


def cmd_preprocess(args):
    trees = _load_corpus(args.input, "parse", args.pos_tagged)
    with _open_out(args.output) as out:
        for tree in trees:
            out.write(emit_brackets(preprocess(tree)) + "\n")


def cmd_oracle(args):
    items = _load_corpus(args.input, args.task, args.pos_tagged)
    with _open_out(args.output) as out:
        for i, item in enumerate(items, 1):
            try:
                tree = ner_to_tree(item) if args.task == "ner" else preprocess(item)
                out.write(extract_oracle(tree).to_line() + "\n")
            except TreeError as exc:
                raise TreeError(f"sentence {i}: {exc}") from None


def _merged_options(args):
    merged = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
        if args.config.endswith((".yaml", ".yml")):
            import yaml
            merged.update(yaml.safe_load(text) or {})
        else:
            merged.update(json.loads(text))
        unknown = set(merged) - set(TRAIN_OPTIONS) - {"seed", "no_prev_label", "legal_normalization"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in list(TRAIN_OPTIONS) + ["seed"]:
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    if args.no_prev_label:
        merged["no_prev_label"] = True
    if args.legal_normalization:
        merged["legal_normalization"] = True
    return merged


def cmd_train(args):
    opts = _merged_options(args)
    model_kw, train_kw = {}, {}
    for key, (group, name) in TRAIN_OPTIONS.items():
        if key in opts:
            (model_kw if group == "model" else train_kw)[name] = opts[key]
    seed = int(opts.get("seed", 0))
    scfg = ScorerConfig(use_prev_label=not opts.get("no_prev_label", False),
                        legal_normalization=bool(opts.get("legal_normalization", False)),
                        seed=seed, **model_kw)
    tcfg = TrainConfig(seed=seed, **train_kw)
    pairs = to_training_pairs(_load_corpus(args.input, args.task, args.pos_tagged))
    dev = None
    if args.dev:
        dev = to_training_pairs(_load_corpus(args.dev, args.task, args.pos_tagged))
    elif args.no_holdout:
        dev = []
    model = build_model(pairs + (dev or []), scfg)
    log_file = open(args.log, "w", encoding="utf-8") if args.log else None
    try:
        result = train(model, pairs, tcfg, dev=dev, log_file=log_file)
    finally:
        if log_file:
            log_file.close()
    checkpoint.save(model, args.model)
    if args.figure:
        from .plotting import plot_training_curve
        plot_training_curve(result.history, args.figure)
    last = result.history[-1]
    print(f"trained {tcfg.epochs} epochs, final loss {last['loss']:.4f}; saved {args.model}", file=sys.stderr)


def cmd_parse(args):
    model = checkpoint.load(args.model)
    task = args.task or ("ner" if SENTENCE in model.labels.stoi else "parse")
    lines = [(i, line) for i, line in enumerate(_read_lines(args.input), 1) if line.strip()]
    sentences = [_sentence_tokens(line, i) for i, line in lines]
    beam = args.beam

    def run(tokens):
        if beam > 1:
            return beam_decode(model, tokens, beam)
        return greedy_decode(model, tokens, trace=args.trace)

    with ThreadPoolExecutor(max_workers=_workers(args)) as pool:
        results = list(pool.map(run, sentences))
    with _open_out(args.output) as out:
        for k, res in enumerate(results, 1):
            if args.trace:
                for step in res.trace:
                    print(f"{k}\t" + "\t".join(str(x) for x in step), file=sys.stderr)
            if task == "ner":
                out.write(record_to_json(tree_to_entities(res.tree)) + "\n")
            else:
                out.write(emit_brackets(postprocess(res.tree)) + "\n")


def cmd_eval(args):
    gold = _load_corpus(args.gold, args.task)
    pred = _load_corpus(args.pred, args.task)
    if args.task == "ner":
        report = ner_prf(gold, pred)
    else:
        report = parseval(gold, pred, exclude_root=args.exclude_root)
    print(report)
    if args.json:
        with _open_out(args.json) as out:
            out.write(json.dumps(report.as_dict()) + "\n")


def cmd_stats(args):
    items = _load_corpus(args.input, args.task, args.pos_tagged)
    stats = action_stats(items)
    with _open_out(args.output) as out:
        out.write("length\tactions\n")
        for n, c in stats.rows:
            out.write(f"{n}\t{c}\n")
    print("length\tsentences\tmean_actions\tmin\tmax", file=sys.stderr)
    for n, k, mean, lo, hi in stats.by_length():
        print(f"{n}\t{k}\t{mean:.2f}\t{lo}\t{hi}", file=sys.stderr)
    print(f"sentences={len(stats.rows)} tokens={stats.total_tokens} actions={stats.total_actions} "
          f"actions_per_token={stats.actions_per_token:.4f}", file=sys.stderr)
    if args.figure:
        from .plotting import plot_action_counts
        plot_action_counts(stats, args.figure)


def cmd_ner_convert(args):
    lines = _read_lines(args.input)
    with _open_out(args.output) as out:
        if args.to == "trees":
            for rec in read_records(lines):
                out.write(emit_brackets(ner_to_tree(rec)) + "\n")
        else:
            for tree in read_trees(lines):
                out.write(record_to_json(tree_to_entities(tree)) + "\n")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptrparse", description="Post-order pointing parser for trees and nested entities.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def task_flag(p, default="parse"):
        p.add_argument("--task", choices=["parse", "ner"], default=default)

    p = add("preprocess", cmd_preprocess, "collapse unary chains and insert EMPTY spans")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--pos-tagged", action="store_true", help="drop part-of-speech pre-terminals")

    p = add("oracle", cmd_oracle, "write gold action sequences")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    task_flag(p)
    p.add_argument("--pos-tagged", action="store_true")

    p = add("train", cmd_train, "train a model and write a checkpoint")
    p.add_argument("input")
    p.add_argument("--model", required=True, help="checkpoint to write")
    task_flag(p)
    p.add_argument("--dev", help="development corpus (default: 10%% of the input)")
    p.add_argument("--no-holdout", action="store_true", help="train on the whole input")
    p.add_argument("--config", help="JSON or YAML file with option defaults")
    p.add_argument("--log", help="line-delimited training log")
    p.add_argument("--figure", help="write a training-curve figure")
    p.add_argument("--pos-tagged", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--peak-lr", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--warmup-fraction", type=float)
    p.add_argument("--grad-clip", type=float)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--encoder-hidden", type=int)
    p.add_argument("--encoder-layers", type=int)
    p.add_argument("--decoder-hidden", type=int)
    p.add_argument("--mlp-hidden", type=int)
    p.add_argument("--label-embed-dim", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--no-prev-label", action="store_true", help="drop the previous-label input of the decoder")
    p.add_argument("--legal-normalization", action="store_true",
                   help="normalize the pointing loss over legal boundaries only")

    p = add("parse", cmd_parse, "decode sentences with a trained model")
    p.add_argument("input", help="one sentence per line: tokens, a bracketed tree or a JSON record")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--task", choices=["parse", "ner"])
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="write (sentence, step, cursor, target, label, score) to stderr")
    p.add_argument("--workers", type=int)

    p = add("eval", cmd_eval, "labeled precision/recall/F1")
    p.add_argument("gold")
    p.add_argument("pred")
    task_flag(p)
    p.add_argument("--exclude-root", action="store_true")
    p.add_argument("--json", help="also write the report as a JSON line")

    p = add("stats", cmd_stats, "oracle action counts per sentence")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="per-sentence (length, actions) table")
    task_flag(p)
    p.add_argument("--pos-tagged", action="store_true")
    p.add_argument("--figure", help="write an action-count figure")

    p = add("ner-convert", cmd_ner_convert, "convert entity records to trees or back")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--to", choices=["trees", "records"], default="trees")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    for attr in ("input", "gold", "pred", "dev", "config"):
        path = getattr(args, attr, None)
        if path and path != "-" and not os.path.exists(path):
            print(f"error: {path}: no such file", file=sys.stderr)
            return 1
    if args.command == "parse" and args.beam < 1:
        print("error: --beam must be >= 1", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except (TreeError, CheckpointError, IllegalAction, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
