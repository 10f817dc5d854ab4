"""Command-line entry point for the diacritic restoration pipeline.

Subcommands cover the full workflow: prepare a raw diacritized corpus
into splits, report ambiguity statistics, train and apply n-gram
baselines, train a neural model, restore diacritics, evaluate, export
attention matrices, and generate the synthetic validation corpus.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
divergence. Diagnostics go to standard error; data goes to files or
standard output only. ADR_SEED serves as the seed fallback when a
subcommand takes a seed and none is given.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__, harness, metrics, ngram, text_pipeline
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DataError, DivergenceError, UndefinedMetricError
from .harness import TrainConfig
from .synth import synth_corpus
from .text_pipeline import (
    make_parallel,
    normalize_and_tokenize,
    prepare_sentences,
    read_parallel,
    read_sentences,
    read_split_files,
    split_dataset,
    write_sentences,
    write_split_files,
)


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 on usage errors instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _require_file(path: str | Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    return path


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("ADR_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DataError(f"ADR_SEED must be an integer, got {env!r}") from None


# --- subcommands ------------------------------------------------------------


def cmd_prepare(args) -> int:
    lines = _require_file(args.infile).read_text(encoding="utf-8").splitlines()
    sentences, dropped = prepare_sentences(lines, max_tokens=args.max_tokens)
    corpus = make_parallel(sentences)
    split = split_dataset(corpus, _resolve_seed(args.seed), tuple(args.ratios))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = out_dir / Path(args.infile).stem
    paths = write_split_files(split, prefix)
    _note(
        f"prepared {len(corpus)} sentences ({dropped} dropped as overlong): "
        f"train={len(split.train)} dev={len(split.dev)} test={len(split.test)}"
    )
    _note("wrote " + " ".join(str(p) for p in paths))
    return 0


def cmd_stats(args) -> int:
    corpus = read_parallel(_require_file(args.src), _require_file(args.tgt))
    stats = metrics.corpus_stats(corpus)
    print(metrics.format_stats(stats))
    if args.weighted:
        lexicon = metrics.build_lexicon(corpus)
        weighted = metrics.lexdif(lexicon, frequency_weighted=True)
        print(f"lexdif_weighted={weighted:.6f}")
    if args.lexicon_out:
        metrics.write_lexicon_tsv(metrics.build_lexicon(corpus), Path(args.lexicon_out))
        _note(f"wrote lexicon to {args.lexicon_out}")
    return 0


def cmd_train_lm(args) -> int:
    sentences = read_sentences(_require_file(args.tgt))
    weights = tuple(args.weights) if args.weights else None
    lm = ngram.train_lm(sentences, args.order, weights)
    ngram.save_lm(lm, Path(args.out))
    _note(f"trained order-{args.order} model on {len(sentences)} sentences")
    if args.eval:
        ppl = ngram.perplexity(lm, read_sentences(_require_file(args.eval)))
        print(f"perplexity={ppl:.6f}")
    return 0


def cmd_baseline(args) -> int:
    train_corpus = read_parallel(
        _require_file(args.train_src), _require_file(args.train_tgt)
    )
    lexicon = metrics.build_lexicon(train_corpus)
    sources = read_sentences(_require_file(args.infile))
    if args.kind == "unigram":
        predictions = [ngram.restore_unigram(lexicon, s) for s in sources]
    else:
        lm = ngram.train_lm(train_corpus.targets(), order=2)
        predictions = [ngram.restore_bigram(lexicon, lm, s) for s in sources]
    write_sentences(Path(args.out), predictions)
    _note(f"wrote {len(predictions)} {args.kind} restorations to {args.out}")
    if args.ref:
        refs = read_sentences(_require_file(args.ref))
        print(f"accuracy={harness.accuracy(predictions, refs):.6f}")
    return 0


_CONFIG_FLAGS = {
    # flag dest -> TrainConfig field
    "arch": "architecture",
    "cell": "cell_kind",
    "layers": "num_layers",
    "hidden_dim": "hidden_dim",
    "embed_dim": "embed_dim",
    "attn_dim": "attn_dim",
    "heads": "num_heads",
    "ff_dim": "ff_dim",
    "positional": "positional_kind",
    "epochs": "epochs",
    "batch_size": "batch_size",
    "lr": "learning_rate",
    "beta1": "beta1",
    "beta2": "beta2",
    "adam_eps": "adam_eps",
    "lr_decay": "lr_decay",
    "min_count": "min_count",
    "seed": "seed",
    "target_train_accuracy": "target_train_accuracy",
    "accuracy_check_every": "accuracy_check_every",
}


def _parse_config_value(raw: str):
    for convert in (int, float):
        try:
            return convert(raw)
        except ValueError:
            continue
    return raw


def _read_config_file(path: Path) -> dict:
    """key = value lines; blank lines and # comments ignored."""
    values = {}
    known = {f.name for f in fields(TrainConfig)}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in known:
            raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _parse_config_value(raw.strip())
    return values


def _build_train_config(args) -> TrainConfig:
    merged = asdict(TrainConfig())
    file_values = _read_config_file(_require_file(args.config)) if args.config else {}
    merged.update(file_values)
    for dest, field_name in _CONFIG_FLAGS.items():
        value = getattr(args, dest)
        if value is not None:
            merged[field_name] = value
    if args.seed is None and "seed" not in file_values:
        merged["seed"] = _resolve_seed(None)
    return TrainConfig(**merged)


def cmd_train(args) -> int:
    split = read_split_files(Path(args.data))
    config = _build_train_config(args)
    ckpt, history = harness.train(config, split)
    save_checkpoint(args.out, ckpt)
    metrics_path = args.metrics or f"{args.out}.metrics.tsv"
    harness.write_metrics_tsv(metrics_path, history)
    if history:
        last = history[-1]
        _note(
            f"trained {config.architecture} for {len(history)} epochs: "
            f"train_loss={last.train_loss:.4f} dev_loss={last.dev_loss:.4f} "
            f"dev_acc={last.dev_acc:.4f}"
        )
    _note(f"wrote {args.out} and {metrics_path}")
    return 0


def cmd_restore(args) -> int:
    lm = harness.model_from_checkpoint(load_checkpoint(_require_file(args.model)))
    lines = [args.text] if args.text is not None else sys.stdin.read().splitlines()
    for line in lines:
        try:
            tokens = normalize_and_tokenize(line)
        except DataError:
            print("")
            continue
        restored, _ = harness.restore(lm, tokens)
        print(" ".join(restored))
    return 0


def cmd_eval(args) -> int:
    lm = harness.model_from_checkpoint(load_checkpoint(_require_file(args.model)))
    split = read_split_files(Path(args.data))
    corpus = getattr(split, args.split)
    predictions = [harness.restore(lm, src)[0] for src, _ in corpus.pairs]
    print(f"accuracy={harness.accuracy(predictions, corpus.targets()):.6f}")
    print(f"perplexity={harness.prediction_perplexity(lm, corpus):.6f}")
    lexicon = metrics.build_lexicon(split.train)
    ambiguous = {t for t in lexicon.entries if len(lexicon.forms(t)) > 1}
    try:
        amb_acc = harness.ambiguous_token_accuracy(
            predictions, corpus.targets(), corpus.sources(), ambiguous
        )
        print(f"ambiguous_accuracy={amb_acc:.6f}")
    except UndefinedMetricError:
        _note("no ambiguous tokens in this split; skipping ambiguous_accuracy")
    return 0


def cmd_attention(args) -> int:
    lm = harness.model_from_checkpoint(load_checkpoint(_require_file(args.model)))
    source = normalize_and_tokenize(args.source)
    target = normalize_and_tokenize(args.target)
    harness.export_attention(lm, source, target, Path(args.out))
    _note(f"wrote {len(target)}x{len(source)} attention matrix to {args.out}")
    return 0


def cmd_synth(args) -> int:
    seed = _resolve_seed(args.seed)
    corpus = synth_corpus(seed, args.n)
    prefix = Path(args.out)
    if prefix.parent != Path(""):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    if args.split:
        paths = write_split_files(split_dataset(corpus, seed), prefix)
    else:
        paths = [Path(f"{prefix}.src"), Path(f"{prefix}.tgt")]
        write_sentences(paths[0], corpus.sources())
        write_sentences(paths[1], corpus.targets())
    _note(f"wrote {len(corpus)} synthetic pairs: " + " ".join(str(p) for p in paths))
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"adr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split a raw diacritized corpus into datasets")
    p.add_argument("--in", dest="infile", required=True, help="raw UTF-8 corpus file")
    p.add_argument("--out", required=True, help="output directory for split files")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratios", type=float, nargs=3, default=(0.8, 0.1, 0.1),
                   metavar=("TRAIN", "DEV", "TEST"))
    p.add_argument("--max-tokens", type=int, default=text_pipeline.DEFAULT_MAX_TOKENS)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("stats", help="ambiguity statistics of a parallel corpus")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--weighted", action="store_true",
                   help="also print frequency-weighted lexdif")
    p.add_argument("--lexicon-out", default=None, help="write the lexicon as TSV")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-lm", help="train an interpolated n-gram model")
    p.add_argument("--tgt", required=True, help="diacritized training sentences")
    p.add_argument("--order", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--weights", type=float, nargs="+", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--eval", default=None, help="report perplexity on this file")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("baseline", help="restore diacritics with an n-gram baseline")
    p.add_argument("kind", choices=("unigram", "bigram"))
    p.add_argument("--train-src", required=True)
    p.add_argument("--train-tgt", required=True)
    p.add_argument("--in", dest="infile", required=True, help="undiacritized input")
    p.add_argument("--out", required=True, help="restored output file")
    p.add_argument("--ref", default=None, help="gold file; prints accuracy when given")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train a neural restoration model")
    p.add_argument("--data", required=True,
                   help="split-file prefix as written by prepare or synth --split")
    p.add_argument("--out", required=True, help="checkpoint path (.adrckpt)")
    p.add_argument("--metrics", default=None, help="metrics TSV path")
    p.add_argument("--config", default=None, help="key = value defaults file")
    p.add_argument("--arch", choices=harness.ARCHITECTURES, default=None)
    p.add_argument("--cell", choices=("gru", "lstm"), default=None)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--hidden-dim", type=int, default=None)
    p.add_argument("--embed-dim", type=int, default=None)
    p.add_argument("--attn-dim", type=int, default=None)
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--ff-dim", type=int, default=None)
    p.add_argument("--positional", choices=("concat", "add", "none"), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--adam-eps", type=float, default=None)
    p.add_argument("--lr-decay", type=float, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--target-train-accuracy", type=float, default=None)
    p.add_argument("--accuracy-check-every", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("restore", help="restore diacritics with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--text", default=None,
                   help="sentence to restore; reads stdin lines when omitted")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("eval", help="accuracy and perplexity of a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="split-file prefix")
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attention", help="export a teacher-forced attention matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True, help="undiacritized sentence")
    p.add_argument("--target", required=True, help="diacritized sentence")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_attention)

    p = sub.add_parser("synth", help="generate the synthetic validation corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--split", action="store_true",
                   help="write train/dev/test split files instead of one pair")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, UndefinedMetricError, OSError) as exc:
        print(f"adr: error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"adr: error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"adr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
