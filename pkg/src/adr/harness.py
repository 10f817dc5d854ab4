"""Training loop, decoding, evaluation metrics and attention export.

The harness drives either model family through a shared surface: both
model modules expose ``forward_loss``, ``forward_attention``,
``greedy_decode`` and ``parameters`` with identical signatures, so
everything here dispatches on the model instance and otherwise stays
architecture-blind.

Training minimizes the mean per-token negative log-likelihood with Adam,
multiplying the learning rate by a decay factor whenever dev loss fails
to improve. A NaN loss aborts with a diagnostic rather than continuing
to train on garbage.
"""

from __future__ import annotations

import csv
import math
import unicodedata
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import rnn_seq2seq, transformer
from .autodiff import Tape, Tensor
from .checkpoint import Checkpoint
from .errors import (
    CheckpointError,
    CorpusSizeError,
    DataError,
    DivergenceError,
    EmptySentenceError,
    UndefinedMetricError,
)
from .rng import SplitMix64
from .rnn_seq2seq import AttentionMatrix, Seq2SeqConfig, Seq2SeqModel
from .text_pipeline import DatasetSplit, ParallelCorpus, Sentence
from .transformer import TransformerConfig, TransformerModel
from .vocab import DEFAULT_MIN_COUNT, UNK, Vocab, build_vocab

ARCHITECTURES = ("soft_dot", "soft_add", "transformer")


@dataclass(frozen=True)
class TrainConfig:
    architecture: str = "soft_dot"
    cell_kind: str = "gru"
    num_layers: int = 1
    hidden_dim: int = 64
    embed_dim: int = 64
    attn_dim: int = 64
    num_heads: int = 4
    ff_dim: int = 128
    positional_kind: str = "concat"
    epochs: int = 50
    batch_size: int = 1
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    lr_decay: float = 0.7
    min_count: int = DEFAULT_MIN_COUNT
    seed: int = 0
    # Optional early stop: every accuracy_check_every epochs, measure
    # greedy train-token accuracy and stop once the target is reached.
    target_train_accuracy: float | None = None
    accuracy_check_every: int = 5

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        for name in ("num_layers", "hidden_dim", "embed_dim", "attn_dim",
                     "num_heads", "ff_dim", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    dev_loss: float
    dev_acc: float
    lr: float


@dataclass
class LoadedModel:
    kind: str
    model: Seq2SeqModel | TransformerModel
    src_vocab: Vocab
    tgt_vocab: Vocab


def _ops(model):
    return rnn_seq2seq if isinstance(model, Seq2SeqModel) else transformer


class Adam:
    """Adam with bias correction; ``lr`` is mutable for decay."""

    def __init__(self, params: dict[str, Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.t = 0

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.grad = None


def build_model(config: TrainConfig, src_vocab_size: int, tgt_vocab_size: int):
    rng = SplitMix64(config.seed)
    if config.architecture == "transformer":
        model_config = TransformerConfig(
            src_vocab_size=src_vocab_size,
            tgt_vocab_size=tgt_vocab_size,
            num_layers=config.num_layers,
            model_dim=config.hidden_dim,
            num_heads=config.num_heads,
            ff_dim=config.ff_dim,
            positional_kind=config.positional_kind,
        )
        return transformer.build_transformer(model_config, rng)
    model_config = Seq2SeqConfig(
        src_vocab_size=src_vocab_size,
        tgt_vocab_size=tgt_vocab_size,
        cell_kind=config.cell_kind,
        score_kind="add" if config.architecture == "soft_add" else "dot",
        num_layers=config.num_layers,
        embed_dim=config.embed_dim,
        hidden_dim=config.hidden_dim,
        attn_dim=config.attn_dim,
    )
    return rnn_seq2seq.build_seq2seq(model_config, rng)


def _encode_corpus(
    corpus: ParallelCorpus, src_vocab: Vocab, tgt_vocab: Vocab
) -> list[tuple[list[int], list[int]]]:
    return [(src_vocab.encode(src), tgt_vocab.encode(tgt)) for src, tgt in corpus.pairs]


def _mean_nll(model, pairs: Sequence[tuple[list[int], list[int]]]) -> float:
    ops = _ops(model)
    total, tokens = 0.0, 0
    for src_ids, tgt_ids in pairs:
        total += ops.forward_loss(model, src_ids, tgt_ids, reduction="sum").item()
        tokens += len(tgt_ids) + 1
    return total / tokens


def _greedy_accuracy(lm: LoadedModel, corpus: ParallelCorpus) -> float:
    predictions = [restore(lm, src)[0] for src, _ in corpus.pairs]
    return accuracy(predictions, corpus.targets())


def train(config: TrainConfig, split: DatasetSplit) -> tuple[Checkpoint, list[EpochMetrics]]:
    """Fit a model on ``split.train``, tracking loss and accuracy on ``split.dev``."""
    if len(split.train) == 0:
        raise CorpusSizeError("training split is empty")
    if len(split.dev) == 0:
        raise CorpusSizeError("dev split is empty")
    src_vocab = build_vocab(split.train.sources(), min_count=config.min_count)
    tgt_vocab = build_vocab(split.train.targets(), min_count=config.min_count)
    model = build_model(config, len(src_vocab), len(tgt_vocab))
    ops = _ops(model)
    params = ops.parameters(model)
    optimizer = Adam(params, config.learning_rate,
                     config.beta1, config.beta2, config.adam_eps)
    lm = LoadedModel(
        kind="rnn" if isinstance(model, Seq2SeqModel) else "transformer",
        model=model, src_vocab=src_vocab, tgt_vocab=tgt_vocab,
    )

    train_pairs = _encode_corpus(split.train, src_vocab, tgt_vocab)
    dev_pairs = _encode_corpus(split.dev, src_vocab, tgt_vocab)
    shuffle_rng = SplitMix64(config.seed + 1)
    order = list(range(len(train_pairs)))

    history: list[EpochMetrics] = []
    best_dev = math.inf
    stopped_early = False
    train_accuracy: float | None = None
    for epoch in range(1, config.epochs + 1):
        lr_used = optimizer.lr
        shuffle_rng.shuffle(order)
        total_nll, total_tokens = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_pairs[i] for i in order[start:start + config.batch_size]]
            batch_tokens = sum(len(tgt) + 1 for _, tgt in batch)
            for src_ids, tgt_ids in batch:
                with Tape() as tape:
                    loss = ops.forward_loss(model, src_ids, tgt_ids, reduction="sum")
                tape.backward(loss, seed=1.0 / batch_tokens)
                total_nll += loss.item()
            total_tokens += batch_tokens
            optimizer.step()
        train_loss = total_nll / total_tokens
        if math.isnan(train_loss) or math.isinf(train_loss):
            raise DivergenceError(
                f"training loss became {train_loss} at epoch {epoch}"
            )
        dev_loss = _mean_nll(model, dev_pairs)
        dev_acc = _greedy_accuracy(lm, split.dev)
        if dev_loss < best_dev:
            best_dev = dev_loss
        else:
            optimizer.lr *= config.lr_decay
        history.append(EpochMetrics(epoch, train_loss, dev_loss, dev_acc, lr_used))
        if config.target_train_accuracy is not None and (
            epoch % config.accuracy_check_every == 0 or epoch == config.epochs
        ):
            train_accuracy = _greedy_accuracy(lm, split.train)
            if train_accuracy >= config.target_train_accuracy:
                stopped_early = epoch < config.epochs
                break

    metadata = {
        "train_config": asdict(config),
        "epochs_run": len(history),
        "stopped_early": stopped_early,
        "final_lr": optimizer.lr,
        "loss_history": [asdict(m) for m in history],
    }
    if train_accuracy is not None:
        metadata["train_accuracy"] = train_accuracy
    ckpt = checkpoint_from_model(lm, metadata=metadata)
    return ckpt, history


# --- checkpoint plumbing ----------------------------------------------------


def checkpoint_from_model(lm: LoadedModel, metadata: dict | None = None) -> Checkpoint:
    params = _ops(lm.model).parameters(lm.model)
    return Checkpoint(
        kind=lm.kind,
        model_config=asdict(lm.model.config),
        src_vocab=lm.src_vocab,
        tgt_vocab=lm.tgt_vocab,
        params={name: p.data.copy() for name, p in params.items()},
        metadata=metadata or {},
    )


def model_from_checkpoint(ckpt: Checkpoint) -> LoadedModel:
    if ckpt.kind == "rnn":
        model = rnn_seq2seq.build_seq2seq(
            Seq2SeqConfig(**ckpt.model_config), SplitMix64(0)
        )
    elif ckpt.kind == "transformer":
        model = transformer.build_transformer(
            TransformerConfig(**ckpt.model_config), SplitMix64(0)
        )
    else:
        raise CheckpointError(f"unknown model kind {ckpt.kind!r}")
    params = _ops(model).parameters(model)
    if set(params) != set(ckpt.params):
        missing = sorted(set(params) ^ set(ckpt.params))
        raise CheckpointError(f"parameter names do not match config: {missing}")
    for name, p in params.items():
        saved = ckpt.params[name]
        if saved.shape != p.data.shape:
            raise CheckpointError(
                f"shape mismatch for {name}: saved {saved.shape}, "
                f"config implies {p.data.shape}"
            )
        p.data = saved.copy()
    return LoadedModel(
        kind=ckpt.kind, model=model,
        src_vocab=ckpt.src_vocab, tgt_vocab=ckpt.tgt_vocab,
    )


# --- decoding and evaluation ------------------------------------------------


def restore(lm: LoadedModel, source: Sequence[str]) -> tuple[Sentence, AttentionMatrix]:
    """Greedy diacritization of one tokenized sentence.

    UNK predictions are replaced by copying a source token: the one under
    the argmax of the step's attention row for the recurrent model, the
    position-aligned one for the transformer.
    """
    if len(source) == 0:
        raise EmptySentenceError("cannot restore an empty sentence")
    src_ids = lm.src_vocab.encode(source)
    out_ids, attn = _ops(lm.model).greedy_decode(lm.model, src_ids)
    tokens: list[str] = []
    for i, token_id in enumerate(out_ids):
        if token_id == UNK:
            if lm.kind == "rnn":
                j = int(np.argmax(attn.weights[i]))
            else:
                j = min(i, len(source) - 1)
            tokens.append(source[j])
        else:
            tokens.append(lm.tgt_vocab.tokens[token_id])
    return tuple(tokens), attn


def _nfc(token: str) -> str:
    return unicodedata.normalize("NFC", token)


def accuracy(predictions: Sequence[Sentence], targets: Sequence[Sentence]) -> float:
    """Fraction of token positions restored exactly, over all words.

    Token comparison is NFC string equality by position; when lengths
    differ, the unmatched positions count as wrong.
    """
    if len(predictions) != len(targets):
        raise DataError(
            f"prediction/target sentence counts differ: "
            f"{len(predictions)} vs {len(targets)}"
        )
    matched, total = 0, 0
    for pred, tgt in zip(predictions, targets):
        total += max(len(pred), len(tgt))
        matched += sum(
            _nfc(p) == _nfc(t) for p, t in zip(pred, tgt)
        )
    if total == 0:
        raise UndefinedMetricError("accuracy undefined: no target tokens")
    return matched / total


def ambiguous_token_accuracy(
    predictions: Sequence[Sentence],
    targets: Sequence[Sentence],
    sources: Sequence[Sentence],
    ambiguous_types: Iterable[str],
) -> float:
    """Accuracy restricted to positions whose source token is ambiguous."""
    if not (len(predictions) == len(targets) == len(sources)):
        raise DataError("prediction/target/source sentence counts differ")
    amb = set(ambiguous_types)
    matched, total = 0, 0
    for pred, tgt, src in zip(predictions, targets, sources):
        for i, src_tok in enumerate(src):
            if src_tok not in amb or i >= len(tgt):
                continue
            total += 1
            if i < len(pred) and _nfc(pred[i]) == _nfc(tgt[i]):
                matched += 1
    if total == 0:
        raise UndefinedMetricError("no ambiguous source tokens in sample")
    return matched / total


def prediction_perplexity(lm: LoadedModel, corpus: ParallelCorpus) -> float:
    """exp of the mean teacher-forced per-token NLL, EOS positions included."""
    if len(corpus) == 0:
        raise UndefinedMetricError("perplexity undefined on an empty corpus")
    pairs = _encode_corpus(corpus, lm.src_vocab, lm.tgt_vocab)
    return math.exp(_mean_nll(lm.model, pairs))


def export_attention(
    lm: LoadedModel,
    source: Sequence[str],
    target: Sequence[str],
    path: str | Path,
) -> np.ndarray:
    """Teacher-forced attention as CSV with token headers, 6-decimal cells.

    Rows are target tokens, columns source tokens; the trailing EOS step
    is not exported. Returns the exported matrix.
    """
    attn = _ops(lm.model).forward_attention(
        lm.model, lm.src_vocab.encode(source), lm.tgt_vocab.encode(target)
    )
    matrix = attn.weights[: len(target)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["", *source])
        for token, row in zip(target, matrix):
            writer.writerow([token, *(f"{x:.6f}" for x in row)])
    return matrix


def write_metrics_tsv(path: str | Path, history: Sequence[EpochMetrics]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\ttrain_loss\tdev_loss\tdev_acc\tlr\n")
        for m in history:
            fh.write(
                f"{m.epoch}\t{m.train_loss:.6f}\t{m.dev_loss:.6f}"
                f"\t{m.dev_acc:.6f}\t{m.lr:.8g}\n"
            )
