"""Interpolated n-gram language model and lookup restoration baselines.

The LM mixes maximum-likelihood estimates of orders 1..n with fixed
interpolation weights; the unigram component is add-one smoothed over the
event space (training vocabulary plus UNK and EOS), which keeps every
conditional distribution normalized and strictly positive. A component
whose context was never observed falls back to the smoothed unigram, so
normalization holds for arbitrary contexts.

Two baselines restore diacritics by lexicon lookup: pick the most frequent
form of each word, or pick the form the bigram LM scores highest given the
previously chosen word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import CorpusSizeError, DataError, EmptySentenceError
from .metrics import Lexicon
from .text_pipeline import Sentence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_DEFAULT_WEIGHTS = {1: (1.0,), 2: (0.25, 0.75), 3: (0.2, 0.3, 0.5)}

Context = tuple[str, ...]


@dataclass
class NgramLM:
    order: int
    # context tuple (length 0..order-1) -> {token -> count}
    counts: dict[Context, dict[str, int]]
    interpolation_weights: tuple[float, ...]
    vocab: set[str]
    _context_totals: dict[Context, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.order <= 3:
            raise ValueError(f"order must be 1..3, got {self.order}")
        if len(self.interpolation_weights) != self.order:
            raise ValueError("need one interpolation weight per order")
        if abs(sum(self.interpolation_weights) - 1.0) > 1e-9:
            raise ValueError("interpolation weights must sum to 1")
        if self.interpolation_weights[0] <= 0:
            raise ValueError("unigram weight must be positive to keep p > 0")
        if not self._context_totals:
            self._context_totals = {
                ctx: sum(toks.values()) for ctx, toks in self.counts.items()
            }

    @property
    def event_vocab(self) -> set[str]:
        """Symbols the model assigns probability to."""
        return self.vocab | {UNK, EOS}

    def _map(self, token: str) -> str:
        return token if token in self.vocab or token in (BOS, EOS) else UNK

    def prob(self, token: str, history: Context = ()) -> float:
        """Interpolated p(token | history). OOV symbols map to UNK."""
        token = self._map(token)
        if token == BOS:
            return 0.0
        history = tuple(self._map(t) for t in history)
        padded = (BOS,) * (self.order - 1) + history
        v = len(self.event_vocab)
        n = self._context_totals[()]
        unigram = (self.counts[()].get(token, 0) + 1) / (n + v)
        p = self.interpolation_weights[0] * unigram
        for k in range(2, self.order + 1):
            ctx = padded[len(padded) - (k - 1):]
            total = self._context_totals.get(ctx, 0)
            if total > 0:
                component = self.counts[ctx].get(token, 0) / total
            else:
                component = unigram
            p += self.interpolation_weights[k - 1] * component
        return p

    def logprob(self, token: str, history: Context = ()) -> float:
        return math.log(self.prob(token, history))


def _events(sentence: Sentence, order: int):
    """(context, token) pairs for each token and the closing EOS."""
    symbols = (BOS,) * (order - 1) + tuple(sentence) + (EOS,)
    for i in range(order - 1, len(symbols)):
        yield symbols[i - order + 1:i], symbols[i]


def train_lm(
    corpus: Sequence[Sentence],
    order: int,
    interpolation_weights: tuple[float, ...] | None = None,
) -> NgramLM:
    """Count n-grams of all orders up to ``order`` over the corpus."""
    if not corpus:
        raise CorpusSizeError("cannot train a language model on an empty corpus")
    if interpolation_weights is None:
        interpolation_weights = _DEFAULT_WEIGHTS.get(order)
        if interpolation_weights is None:
            raise ValueError(f"order must be 1..3, got {order}")
    vocab: set[str] = set()
    counts: dict[Context, dict[str, int]] = {}
    for sentence in corpus:
        vocab.update(sentence)
        for k in range(1, order + 1):
            for context, token in _events(sentence, k):
                bucket = counts.setdefault(context, {})
                bucket[token] = bucket.get(token, 0) + 1
    return NgramLM(order, counts, tuple(interpolation_weights), vocab)


def perplexity(lm: NgramLM, corpus: Sequence[Sentence]) -> float:
    """exp of the mean negative log-probability per token, EOS included."""
    log_sum = 0.0
    n_events = 0
    for sentence in corpus:
        history: list[str] = []
        for token in tuple(sentence) + (EOS,):
            log_sum += lm.logprob(token, tuple(history))
            history.append(token)
            n_events += 1
    if n_events == 0:
        raise CorpusSizeError("perplexity of an empty corpus")
    return math.exp(-log_sum / n_events)


def restore_unigram(lexicon: Lexicon, source: Sentence) -> Sentence:
    """Replace each word with its most frequent diacritized form.

    Unknown words pass through unchanged; count ties break toward the
    NFC-lexicographically smallest form.
    """
    out = []
    for token in source:
        forms = lexicon.forms(token)
        if not forms:
            out.append(token)
        else:
            out.append(min(forms, key=lambda f: (-forms[f], f)))
    return tuple(out)


def restore_bigram(lexicon: Lexicon, lm: NgramLM, source: Sentence) -> Sentence:
    """Greedy left-to-right restoration scored by the language model.

    Each word's candidate forms are ranked by p(form | previously chosen
    word); ties break like the unigram baseline.
    """
    if not source:
        raise EmptySentenceError("cannot restore an empty sentence")
    out: list[str] = []
    for token in source:
        forms = lexicon.forms(token)
        if not forms:
            out.append(token)
        else:
            out.append(min(forms, key=lambda f: (-lm.prob(f, tuple(out)), f)))
    return tuple(out)


# --- persistence -----------------------------------------------------------
#
# TSV layout, version 1:
#   #adr-ngram	1
#   #order	<n>
#   #weights	<w1>	...	<wn>
#   order	context	token	count
#   1		mu	3         <- unigram rows have an empty context field
#   2	<s>	mú	2         <- context symbols are space-joined

_MAGIC = "#adr-ngram"
_FORMAT_VERSION = 1


def save_lm(lm: NgramLM, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{_MAGIC}\t{_FORMAT_VERSION}\n")
        fh.write(f"#order\t{lm.order}\n")
        fh.write("#weights\t" + "\t".join(repr(w) for w in lm.interpolation_weights) + "\n")
        fh.write("order\tcontext\ttoken\tcount\n")
        for context in sorted(lm.counts):
            for token in sorted(lm.counts[context]):
                fh.write(
                    f"{len(context) + 1}\t{' '.join(context)}\t{token}"
                    f"\t{lm.counts[context][token]}\n"
                )


def load_lm(path: Path) -> NgramLM:
    with open(path, encoding="utf-8") as fh:
        magic = fh.readline().rstrip("\n").split("\t")
        if magic[0] != _MAGIC:
            raise DataError(f"{path}: not an n-gram model file")
        if int(magic[1]) != _FORMAT_VERSION:
            raise DataError(f"{path}: unsupported format version {magic[1]}")
        order = int(fh.readline().split("\t")[1])
        weights = tuple(float(w) for w in fh.readline().rstrip("\n").split("\t")[1:])
        fh.readline()  # column header
        counts: dict[Context, dict[str, int]] = {}
        for line in fh:
            _, context_field, token, count = line.rstrip("\n").split("\t")
            context = tuple(context_field.split(" ")) if context_field else ()
            counts.setdefault(context, {})[token] = int(count)
    vocab = {t for t in counts.get((), {}) if t not in (BOS, EOS, UNK)}
    return NgramLM(order, counts, weights, vocab)
