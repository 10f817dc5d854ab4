"""Corpus preparation for diacritic restoration.

Raw UTF-8 text goes through sentence splitting, normalization and
tokenization, then each diacritized sentence is paired with a copy whose
combining marks have been removed. Stripping works on Unicode normal form
NFD and deletes every codepoint of general category Mn (non-spacing mark),
so it covers all tonal and orthographic diacritics at once; the result is
recomposed to NFC.

Datasets are shuffled with the pinned splitmix64 generator from
:mod:`adr.rng`, which keeps train/dev/test splits reproducible across
implementations, not merely across runs.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusSizeError, DataError, EmptySentenceError
from .rng import SplitMix64

# A sentence is an ordered tuple of NFC-normalized, lowercased tokens.
Sentence = tuple[str, ...]

COMBINING_GRAVE = "̀"
COMBINING_ACUTE = "́"
COMBINING_MACRON = "̄"
COMBINING_CARON = "̌"
COMBINING_DOT_BELOW = "̣"

# Diacritized-character inventory as (base letter, combining marks in NFD
# order). Dot-below sorts before the tone marks under canonical ordering.
_DIACRITIZED_NFD: tuple[tuple[str, str], ...] = (
    ("a", COMBINING_GRAVE), ("a", COMBINING_ACUTE), ("a", COMBINING_CARON),
    ("e", COMBINING_GRAVE), ("e", COMBINING_ACUTE), ("e", COMBINING_DOT_BELOW),
    ("e", COMBINING_DOT_BELOW + COMBINING_GRAVE),
    ("e", COMBINING_DOT_BELOW + COMBINING_ACUTE),
    ("i", COMBINING_GRAVE), ("i", COMBINING_ACUTE),
    ("o", COMBINING_GRAVE), ("o", COMBINING_ACUTE), ("o", COMBINING_DOT_BELOW),
    ("o", COMBINING_DOT_BELOW + COMBINING_GRAVE),
    ("o", COMBINING_DOT_BELOW + COMBINING_ACUTE),
    ("o", COMBINING_CARON),
    ("u", COMBINING_GRAVE), ("u", COMBINING_ACUTE), ("u", COMBINING_CARON),
    ("n", COMBINING_GRAVE), ("n", COMBINING_ACUTE), ("n", COMBINING_MACRON),
    ("s", COMBINING_DOT_BELOW),
)


@dataclass(frozen=True)
class YorubaAlphabet:
    """Base letters plus the combining marks used by the orthography."""

    base_characters: frozenset[str]
    combining_marks: frozenset[str]

    def diacritized_characters(self) -> dict[str, str]:
        """NFC diacritized character -> its mark-free base letter."""
        return {
            unicodedata.normalize("NFC", base + marks): base
            for base, marks in _DIACRITIZED_NFD
        }


DEFAULT_ALPHABET = YorubaAlphabet(
    base_characters=frozenset("abdefghijklmnoprstuwy"),
    combining_marks=frozenset(
        {COMBINING_GRAVE, COMBINING_ACUTE, COMBINING_MACRON,
         COMBINING_CARON, COMBINING_DOT_BELOW}
    ),
)

# ASCII punctuation plus typographic quotes, dashes and ellipsis.
DEFAULT_PUNCTUATION = frozenset(
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
    "‘’‚‛“”„‟"
    "‐‑‒–—―…«»‹›"
)

# Sentences longer than this are dropped during preparation.
DEFAULT_MAX_TOKENS = 64


@dataclass(frozen=True)
class ParallelCorpus:
    """Aligned (undiacritized source, diacritized target) sentence pairs."""

    pairs: tuple[tuple[Sentence, Sentence], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def sources(self) -> list[Sentence]:
        return [src for src, _ in self.pairs]

    def targets(self) -> list[Sentence]:
        return [tgt for _, tgt in self.pairs]

    def check(self) -> None:
        """Raise DataError unless every pair is aligned and stripped."""
        for i, (src, tgt) in enumerate(self.pairs):
            if len(src) != len(tgt):
                raise DataError(f"pair {i}: {len(src)} source vs {len(tgt)} target tokens")
            for s, t in zip(src, tgt):
                if strip_diacritics(t) != s:
                    raise DataError(f"pair {i}: {t!r} does not strip to {s!r}")


@dataclass(frozen=True)
class DatasetSplit:
    train: ParallelCorpus
    dev: ParallelCorpus
    test: ParallelCorpus
    # None when loaded from files of unknown provenance.
    seed: int | None
    ratios: tuple[float, float, float] | None


def strip_diacritics(text: str) -> str:
    """Remove every combining mark (Unicode category Mn) from ``text``.

    Decomposes to NFD, drops the Mn codepoints, recomposes to NFC.
    Idempotent: already-stripped text passes through unchanged.
    """
    decomposed = unicodedata.normalize("NFD", text)
    bare = "".join(c for c in decomposed if unicodedata.category(c) != "Mn")
    return unicodedata.normalize("NFC", bare)


def normalize_and_tokenize(
    text: str, punct_set: frozenset[str] = DEFAULT_PUNCTUATION
) -> Sentence:
    """Lowercase, NFC-normalize, drop punctuation, split on whitespace.

    Raises EmptySentenceError when nothing but whitespace/punctuation
    remains, so callers can skip the line rather than store an empty
    sentence.
    """
    lowered = unicodedata.normalize("NFC", text.lower())
    cleaned = "".join(c for c in lowered if c not in punct_set)
    tokens = tuple(cleaned.split())
    if not tokens:
        raise EmptySentenceError(f"no tokens left in {text!r}")
    return tokens


def split_sentences(lines: Iterable[str]) -> list[str]:
    """Split lines on full stops, one sentence per output element.

    The full stop stays attached to its sentence; blank segments (runs of
    dots, trailing dots) produce no output.
    """
    out: list[str] = []
    for line in lines:
        parts = line.split(".")
        for part in parts[:-1]:
            if part.strip():
                out.append(part.strip() + ".")
        if parts[-1].strip():
            out.append(parts[-1].strip())
    return out


def make_parallel(targets: Sequence[Sentence]) -> ParallelCorpus:
    """Pair each diacritized sentence with its stripped source copy."""
    pairs = tuple(
        (tuple(strip_diacritics(tok) for tok in sent), sent) for sent in targets
    )
    return ParallelCorpus(pairs)


def _apportion(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment: each size is within 1 of n*ratio."""
    floors = [int(n * r) for r in ratios]
    remainders = [n * r - f for r, f in zip(ratios, floors)]
    leftover = n - sum(floors)
    for i in sorted(range(len(ratios)), key=lambda i: -remainders[i])[:leftover]:
        floors[i] += 1
    return floors


def split_dataset(
    corpus: ParallelCorpus,
    seed: int,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> DatasetSplit:
    """Shuffle pairs with splitmix64(seed) and cut into train/dev/test."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    if len(corpus) < 3:
        raise CorpusSizeError(f"need at least 3 pairs to split, got {len(corpus)}")
    order = list(range(len(corpus)))
    SplitMix64(seed).shuffle(order)
    n_train, n_dev, _ = _apportion(len(corpus), ratios)
    shuffled = [corpus.pairs[i] for i in order]
    return DatasetSplit(
        train=ParallelCorpus(tuple(shuffled[:n_train])),
        dev=ParallelCorpus(tuple(shuffled[n_train:n_train + n_dev])),
        test=ParallelCorpus(tuple(shuffled[n_train + n_dev:])),
        seed=seed,
        ratios=ratios,
    )


def prepare_sentences(
    lines: Iterable[str],
    punct_set: frozenset[str] = DEFAULT_PUNCTUATION,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> tuple[list[Sentence], int]:
    """Raw lines -> normalized sentences, plus the count of dropped overlong ones."""
    sentences: list[Sentence] = []
    dropped = 0
    for raw in split_sentences(lines):
        try:
            sent = normalize_and_tokenize(raw, punct_set)
        except EmptySentenceError:
            continue
        if len(sent) > max_tokens:
            dropped += 1
            continue
        sentences.append(sent)
    return sentences, dropped


# --- file interface -------------------------------------------------------
#
# Splits are stored as six plain UTF-8 files, one sentence per line with
# space-separated tokens: <prefix>.{train,dev,test}.{src,tgt}

_SPLIT_NAMES = ("train", "dev", "test")


def write_sentences(path: Path, sentences: Sequence[Sentence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(" ".join(sent) + "\n")


def read_sentences(path: Path) -> list[Sentence]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [tuple(line.split()) for line in fh if line.strip()]
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from exc


def read_parallel(src_path: Path, tgt_path: Path) -> ParallelCorpus:
    """Load and validate a source/target file pair."""
    sources = read_sentences(src_path)
    targets = read_sentences(tgt_path)
    if len(sources) != len(targets):
        raise DataError(
            f"{src_path} has {len(sources)} sentences but {tgt_path} has {len(targets)}"
        )
    corpus = ParallelCorpus(tuple(zip(sources, targets)))
    corpus.check()
    return corpus


def write_split_files(split: DatasetSplit, prefix: Path) -> list[Path]:
    prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for name, corpus in zip(_SPLIT_NAMES, (split.train, split.dev, split.test)):
        for side, sentences in (("src", corpus.sources()), ("tgt", corpus.targets())):
            path = prefix.parent / f"{prefix.name}.{name}.{side}"
            write_sentences(path, sentences)
            written.append(path)
    return written


def read_split_files(prefix: Path) -> DatasetSplit:
    corpora = []
    for name in _SPLIT_NAMES:
        src = prefix.parent / f"{prefix.name}.{name}.src"
        tgt = prefix.parent / f"{prefix.name}.{name}.tgt"
        if not src.exists() or not tgt.exists():
            raise DataError(f"missing split files {src} / {tgt}")
        corpora.append(read_parallel(src, tgt))
    return DatasetSplit(*corpora, seed=None, ratios=None)
