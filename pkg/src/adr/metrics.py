"""Ambiguity and vocabulary statistics over parallel corpora.

The central object is the lexicon: for every undiacritized word type, the
set of diacritized forms it was observed as, with counts. From it come the
ambiguity measures: the share of word types with two or more forms, and the
lexical diffusion score (mean number of distinct forms per type).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import UndefinedMetricError
from .text_pipeline import ParallelCorpus


@dataclass(frozen=True)
class Lexicon:
    """Undiacritized type -> {diacritized form -> occurrence count}."""

    entries: dict[str, dict[str, int]]

    def __len__(self) -> int:
        return len(self.entries)

    def forms(self, source_type: str) -> dict[str, int]:
        return self.entries.get(source_type, {})

    def total_count(self) -> int:
        return sum(c for forms in self.entries.values() for c in forms.values())


@dataclass(frozen=True)
class CorpusStats:
    pct_tokens_diacritized: float
    pct_types_ambiguous: float
    lexdif: float
    vocab_src: int
    vocab_tgt: int

    def as_dict(self) -> dict[str, float | int]:
        return {
            "pct_tokens_diacritized": self.pct_tokens_diacritized,
            "pct_types_ambiguous": self.pct_types_ambiguous,
            "lexdif": self.lexdif,
            "vocab_src": self.vocab_src,
            "vocab_tgt": self.vocab_tgt,
        }


def has_diacritic(token: str) -> bool:
    """True when the token carries at least one combining mark."""
    return any(
        unicodedata.category(c) == "Mn"
        for c in unicodedata.normalize("NFD", token)
    )


def build_lexicon(corpus: ParallelCorpus) -> Lexicon:
    entries: dict[str, dict[str, int]] = {}
    for src, tgt in corpus:
        for s, t in zip(src, tgt):
            forms = entries.setdefault(s, {})
            forms[t] = forms.get(t, 0) + 1
    return Lexicon(entries)


def lexdif(lexicon: Lexicon, frequency_weighted: bool = False) -> float:
    """Mean number of distinct diacritized forms per undiacritized type.

    With ``frequency_weighted`` the mean is taken over tokens instead of
    types, so frequent types dominate.
    """
    if not lexicon.entries:
        raise UndefinedMetricError("lexdif of an empty lexicon")
    if frequency_weighted:
        weighted = sum(
            len(forms) * sum(forms.values()) for forms in lexicon.entries.values()
        )
        return weighted / lexicon.total_count()
    return sum(len(forms) for forms in lexicon.entries.values()) / len(lexicon.entries)


def corpus_stats(corpus: ParallelCorpus) -> CorpusStats:
    if len(corpus) == 0:
        raise UndefinedMetricError("stats of an empty corpus")
    lexicon = build_lexicon(corpus)
    n_tokens = 0
    n_diacritized = 0
    src_types: set[str] = set()
    tgt_types: set[str] = set()
    for src, tgt in corpus:
        src_types.update(src)
        tgt_types.update(tgt)
        for t in tgt:
            n_tokens += 1
            if has_diacritic(t):
                n_diacritized += 1
    n_ambiguous = sum(1 for forms in lexicon.entries.values() if len(forms) >= 2)
    return CorpusStats(
        pct_tokens_diacritized=100.0 * n_diacritized / n_tokens,
        pct_types_ambiguous=100.0 * n_ambiguous / len(lexicon),
        lexdif=lexdif(lexicon),
        vocab_src=len(src_types),
        vocab_tgt=len(tgt_types),
    )


def write_lexicon_tsv(lexicon: Lexicon, path: Path) -> None:
    """Rows of (source_type, form, count), NFC, sorted for stable diffs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("source_type\tform\tcount\n")
        for source_type in sorted(lexicon.entries):
            for form in sorted(lexicon.entries[source_type]):
                nfc = unicodedata.normalize("NFC", form)
                fh.write(f"{source_type}\t{nfc}\t{lexicon.entries[source_type][form]}\n")


def read_lexicon_tsv(path: Path) -> Lexicon:
    entries: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("source_type"):
            raise ValueError(f"{path}: missing lexicon header")
        for line in fh:
            source_type, form, count = line.rstrip("\n").split("\t")
            entries.setdefault(source_type, {})[form] = int(count)
    return Lexicon(entries)


def write_stats(stats: CorpusStats, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_stats(stats) + "\n")


def format_stats(stats: CorpusStats) -> str:
    return "\n".join(f"{key}={value}" for key, value in stats.as_dict().items())
