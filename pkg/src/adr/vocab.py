"""Token-to-id vocabulary for the neural models.

Ids 0..3 are reserved for PAD, BOS, EOS, UNK in that order. Tokens seen
fewer than ``min_count`` times map to UNK. Ordering is by descending count
with ties broken lexicographically, so the same corpus always yields the
same table.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<bos>", "<eos>", "<unk>")
DEFAULT_MIN_COUNT = 2


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    index: dict[str, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, sentence: Sequence[str]) -> list[int]:
        return [self.index.get(tok, UNK) for tok in sentence]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def __contains__(self, token: str) -> bool:
        return token in self.index


def build_vocab(
    sentences: Iterable[Sequence[str]], min_count: int = DEFAULT_MIN_COUNT
) -> Vocab:
    counts = Counter(tok for sent in sentences for tok in sent)
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count and tok not in RESERVED),
        key=lambda tok: (-counts[tok], tok),
    )
    tokens = RESERVED + tuple(kept)
    return Vocab(tokens=tokens, index={tok: i for i, tok in enumerate(tokens)})
