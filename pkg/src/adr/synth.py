"""Synthetic parallel corpus for desk-scale model validation.

Sentences are drawn from a small fixed lexicon. A handful of surface
types are ambiguous with exactly two diacritized forms, and the form is
decided by the immediately preceding trigger token: group-A triggers
select the first form, group-B triggers the second. Group A is sampled
with probability MAJORITY_SHARE, so a context-blind baseline tops out
near that share on ambiguous tokens while the context rule is fully
deterministic and learnable.

The first eight sentences (when at least eight are requested) cycle
deterministically through every ambiguous type in both directions and
every trigger and filler, so type-level statistics of the corpus follow
in closed form from the tables below.
"""

from __future__ import annotations

from .errors import CorpusSizeError
from .rng import SplitMix64
from .text_pipeline import ParallelCorpus, make_parallel

# surface -> (group-A form, group-B form)
AMBIGUOUS: dict[str, tuple[str, str]] = {
    "si": ("sí", "sì"),
    "oko": ("ọkọ́", "ọkọ̀"),
    "ogun": ("ogún", "ògùn"),
    "ese": ("ẹsẹ̀", "èsè"),
}

TRIGGER_GROUPS: tuple[tuple[str, ...], tuple[str, ...]] = (
    ("bàbá", "ilé", "ọmọ"),
    ("ìyá", "ojú", "ẹgbẹ́"),
)

FILLERS: tuple[str, ...] = (
    "dára", "púpọ̀", "kékeré", "títí", "wa",
    "ni", "àti", "gbogbo", "ayọ̀", "owó",
)

MAJORITY_SHARE = 0.6

_AMB_ITEMS = sorted(AMBIGUOUS.items())
_WARM_SENTENCES = 2 * len(_AMB_ITEMS)


def expected_lexdif() -> float:
    """Mean number of diacritized forms per type, from the tables."""
    types = len(AMBIGUOUS) + sum(len(g) for g in TRIGGER_GROUPS) + len(FILLERS)
    forms = 2 * len(AMBIGUOUS) + sum(len(g) for g in TRIGGER_GROUPS) + len(FILLERS)
    return forms / types


def expected_pct_types_ambiguous() -> float:
    types = len(AMBIGUOUS) + sum(len(g) for g in TRIGGER_GROUPS) + len(FILLERS)
    return 100.0 * len(AMBIGUOUS) / types


def synth_corpus(seed: int, n_sentences: int) -> ParallelCorpus:
    """Generate ``n_sentences`` target sentences and strip them into sources."""
    if n_sentences < 1:
        raise CorpusSizeError(f"need at least 1 sentence, got {n_sentences}")
    rng = SplitMix64(seed)
    filler_i = 0
    trigger_i = [0, 0]
    targets: list[tuple[str, ...]] = []
    for i in range(n_sentences):
        if n_sentences >= _WARM_SENTENCES and i < _WARM_SENTENCES:
            # Deterministic coverage pass: every ambiguous form, trigger
            # and filler appears regardless of seed.
            _, forms = _AMB_ITEMS[i // 2]
            group = i % 2
            triggers = TRIGGER_GROUPS[group]
            trigger = triggers[trigger_i[group] % len(triggers)]
            trigger_i[group] += 1
            f1 = FILLERS[filler_i % len(FILLERS)]
            f2 = FILLERS[(filler_i + 1) % len(FILLERS)]
            filler_i += 2
            targets.append((trigger, forms[group], f1, f2))
            continue
        parts: list[str] = []
        if rng.next_float() < 0.5:
            parts.append(rng.choice(FILLERS))
        blocks = 2 if rng.next_float() < 0.3 else 1
        for _ in range(blocks):
            group = 0 if rng.next_float() < MAJORITY_SHARE else 1
            parts.append(rng.choice(TRIGGER_GROUPS[group]))
            _, forms = rng.choice(_AMB_ITEMS)
            parts.append(forms[group])
            for _ in range(1 + (rng.next_float() < 0.5)):
                parts.append(rng.choice(FILLERS))
        targets.append(tuple(parts))
    return make_parallel(targets)
