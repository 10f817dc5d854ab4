"""Tests for the synthetic validation corpus."""

import pytest

from adr.errors import CorpusSizeError
from adr.metrics import build_lexicon, corpus_stats
from adr.synth import (
    AMBIGUOUS,
    FILLERS,
    MAJORITY_SHARE,
    TRIGGER_GROUPS,
    expected_lexdif,
    expected_pct_types_ambiguous,
    synth_corpus,
)
from adr.text_pipeline import strip_diacritics


def test_rejects_empty_request():
    with pytest.raises(CorpusSizeError):
        synth_corpus(0, 0)


def test_deterministic_per_seed():
    assert synth_corpus(3, 50).pairs == synth_corpus(3, 50).pairs
    assert synth_corpus(3, 50).pairs != synth_corpus(4, 50).pairs


def test_pairs_are_aligned_and_stripped():
    synth_corpus(0, 100).check()


def test_lexicon_tables_are_consistent():
    # Each ambiguous surface strips from both of its forms; triggers and
    # fillers strip only from themselves.
    for surface, (form_a, form_b) in AMBIGUOUS.items():
        assert strip_diacritics(form_a) == surface
        assert strip_diacritics(form_b) == surface
        assert form_a != form_b
    all_unambiguous = [t for g in TRIGGER_GROUPS for t in g] + list(FILLERS)
    surfaces = [strip_diacritics(t) for t in all_unambiguous]
    assert len(set(surfaces)) == len(all_unambiguous)
    assert not set(surfaces) & set(AMBIGUOUS)


def test_warm_up_covers_every_form():
    corpus = synth_corpus(seed=9, n_sentences=8)
    tokens = {tok for _, tgt in corpus for tok in tgt}
    for form_a, form_b in AMBIGUOUS.values():
        assert form_a in tokens and form_b in tokens
    for group in TRIGGER_GROUPS:
        assert set(group) <= tokens


def test_stats_match_closed_forms():
    # The warm-up pass puts every lexicon entry in the corpus, so the
    # type-level statistics equal the values computed from the tables.
    for seed in (0, 1, 7):
        stats = corpus_stats(synth_corpus(seed, 300))
        assert stats.lexdif == pytest.approx(expected_lexdif())
        assert stats.pct_types_ambiguous == pytest.approx(expected_pct_types_ambiguous())
        assert stats.vocab_src == 20
        assert stats.vocab_tgt == 24


def test_closed_form_values():
    assert expected_lexdif() == pytest.approx(24 / 20)
    assert expected_pct_types_ambiguous() == pytest.approx(20.0)


def test_trigger_rule_holds_everywhere():
    # Every ambiguous token is directly preceded by a trigger of the
    # group that selects its form.
    corpus = synth_corpus(seed=5, n_sentences=400)
    group_of_form = {}
    for form_a, form_b in AMBIGUOUS.values():
        group_of_form[form_a] = 0
        group_of_form[form_b] = 1
    checked = 0
    for _, tgt in corpus:
        for i, tok in enumerate(tgt):
            if tok in group_of_form:
                assert i > 0
                assert tgt[i - 1] in TRIGGER_GROUPS[group_of_form[tok]]
                checked += 1
    assert checked >= 400


def test_majority_share_is_near_nominal():
    corpus = synth_corpus(seed=11, n_sentences=2000)
    lexicon = build_lexicon(corpus)
    shares = []
    for surface, (form_a, _) in AMBIGUOUS.items():
        forms = lexicon.forms(surface)
        total = sum(forms.values())
        shares.append(forms.get(form_a, 0) / total)
    observed = sum(shares) / len(shares)
    assert abs(observed - MAJORITY_SHARE) < 0.05


def test_small_corpora_skip_warm_up():
    corpus = synth_corpus(seed=2, n_sentences=3)
    assert len(corpus) == 3
    corpus.check()
