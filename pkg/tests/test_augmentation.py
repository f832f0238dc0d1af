"""Tests for paraphrase augmentation."""

from collections import Counter
from unittest.mock import MagicMock

import pytest
from pydantic import ValidationError

from app.core.augmentation import (
    FilterParams,
    RuleBasedParaphraser,
    accept_candidate,
    augment,
    augment_corpus,
    normalized_edit_distance,
    protected_tokens,
    split_sentences,
)
from app.core.corpus import Source


@pytest.fixture
def params():
    return FilterParams(min_edit_distance_ratio=0.15)


class TestSplitSentences:
    """Test sentence boundaries."""

    @pytest.mark.parametrize(
        "text",
        [
            "I must take Purple. I will avoid Red!  Why not?",
            "One sentence without an ending",
            "Trailing space. ",
            "",
        ],
    )
    def test_rejoins_to_input(self, text):
        assert "".join(s + sep for s, sep in split_sentences(text)) == text

    def test_boundaries(self):
        sentences = [s for s, _ in split_sentences("Take Purple. Avoid Red! Why?")]
        assert sentences == ["Take Purple.", "Avoid Red!", "Why?"]

    def test_abbreviation_is_not_a_boundary(self):
        sentences = [s for s, _ in split_sentences("Hold a continent, e.g. Purple. Then attack.")]
        assert sentences == ["Hold a continent, e.g. Purple.", "Then attack."]


class TestFilter:
    """Test the keyword and edit-distance filter."""

    def test_protected_tokens(self, params):
        tokens = protected_tokens("Put 7 troops on Purple and 7 near Red, not Purple_E.", params)
        assert tokens == Counter({"Purple": 1, "Red": 1, "7": 2})

    def test_edit_distance(self):
        assert normalized_edit_distance("abc", "abd") == pytest.approx(1 / 3)
        assert normalized_edit_distance("", "") == 0.0
        assert normalized_edit_distance("abc", "") == 1.0

    def test_accepts_distant_paraphrase(self, params):
        assert accept_candidate(
            "I need to take over Purple.", "Capturing Purple is what I have to do.", params
        )

    def test_rejects_dropped_keyword(self, params):
        assert not accept_candidate(
            "I need to take over Purple.", "I have to conquer that continent.", params
        )

    def test_rejects_changed_number(self, params):
        assert not accept_candidate(
            "I want at least 4 countries.", "I would like no less than 5 territories.", params
        )

    def test_rejects_near_copy(self, params):
        assert not accept_candidate("I need to take over Purple.", "I need to take over Purple!", params)

    def test_continents_always_protected(self):
        with pytest.raises(ValidationError, match="Blue"):
            FilterParams(protected_keywords=["Red", "Green", "Purple", "Yellow"])

    @pytest.mark.parametrize("ratio", [0.0, 1.5])
    def test_ratio_bounds(self, ratio):
        with pytest.raises(ValidationError):
            FilterParams(min_edit_distance_ratio=ratio)


class TestRuleBasedParaphraser:
    """Test the built-in paraphraser."""

    def test_candidates_distinct(self, rng):
        candidates = RuleBasedParaphraser().paraphrase(
            "I need to take over Purple, and I must place troops there.", 5, rng
        )
        assert 1 <= len(candidates) <= 5
        assert len(set(candidates)) == len(candidates)

    def test_keeps_continent_names(self, rng, params):
        sentence = "My strategy is to take over Purple, and I must avoid Red."
        for candidate in RuleBasedParaphraser().paraphrase(sentence, 10, rng):
            assert protected_tokens(candidate, params) == protected_tokens(sentence, params)


class TestAugment:
    """Test example and corpus augmentation."""

    def test_labels_preserved(self, annotated_example, params, rng):
        paraphraser = MagicMock()
        paraphraser.paraphrase.side_effect = lambda s, n, r: [f"Honestly, {s} Really, truly."]
        result = augment(annotated_example, paraphraser, params, rng)
        assert result.source == Source.AUGMENTED
        assert result.text != annotated_example.text
        assert result.selections == annotated_example.selections
        assert result.intent == annotated_example.intent
        assert result.map_id == annotated_example.map_id

    def test_original_kept_without_survivors(self, annotated_example, params, rng):
        paraphraser = MagicMock()
        paraphraser.paraphrase.return_value = ["Nothing useful."]
        result = augment(annotated_example, paraphraser, params, rng, n_candidates=3)
        assert result.text == annotated_example.text
        assert result.source == Source.AUGMENTED
        assert paraphraser.paraphrase.call_args.args[1] == 3

    def test_keep_original_doubles(self, small_corpus, params):
        corpus = small_corpus[:5]
        output = augment_corpus(corpus, params=params, seed=3, keep_original=True)
        assert len(output) == 10
        assert output[0::2] == corpus
        assert all(a.source == Source.AUGMENTED for a in output[1::2])
        assert all(a.intent == e.intent for a, e in zip(output[1::2], corpus))

    def test_deterministic(self, small_corpus, params):
        first = augment_corpus(small_corpus[:5], params=params, seed=3)
        second = augment_corpus(small_corpus[:5], params=params, seed=3)
        assert [e.text for e in first] == [e.text for e in second]

    def test_rewrites_something(self, small_corpus, params):
        output = augment_corpus(small_corpus, params=params, seed=0)
        assert sum(a.text != e.text for a, e in zip(output, small_corpus)) > 0

    def test_corpus_keeps_protected_tokens(self, small_corpus, params):
        output = augment_corpus(small_corpus, params=params, seed=7)
        assert len(output) == len(small_corpus)
        for original, augmented in zip(small_corpus, output):
            before = protected_tokens(original.text, params)
            assert protected_tokens(augmented.text, params) == before
            assert augmented.intent == original.intent
            assert augmented.selections == original.selections
