"""Paraphrase augmentation with a keyword/edit-distance quality filter.

Text is split into sentences; each sentence gets candidate paraphrases from a
provider. A candidate survives only if it keeps every protected keyword
(continent names and numbers) and is far enough from the original by
normalized Levenshtein distance. A surviving candidate replaces the sentence;
otherwise the original sentence is kept.
"""

import re
from collections import Counter
from typing import Protocol

import nltk
import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.config import get_settings
from app.core.corpus import CorpusExample, Source
from app.core.risk_map import CONTINENT_NAMES
from app.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_CANDIDATES = 5
ABBREVIATIONS = {"e.g", "i.e", "etc", "vs", "approx", "mr", "mrs", "dr", "no"}
_BOUNDARY = re.compile(r"[.!?]+(?:\s+|$)")
_DIGITS = re.compile(r"\d+")


class ParaphraseProvider(Protocol):
    """Anything that proposes paraphrases for a sentence."""

    def paraphrase(self, sentence: str, n: int, rng: np.random.Generator) -> list[str]: ...


class FilterParams(BaseModel):
    protected_keywords: list[str] = Field(default_factory=lambda: list(CONTINENT_NAMES))
    min_edit_distance_ratio: float = Field(default=0.15, gt=0.0, le=1.0)

    @field_validator("protected_keywords")
    @classmethod
    def _protect_continents(cls, keywords: list[str]) -> list[str]:
        missing = set(CONTINENT_NAMES) - set(keywords)
        if missing:
            raise ValueError(f"continent names must be protected, missing {sorted(missing)}")
        return keywords

    @classmethod
    def from_settings(cls) -> "FilterParams":
        return cls(min_edit_distance_ratio=get_settings().min_edit_distance_ratio)


# ============== Sentence handling ==============


def split_sentences(text: str) -> list[tuple[str, str]]:
    """Split text into (sentence, trailing separator) pairs.

    Boundaries are runs of '.', '!' or '?' followed by whitespace or the end of
    the text; a period after a known abbreviation is not a boundary. Joining
    every sentence with its separator gives back the input.
    """
    segments = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        words = text[start : match.start()].split()
        abbreviated = bool(words) and words[-1].lower() in ABBREVIATIONS
        if abbreviated and match.group().startswith(".") and match.end() < len(text):
            continue
        punctuation = match.group().rstrip()
        separator = match.group()[len(punctuation) :]
        segments.append((text[start : match.start()] + punctuation, separator))
        start = match.end()
    if start < len(text):
        tail = text[start:]
        stripped = tail.rstrip()
        segments.append((stripped, tail[len(stripped) :]))
    return [(s, sep) for s, sep in segments if s]


def protected_tokens(sentence: str, params: FilterParams) -> Counter:
    """Multiset of protected keyword and digit-string occurrences."""
    tokens: Counter = Counter()
    for keyword in params.protected_keywords:
        tokens[keyword] = len(re.findall(rf"\b{re.escape(keyword)}\b", sentence))
    tokens.update(_DIGITS.findall(sentence))
    return +tokens


def normalized_edit_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer length."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return nltk.edit_distance(a, b) / longest


def accept_candidate(original: str, candidate: str, params: FilterParams) -> bool:
    if protected_tokens(candidate, params) != protected_tokens(original, params):
        return False
    return normalized_edit_distance(original, candidate) >= params.min_edit_distance_ratio


# ============== Rule-based paraphraser ==============

SYNONYMS: dict[str, list[str]] = {
    "I need to": ["I have to", "I must"],
    "I must": ["I have to", "I need to"],
    "I want to": ["I would like to", "I intend to", "I plan to"],
    "my strategy is": ["my plan is", "my approach is"],
    "take over": ["conquer", "capture"],
    "at least": ["no less than", "a minimum of"],
    "at most": ["no more than", "a maximum of"],
    "troops": ["soldiers", "forces", "units"],
    "countries": ["territories", "regions"],
    "country": ["territory", "region"],
    "army": ["force", "military"],
    "large": ["big", "strong"],
    "place": ["put", "deploy"],
    "protect": ["defend", "guard"],
    "borders": ["frontiers", "boundaries"],
    "battles": ["fights", "engagements"],
    "enemy": ["opponent", "adversary"],
    "opponents": ["enemies", "rivals"],
    "avoid": ["stay away from", "steer clear of"],
    "priority": ["focus", "concern"],
    "important": ["significant", "crucial"],
}

_CLAUSES = re.compile(r"^(?P<first>[^,]+),\s+(?P<second>[^,]+?)(?P<end>[.!?]*)$")


def _match_case(replacement: str, original: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _lower_first(clause: str) -> str:
    if clause.startswith("I ") or clause[:1].isupper() and clause.split()[0] in CONTINENT_NAMES:
        return clause
    return clause[:1].lower() + clause[1:]


class RuleBasedParaphraser:
    """Synonym substitution plus clause reordering."""

    def __init__(self, synonyms: dict[str, list[str]] | None = None):
        self.synonyms = synonyms or SYNONYMS
        self._patterns = [
            (re.compile(rf"\b{re.escape(phrase)}\b", re.IGNORECASE), options)
            for phrase, options in self.synonyms.items()
        ]

    def _substitute(self, sentence: str, rng: np.random.Generator) -> str:
        for pattern, options in self._patterns:
            if pattern.search(sentence) and rng.random() < 0.5:
                choice = options[int(rng.integers(len(options)))]
                sentence = pattern.sub(lambda m, c=choice: _match_case(c, m.group()), sentence)
        return sentence

    @staticmethod
    def _reorder(sentence: str) -> str:
        match = _CLAUSES.match(sentence)
        if match is None:
            return sentence
        first, second = match.group("first"), match.group("second")
        return f"{_match_case(second, first)}, {_lower_first(first)}{match.group('end')}"

    def paraphrase(self, sentence: str, n: int, rng: np.random.Generator) -> list[str]:
        candidates = []
        for _ in range(n):
            candidate = self._substitute(sentence, rng)
            if rng.random() < 0.5:
                candidate = self._reorder(candidate)
            if candidate not in candidates:
                candidates.append(candidate)
        return candidates


# ============== Augmentation ==============


def augment(
    example: CorpusExample,
    paraphraser: ParaphraseProvider,
    params: FilterParams,
    rng: np.random.Generator,
    n_candidates: int = DEFAULT_CANDIDATES,
) -> CorpusExample:
    """Paraphrase an example sentence by sentence, keeping all labels.

    Returns:
        A copy with the rewritten text and ``source`` set to augmented;
        map_id, selections, goals and constraints are unchanged
    """
    rewritten = []
    replaced = 0
    for sentence, separator in split_sentences(example.text):
        candidates = paraphraser.paraphrase(sentence, n_candidates, rng)
        surviving = [c for c in candidates if accept_candidate(sentence, c, params)]
        if surviving:
            sentence = surviving[int(rng.integers(len(surviving)))]
            replaced += 1
        rewritten.append(sentence + separator)

    if not replaced:
        logger.debug("No paraphrase survived the filter; keeping the original text")
    return example.model_copy(update={"text": "".join(rewritten), "source": Source.AUGMENTED})


def augment_corpus(
    examples: list[CorpusExample],
    paraphraser: ParaphraseProvider | None = None,
    params: FilterParams | None = None,
    seed: int = 0,
    keep_original: bool = False,
    n_candidates: int = DEFAULT_CANDIDATES,
) -> list[CorpusExample]:
    """Augment every example; example ``i`` uses ``default_rng([seed, i])``.

    With ``keep_original`` each original precedes its augmented copy, doubling
    the corpus.
    """
    paraphraser = paraphraser or RuleBasedParaphraser()
    params = params or FilterParams.from_settings()
    output = []
    changed = 0
    for index, example in enumerate(examples):
        rng = np.random.default_rng([seed, index])
        augmented = augment(example, paraphraser, params, rng, n_candidates)
        changed += augmented.text != example.text
        if keep_original:
            output.append(example)
        output.append(augmented)
    logger.info(f"Augmented {len(examples)} examples ({changed} with rewritten text)")
    return output
