"""Generated-story statistics: length averages and n-gram novelty.

Sentence boundaries are runs of terminal punctuation (. ! ?); words are
whitespace tokens with surrounding punctuation stripped; n-grams are over
lowercased tokens and counted as distinct types, never crossing story
boundaries. Novelty is measured against a reference corpus: an n-gram is
unique when it occurs in the stories but not in the reference.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

from .errors import ValidationError

_SENTENCE_BREAK = re.compile(r"[.!?]+")
_PUNCT = string.punctuation


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_BREAK.split(text)
    return [p.strip() for p in parts if p.strip()]


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def ngrams(tokens: list[str], order: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1)}


def story_stats(stories: list[str]) -> tuple[float, float]:
    """(average sentences per story, average words per sentence)."""
    if not stories:
        raise ValidationError("no stories to measure")
    total_sentences = 0
    total_words = 0
    for story in stories:
        sentences = split_sentences(story)
        total_sentences += len(sentences)
        total_words += len(tokenize(story))
    avg_sentences = total_sentences / len(stories)
    avg_words = total_words / total_sentences if total_sentences else 0.0
    return avg_sentences, avg_words


def unique_ngrams(stories: list[str], reference: str, order: int) -> int:
    """Distinct story n-grams absent from the reference corpus."""
    if order not in (2, 3):
        raise ValidationError(f"order must be 2 or 3, got {order}")
    found: set[tuple[str, ...]] = set()
    for story in stories:
        found |= ngrams(tokenize(story), order)
    return len(found - ngrams(tokenize(reference), order))


@dataclass(frozen=True)
class CorpusStats:
    story_count: int
    avg_sentences_per_story: float
    avg_words_per_sentence: float
    unique_bigrams: int
    unique_trigrams: int

    def report(self) -> str:
        rows = [
            ("No. Stories", str(self.story_count)),
            ("Avg. Sent/Story", f"{self.avg_sentences_per_story:.2f}"),
            ("Avg. Words/Sent", f"{self.avg_words_per_sentence:.2f}"),
            ("Unique Bigrams", str(self.unique_bigrams)),
            ("Unique Trigrams", str(self.unique_trigrams)),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "story_count": self.story_count,
                "avg_sentences_per_story": self.avg_sentences_per_story,
                "avg_words_per_sentence": self.avg_words_per_sentence,
                "unique_bigrams": self.unique_bigrams,
                "unique_trigrams": self.unique_trigrams,
            },
            sort_keys=True,
            indent=2,
        ) + "\n"


def corpus_stats(stories: list[str], reference: str = "") -> CorpusStats:
    avg_sentences, avg_words = story_stats(stories)
    return CorpusStats(
        story_count=len(stories),
        avg_sentences_per_story=avg_sentences,
        avg_words_per_sentence=avg_words,
        unique_bigrams=unique_ngrams(stories, reference, 2),
        unique_trigrams=unique_ngrams(stories, reference, 3),
    )
