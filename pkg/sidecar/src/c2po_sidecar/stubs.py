"""Deterministic stub models: no downloads, reproducible responses.

The inference stub answers from the same TSV knowledge-table format the
pipeline's offline backend reads (documented in the pipeline README):
columns event/relation/tail/likelihood[/anchor], ``#`` comments, duplicate
keys merged, candidates sorted by descending likelihood with ties broken
on the tail, the first explicitly set anchor winning, and missing keys
answered with an empty candidate list and anchor 1.0.

The coref and open-IE stubs are toy rule-based annotators: characters are
repeated capitalized tokens, and each sentence contributes one
subject/relation/object split. They exist so contract and equivalence
tests run without any neural model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_CAPITALIZED = re.compile(r"\b[A-Z][a-z]+\b")
_SENTENCE_END = re.compile(r"[.!?]+")
_DETERMINERS = {"The", "A", "An"}
_STOP_NAMES = {
    "The", "A", "An", "He", "She", "It", "They", "We", "You", "I",
    "His", "Her", "Its", "Their", "Then", "But", "And", "Or",
}


def _normalize(text: str) -> str:
    return " ".join(text.lower().split()).rstrip(".!?").strip()


@dataclass
class StubInferModel:
    """Table-lookup inference; likelihoods pass through bit-identically."""

    table_path: str
    name: str = "stub-infer"

    def __post_init__(self):
        self.entries: dict[tuple[str, str], dict] = {}
        if not self.table_path:
            return
        with open(self.table_path, encoding="utf-8") as fh:
            for row, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) not in (4, 5):
                    raise ValueError(f"{self.table_path} row {row}: expected 4 or 5 columns")
                event, relation, tail = cols[0], cols[1].lower(), cols[2].strip()
                likelihood = float(cols[3])
                anchor = float(cols[4]) if len(cols) == 5 and cols[4].strip() else None
                key = (_normalize(event), relation)
                entry = self.entries.setdefault(key, {"tails": [], "seen": set(), "anchor": None})
                if _normalize(tail) not in entry["seen"]:
                    entry["seen"].add(_normalize(tail))
                    entry["tails"].append((tail, likelihood))
                if anchor is not None and entry["anchor"] is None:
                    entry["anchor"] = anchor
        for entry in self.entries.values():
            entry["tails"].sort(key=lambda t: (-t[1], t[0]))

    def infer(self, event: str, relation: str, k: int) -> tuple[list[dict], float]:
        entry = self.entries.get((_normalize(event), relation))
        if entry is None:
            return [], 1.0
        candidates = [{"tail": t, "likelihood": p} for t, p in entry["tails"][:k]]
        anchor = entry["anchor"] if entry["anchor"] is not None else 1.0
        return candidates, anchor


def _sentences_with_spans(text: str) -> list[tuple[int, int]]:
    """Half-open sentence spans; the closing punctuation run is included."""
    spans = []
    cursor = 0
    for match in _SENTENCE_END.finditer(text):
        end = match.end()
        chunk = text[cursor:end]
        stripped = chunk.lstrip()
        if stripped:
            spans.append((cursor + len(chunk) - len(stripped), end))
        cursor = end
    tail = text[cursor:].strip()
    if tail:
        start = cursor + len(text[cursor:]) - len(text[cursor:].lstrip())
        spans.append((start, start + len(tail)))
    return spans


@dataclass
class StubCorefModel:
    """Clusters repeated capitalized tokens (outside a small stoplist)."""

    name: str = "stub-coref"

    def clusters(self, text: str) -> list[dict]:
        groups: dict[str, list[tuple[int, int]]] = {}
        for match in _CAPITALIZED.finditer(text):
            surface = match.group(0)
            if surface in _STOP_NAMES:
                continue
            groups.setdefault(surface, []).append((match.start(), match.end()))
        out = []
        for surface in sorted(groups, key=lambda s: groups[s][0][0]):
            spans = groups[surface]
            if len(spans) < 2:
                continue
            out.append(
                {
                    "name": surface,
                    "mentions": [
                        {"start": s, "end": e, "text": text[s:e]} for s, e in spans
                    ],
                }
            )
        return out


@dataclass
class StubOpenIEModel:
    """One subject/relation/object split per sentence.

    Subject: the leading capitalized token, or a leading determiner plus
    the next token. Relation: the following token. Object: the rest of the
    sentence minus terminal punctuation. Tails are raw substrings, so all
    spans verify against the source text.
    """

    name: str = "stub-openie"

    def triples(self, text: str) -> list[dict]:
        out = []
        for s_start, s_end in _sentences_with_spans(text):
            sentence = text[s_start:s_end]
            tokens = [
                (m.group(0), s_start + m.start(), s_start + m.end())
                for m in re.finditer(r"\S+", sentence)
            ]
            if len(tokens) < 2:
                continue
            first = tokens[0][0]
            if first in _DETERMINERS and len(tokens) >= 3:
                subj_start, subj_end = tokens[0][1], tokens[1][2]
                rel_index = 2
            else:
                subj_start, subj_end = tokens[0][1], tokens[0][2]
                rel_index = 1
            if rel_index >= len(tokens):
                continue
            relation = tokens[rel_index][0].rstrip(".!?,;")
            if not relation:
                continue
            obj_start = tokens[rel_index + 1][1] if rel_index + 1 < len(tokens) else s_end
            obj = text[obj_start:s_end].rstrip(".!?").strip() if obj_start < s_end else ""
            out.append(
                {
                    "subject": text[subj_start:subj_end],
                    "relation": relation,
                    "object": obj,
                    "subject_span": {"start": subj_start, "end": subj_end},
                    "span": {"start": s_start, "end": s_end},
                }
            )
        return out
