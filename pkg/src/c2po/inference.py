"""Commonsense-inference backends.

A backend answers: given an event phrase and a relation (wants = forward
cause, needs = backward enablement), what are the k most likely
continuation/precondition phrases, and what is the anchor-token likelihood
used to normalize link weights. Two implementations: a deterministic TSV
knowledge table for offline runs, and an HTTP wire client for a model
sidecar.
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, field

import requests

from .errors import ProtocolError, TableFormatError, TransportError, ValidationError

DEFAULT_TIMEOUT_MS = 5000
TIMEOUT_ENV_VAR = "C2PO_BACKEND_TIMEOUT_MS"

_WS = re.compile(r"\s+")


class Relation(enum.Enum):
    WANTS = "wants"
    NEEDS = "needs"

    @classmethod
    def parse(cls, value: str) -> "Relation":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValidationError(f"unknown relation {value!r}; expected 'wants' or 'needs'")


def normalize_event(text: str) -> str:
    """Lowercase, collapse whitespace, strip terminal punctuation.

    Table keys and candidate-identity checks both go through this, so a
    realized sentence round-trips as a query.
    """
    text = _WS.sub(" ", text.strip().lower())
    return text.rstrip(".!?").strip()


@dataclass(frozen=True)
class InferenceCandidate:
    tail: str
    likelihood: float

    def __post_init__(self):
        if not self.tail:
            raise ValidationError("candidate tail is empty")
        if not 0.0 < self.likelihood <= 1.0:
            raise ValidationError(f"likelihood {self.likelihood} outside (0, 1]")


@dataclass(frozen=True)
class InferenceResponse:
    """Candidates sorted by descending likelihood, plus the anchor score."""

    candidates: tuple[InferenceCandidate, ...]
    anchor_likelihood: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.anchor_likelihood <= 1.0:
            raise ValidationError(f"anchor likelihood {self.anchor_likelihood} outside (0, 1]")
        likes = [c.likelihood for c in self.candidates]
        if likes != sorted(likes, reverse=True):
            raise ValidationError("candidates not sorted by descending likelihood")

    def truncated(self, k: int | None) -> "InferenceResponse":
        if k is None or len(self.candidates) <= k:
            return self
        return InferenceResponse(self.candidates[:k], self.anchor_likelihood)

    def likelihood_of(self, tail_text: str) -> float | None:
        """Likelihood of a tail among the candidates, or None when absent."""
        key = normalize_event(tail_text)
        for c in self.candidates:
            if normalize_event(c.tail) == key:
                return c.likelihood
        return None


EMPTY_RESPONSE = InferenceResponse(())


def _sort_candidates(cands: list[InferenceCandidate]) -> tuple[InferenceCandidate, ...]:
    # Descending likelihood; equal likelihoods break ties on the tail so
    # responses are bit-identical across processes.
    return tuple(sorted(cands, key=lambda c: (-c.likelihood, c.tail)))


@dataclass
class KnowledgeTable:
    """Deterministic stand-in for a neural commonsense model."""

    entries: dict[tuple[str, Relation], InferenceResponse] = field(default_factory=dict)
    _anchored: set[tuple[str, Relation]] = field(default_factory=set, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, event: str, relation: Relation, tail: str, likelihood: float,
            anchor: float | None = None, row: int = 0) -> None:
        key = (normalize_event(event), relation)
        try:
            cand = InferenceCandidate(tail, likelihood)
        except ValidationError as exc:
            raise TableFormatError(str(exc), row)
        prev = self.entries.get(key)
        # Duplicate-key rows merge; a repeated tail keeps its first likelihood,
        # and the first explicitly set anchor wins.
        if prev is None:
            cands = [cand]
        else:
            cands = list(prev.candidates)
            if normalize_event(tail) not in {normalize_event(c.tail) for c in cands}:
                cands.append(cand)
        kept_anchor = prev.anchor_likelihood if prev is not None else 1.0
        if anchor is not None and key not in self._anchored:
            kept_anchor = anchor
            self._anchored.add(key)
        self.entries[key] = InferenceResponse(_sort_candidates(cands), kept_anchor)

    def lookup(self, event: str, relation: Relation) -> InferenceResponse | None:
        return self.entries.get((normalize_event(event), relation))


def load_table(path: str) -> KnowledgeTable:
    """Load a UTF-8 TSV knowledge table.

    Columns: event, relation, tail, likelihood, anchor (optional). Lines
    starting with ``#`` are comments. Fails fast with the row number on the
    first malformed row.
    """
    table = KnowledgeTable()
    with open(path, encoding="utf-8") as fh:
        for row, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) not in (4, 5):
                raise TableFormatError(f"expected 4 or 5 tab-separated columns, got {len(cols)}", row)
            event, relation_s, tail = cols[0], cols[1], cols[2]
            if not event.strip():
                raise TableFormatError("empty event", row)
            try:
                relation = Relation.parse(relation_s)
            except ValidationError as exc:
                raise TableFormatError(str(exc), row)
            try:
                likelihood = float(cols[3])
            except ValueError:
                raise TableFormatError(f"non-numeric likelihood {cols[3]!r}", row)
            anchor = None
            if len(cols) == 5 and cols[4].strip():
                try:
                    anchor = float(cols[4])
                except ValueError:
                    raise TableFormatError(f"non-numeric anchor {cols[4]!r}", row)
                if not 0.0 < anchor <= 1.0:
                    raise TableFormatError(f"anchor {anchor} outside (0, 1]", row)
            table.add(event, relation, tail.strip(), likelihood, anchor, row=row)
    return table


class TableBackend:
    """Read-only backend over a KnowledgeTable; bit-identical across calls."""

    def __init__(self, table: KnowledgeTable, missing_policy: str = "empty"):
        if missing_policy not in ("empty", "error"):
            raise ValueError(f"missing_policy must be 'empty' or 'error', got {missing_policy!r}")
        self.table = table
        self.missing_policy = missing_policy

    def infer(self, event: str, relation: Relation, k: int | None = None) -> InferenceResponse:
        """At most k candidates for (event, relation); k=None returns all."""
        if not event:
            raise ValidationError("event is empty")
        if k is not None and k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        response = self.table.lookup(event, relation)
        if response is None:
            if self.missing_policy == "error":
                raise KeyError(f"no table entry for ({normalize_event(event)!r}, {relation.value})")
            return EMPTY_RESPONSE
        return response.truncated(k)

    def anchor_probability(self, event: str, relation: Relation) -> float:
        if not event:
            raise ValidationError("event is empty")
        response = self.table.lookup(event, relation)
        return response.anchor_likelihood if response is not None else 1.0


def resolve_timeout(timeout_s: float | None = None) -> float:
    if timeout_s is not None:
        return timeout_s
    return float(os.environ.get(TIMEOUT_ENV_VAR, DEFAULT_TIMEOUT_MS)) / 1000.0


def post_json(url: str, body: dict, timeout_s: float) -> dict:
    """POST a JSON body; non-200 or non-JSON answers are transport errors."""
    try:
        resp = requests.post(url, json=body, timeout=timeout_s)
    except requests.RequestException as exc:
        raise TransportError(f"POST {url} failed: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"POST {url} returned {resp.status_code}: {resp.text[:200]}")
    try:
        doc = resp.json()
    except ValueError as exc:
        raise ProtocolError(f"POST {url} returned non-JSON body") from exc
    if not isinstance(doc, dict):
        raise ProtocolError(f"POST {url} returned {type(doc).__name__}, expected object")
    return doc


class WireBackend:
    """HTTP client for the /infer wire protocol. No automatic retry."""

    def __init__(self, base_url: str, timeout_s: float | None = None, k_all: int = 100):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = resolve_timeout(timeout_s)
        # The wire schema requires a finite k; k_all stands in for "all
        # candidates" when link weighting asks for the full response.
        self.k_all = k_all

    def infer(self, event: str, relation: Relation, k: int | None = None) -> InferenceResponse:
        if not event:
            raise ValidationError("event is empty")
        if k is not None and k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        body = {"event": event, "relation": relation.value, "k": k if k is not None else self.k_all}
        doc = post_json(f"{self.base_url}/infer", body, self.timeout_s)
        try:
            cands = [InferenceCandidate(c["tail"], c["likelihood"]) for c in doc["candidates"]]
            response = InferenceResponse(tuple(cands), doc.get("anchor_likelihood", 1.0))
        except (KeyError, TypeError, ValidationError) as exc:
            raise ProtocolError(f"malformed /infer response: {exc}") from exc
        return response

    def anchor_probability(self, event: str, relation: Relation) -> float:
        return self.infer(event, relation, k=1).anchor_likelihood


def backend_from_spec(spec: str, timeout_s: float | None = None):
    """Build a backend from ``table:<path>`` or ``http(s)://<url>`` syntax."""
    if spec.startswith("table:"):
        path = spec[len("table:"):]
        try:
            return TableBackend(load_table(path))
        except OSError as exc:
            raise TableFormatError(f"cannot load table {path}: {exc}") from exc
    if spec.startswith("http:") or spec.startswith("https:"):
        url = spec[len("http:"):] if spec.startswith("http:") and not spec.startswith("http://") else spec
        if not url.startswith("http"):
            url = "http://" + url.lstrip("/")
        return WireBackend(url, timeout_s)
    raise ValueError(f"backend spec must be 'table:<path>' or an http(s) URL, got {spec!r}")
