"""Character-centric plot outline extraction.

Turns a story plus linguistic annotations (coreference clusters and
subject-relation-object triples) into an ordered plot outline for one
character. Annotations come either from an offline annotated fixture file
or from the wire protocol (/coref and /openie endpoints); no linguistic
model runs in-process.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace

from .errors import (
    GraphFormatError,
    InsufficientPlotError,
    IntegrityError,
    NoCharacterError,
    ParseError,
    UnknownCharacterError,
)

# Closed-class subjects eligible for canonical-name rewriting.
PRONOUNS = frozenset(
    "i me you he him she her it we us they them "
    "himself herself itself themselves myself yourself ourselves".split()
)


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end) into the source text."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise IntegrityError(f"invalid span [{self.start}, {self.end})")

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Mention:
    text: str
    span: CharSpan


@dataclass(frozen=True)
class CorefCluster:
    """All mentions of one possible character, sorted by span start."""

    canonical_name: str
    mentions: tuple[Mention, ...]

    def __post_init__(self):
        if not self.mentions:
            raise IntegrityError(f"cluster {self.canonical_name!r} has no mentions")
        ordered = tuple(sorted(self.mentions, key=lambda m: (m.span.start, m.span.end)))
        starts = [m.span for m in ordered]
        if len(set(starts)) != len(starts):
            raise IntegrityError(f"cluster {self.canonical_name!r} has duplicate mention spans")
        object.__setattr__(self, "mentions", ordered)


@dataclass(frozen=True)
class Triple:
    """One ⟨subject, relation, object⟩ extraction with source offsets."""

    subject: str
    subject_span: CharSpan
    relation: str
    object: str
    span: CharSpan

    def __post_init__(self):
        if not (self.span.start <= self.subject_span.start and self.subject_span.end <= self.span.end):
            raise IntegrityError(
                f"subject span {self.subject_span} outside triple span {self.span}"
            )

    @property
    def phrase(self) -> str:
        """Joined subject-relation-object phrase (the plot-point event text)."""
        parts = [self.subject.strip(), self.relation.strip(), self.object.strip()]
        return " ".join(p for p in parts if p)


@dataclass(frozen=True)
class PlotPoint:
    triple: Triple
    order_index: int
    subject_canonical: str


@dataclass(frozen=True)
class PlotOutline:
    character: str
    points: tuple[PlotPoint, ...]
    source_length: int

    def __post_init__(self):
        if len(self.points) < 2:
            raise InsufficientPlotError(
                f"outline for {self.character!r} has {len(self.points)} plot point(s); need at least 2"
            )

    def to_json(self) -> str:
        doc = {
            "character": self.character,
            "points": [
                {
                    "subject": p.triple.subject,
                    "relation": p.triple.relation,
                    "object": p.triple.object,
                    "subject_span": {"start": p.triple.subject_span.start, "end": p.triple.subject_span.end},
                    "order_index": p.order_index,
                }
                for p in self.points
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PlotOutline":
        try:
            doc = json.loads(text)
            character = doc["character"]
            points = []
            max_end = 0
            for i, p in enumerate(doc["points"]):
                span = CharSpan(p["subject_span"]["start"], p["subject_span"]["end"])
                max_end = max(max_end, span.end)
                triple = Triple(p["subject"], span, p["relation"], p["object"], span)
                points.append(PlotPoint(triple, p.get("order_index", i), character))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"bad outline document: {exc}") from exc
        return cls(character, tuple(points), max_end)


def _check_span(span: CharSpan, text: str, what: str, line: int) -> None:
    if span.end > len(text):
        raise IntegrityError(f"line {line}: {what} span [{span.start}, {span.end}) exceeds text length {len(text)}")


def parse_annotated_story(document: str) -> tuple[str, list[CorefCluster], list[Triple]]:
    """Parse the line-oriented annotated fixture format.

    Layout: a ``#TEXT`` block holding the raw story (lines joined with
    newlines), ``#CLUSTER <name>`` headers each followed by
    ``mention <start> <end>`` lines (optionally ``| <text>`` to assert the
    surface string), and ``#TRIPLE <s0> <s1> <t0> <t1> | <subj> | <rel> | <obj>``
    lines. All spans are offsets into the reconstructed text and are
    verified against it.
    """
    text_lines: list[str] = []
    clusters: list[CorefCluster] = []
    triples: list[Triple] = []
    pending_name: str | None = None
    pending_mentions: list[tuple[int, str | None, CharSpan]] = []
    mode = None  # None | "text" | "cluster"

    def flush_cluster():
        nonlocal pending_name, pending_mentions
        if pending_name is None:
            return
        mentions = []
        for line_no, asserted, span in pending_mentions:
            _check_span(span, text, "mention", line_no)
            surface = text[span.start:span.end]
            if asserted is not None and asserted != surface:
                raise IntegrityError(
                    f"line {line_no}: mention text {asserted!r} disagrees with source {surface!r}"
                )
            mentions.append(Mention(surface, span))
        if not mentions:
            raise ParseError(f"cluster {pending_name!r} has no mentions")
        clusters.append(CorefCluster(pending_name, tuple(mentions)))
        pending_name, pending_mentions = None, []

    # First pass: gather the raw text so spans can be verified as the
    # annotation lines are processed on the second pass.
    lines = document.splitlines()
    in_text = False
    for raw in lines:
        if raw.startswith("#TEXT"):
            in_text = True
            continue
        if raw.startswith("#"):
            in_text = False
            continue
        if in_text:
            text_lines.append(raw)
    while text_lines and not text_lines[-1].strip():
        text_lines.pop()
    text = "\n".join(text_lines)

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#TEXT"):
            flush_cluster()
            mode = "text"
        elif line.startswith("#CLUSTER"):
            flush_cluster()
            name = line[len("#CLUSTER"):].strip()
            if not name:
                raise ParseError("missing cluster name", lineno, len("#CLUSTER") + 1)
            pending_name = name
            mode = "cluster"
        elif line.startswith("#TRIPLE"):
            flush_cluster()
            mode = None
            body = line[len("#TRIPLE"):].strip()
            head, sep, rest = body.partition("|")
            if not sep:
                raise ParseError("triple line has no '|' fields", lineno, 1)
            nums = head.split()
            if len(nums) != 4:
                raise ParseError(f"expected 4 offsets, got {len(nums)}", lineno, len("#TRIPLE") + 2)
            try:
                s0, s1, t0, t1 = (int(v) for v in nums)
            except ValueError:
                raise ParseError(f"non-integer offset in {head.strip()!r}", lineno, len("#TRIPLE") + 2)
            fields = rest.split("|")
            if len(fields) != 3:
                raise ParseError(f"expected subject|relation|object, got {len(fields)} field(s)", lineno, 1)
            subject, relation, obj = (f.strip() for f in fields)
            subj_span, trip_span = CharSpan(s0, s1), CharSpan(t0, t1)
            _check_span(subj_span, text, "subject", lineno)
            _check_span(trip_span, text, "triple", lineno)
            surface = text[s0:s1]
            if subject != surface:
                raise IntegrityError(
                    f"line {lineno}: subject {subject!r} disagrees with source {surface!r}"
                )
            triples.append(Triple(subject, subj_span, relation, obj, trip_span))
        elif mode == "text":
            continue
        elif line.startswith("mention"):
            if mode != "cluster":
                raise ParseError("mention line outside a #CLUSTER block", lineno, 1)
            body = line[len("mention"):].strip()
            head, sep, asserted = body.partition("|")
            nums = head.split()
            if len(nums) != 2:
                raise ParseError(f"expected 2 offsets, got {len(nums)}", lineno, len("mention") + 2)
            try:
                start, end = int(nums[0]), int(nums[1])
            except ValueError:
                raise ParseError(f"non-integer offset in {head.strip()!r}", lineno, len("mention") + 2)
            pending_mentions.append((lineno, asserted.strip() if sep else None, CharSpan(start, end)))
        else:
            raise ParseError(f"unrecognized line {line[:40]!r}", lineno, 1)
    flush_cluster()
    return text, clusters, triples


def select_cluster(
    clusters: list[CorefCluster],
    strategy: str = "largest",
    seed: int = 0,
    name: str | None = None,
) -> CorefCluster:
    """Pick the character cluster to follow.

    ``largest`` keeps the cluster with the most mentions (ties broken by
    earliest first mention), ``random`` is a uniform seeded draw, and
    ``by_name`` requires an exact canonical-name match.
    """
    if not clusters:
        raise NoCharacterError("no coreference clusters to select from")
    if strategy == "largest":
        return max(clusters, key=lambda c: (len(c.mentions), -c.mentions[0].span.start))
    if strategy == "random":
        return clusters[random.Random(seed).randrange(len(clusters))]
    if strategy == "by_name":
        for cluster in clusters:
            if cluster.canonical_name == name:
                return cluster
        raise UnknownCharacterError(f"no cluster named {name!r}")
    raise ValueError(f"unknown cluster strategy {strategy!r}")


def align_plot_points(
    cluster: CorefCluster,
    triples: list[Triple],
    source_length: int | None = None,
    exact_position: bool = False,
    rewrite_pronouns: bool = True,
) -> PlotOutline:
    """Keep the triples whose subject position matches a cluster mention.

    Position match defaults to span overlap; ``exact_position`` demands
    identical offsets. Output is ordered by subject-span start, deduplicated
    on (subject span, relation, object) with the first occurrence winning.
    With ``rewrite_pronouns``, a pronoun subject is replaced by the cluster's
    canonical name (spans are untouched).
    """
    spans = [m.span for m in cluster.mentions]

    def matches(t: Triple) -> bool:
        if exact_position:
            return any(t.subject_span == s for s in spans)
        return any(t.subject_span.overlaps(s) for s in spans)

    aligned = [t for t in triples if matches(t)]
    aligned.sort(key=lambda t: (t.subject_span.start, t.subject_span.end, t.span.start, t.relation, t.object))
    seen: set[tuple[CharSpan, str, str]] = set()
    points: list[PlotPoint] = []
    for t in aligned:
        key = (t.subject_span, t.relation, t.object)
        if key in seen:
            continue
        seen.add(key)
        if rewrite_pronouns and t.subject.strip().lower() in PRONOUNS:
            t = replace(t, subject=cluster.canonical_name)
        points.append(PlotPoint(t, len(points), cluster.canonical_name))
    if len(points) < 2:
        raise InsufficientPlotError(
            f"only {len(points)} triple(s) aligned to {cluster.canonical_name!r}; need at least 2"
        )
    length = source_length if source_length is not None else max(p.triple.span.end for p in points)
    return PlotOutline(cluster.canonical_name, tuple(points), length)


def annotate_via_wire(text: str, base_url: str, timeout: float) -> tuple[list[CorefCluster], list[Triple]]:
    """Fetch clusters and triples for raw text from a sidecar service.

    POSTs ``{text}`` to /coref and /openie and validates every returned span
    against the text, exactly as the fixture parser does.
    """
    from .inference import post_json  # deferred: avoids import cycle

    coref = post_json(f"{base_url.rstrip('/')}/coref", {"text": text}, timeout)
    openie = post_json(f"{base_url.rstrip('/')}/openie", {"text": text}, timeout)

    clusters = []
    try:
        for c in coref["clusters"]:
            mentions = []
            for m in c["mentions"]:
                span = CharSpan(m["start"], m["end"])
                _check_span(span, text, "mention", 0)
                surface = text[span.start:span.end]
                if m.get("text", surface) != surface:
                    raise IntegrityError(f"mention text {m['text']!r} disagrees with source {surface!r}")
                mentions.append(Mention(surface, span))
            clusters.append(CorefCluster(c["name"], tuple(mentions)))
        triples = []
        for t in openie["triples"]:
            s_span = CharSpan(t["subject_span"]["start"], t["subject_span"]["end"])
            t_span = CharSpan(t["span"]["start"], t["span"]["end"])
            _check_span(s_span, text, "subject", 0)
            _check_span(t_span, text, "triple", 0)
            surface = text[s_span.start:s_span.end]
            if t["subject"] != surface:
                raise IntegrityError(f"subject {t['subject']!r} disagrees with source {surface!r}")
            triples.append(Triple(t["subject"], s_span, t["relation"], t["object"], t_span))
    except (KeyError, TypeError) as exc:
        raise IntegrityError(f"malformed annotation payload: {exc}") from exc
    return clusters, triples
