"""Surface realization of plot points and inferred events.

Plot points become "<subject> <relation> <object>." sentences; inferred
nodes become "<subject> <connective> <tail>." where the connective cycles
deterministically through a per-relation list, resetting at each plot
point. Tails are never mutated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ContractViolationError, ValidationError
from .extraction import PlotOutline, PlotPoint
from .inference import Relation
from .plot_graph import NodeOrigin, StoryGraph
from .walk import StoryPath

DEFAULT_CONNECTIVES = ("wants", "tries", "begins", "starts")


@dataclass(frozen=True)
class TemplateSet:
    wants_connectives: tuple[str, ...] = DEFAULT_CONNECTIVES
    needs_connectives: tuple[str, ...] = DEFAULT_CONNECTIVES
    cycle_deterministic: bool = True

    def __post_init__(self):
        if not self.wants_connectives or not self.needs_connectives:
            raise ValidationError("connective lists must be non-empty")

    def connectives(self, relation: Relation) -> tuple[str, ...]:
        return self.wants_connectives if relation is Relation.WANTS else self.needs_connectives


def _sentence(text: str) -> str:
    text = " ".join(text.split())
    if not text:
        return ""
    return text[0].upper() + text[1:] + "."


def realize_plot_point(p: PlotPoint) -> str:
    """Join the triple into a sentence; empty objects are omitted cleanly."""
    return _sentence(p.triple.phrase)


def realize_event_text(text: str) -> str:
    """Plot-point node text straight from a graph, as a sentence."""
    return _sentence(text)


def realize_inference(subject: str, relation: Relation, tail: str,
                      templates: TemplateSet = TemplateSet(), position: int = 0) -> str:
    """One inferred event as a sentence.

    The connective cycles through the relation's list by position; when the
    tail already starts with a listed connective, none is added (avoids
    "wants wants").
    """
    if not tail.strip():
        raise ValidationError("inference tail is empty")
    words = tail.split()
    options = templates.connectives(relation)
    first = words[0].lower().rstrip(".,!?") if words else ""
    if first in options:
        return _sentence(f"{subject} {tail}")
    connective = options[position % len(options)] if templates.cycle_deterministic else options[0]
    return _sentence(f"{subject} {connective} {tail}")


@dataclass(frozen=True)
class RealizedSentence:
    text: str
    is_plot_point: bool
    node_id: str


@dataclass(frozen=True)
class RealizedStory:
    sentences: tuple[RealizedSentence, ...]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    def to_json(self) -> str:
        doc = {
            "sentences": [
                {"text": s.text, "is_plot_point": s.is_plot_point, "node_id": s.node_id}
                for s in self.sentences
            ]
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def realize_story(path: StoryPath, graph: StoryGraph,
                  outline: PlotOutline | None = None,
                  templates: TemplateSet = TemplateSet()) -> RealizedStory:
    """Realize a walked path, sentence per node, in path order.

    The inferred-connective position resets after every plot point so each
    bridge segment starts the cycle fresh.
    """
    subject = graph.character or (outline.character if outline else "")
    sentences: list[RealizedSentence] = []
    position = 0
    for nid in path.node_ids:
        node = graph.nodes.get(nid)
        if node is None:
            raise ContractViolationError(f"path node {nid!r} is not in the graph")
        if node.origin is NodeOrigin.PLOT_POINT:
            sentences.append(RealizedSentence(realize_event_text(node.text), True, nid))
            position = 0
        else:
            relation = Relation.WANTS if node.origin is NodeOrigin.FORWARD_INFERRED else Relation.NEEDS
            text = realize_inference(subject or node.subject, relation, node.text, templates, position)
            sentences.append(RealizedSentence(text, False, nid))
            position += 1
    return RealizedStory(tuple(sentences))
