"""Plot-graph story generation: outline extraction, commonsense bridging,
seeded random-walk narration."""

from .extraction import (
    CharSpan,
    CorefCluster,
    Mention,
    PlotOutline,
    PlotPoint,
    Triple,
    align_plot_points,
    parse_annotated_story,
    select_cluster,
)
from .inference import (
    InferenceCandidate,
    InferenceResponse,
    KnowledgeTable,
    Relation,
    TableBackend,
    WireBackend,
    load_table,
)
from .plot_graph import (
    BridgeGraph,
    EdgeKind,
    EventNode,
    LinkPolicy,
    NodeOrigin,
    StoryGraph,
    WeightedEdge,
    assemble,
    build_backward,
    build_bridge,
    build_forward,
    build_story_graph,
    build_story_graph_from_texts,
    link_graphs,
    link_weight,
    prune_dead_ends,
)
from .realize import RealizedStory, TemplateSet, realize_inference, realize_plot_point, realize_story
from .walk import StoryPath, WalkMode, WalkPolicy, enumerate_paths, walk

__version__ = "0.1.0"
