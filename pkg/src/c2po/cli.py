"""Command-line front end for the plot-graph story pipeline.

Subcommands chain file-to-file: extract produces an outline JSON, graph
expands it into a story-graph JSON, generate walks the graph into story
text files plus a manifest, stats reports corpus statistics, and pipeline
runs all of them. All randomness flows from --seed: a random cluster pick
uses the seed directly and story j walks with seed + j. Outputs are
written to a temp file and atomically renamed, so a failed run never
leaves a valid-looking partial file.

Exit codes: 0 ok, 1 parse/I-O error, 2 insufficient plot, 3 backend
failure, 4 invalid graph.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import extraction, metrics
from .errors import (
    C2POError,
    ContractViolationError,
    GraphFormatError,
    InsufficientPlotError,
    InternalError,
    NoCharacterError,
    ParseError,
    IntegrityError,
    TableFormatError,
    TransportError,
    UnknownCharacterError,
    ValidationError,
)
from .inference import backend_from_spec, resolve_timeout
from .plot_graph import LinkPolicy, StoryGraph, build_story_graph
from .realize import DEFAULT_CONNECTIVES, TemplateSet, realize_story
from .walk import StoryPath, WalkMode, WalkPolicy, walk

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INSUFFICIENT_PLOT = 2
EXIT_BACKEND = 3
EXIT_BAD_GRAPH = 4


@dataclass
class RunConfig:
    k: int = 3
    n: int = 3
    seed: int = 0
    backend: str = ""
    cluster: str = "largest"  # largest | random | name:<x>
    walk: str = "weighted"  # weighted | uniform
    count: int = 3
    wants_templates: tuple[str, ...] = DEFAULT_CONNECTIVES
    needs_templates: tuple[str, ...] = DEFAULT_CONNECTIVES
    link_all_nodes: bool = False
    rewrite_pronouns: bool = True

    def templates(self) -> TemplateSet:
        return TemplateSet(tuple(self.wants_templates), tuple(self.needs_templates))

    def walk_mode(self) -> WalkMode:
        if self.walk == "uniform":
            return WalkMode.UNIFORM
        if self.walk == "weighted":
            return WalkMode.WEIGHT_PROPORTIONAL
        raise ValidationError(f"walk mode must be 'weighted' or 'uniform', got {self.walk!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge precedence: flags > config file > defaults."""
    values = {f.name: f.default for f in fields(RunConfig)}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(values)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in values:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    for key in ("wants_templates", "needs_templates"):
        raw = values[key]
        if isinstance(raw, str):
            raw = [t.strip() for t in raw.split(",") if t.strip()]
        values[key] = tuple(raw)
    config = RunConfig(**values)
    if config.count < 1:
        raise ValidationError(f"count must be >= 1, got {config.count}")
    return config


def write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _select_strategy(config: RunConfig) -> tuple[str, str | None]:
    if config.cluster.startswith("name:"):
        return "by_name", config.cluster[len("name:"):]
    if config.cluster in ("largest", "random"):
        return config.cluster, None
    raise ValidationError(f"unknown cluster strategy {config.cluster!r}")


def extract_outline(input_path: str, config: RunConfig) -> extraction.PlotOutline:
    try:
        content = Path(input_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {input_path}: {exc}")
    if config.backend.startswith("http"):
        # Raw story text annotated by the sidecar's /coref and /openie.
        clusters, triples = extraction.annotate_via_wire(content, _wire_url(config.backend), resolve_timeout())
        source_length = len(content)
    elif content.lstrip().startswith("{"):
        try:
            return extraction.PlotOutline.from_json(content)
        except GraphFormatError as exc:
            raise ParseError(str(exc)) from exc
    else:
        text, clusters, triples = extraction.parse_annotated_story(content)
        source_length = len(text)
    strategy, name = _select_strategy(config)
    cluster = extraction.select_cluster(clusters, strategy, seed=config.seed, name=name)
    return extraction.align_plot_points(
        cluster, triples, source_length=source_length, rewrite_pronouns=config.rewrite_pronouns
    )


def _wire_url(backend_spec: str) -> str:
    from .inference import WireBackend

    backend = backend_from_spec(backend_spec)
    assert isinstance(backend, WireBackend)
    return backend.base_url


def cmd_extract(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    outline = extract_outline(args.input, config)
    write_atomic(Path(args.out), outline.to_json())
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        outline = extraction.PlotOutline.from_json(Path(args.outline).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {args.outline}: {exc}")
    backend = backend_from_spec(config.backend)
    graph = build_story_graph(outline, backend, config.k, config.n,
                              LinkPolicy(link_all_nodes=config.link_all_nodes))
    write_atomic(Path(args.out), graph.to_json())
    if args.dot:
        write_atomic(Path(args.dot), graph.to_dot())
    return EXIT_OK


def generate_stories(graph: StoryGraph, config: RunConfig, out_dir: Path,
                     write_json: bool = False) -> dict:
    templates = config.templates()
    manifest = {
        "seed": config.seed,
        "count": config.count,
        "walk": config.walk,
        "stories": [],
    }
    for j in range(config.count):
        policy = WalkPolicy(config.walk_mode(), seed=config.seed + j)
        path = walk(graph, policy)
        story = realize_story(path, graph, templates=templates)
        name = f"story_{j:03d}.txt"
        write_atomic(out_dir / name, story.text + "\n")
        if write_json:
            write_atomic(out_dir / f"story_{j:03d}.json", story.to_json())
        manifest["stories"].append({"file": name, "seed": path.seed, "node_ids": list(path.node_ids)})
    write_atomic(out_dir / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def cmd_generate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        graph = StoryGraph.from_json(Path(args.graph).read_text(encoding="utf-8"))
    except OSError as exc:
        raise GraphFormatError(f"cannot read {args.graph}: {exc}")
    generate_stories(graph, config, Path(args.out), write_json=args.json)
    return EXIT_OK


def load_story_dir(path: Path) -> list[str]:
    files = sorted(p for p in path.glob("*.txt"))
    if not files:
        raise ParseError(f"no story files (*.txt) in {path}")
    return [p.read_text(encoding="utf-8") for p in files]


def cmd_stats(args: argparse.Namespace) -> int:
    stories = load_story_dir(Path(args.stories))
    reference = ""
    if args.reference:
        try:
            reference = Path(args.reference).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read {args.reference}: {exc}")
    stats = metrics.corpus_stats(stories, reference)
    print(stats.to_json() if args.json else stats.report())
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = Path(args.out)
    outline = extract_outline(args.input, config)
    write_atomic(out_dir / "outline.json", outline.to_json())
    backend = backend_from_spec(config.backend)
    graph = build_story_graph(outline, backend, config.k, config.n,
                              LinkPolicy(link_all_nodes=config.link_all_nodes))
    write_atomic(out_dir / "graph.json", graph.to_json())
    if args.dot:
        write_atomic(Path(args.dot), graph.to_dot())
    generate_stories(graph, config, out_dir / "stories", write_json=args.json)
    if args.reference:
        stories = load_story_dir(out_dir / "stories")
        reference = Path(args.reference).read_text(encoding="utf-8")
        print(metrics.corpus_stats(stories, reference).report())
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with RunConfig fields (flags win)")
    parser.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    parser.add_argument("--backend", help="table:<path> or http(s) URL of an inference sidecar")
    parser.add_argument("--k", type=int, help="branches per expansion (default 3)")
    parser.add_argument("--n", type=int, help="expansion depth (default 3)")
    parser.add_argument("--seed", type=int, help="base seed; story j uses seed+j (default 0)")
    parser.add_argument("--count", type=int, help="stories to generate (default 3)")
    parser.add_argument("--cluster", help="largest | random | name:<x> (default largest)")
    parser.add_argument("--walk", choices=["weighted", "uniform"], help="edge sampling mode")
    parser.add_argument("--wants-templates", dest="wants_templates", help="comma-separated connectives")
    parser.add_argument("--needs-templates", dest="needs_templates", help="comma-separated connectives")
    parser.add_argument("--link-all-nodes", dest="link_all_nodes", action="store_const", const=True,
                        help="link every forward node, not only the frontier")
    parser.add_argument("--no-pronoun-rewrite", dest="rewrite_pronouns", action="store_const", const=False,
                        help="keep pronoun subjects instead of the canonical name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="c2po", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="annotated fixture (or raw text via http backend) -> outline JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("graph", help="outline JSON -> story-graph JSON")
    p.add_argument("--outline", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dot", help="also write a DOT rendering")
    _add_config_flags(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("generate", help="story-graph JSON -> story files + manifest")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true", help="also write per-sentence JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="story dir (+ reference corpus) -> statistics report")
    p.add_argument("--stories", required=True)
    p.add_argument("--reference", help="reference corpus text file")
    p.add_argument("--json", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="extract, graph, generate, and stats in one run")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dot")
    p.add_argument("--json", action="store_true")
    p.add_argument("--reference", help="run the stats step against this corpus")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


_EXIT_CODES: list[tuple[type, int]] = [
    (InsufficientPlotError, EXIT_INSUFFICIENT_PLOT),
    (NoCharacterError, EXIT_INSUFFICIENT_PLOT),
    (UnknownCharacterError, EXIT_INSUFFICIENT_PLOT),
    (TransportError, EXIT_BACKEND),
    (TableFormatError, EXIT_BACKEND),
    (GraphFormatError, EXIT_BAD_GRAPH),
    (ContractViolationError, EXIT_BAD_GRAPH),
    (InternalError, EXIT_BAD_GRAPH),
    (ParseError, EXIT_PARSE),
    (IntegrityError, EXIT_PARSE),
    (ValidationError, EXIT_PARSE),
    (C2POError, EXIT_PARSE),
]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "print_config", False):
            config = resolve_config(args)
            print(json.dumps(asdict(config), sort_keys=True, indent=2))
            return EXIT_OK
        return args.func(args)
    except C2POError as exc:
        print(f"c2po: error: {exc}", file=sys.stderr)
        for klass, code in _EXIT_CODES:
            if isinstance(exc, klass):
                return code
        return EXIT_PARSE
    except OSError as exc:
        print(f"c2po: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
