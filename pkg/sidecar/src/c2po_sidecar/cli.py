"""Serve the sidecar: ``c2po-sidecar --infer-model stub:table.tsv``."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .app import build_app
from .config import BridgeConfig
from .models import ModelLoadError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="c2po-sidecar", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8570)
    parser.add_argument("--coref-model", default="stub")
    parser.add_argument("--openie-model", default="stub")
    parser.add_argument("--infer-model", default="stub:",
                        help="stub:<table path> serves a TSV knowledge table")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-candidates", type=int, default=100)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = BridgeConfig(
            host=args.host,
            port=args.port,
            coref_model=args.coref_model,
            openie_model=args.openie_model,
            infer_model=args.infer_model,
            device=args.device,
            max_candidates=args.max_candidates,
        )
        app = build_app(config)
    except (ModelLoadError, ValueError) as exc:
        print(f"c2po-sidecar: startup failed: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
