"""FastAPI application implementing the wire protocol.

Status codes: 400 for a malformed body, 422 for an unknown relation, 500
for a server-side span-integrity failure, 503 when a model is busy.
Request bodies are validated by hand so the codes match the protocol
exactly (framework defaults would answer 422 for malformed bodies).
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import BridgeConfig
from .models import ModelBusyError, ModelSet

RELATIONS = ("wants", "needs")


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse({"detail": detail}, status_code=status)


async def _json_object(request: Request) -> dict | JSONResponse:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError):
        return _error(400, "body is not valid JSON")
    if not isinstance(body, dict):
        return _error(400, "body must be a JSON object")
    return body


def build_app(config: BridgeConfig) -> FastAPI:
    models = ModelSet(config)
    app = FastAPI(title="c2po-sidecar", version="0.1.0")

    @app.exception_handler(ModelBusyError)
    async def busy_handler(request: Request, exc: ModelBusyError):
        return _error(503, str(exc) or "model busy")

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "models": models.identifiers(),
            "decoding": models.decoding(),
            "device": config.device,
            "max_candidates": config.max_candidates,
        }

    @app.post("/infer")
    async def infer(request: Request):
        body = await _json_object(request)
        if isinstance(body, JSONResponse):
            return body
        event = body.get("event")
        relation = body.get("relation")
        k = body.get("k")
        if not isinstance(event, str) or not event.strip():
            return _error(400, "field 'event' must be a non-empty string")
        if not isinstance(relation, str):
            return _error(400, "field 'relation' must be a string")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            return _error(400, "field 'k' must be an integer >= 1")
        if relation not in RELATIONS:
            return _error(422, f"unknown relation {relation!r}; expected one of {list(RELATIONS)}")
        candidates, anchor = models.infer.infer(event, relation, min(k, config.max_candidates))
        return {"candidates": candidates, "anchor_likelihood": anchor}

    def _text_body(body: dict) -> str | JSONResponse:
        text = body.get("text")
        if not isinstance(text, str):
            return _error(400, "field 'text' must be a string")
        return text

    @app.post("/coref")
    async def coref(request: Request):
        body = await _json_object(request)
        if isinstance(body, JSONResponse):
            return body
        text = _text_body(body)
        if isinstance(text, JSONResponse):
            return text
        clusters = models.coref.clusters(text)
        for cluster in clusters:
            for mention in cluster["mentions"]:
                if text[mention["start"]:mention["end"]] != mention["text"]:
                    return _error(500, f"span integrity failure in cluster {cluster['name']!r}")
        return {"clusters": clusters}

    @app.post("/openie")
    async def openie(request: Request):
        body = await _json_object(request)
        if isinstance(body, JSONResponse):
            return body
        text = _text_body(body)
        if isinstance(text, JSONResponse):
            return text
        triples = models.openie.triples(text)
        for triple in triples:
            span = triple["subject_span"]
            if text[span["start"]:span["end"]] != triple["subject"]:
                return _error(500, f"span integrity failure for subject {triple['subject']!r}")
        return {"triples": triples}

    return app
