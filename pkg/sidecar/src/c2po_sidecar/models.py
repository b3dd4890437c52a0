"""Model registry: map model ids from the config to loaded models.

Only the deterministic stub family ships in-tree; ids for real pretrained
models can be registered here by downstream deployments. Unknown ids fail
at startup, never at request time.
"""

from __future__ import annotations

from .config import BridgeConfig
from .stubs import StubCorefModel, StubInferModel, StubOpenIEModel


class ModelLoadError(Exception):
    """A configured model id cannot be loaded."""


class ModelBusyError(Exception):
    """The model cannot take the request right now (mapped to 503)."""


def load_coref_model(model_id: str):
    if model_id == "stub":
        return StubCorefModel()
    raise ModelLoadError(f"unknown coref model {model_id!r}; available: stub")


def load_openie_model(model_id: str):
    if model_id == "stub":
        return StubOpenIEModel()
    raise ModelLoadError(f"unknown open-IE model {model_id!r}; available: stub")


def load_infer_model(model_id: str):
    if model_id == "stub" or model_id.startswith("stub:"):
        _, _, path = model_id.partition(":")
        try:
            return StubInferModel(path)
        except (OSError, ValueError) as exc:
            raise ModelLoadError(f"cannot load stub table {path!r}: {exc}") from exc
    raise ModelLoadError(f"unknown inference model {model_id!r}; available: stub:<table path>")


class ModelSet:
    """The three capabilities behind the wire protocol."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        self.coref = load_coref_model(config.coref_model)
        self.openie = load_openie_model(config.openie_model)
        self.infer = load_infer_model(config.infer_model)

    def identifiers(self) -> dict[str, str]:
        return {
            "coref": self.config.coref_model,
            "openie": self.config.openie_model,
            "infer": self.config.infer_model,
        }

    def decoding(self) -> dict:
        # Stub models do exact lookups; deployments wrapping a generative
        # model must report their decoding parameters here for provenance.
        return {"strategy": "deterministic-table-lookup", "beam_width": None}
