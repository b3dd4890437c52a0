from dataclasses import dataclass


@dataclass(frozen=True)
class BridgeConfig:
    """Service configuration; model ids select loaders from the registry."""

    host: str = "127.0.0.1"
    port: int = 8570
    coref_model: str = "stub"
    openie_model: str = "stub"
    infer_model: str = "stub:"  # stub:<table path>
    device: str = "cpu"
    max_candidates: int = 100

    def __post_init__(self):
        if not 0 < self.port < 65536:
            raise ValueError(f"invalid port {self.port}")
        if self.max_candidates < 1:
            raise ValueError(f"max_candidates must be >= 1, got {self.max_candidates}")
