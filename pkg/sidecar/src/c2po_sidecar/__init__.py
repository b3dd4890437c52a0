"""HTTP sidecar exposing coref, open-IE, and commonsense-inference models
behind the c2po wire protocol."""

from .app import build_app
from .config import BridgeConfig
from .models import ModelLoadError

__version__ = "0.1.0"
