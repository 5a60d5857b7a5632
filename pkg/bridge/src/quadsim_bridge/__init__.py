"""Client-side episodic environment for the quadsim simulation server."""

from .checker import check_env
from .env import ENV_ID, QuadSimEnv, make
from .errors import BridgeError, ConformanceError, ProtocolFailure
from .protocol import ManagedServer, ProtocolClient
from .spaces import Box

__version__ = "0.1.0"
