"""Reference HTTP service for the generator/classifier/scorer wire protocols."""

from .config import BackendConfig
from .service import create_app, serve

__version__ = "0.1.0"
