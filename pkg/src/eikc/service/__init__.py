"""HTTP service: FastAPI app factory and actor-registry handling."""

from .app import create_app, load_registry, serve

__all__ = ["create_app", "load_registry", "serve"]
