"""HTTP service wrapping the decoder toolkit."""

from .app import create_app

__all__ = ["create_app"]
