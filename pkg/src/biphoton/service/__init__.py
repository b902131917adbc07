"""HTTP service wrapping the library (FastAPI + pydantic models)."""

from .app import create_app

__all__ = ["create_app"]
