"""HTTP service: event-sourced live game sessions over FastAPI."""

from .app import ServiceSettings, create_app
from .store import EventStore, read_ledgers

__all__ = ["ServiceSettings", "create_app", "EventStore", "read_ledgers"]
