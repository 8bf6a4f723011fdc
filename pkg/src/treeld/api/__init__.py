from .app import create_app
from .services import TheoryService

__all__ = ["create_app", "TheoryService"]
