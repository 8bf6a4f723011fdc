"""
Executable entrypoint for the theory API.

    uvicorn treeld.api.main:app
"""

from __future__ import annotations

from .app import create_app
from .services import TheoryService

app = create_app(TheoryService())
