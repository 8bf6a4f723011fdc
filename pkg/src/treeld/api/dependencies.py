from fastapi import Request

from .services import TheoryService


def get_theory_service(request: Request) -> TheoryService:
    """Retrieve the configured TheoryService from FastAPI app state."""
    service = getattr(request.app.state, "theory_service", None)
    if service is None:
        raise RuntimeError("Theory service is not configured")
    return service
