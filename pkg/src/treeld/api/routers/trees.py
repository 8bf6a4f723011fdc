from fastapi import APIRouter, Depends, Query

from ..dependencies import get_theory_service
from ..schemas import TreeInfo
from ..services import TheoryService

router = APIRouter(prefix="/trees", tags=["trees"])


@router.get("/{structure}", response_model=TreeInfo)
def describe_tree(
    structure: str,
    p: int = Query(default=10, description="Vertex count for star and chain"),
    service: TheoryService = Depends(get_theory_service),
) -> TreeInfo:
    """Edges (1-indexed), degrees, ζ and the DOT rendering of a named structure."""
    return service.tree_info(structure, p)
