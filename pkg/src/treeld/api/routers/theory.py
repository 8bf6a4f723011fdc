from fastapi import APIRouter, Depends, Query

from ..dependencies import get_theory_service
from ..schemas import ExactP3Result, ExponentSet, HealthStatus, PredictRequest, PredictResponse
from ..services import TheoryService

router = APIRouter(tags=["theory"])


@router.get("/health", response_model=HealthStatus)
def health(service: TheoryService = Depends(get_theory_service)) -> HealthStatus:
    return service.health()


@router.get("/exponents", response_model=ExponentSet)
def exponents(
    theta: float = Query(..., description="Edge flip probability in (0, 0.5)"),
    q: float = Query(default=0.0, description="BSC crossover probability in [0, 0.5)"),
    theta3: float | None = Query(
        default=None, description="Flip probability of the second chain edge"
    ),
    service: TheoryService = Depends(get_theory_service),
) -> ExponentSet:
    """All closed-form exponents at one parameter point."""
    return service.exponents(theta, q, theta3)


@router.post("/predict", response_model=PredictResponse)
def predict(
    request: PredictRequest, service: TheoryService = Depends(get_theory_service)
) -> PredictResponse:
    """Predicted error probability with the BK and NKS bounds for every requested n."""
    return service.predict(
        request.theta,
        request.q,
        request.n,
        structure=request.structure,
        tree=request.tree,
        p=request.p,
    )


@router.get("/exact-p3", response_model=ExactP3Result)
def exact_p3(
    theta: float = Query(...),
    n: int = Query(..., description="Sample size, at most 20"),
    q: float = Query(default=0.0),
    policy: str = Query(default="random", description="random, conservative or lexicographic"),
    service: TheoryService = Depends(get_theory_service),
) -> ExactP3Result:
    """Exact error probability of the learner on the 3-chain."""
    return service.exact_p3(theta, q, n, policy)
