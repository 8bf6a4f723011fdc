import logging
import traceback

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .routers.theory import router as theory_router
from .routers.trees import router as trees_router
from .services import TheoryService

logger = logging.getLogger("treeld.api")


def create_app(theory_service: TheoryService | None = None) -> FastAPI:
    """
    Build a read-only FastAPI app over the closed forms and the exact 3-chain oracle.

    Args:
        theory_service: Service answering the routes; a default :class:`TheoryService` is
            created when none is supplied.
    """
    app = FastAPI(title="treeld Theory API")

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ValueError)
    async def invalid_argument_handler(request: Request, exc: ValueError):
        logger.warning("Invalid argument | %s %s error=%s", request.method, request.url, exc)
        return JSONResponse(
            status_code=422,
            content={"detail": "Invalid argument", "error": str(exc), "type": type(exc).__name__},
        )

    @app.exception_handler(Exception)
    async def global_exception_handler(request: Request, exc: Exception):
        logger.error("Unhandled exception | %s %s error=%s", request.method, request.url, exc)
        logger.debug("Exception details: %s", traceback.format_exc())

        if isinstance(exc, HTTPException):
            return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

        return JSONResponse(
            status_code=500,
            content={
                "detail": "Internal server error",
                "error": str(exc),
                "type": type(exc).__name__,
            },
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        logger.info("Request | method=%s url=%s", request.method, request.url)
        try:
            response = await call_next(request)
            logger.info(
                "Response | method=%s url=%s status=%d",
                request.method,
                request.url,
                response.status_code,
            )
            return response
        except Exception as e:
            logger.error("Request failed | %s %s error=%s", request.method, request.url, e)
            raise

    app.state.theory_service = theory_service or TheoryService()
    app.include_router(theory_router)
    app.include_router(trees_router)

    logger.info("FastAPI app created")
    return app
