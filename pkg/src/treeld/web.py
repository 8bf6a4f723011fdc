#!/usr/bin/env python3
"""
CLI entry point for the treeld theory API.

Usage:
    treeld-web [options]

Options:
    --host HOST        Host to bind to (default: TREELD_HOST or 127.0.0.1)
    --port PORT        Port to listen on (default: TREELD_PORT or 8000)
    --reload           Enable auto-reload (for development; default: TREELD_RELOAD)
    --log-level LEVEL  Logging level (default: INFO)

Examples:
    treeld-web
    treeld-web --port 9000
    TREELD_HOST=0.0.0.0 treeld-web
"""

import argparse
import logging
import os
from typing import Optional, Sequence

import uvicorn

from .api.app import create_app
from .api.services import TheoryService
from .logutil import configure_logging

logger = logging.getLogger("treeld.web")


def _env_bool(name: str, default: bool = False) -> bool:
    """Parse boolean from environment variable."""
    val = os.getenv(name)
    if val is None:
        return default
    return val.lower() in {"1", "true", "yes", "on"}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="treeld theory API - exponents, predictions and exact 3-chain errors",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--host",
        default=os.getenv("TREELD_HOST", "127.0.0.1"),
        help="Host to bind to (default: %(default)s)",
    )
    parser.add_argument(
        "--port",
        type=int,
        default=int(os.getenv("TREELD_PORT", "8000")),
        help="Port to listen on (default: %(default)s)",
    )
    parser.add_argument(
        "--reload",
        action="store_true",
        default=_env_bool("TREELD_RELOAD", False),
        help="Enable auto-reload for development (default: %(default)s)",
    )
    parser.add_argument("--log-level", default="INFO", help="Logging level (default: %(default)s)")
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point."""
    args = parse_args(argv)
    configure_logging(args.log_level)

    logger.info("Starting theory API | url=http://%s:%d docs=/docs", args.host, args.port)
    if args.reload:
        # reload needs an import string
        uvicorn.run("treeld.api.main:app", host=args.host, port=args.port, reload=True)
        return
    uvicorn.run(create_app(TheoryService()), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
