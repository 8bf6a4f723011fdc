"""
Test utilities and fixtures for treeld.
Shared structures, seeded batches, API client and helper assertions.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from treeld.api.app import create_app
from treeld.api.services import TheoryService
from treeld.config import ExperimentConfig
from treeld.sampling import SampleBatch, sample_batch
from treeld.tree_model import TreeStructure, make_structure

SLOW_ENABLED = os.getenv("TREELD_SLOW", "").lower() in {"1", "true", "yes", "on"}


def pytest_collection_modifyitems(config, items):
    """Skip ``slow`` tests unless TREELD_SLOW is set."""
    if SLOW_ENABLED:
        return
    skip_slow = pytest.mark.skip(reason="set TREELD_SLOW=1 to run Monte Carlo and figure tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def p3() -> TreeStructure:
    return make_structure("p3")


@pytest.fixture
def star10() -> TreeStructure:
    return make_structure("star", 10)


@pytest.fixture
def chain10() -> TreeStructure:
    return make_structure("chain", 10)


@pytest.fixture
def hybrid10() -> TreeStructure:
    return make_structure("hybrid")


@pytest.fixture
def star_batch(star10: TreeStructure) -> SampleBatch:
    """500 samples of the 10-node star at theta=0.2, seed 7."""
    return sample_batch(star10, 0.2, 500, seed=7)


@pytest.fixture
def quick_config() -> ExperimentConfig:
    """Small p=3 simulation that stops after a handful of errors."""
    return ExperimentConfig(
        structure="p3",
        theta=0.3,
        q=0.0,
        n_list=(10, 20),
        min_errors=20,
        max_trials=5000,
        seed=11,
        workers=1,
        chunk_trials=256,
    )


@pytest.fixture
def tree_file(tmp_path: Path) -> Path:
    """A 5-vertex tree in text form (1-indexed edges)."""
    path = tmp_path / "tree.txt"
    path.write_text("5 1-2 2-3 2-4 4-5\n", encoding="utf-8")
    return path


@pytest.fixture
def api_client() -> TestClient:
    """Fixture providing an API client over a fresh TheoryService."""
    return TestClient(create_app(TheoryService()))


def binomial_sigma(p: float, trials: int) -> float:
    """Standard deviation of an empirical rate over ``trials`` trials."""
    return math.sqrt(p * (1.0 - p) / trials)


def assert_within_sigmas(rate: float, p: float, trials: int, k: float = 4.0) -> None:
    """Assert an empirical rate is within ``k`` binomial sigmas of ``p``."""
    sigma = binomial_sigma(p, trials)
    assert abs(rate - p) <= k * sigma, f"rate={rate} p={p} sigma={sigma} trials={trials}"


def assert_response_success(response, expected_status: int = 200):
    """Assert API response is successful."""
    assert (
        response.status_code == expected_status
    ), f"Expected {expected_status}, got {response.status_code}: {response.text}"


def assert_response_error(response, expected_status: int | None = None):
    """Assert API response is an error."""
    if expected_status:
        assert response.status_code == expected_status, response.text
    else:
        assert response.status_code >= 400


# Pytest marks for test categorization
pytest_slow = pytest.mark.slow
pytest_api = pytest.mark.api
