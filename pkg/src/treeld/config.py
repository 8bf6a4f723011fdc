"""Experiment configuration: JSON files with flat keys, overridden by command-line flags."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .learner import EdgeWeight, TiePolicy
from .tree_model import (
    STRUCTURES,
    TreeStructure,
    check_q,
    check_theta,
    make_structure,
    read_tree_file,
)

_logger = logging.getLogger("treeld.config")

DEFAULT_MIN_ERRORS = 200
DEFAULT_MAX_TRIALS = 10**8


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError as exc:
        raise ValueError(f"Environment variable {name} must be an integer, got {value!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment: structure, model parameters, sample sizes, learner and stopping rule.

    ``structure`` is ``star``, ``chain``, ``hybrid``, ``p3`` or a path to a tree file.
    """

    structure: str = "p3"
    theta: float = 0.1
    q: float = 0.0
    n_list: Tuple[int, ...] = (100,)
    weight: EdgeWeight = EdgeWeight.AGREEMENT
    policy: TiePolicy = TiePolicy.RANDOM
    min_errors: int = DEFAULT_MIN_ERRORS
    max_trials: int = DEFAULT_MAX_TRIALS
    seed: int = 0
    output: Optional[Path] = None
    p: int = 10
    workers: int = field(default_factory=lambda: _env_int("TREELD_WORKERS", 1))
    chunk_trials: Optional[int] = None

    def __post_init__(self) -> None:
        check_theta(self.theta)
        check_q(self.q)
        n_list = tuple(int(n) for n in self.n_list)
        if not n_list:
            raise ValueError("n_list must not be empty")
        if any(n < 1 for n in n_list):
            raise ValueError(f"Every n must be >= 1, got {n_list}")
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "weight", EdgeWeight.parse(self.weight))
        object.__setattr__(self, "policy", TiePolicy.parse(self.policy))
        if self.output is not None:
            object.__setattr__(self, "output", Path(self.output))
        if self.min_errors < 1:
            raise ValueError(f"min_errors must be >= 1, got {self.min_errors}")
        if self.max_trials < 1:
            raise ValueError(f"max_trials must be >= 1, got {self.max_trials}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.chunk_trials is not None and self.chunk_trials < 1:
            raise ValueError(f"chunk_trials must be >= 1, got {self.chunk_trials}")
        if self.structure not in STRUCTURES and not Path(self.structure).is_file():
            raise ValueError(
                f"structure must be one of {', '.join(STRUCTURES)} or an existing tree file, "
                f"got {self.structure!r}"
            )

    def build_tree(self) -> TreeStructure:
        if self.structure in STRUCTURES:
            return make_structure(self.structure, self.p)
        return read_tree_file(self.structure)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")
        data = dict(values)
        if "n_list" in data and isinstance(data["n_list"], (int, float)):
            data["n_list"] = (int(data["n_list"]),)
        return cls(**data)

    @staticmethod
    def read_values(path: Union[str, Path]) -> Dict[str, Any]:
        """Parse a flat JSON object whose keys mirror the dataclass fields."""
        source = Path(path)
        try:
            values = json.loads(source.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"Config file {source} is not valid JSON: {exc}") from exc
        if not isinstance(values, dict):
            raise ValueError(f"Config file {source} must hold a JSON object")
        _logger.info("Loaded config | path=%s keys=%s", source, ",".join(sorted(values)))
        return values

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        return cls.from_dict(cls.read_values(path))

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Replace fields whose override is not ``None``."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        known = {f.name for f in dataclasses.fields(self)}
        unknown = sorted(set(changes) - known)
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "structure": self.structure,
            "theta": self.theta,
            "q": self.q,
            "n_list": list(self.n_list),
            "weight": self.weight.value,
            "policy": self.policy.value,
            "min_errors": self.min_errors,
            "max_trials": self.max_trials,
            "seed": self.seed,
            "output": str(self.output) if self.output else None,
            "p": self.p,
            "workers": self.workers,
            "chunk_trials": self.chunk_trials,
        }
