from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator


class HealthStatus(BaseModel):
    status: str
    version: str


class ExponentSet(BaseModel):
    theta: float
    q: float
    theta3: float
    k_p: float
    k_bk: float
    k_q: float
    k_nks: float
    beta1: float
    beta2: float
    joint_exponent: float
    lemma2_exponent: float


class PredictRequest(BaseModel):
    """Either a named ``structure`` or a ``tree`` in text form; defaults to the 3-chain."""

    structure: str | None = None
    tree: str | None = None
    p: int = 10
    theta: float
    q: float = 0.0
    n: list[int] = Field(min_length=1)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _one_tree_source(self) -> "PredictRequest":
        if self.structure is not None and self.tree is not None:
            raise ValueError("Give either structure or tree, not both")
        return self


class PredictionRow(BaseModel):
    n: int
    prediction: float | None = None
    log_prediction: float | None = None
    conservative: float | None = None
    bk_bound: float
    nks_bound: float
    exponent: float


class PredictResponse(BaseModel):
    tree: str
    zeta: int
    theta: float
    q: float
    rows: list[PredictionRow]


class TreeInfo(BaseModel):
    name: str
    p: int
    text: str
    zeta: int
    edges: list[tuple[int, int]]
    degrees: list[int]
    is_star: bool
    is_chain: bool
    dot: str


class ExactP3Result(BaseModel):
    theta: float
    q: float
    n: int
    policy: str
    error: float
