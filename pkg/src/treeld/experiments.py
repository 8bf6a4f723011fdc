"""
Monte Carlo simulations, theory curves and figure reproduction.

Trials are split into fixed-size chunks. Chunk ``k`` at sample size ``n`` draws from the streams
keyed ``(seed, n, k, purpose)``; chunks are aggregated in index order and the stopping rule is
checked between chunks, so a report depends only on the configuration and never on the number
of workers.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import pandas as pd
from scipy.stats import binomtest

from .asymptotics import bk_bound, k_bk, k_nks, k_p, k_q, nks_bound, predict_error
from .config import ExperimentConfig
from .learner import EdgeWeight, TiePolicy, learn_mwst, structure_error
from .oracle import exact_error_p3
from .reporting import (
    EXACT_P3_COLUMNS,
    NOISELESS_EXPONENT_COLUMNS,
    NOISY_EXPONENT_COLUMNS,
    reports_to_frame,
    rows_to_frame,
    theory_frame,
    write_csv,
)
from .sampling import PairStats, batch_pair_stats, flip_bits, sample_trials
from .streams import CHANNEL_STREAM, SAMPLE_STREAM, TIE_STREAM, chunk_generator
from .tree_model import TreeStructure

_logger = logging.getLogger("treeld.experiments")

# bits drawn per chunk, before the cap on trials
CHUNK_BITS = 1 << 20
MAX_CHUNK_TRIALS = 4096


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for ``errors / trials``."""
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError(f"Need 0 <= errors <= trials and trials >= 1, got {errors}/{trials}")
    ci = binomtest(int(errors), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    rate = errors / trials
    # rounding at k = 0 or k = n can leave the endpoint a few ulps off the estimate
    return min(float(ci.low), rate), max(float(ci.high), rate)


@dataclass(frozen=True)
class SimulationReport:
    """Empirical error probability at one sample size."""

    tree: str
    theta: float
    q: float
    n: int
    weight: EdgeWeight
    policy: TiePolicy
    seed: int
    trials: int
    errors: int
    wilson_ci_95: Tuple[float, float]
    wall_time_s: float
    ties: int = 0
    warning: str = ""
    error_rate: float = field(init=False)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"A report needs at least one trial, got {self.trials}")
        if not 0 <= self.errors <= self.trials:
            raise ValueError(f"errors must lie in [0, trials], got {self.errors}/{self.trials}")
        rate = self.errors / self.trials
        low, high = self.wilson_ci_95
        if not low <= rate <= high:
            raise ValueError(f"Wilson interval [{low}, {high}] does not bracket {rate}")
        object.__setattr__(self, "error_rate", rate)

    def to_row(self) -> Dict[str, Any]:
        """CSV row; wall time is left out so reruns compare byte-for-byte."""
        low, high = self.wilson_ci_95
        return {
            "tree": self.tree,
            "theta": self.theta,
            "q": self.q,
            "n": self.n,
            "weight": self.weight.value,
            "policy": self.policy.value,
            "seed": self.seed,
            "trials": self.trials,
            "errors": self.errors,
            "error_rate": self.error_rate,
            "wilson_low": low,
            "wilson_high": high,
            "ties": self.ties,
            "warning": self.warning,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {**self.to_row(), "wall_time_s": self.wall_time_s}


# ------------------------------- simulation --------------------------------
@dataclass(frozen=True)
class _ChunkTask:
    tree: TreeStructure
    theta: float
    q: float
    n: int
    weight: EdgeWeight
    policy: TiePolicy
    seed: int
    index: int
    trials: int


@dataclass(frozen=True)
class _ChunkResult:
    index: int
    trials: int
    errors: int
    ties: int


def _simulate_chunk(task: _ChunkTask) -> _ChunkResult:
    """Sample, corrupt and learn every trial of one chunk."""
    key = (task.seed, task.n, task.index)
    bits = sample_trials(
        task.tree, task.theta, task.n, task.trials, chunk_generator(*key, SAMPLE_STREAM)
    )
    if task.q > 0:
        bits = flip_bits(bits, task.q, chunk_generator(*key, CHANNEL_STREAM))
    ones, both = batch_pair_stats(bits)
    tie_rng = chunk_generator(*key, TIE_STREAM)
    errors = ties = 0
    for trial in range(task.trials):
        stats = PairStats.from_counts(task.n, ones[trial], both[trial])
        result = learn_mwst(stats, task.weight, task.policy, tie_rng)
        errors += structure_error(result, task.tree)
        ties += result.tie_encountered
    return _ChunkResult(task.index, task.trials, int(errors), int(ties))


def chunk_size(n: int, p: int, override: Optional[int] = None) -> int:
    """Trials per chunk: ``override`` if given, else about a million bits per chunk."""
    if override is not None:
        return int(override)
    return max(1, min(MAX_CHUNK_TRIALS, CHUNK_BITS // (n * p)))


def _chunk_tasks(cfg: ExperimentConfig, tree: TreeStructure, n: int) -> Iterator[_ChunkTask]:
    size = chunk_size(n, tree.p, cfg.chunk_trials)
    for index in range(math.ceil(cfg.max_trials / size)):
        yield _ChunkTask(
            tree=tree,
            theta=float(cfg.theta),
            q=float(cfg.q),
            n=n,
            weight=cfg.weight,
            policy=cfg.policy,
            seed=cfg.seed,
            index=index,
            trials=min(size, cfg.max_trials - index * size),
        )


def _simulate_n(
    cfg: ExperimentConfig, tree: TreeStructure, n: int, pool: Optional[Executor]
) -> SimulationReport:
    started = time.perf_counter()
    wave = cfg.workers if pool is not None else 1
    tasks = _chunk_tasks(cfg, tree, n)
    trials = errors = ties = 0
    exhausted = False
    while errors < cfg.min_errors and not exhausted:
        batch = [task for _, task in zip(range(wave), tasks)]
        if not batch:
            break
        exhausted = len(batch) < wave
        mapper = pool.map if pool is not None else map
        results = mapper(_simulate_chunk, batch)
        for result in results:
            if errors >= cfg.min_errors:
                break
            trials += result.trials
            errors += result.errors
            ties += result.ties
            _logger.debug(
                "Simulation chunk done | n=%d chunk=%d trials=%d errors=%d",
                n,
                result.index,
                result.trials,
                result.errors,
            )

    warning = ""
    if errors == 0:
        warning = "max_trials reached with zero errors"
    elif errors < cfg.min_errors:
        warning = f"max_trials reached with {errors} < {cfg.min_errors} errors"
    if warning:
        _logger.warning("Simulation budget exhausted | n=%d trials=%d %s", n, trials, warning)

    report = SimulationReport(
        tree=tree.to_text(),
        theta=float(cfg.theta),
        q=float(cfg.q),
        n=n,
        weight=cfg.weight,
        policy=cfg.policy,
        seed=cfg.seed,
        trials=trials,
        errors=errors,
        wilson_ci_95=wilson_interval(errors, trials),
        wall_time_s=time.perf_counter() - started,
        ties=ties,
        warning=warning,
    )
    _logger.info(
        "Simulation done | n=%d trials=%d errors=%d rate=%.6g wall_time_s=%.3f",
        n,
        trials,
        errors,
        report.error_rate,
        report.wall_time_s,
    )
    return report


def run_simulation(cfg: ExperimentConfig) -> List[SimulationReport]:
    """
    One :class:`SimulationReport` per ``n`` in ``cfg.n_list``.

    Each sample size runs ``sample -> (optional BSC) -> pair statistics -> learn -> compare``
    until ``cfg.min_errors`` errors are seen or ``cfg.max_trials`` trials are spent.
    """
    tree = cfg.build_tree()
    _logger.info(
        "Simulation start | tree=%s theta=%s q=%s n_list=%s weight=%s policy=%s seed=%d workers=%d",
        tree.to_text(),
        cfg.theta,
        cfg.q,
        list(cfg.n_list),
        cfg.weight.value,
        cfg.policy.value,
        cfg.seed,
        cfg.workers,
    )
    if cfg.workers == 1:
        return [_simulate_n(cfg, tree, n, None) for n in cfg.n_list]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return [_simulate_n(cfg, tree, n, pool) for n in cfg.n_list]


# --------------------------------- theory ----------------------------------
def run_theory(cfg: ExperimentConfig) -> pd.DataFrame:
    """Prediction, its log, both competing bounds and the exponent at every ``n``."""
    tree = cfg.build_tree()
    exponent = k_p(cfg.theta) if cfg.q == 0 else k_q(cfg.theta, cfg.q)
    rows = []
    for n in cfg.n_list:
        try:
            prediction = predict_error(tree, cfg.theta, cfg.q, n)
            value, log_value = prediction.predicted_error, prediction.log_predicted_error
        except ValueError as exc:
            _logger.warning("Prediction outside regime | n=%d reason=%s", n, exc)
            value = log_value = math.nan
        rows.append(
            {
                "n": n,
                "prediction": value,
                "log_prediction": log_value,
                "bk_bound": bk_bound(tree.p, cfg.theta, n),
                "nks_bound": nks_bound(tree.p, cfg.theta, cfg.q, n),
                "exponent": exponent,
            }
        )
    return theory_frame(rows)


def exact_p3_frame(
    theta: float, q: float, policy: "TiePolicy | str", n_values: Sequence[int]
) -> pd.DataFrame:
    """Exact 3-chain error probabilities for every ``n`` in ``n_values``."""
    policy = TiePolicy.parse(policy)
    rows = [
        {
            "n": n,
            "theta": float(theta),
            "q": float(q),
            "policy": policy.value,
            "error": exact_error_p3(theta, q, n, policy),
        }
        for n in n_values
    ]
    return rows_to_frame(rows, EXACT_P3_COLUMNS)


# --------------------------------- figures ---------------------------------
THETA_GRID: Tuple[float, ...] = tuple(round(0.01 * k, 2) for k in range(1, 50))


@dataclass(frozen=True)
class FigureSpec:
    """
    One reproducible figure.

    ``kind`` is ``"exponents"`` (theory over :data:`THETA_GRID`, one CSV per entry of ``qs``) or
    ``"curves"`` (theory and simulation over ``n_list`` for each ``q`` and weight rule).
    """

    name: str
    kind: str
    description: str
    structure: str = "p3"
    theta: float = 0.4
    qs: Tuple[float, ...] = (0.0,)
    weights: Tuple[EdgeWeight, ...] = (EdgeWeight.AGREEMENT,)
    n_list: Tuple[int, ...] = ()


_CURVE_QS = (0.0, 0.02)
_BOTH_WEIGHTS = (EdgeWeight.AGREEMENT, EdgeWeight.MUTUAL_INFORMATION)
_TEN_NODE_N = (200, 400, 600, 800, 1000, 1200)

FIGURES: Dict[str, FigureSpec] = {
    spec.name: spec
    for spec in (
        FigureSpec("fig1a", "exponents", "K_P and the Bresler-Karzand exponent versus theta"),
        FigureSpec(
            "fig1b",
            "exponents",
            "noisy exponent and the NKS exponent versus theta",
            qs=(0.01, 0.1),
        ),
        FigureSpec(
            "fig2a",
            "curves",
            "3-node chain, theta=0.1, agreement and MI learners",
            theta=0.1,
            qs=_CURVE_QS,
            weights=_BOTH_WEIGHTS,
            n_list=(25, 50, 75, 100, 125, 150),
        ),
        FigureSpec(
            "fig2b",
            "curves",
            "3-node chain, theta=0.4, agreement and MI learners",
            theta=0.4,
            qs=_CURVE_QS,
            weights=_BOTH_WEIGHTS,
            n_list=(100, 200, 300, 400, 500, 600, 800, 1000),
        ),
        FigureSpec(
            "fig3a",
            "curves",
            "10-node star, theta=0.4",
            structure="star",
            qs=_CURVE_QS,
            n_list=_TEN_NODE_N,
        ),
        FigureSpec(
            "fig3b",
            "curves",
            "10-node chain, theta=0.4",
            structure="chain",
            qs=_CURVE_QS,
            n_list=_TEN_NODE_N,
        ),
        FigureSpec(
            "fig3c",
            "curves",
            "10-node hybrid, theta=0.4",
            structure="hybrid",
            qs=_CURVE_QS,
            n_list=_TEN_NODE_N,
        ),
    )
}


def exponent_frame(
    qs: Sequence[float] = (0.0,), thetas: Sequence[float] = THETA_GRID
) -> pd.DataFrame:
    """Exponent table over ``thetas``: noiseless columns for ``q = 0``, noisy columns otherwise."""
    if list(qs) == [0.0]:
        rows = [{"theta": t, "k_p": k_p(t), "k_bk": k_bk(t)} for t in thetas]
        return rows_to_frame(rows, NOISELESS_EXPONENT_COLUMNS)
    rows = [
        {"theta": t, "q": q, "k_q": k_q(t, q), "k_nks": k_nks(t, q)} for q in qs for t in thetas
    ]
    return rows_to_frame(rows, NOISY_EXPONENT_COLUMNS)


def _q_tag(q: float) -> str:
    return f"q{q:g}"


def reproduce(
    figure: str,
    out_dir: Union[str, Path],
    base: Optional[ExperimentConfig] = None,
    n_list: Optional[Sequence[int]] = None,
    simulate: bool = True,
) -> List[Path]:
    """
    Write every CSV of ``figure`` under ``out_dir`` and return the paths.

    ``base`` supplies the seed, stopping rule and worker count; ``n_list`` replaces the figure's
    default sample sizes. ``simulate=False`` writes only the theory curves.

    Raises:
        ValueError: For an unknown figure name.
    """
    if figure not in FIGURES:
        raise ValueError(f"Unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    spec = FIGURES[figure]
    out = Path(out_dir)
    base = base or ExperimentConfig()
    _logger.info("Reproduce start | figure=%s out=%s simulate=%s", figure, out, simulate)

    written: List[Path] = []
    if spec.kind == "exponents":
        if spec.qs == (0.0,):
            written.append(write_csv(exponent_frame(), out / f"{figure}.csv"))
        for q in (q for q in spec.qs if q > 0):
            written.append(write_csv(exponent_frame((q,)), out / f"{figure}_{_q_tag(q)}.csv"))
        return written

    sizes = tuple(n_list) if n_list else spec.n_list
    for q in spec.qs:
        cfg = base.with_overrides(
            structure=spec.structure, theta=spec.theta, q=q, n_list=sizes, p=10
        )
        written.append(write_csv(run_theory(cfg), out / f"{figure}_theory_{_q_tag(q)}.csv"))
        if not simulate:
            continue
        for weight in spec.weights:
            reports = run_simulation(cfg.with_overrides(weight=weight))
            name = f"{figure}_simulation_{_q_tag(q)}_{weight.value}.csv"
            written.append(write_csv(reports_to_frame(reports), out / name))
    _logger.info("Reproduce done | figure=%s files=%d", figure, len(written))
    return written


def figure_table() -> List[Dict[str, Any]]:
    """Registry summary for listings."""
    return [
        {
            "figure": spec.name,
            "kind": spec.kind,
            "description": spec.description,
            "structure": spec.structure if spec.kind == "curves" else None,
            "theta": spec.theta if spec.kind == "curves" else None,
            "qs": list(spec.qs),
            "weights": [w.value for w in spec.weights] if spec.kind == "curves" else [],
            "n_list": list(spec.n_list),
        }
        for spec in FIGURES.values()
    ]
