"""
Oracle suite: every closed form checked against its independent computation.

Each check yields a :class:`CheckRecord` carrying the inputs, both values and the tolerance, so a
failure report says exactly where and by how much the formulas disagree.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np

from .asymptotics import (
    beta1,
    beta2,
    joint_exponent,
    k_bk,
    k_nks,
    k_p,
    k_q,
    lemma2_exponent,
    log_prefactors,
    nonedge_exponent,
)
from .learner import TiePolicy
from .oracle import (
    TrinomialSpec,
    exact_error_p3,
    extremal_check,
    joint_exponent_numeric,
    noisy_letter_probs,
    sanov_exponent_numeric,
    sanov_solution,
    tilt_summary,
    trinomial_exact_log,
    zeta_subtree_count,
)
from .streams import chunk_generator
from .tree_model import iter_labeled_trees, make_structure, random_tree, zeta

_logger = logging.getLogger("treeld.checks")

SUITE_SEED = 20_240_117
EXPONENT_GRID = tuple(float(t) for t in np.linspace(0.02, 0.48, 20))
CHAIN_GRID = (0.05, 0.15, 0.25, 0.35, 0.45)
PREFACTOR_SIZES = (250, 500, 1000, 2000, 4000)
RANDOM_TREE_P = (3, 30)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    inputs: Dict[str, Any]
    expected: float
    actual: float
    tolerance: float
    passed: bool

    @property
    def delta(self) -> float:
        return self.actual - self.expected

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "expected": self.expected,
            "actual": self.actual,
            "delta": self.delta,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class SuiteSummary:
    records: List[CheckRecord] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> List[CheckRecord]:
        return [record for record in self.records if not record.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pass": self.passed,
            "total": len(self.records),
            "failed": len(self.failures),
            "wall_time_s": self.wall_time_s,
            "failures": [record.to_dict() for record in self.failures],
            "checks": [record.to_dict() for record in self.records],
        }


def _close(
    name: str, inputs: Dict[str, Any], expected: float, actual: float, tol: float
) -> CheckRecord:
    expected, actual = float(expected), float(actual)
    return CheckRecord(name, inputs, expected, actual, tol, abs(actual - expected) <= tol)


def _holds(
    name: str, inputs: Dict[str, Any], condition: bool, value: Optional[float] = None
) -> CheckRecord:
    """A yes/no property; ``value`` is the compared quantity, kept with the inputs."""
    if value is not None:
        inputs = {**inputs, "value": float(value)}
    return CheckRecord(name, inputs, 1.0, float(condition), 0.0, bool(condition))


# --------------------------------- checks ----------------------------------
def check_exponents() -> Iterable[CheckRecord]:
    for theta in EXPONENT_GRID:
        expected = sanov_exponent_numeric(theta, theta)
        yield _close("k_p_vs_sanov", {"theta": theta}, expected, k_p(theta), 1e-9)
    for theta1 in CHAIN_GRID:
        for theta3 in CHAIN_GRID:
            yield _close(
                "chain_exponent_vs_sanov",
                {"theta1": theta1, "theta3": theta3},
                sanov_exponent_numeric(theta1, theta3),
                lemma2_exponent(theta1, theta3),
                1e-9,
            )
    for theta in EXPONENT_GRID:
        yield _close(
            "nonedge_distance2", {"theta": theta}, k_p(theta), nonedge_exponent(theta, 2), 1e-15
        )
        values = [nonedge_exponent(theta, d) for d in range(2, 7)]
        yield _holds(
            "nonedge_increasing",
            {"theta": theta, "distances": [2, 6]},
            all(a < b for a, b in zip(values, values[1:])),
        )


def check_noisy_exponents() -> Iterable[CheckRecord]:
    for theta in EXPONENT_GRID:
        yield _close("k_q_at_zero", {"theta": theta}, k_p(theta), k_q(theta, 0.0), 1e-12)
    for q in (0.01, 0.02, 0.1):
        for theta in EXPONENT_GRID[::3]:
            letters = noisy_letter_probs(theta, q)
            inputs = {"theta": theta, "q": q}
            yield _close("beta1_vs_letters", inputs, letters[0b001], beta1(theta, q), 1e-15)
            yield _close("beta2_vs_letters", inputs, letters[0b010], beta2(theta, q), 1e-15)
            yield _close(
                "k_q_vs_sanov", inputs, sanov_solution(letters).exponent, k_q(theta, q), 1e-9
            )


def check_competing_exponents() -> Iterable[CheckRecord]:
    for theta in EXPONENT_GRID:
        yield _holds(
            "k_bk_below_third_of_k_p",
            {"theta": theta},
            k_bk(theta) < k_p(theta) / 3.0,
            k_bk(theta) / k_p(theta),
        )
    for q in (0.01, 0.1):
        for theta in EXPONENT_GRID:
            yield _holds(
                "k_nks_below_k_q",
                {"theta": theta, "q": q},
                k_nks(theta, q) < k_q(theta, q),
                k_nks(theta, q) / k_q(theta, q),
            )


def check_tilt_identities(pairs: int = 50) -> Iterable[CheckRecord]:
    rng = chunk_generator(SUITE_SEED, 1)
    for theta, q in zip(rng.uniform(0.05, 0.45, pairs), rng.uniform(0.0, 0.2, pairs)):
        theta, q = float(theta), float(q)
        summary = tilt_summary(TrinomialSpec.noisy(theta, q))
        inputs = {"theta": theta, "q": q}
        yield _close("tilt_phi", inputs, math.exp(-k_q(theta, q)), summary.phi_tau, 1e-12)
        yield _close("tilt_mu3", inputs, 0.0, summary.mu3, 1e-12)
        yield _close("tilt_mu4", inputs, summary.mu2, summary.mu4, 1e-12)


def check_zeta(
    random_trees: int = 500, extremal_max: int = 7, exhaustive_p: int = 6
) -> Iterable[CheckRecord]:
    for name, expected in (("star", 36), ("chain", 8), ("hybrid", 18)):
        yield _close(f"zeta_{name}", {"p": 10}, expected, zeta(make_structure(name, 10)), 0)
    rng = chunk_generator(SUITE_SEED, 2)
    sizes = rng.integers(RANDOM_TREE_P[0], RANDOM_TREE_P[1] + 1, size=random_trees)
    mismatched = 0
    for k, p in enumerate(sizes):
        tree = random_tree(int(p), chunk_generator(SUITE_SEED, 3, k))
        mismatched += zeta(tree) != zeta_subtree_count(tree)
    inputs = {"trees": random_trees, "p_range": list(RANDOM_TREE_P)}
    yield _close("zeta_vs_subtree_count", inputs, 0, mismatched, 0)
    mismatched = sum(zeta(t) != zeta_subtree_count(t) for t in iter_labeled_trees(exhaustive_p))
    yield _close("zeta_vs_subtree_count_all_trees", {"p": exhaustive_p}, 0, mismatched, 0)
    for p in range(4, extremal_max + 1):
        yield _holds("zeta_extremal", {"p": p}, extremal_check(p))


def check_prefactors() -> Iterable[CheckRecord]:
    theta = 0.4
    for q in (0.0, 0.02):
        spec = TrinomialSpec.noiseless(theta) if q == 0 else TrinomialSpec.noisy(theta, q)
        gaps = {"f_tilde": [], "f": []}
        for n in PREFACTOR_SIZES:
            log_tail, log_point = trinomial_exact_log(spec, n)
            terms = log_prefactors(theta, q, n)
            ratios = {
                "f_tilde": math.exp(log_point - terms.log_f_tilde),
                "f": math.exp(log_tail - terms.log_f_tilde) / terms.f_ratio,
            }
            for key, ratio in ratios.items():
                gaps[key].append(abs(ratio - 1.0))
                if n == 2000:
                    inputs = {"theta": theta, "q": q, "n": n}
                    yield _close(f"prefactor_{key}_ratio", inputs, 1.0, ratio, 0.02)
        for key, values in gaps.items():
            yield _holds(
                f"prefactor_{key}_converges",
                {"theta": theta, "q": q, "n": list(PREFACTOR_SIZES)},
                all(b <= a + 1e-12 for a, b in zip(values, values[1:])),
                values[-1],
            )


def check_exact_p3(n_max: int = 12) -> Iterable[CheckRecord]:
    for theta in (0.1, 0.2, 0.3, 0.4):
        single = (2.0 / 3.0) * (1 - theta) ** 2 + theta * (1 - theta) + theta**2
        yield _close(
            "exact_p3_single_sample",
            {"theta": theta},
            single,
            exact_error_p3(theta, 0.0, 1, TiePolicy.RANDOM),
            1e-14,
        )
        for n in range(1, n_max + 1):
            random_error = exact_error_p3(theta, 0.0, n, TiePolicy.RANDOM)
            conservative = exact_error_p3(theta, 0.0, n, TiePolicy.CONSERVATIVE)
            yield _holds(
                "conservative_at_least_random",
                {"theta": theta, "n": n},
                conservative >= random_error,
                conservative - random_error,
            )


def check_joint_exponent() -> Iterable[CheckRecord]:
    for theta in (0.05, 0.15, 0.25, 0.35, 0.45):
        closed = joint_exponent(theta)
        numeric = joint_exponent_numeric(theta)
        yield _close("joint_vs_dual", {"theta": theta}, numeric, closed, 1e-8)
        yield _holds("joint_above_k_p", {"theta": theta}, closed > k_p(theta), closed - k_p(theta))


def run_oracle_suite(quick: bool = False) -> SuiteSummary:
    """
    Run every oracle validation.

    ``quick`` trims the random-tree count, the extremal range and the exact p=3 sample sizes; the
    closed-form comparisons always run in full.
    """
    started = time.perf_counter()
    groups: List[Callable[[], Iterable[CheckRecord]]] = [
        check_exponents,
        check_noisy_exponents,
        check_competing_exponents,
        check_tilt_identities,
        (lambda: check_zeta(100, 6, 5)) if quick else check_zeta,
        check_prefactors,
        (lambda: check_exact_p3(8)) if quick else check_exact_p3,
        check_joint_exponent,
    ]
    summary = SuiteSummary()
    for group in groups:
        records = list(group())
        summary.records.extend(records)
        failed = sum(not record.passed for record in records)
        _logger.debug("Check group done | checks=%d failed=%d", len(records), failed)
    summary.wall_time_s = time.perf_counter() - started
    for record in summary.failures:
        _logger.warning(
            "Check failed | name=%s inputs=%s expected=%.17g actual=%.17g delta=%.3g",
            record.name,
            record.inputs,
            record.expected,
            record.actual,
            record.delta,
        )
    _logger.info(
        "Oracle suite done | checks=%d failed=%d wall_time_s=%.2f",
        len(summary.records),
        len(summary.failures),
        summary.wall_time_s,
    )
    return summary
