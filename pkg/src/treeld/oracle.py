"""
Independent ground truth for the closed forms in :mod:`treeld.asymptotics`.

Everything here is computed without the closed-form exponents: exact convolutions of the
trinomial walk, the tilted optimiser of the constrained KL problem, a numeric dual for the joint
event, enumeration of all count vectors of the 3-chain, and exhaustive scans over labeled trees.

Letters of the 3-chain are indexed ``x1 * 4 + x2 * 2 + x3``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln, logsumexp, rel_entr

from .asymptotics import am_gm_gap
from .learner import TiePolicy
from .tree_model import TreeStructure, check_q, check_theta

_logger = logging.getLogger("treeld.oracle")

Number = Union[float, Fraction]

LETTERS: Tuple[Tuple[int, int, int], ...] = tuple(itertools.product((0, 1), repeat=3))

# +1 when only the non-edge 1-3 agrees against edge 1-2, -1 in the reverse case
STEP_12 = np.array([0, -1, 1, 0, 0, 1, -1, 0], dtype=float)
# same comparison against edge 2-3
STEP_23 = np.array([0, 0, 1, -1, -1, 1, 0, 0], dtype=float)

MAX_EXACT_P3_N = 20
MAX_TRINOMIAL_N = 100_000
MAX_RATIONAL_N = 200
EXTREMAL_RANGE = (4, 8)


# ------------------------------ letter laws --------------------------------
def chain_letter_probs(theta1: Number, theta3: Number) -> np.ndarray:
    """Law of ``(x1, x2, x3)`` on the chain 1-2-3 (flip ``theta1`` on 1-2, ``theta3`` on 2-3)."""
    t1 = float(check_theta(theta1, "theta1"))
    t3 = float(check_theta(theta3, "theta3"))
    probs = np.empty(8)
    for k, (x1, x2, x3) in enumerate(LETTERS):
        first = t1 if x1 != x2 else 1.0 - t1
        second = t3 if x2 != x3 else 1.0 - t3
        probs[k] = 0.5 * first * second
    return probs


def noisy_letter_probs(theta: Number, q: Number) -> np.ndarray:
    """
    Law of the 3-chain observed through BSC(q), by summing the 8-term channel mixture.

    Example:
        >>> probs = noisy_letter_probs(0.1, 0.1)
        >>> round(probs[0b001], 6)
        0.0738
    """
    clean = chain_letter_probs(theta, theta)
    q = float(check_q(q))
    noisy = np.empty(8)
    for y_index, y in enumerate(LETTERS):
        terms = []
        for x_index, x in enumerate(LETTERS):
            flips = sum(a != b for a, b in zip(x, y))
            terms.append(clean[x_index] * q**flips * (1.0 - q) ** (3 - flips))
        noisy[y_index] = math.fsum(terms)
    return noisy


# ------------------------------ trinomial walk -----------------------------
@dataclass(frozen=True)
class TrinomialSpec:
    """Law of a step ``U`` in ``{-1, 0, +1}`` with negative drift."""

    q_minus: Number
    q_zero: Number
    q_plus: Number

    def __post_init__(self) -> None:
        values = (self.q_minus, self.q_zero, self.q_plus)
        if any(v < 0 for v in values):
            raise ValueError(f"Step probabilities must be non-negative, got {values}")
        total = sum(values)
        exact = all(isinstance(v, (Fraction, int)) for v in values)
        if (exact and total != 1) or (not exact and abs(total - 1) > 1e-12):
            raise ValueError(f"Step probabilities must sum to 1, got {total}")
        if not self.q_minus > self.q_plus:
            raise ValueError("q_minus must exceed q_plus (negative drift)")

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in (self.q_minus, self.q_zero, self.q_plus))

    @classmethod
    def noiseless(cls, theta: Number) -> "TrinomialSpec":
        """``Q(-1) = θ(1-θ)``, ``Q(+1) = θ^2``; Fraction input stays exact."""
        check_theta(theta)
        q_minus = theta * (1 - theta)
        q_plus = theta * theta
        return cls(q_minus=q_minus, q_zero=1 - q_minus - q_plus, q_plus=q_plus)

    @classmethod
    def noisy(cls, theta: Number, q: Number) -> "TrinomialSpec":
        """``Q(-1) = 2 β1``, ``Q(+1) = 2 β2`` computed exactly when inputs are Fractions."""
        check_theta(theta)
        check_q(q)
        keep = (1 - q) ** 3 + q**3
        mixed = q * (1 - q)
        q_minus = keep * theta * (1 - theta) + mixed * (1 - theta * (1 - theta))
        q_plus = keep * theta * theta + mixed * (1 - theta * theta)
        return cls(q_minus=q_minus, q_zero=1 - q_minus - q_plus, q_plus=q_plus)

    @classmethod
    def from_letters(cls, letters: Sequence[float], step: np.ndarray = STEP_12) -> "TrinomialSpec":
        probs = np.asarray(letters, dtype=float)
        q_minus = math.fsum(probs[step < 0])
        q_plus = math.fsum(probs[step > 0])
        return cls(q_minus=q_minus, q_zero=1.0 - q_minus - q_plus, q_plus=q_plus)


@dataclass(frozen=True)
class TiltedSummary:
    tau: float
    phi_tau: float
    mu2: float
    mu3: float
    mu4: float
    z: float


def mgf(spec: TrinomialSpec, t: float) -> float:
    """``φ(t) = E exp(t U)``."""
    q_minus, q_zero, q_plus = (float(v) for v in (spec.q_minus, spec.q_zero, spec.q_plus))
    return q_minus * math.exp(-t) + q_zero + q_plus * math.exp(t)


def tilt_summary(spec: TrinomialSpec) -> TiltedSummary:
    """
    Minimiser ``τ`` of the MGF and central moments of the tilted step.

    The tilted law puts ``sqrt(Q(-1) Q(1)) / φ(τ)`` on each of ``±1``, so it is symmetric.
    """
    q_minus, q_zero, q_plus = (float(v) for v in (spec.q_minus, spec.q_zero, spec.q_plus))
    if q_plus <= 0:
        raise ValueError("tilt_summary needs q_plus > 0")
    tau = 0.5 * math.log(q_minus / q_plus)
    geometric = math.sqrt(q_minus * q_plus)
    phi = q_zero + 2.0 * geometric
    side = geometric / phi
    support = np.array([-1.0, 0.0, 1.0])
    tilted = np.array([side, q_zero / phi, side])
    mean = float(support @ tilted)
    centred = support - mean
    return TiltedSummary(
        tau=tau,
        phi_tau=phi,
        mu2=float(centred**2 @ tilted),
        mu3=float(centred**3 @ tilted),
        mu4=float(centred**4 @ tilted),
        z=math.sqrt(q_plus / q_minus),
    )


class TrinomialProbabilities(NamedTuple):
    p_tail: float
    p_point: float


def _check_walk_length(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > MAX_TRINOMIAL_N:
        raise ValueError(f"n={n} exceeds the exact convolution limit {MAX_TRINOMIAL_N}")
    return int(n)


def _rational_walk(spec: TrinomialSpec, n: int) -> Tuple[Fraction, Fraction]:
    """Exact ``P(S >= 0)`` and ``P(S = 0)`` with integer weights over a common denominator."""
    values = [Fraction(v) for v in (spec.q_minus, spec.q_zero, spec.q_plus)]
    denom = math.lcm(*(v.denominator for v in values))
    w_minus, w_zero, w_plus = (int(v * denom) for v in values)
    # weights[k] counts paths ending at S = k - step
    weights = [1]
    for _ in range(n):
        size = len(weights) + 2
        nxt = [0] * size
        for k, w in enumerate(weights):
            if w:
                nxt[k] += w * w_minus
                nxt[k + 1] += w * w_zero
                nxt[k + 2] += w * w_plus
        weights = nxt
    total = denom**n
    return Fraction(sum(weights[n:]), total), Fraction(weights[n], total)


def _tilted_walk(spec: TrinomialSpec, n: int) -> Tuple[float, float]:
    """Log tail and log point mass via a DP under the tilted law."""
    summary = tilt_summary(spec)
    q_zero = float(spec.q_zero)
    side = math.sqrt(float(spec.q_minus) * float(spec.q_plus)) / summary.phi_tau
    centre_mass = q_zero / summary.phi_tau
    # mass beyond 40 tilted standard deviations is below double precision
    width = min(n, int(math.ceil(40.0 * math.sqrt(summary.mu2 * n))) + 16)
    mass = np.zeros(2 * width + 1)
    mass[width] = 1.0
    for _ in range(n):
        step = centre_mass * mass
        step[1:] += side * mass[:-1]
        step[:-1] += side * mass[1:]
        mass = step
    point = mass[width]
    if point <= 0:
        raise FloatingPointError("Tilted point mass underflowed")
    offsets = np.arange(width + 1)
    tail_terms = mass[width:] * np.power(summary.z, offsets)
    tail = math.fsum(tail_terms.tolist())
    log_phi = math.log(summary.phi_tau)
    return n * log_phi + math.log(tail), n * log_phi + math.log(point)


def trinomial_exact_log(spec: TrinomialSpec, n: int) -> Tuple[float, float]:
    """Natural logs of ``P(S_n >= 0)`` and ``P(S_n = 0)``."""
    n = _check_walk_length(n)
    if spec.is_exact and n <= MAX_RATIONAL_N:
        tail, point = _rational_walk(spec, n)
        return _log_fraction(tail), _log_fraction(point)
    return _tilted_walk(spec, n)


def _log_fraction(value: Fraction) -> float:
    if value <= 0:
        return -math.inf
    return math.log(value.numerator) - math.log(value.denominator)


def trinomial_exact(spec: TrinomialSpec, n: int) -> TrinomialProbabilities:
    """
    Exact ``P(S_n >= 0)`` and ``P(S_n = 0)`` for the walk ``S_n = U_1 + ... + U_n``.

    Rational specs with ``n <= 200`` are convolved in exact integer arithmetic; otherwise the DP
    runs under the tilted law, where nothing is small, and the exponential factor is restored in
    log-space.

    Raises:
        FloatingPointError: When a probability underflows double precision.
    """
    n = _check_walk_length(n)
    if spec.is_exact and n <= MAX_RATIONAL_N:
        tail, point = _rational_walk(spec, n)
        result = TrinomialProbabilities(float(tail), float(point))
        if (tail and not result.p_tail) or (point and not result.p_point):
            raise FloatingPointError("Exact probability underflows double precision")
        return result
    log_tail, log_point = _tilted_walk(spec, n)
    p_tail, p_point = math.exp(log_tail), math.exp(log_point)
    if p_point == 0.0 or p_tail == 0.0:
        raise FloatingPointError(
            f"Probability underflows at n={n}; use trinomial_exact_log for log values"
        )
    return TrinomialProbabilities(p_tail, p_point)


# ------------------------------- KL problems -------------------------------
@dataclass(frozen=True)
class SanovSolution:
    exponent: float
    lam: float
    q_star: np.ndarray
    constraint_gap: float


def sanov_solution(letters: Sequence[float], step: np.ndarray = STEP_12) -> SanovSolution:
    """
    Minimise ``D(Q || P)`` over laws with ``E_Q[step] >= 0`` by tilting ``P``.

    The tilt is ``λ = ½ log(P(step = -1) / P(step = +1))``; the divergence of the tilted law is
    then evaluated numerically.
    """
    probs = np.asarray(letters, dtype=float)
    if probs.shape != (8,) or (probs < 0).any():
        raise ValueError("letters must be a non-negative 8-vector")
    probs = probs / math.fsum(probs.tolist())
    down = math.fsum(probs[step < 0].tolist())
    up = math.fsum(probs[step > 0].tolist())
    if up <= 0:
        raise ValueError("Constraint is infeasible: no letter has a positive step")
    lam = max(0.0, 0.5 * math.log(down / up)) if down > 0 else 0.0
    weights = probs * np.exp(lam * step)
    q_star = weights / math.fsum(weights.tolist())
    exponent = math.fsum(rel_entr(q_star, probs).tolist())
    gap = math.fsum((q_star * step).tolist())
    return SanovSolution(exponent=exponent, lam=lam, q_star=q_star, constraint_gap=gap)


def sanov_exponent_numeric(theta1: Number, theta3: Number) -> float:
    """Rate of ``P(Â13 >= Â12)`` on the inhomogeneous 3-chain, from the tilted optimiser."""
    return sanov_solution(chain_letter_probs(theta1, theta3)).exponent


def joint_exponent_numeric(theta: Number) -> float:
    """
    Rate of ``{Â13 >= Â12} ∩ {Â13 >= Â23}`` from the dual of the two-constraint KL problem.

    ``min D(Q || P)`` equals ``-min_{λ >= 0} log E_P exp(λ1 g1 + λ2 g2)``; the minimum is located
    on a coarse grid, refined twice, and polished with L-BFGS-B.
    """
    probs = chain_letter_probs(theta, theta)
    steps = np.vstack([STEP_12, STEP_23])

    def log_mgf(lam: np.ndarray) -> float:
        return float(logsumexp(lam @ steps, b=probs))

    def gradient(lam: np.ndarray) -> np.ndarray:
        tilted = probs * np.exp(lam @ steps)
        tilted /= tilted.sum()
        return steps @ tilted

    centre = np.zeros(2)
    half_width, points = 5.0, 101
    for _ in range(3):
        axis = np.linspace(-half_width, half_width, points)
        grid = np.stack(np.meshgrid(centre[0] + axis, centre[1] + axis), axis=-1).reshape(-1, 2)
        grid = np.clip(grid, 0.0, None)
        values = logsumexp(grid @ steps, b=probs, axis=1)
        centre = grid[int(np.argmin(values))]
        half_width = 2.0 * half_width / (points - 1)
    result = minimize(
        log_mgf,
        centre,
        jac=gradient,
        method="L-BFGS-B",
        bounds=[(0.0, None), (0.0, None)],
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500},
    )
    best = min(float(result.fun), log_mgf(centre))
    _logger.debug("Joint exponent dual | theta=%s lambda=%s value=%.15g", theta, result.x, -best)
    return -best


# ------------------------------ exact p = 3 --------------------------------
def conditional_error_p3(
    a12: np.ndarray, a13: np.ndarray, a23: np.ndarray, policy: "TiePolicy | str"
) -> np.ndarray:
    """
    Error probability of the learner on the 3-chain given agreement counts.

    Kruskal keeps two of the three edges; the discarded one is a minimum-weight edge, uniform
    among ties (random), the largest tied pair (lexicographic), and any tie at the minimum is an
    error under the conservative rule.
    """
    policy = TiePolicy.parse(policy)
    a12, a13, a23 = (np.asarray(a, dtype=np.int64) for a in (a12, a13, a23))
    if policy is TiePolicy.RANDOM:
        low = np.minimum(np.minimum(a12, a13), a23)
        ties = (a12 == low).astype(int) + (a13 == low) + (a23 == low)
        return 1.0 - (a13 == low) / ties
    if policy is TiePolicy.LEXICOGRAPHIC:
        return 1.0 - ((a13 <= a12) & (a13 < a23)).astype(float)
    return 1.0 - ((a13 < a12) & (a13 < a23)).astype(float)


def composition_matrix(n: int, parts: int) -> np.ndarray:
    """All compositions as rows, from stars-and-bars positions (lexicographic in the bars)."""
    bars = parts - 1
    total = math.comb(n + bars, bars)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n + bars), bars)),
        dtype=np.int64,
        count=total * bars,
    ).reshape(total, bars)
    edges = np.hstack([np.full((total, 1), -1), flat, np.full((total, 1), n + bars)])
    return np.diff(edges, axis=1) - 1


def exact_error_p3(theta: Number, q: Number, n: int, policy: "TiePolicy | str") -> float:
    """
    Exact error probability of the learner on the chain 1-2-3 from ``n`` samples.

    Sums multinomial probabilities of every count vector over the 8 letters times the policy's
    conditional error.

    Raises:
        ValueError: For ``n > 20``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > MAX_EXACT_P3_N:
        raise ValueError(f"exact_error_p3 enumerates n <= {MAX_EXACT_P3_N}, got n={n}")
    check_q(q)
    letters = noisy_letter_probs(theta, q) if float(q) > 0 else chain_letter_probs(theta, theta)
    counts = composition_matrix(int(n), 8)
    log_coeff = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)
    log_prob = log_coeff + counts @ np.log(letters)
    agree = counts[:, [0, 7]].sum(axis=1)
    a12 = agree + counts[:, [1, 6]].sum(axis=1)
    a13 = agree + counts[:, [2, 5]].sum(axis=1)
    a23 = agree + counts[:, [3, 4]].sum(axis=1)
    errors = conditional_error_p3(a12, a13, a23, policy)
    mask = errors > 0
    return math.fsum((np.exp(log_prob[mask]) * errors[mask]).tolist())


# ------------------------------ tree counting ------------------------------
def zeta_subtree_count(t: TreeStructure) -> int:
    """Vertex triples spanning two tree edges, counted by brute force."""
    count = 0
    for triple in itertools.combinations(range(t.p), 3):
        links = sum(t.has_edge(a, b) for a, b in itertools.combinations(triple, 2))
        if links == 2:
            count += 1
    return count


def extremal_check(p: int) -> bool:
    """
    Over all ``p ** (p - 2)`` labeled trees, ζ is maximal exactly on stars and minimal exactly on
    chains.

    Degrees are read off each Prüfer sequence (multiplicity plus one).
    """
    low, high = EXTREMAL_RANGE
    if isinstance(p, bool) or int(p) != p or not low <= p <= high:
        raise ValueError(f"extremal_check enumerates {low} <= p <= {high}, got p={p!r}")
    p = int(p)
    sequences = np.array(list(itertools.product(range(p), repeat=p - 2)), dtype=np.int64)
    degrees = (sequences[:, :, None] == np.arange(p)).sum(axis=1) + 1
    zetas = (degrees * (degrees - 1) // 2).sum(axis=1)
    max_degree = degrees.max(axis=1)
    stars = max_degree == p - 1
    chains = max_degree <= 2
    ok = bool(
        np.array_equal(zetas == zetas.max(), stars) and np.array_equal(zetas == zetas.min(), chains)
    )
    _logger.info(
        "Extremal check | p=%d trees=%d zeta_max=%d zeta_min=%d ok=%s",
        p,
        len(sequences),
        int(zetas.max()),
        int(zetas.min()),
        ok,
    )
    return ok


__all__ = [
    "LETTERS",
    "SanovSolution",
    "TiltedSummary",
    "TrinomialProbabilities",
    "TrinomialSpec",
    "am_gm_gap",
    "chain_letter_probs",
    "composition_matrix",
    "conditional_error_p3",
    "exact_error_p3",
    "extremal_check",
    "joint_exponent_numeric",
    "mgf",
    "noisy_letter_probs",
    "sanov_exponent_numeric",
    "sanov_solution",
    "tilt_summary",
    "trinomial_exact",
    "trinomial_exact_log",
    "zeta_subtree_count",
]
