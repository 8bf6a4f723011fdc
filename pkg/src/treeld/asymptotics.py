"""
Closed-form error exponents, strong large-deviation prefactors and competing bounds.

All logarithms are natural. Prefactors are assembled in log-space and exponentiated last so
that ``exp(-n K)`` never underflows before it is combined with the polynomial factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

from .tree_model import TreeStructure, check_q, check_theta, flip_probability_at_distance, zeta

_logger = logging.getLogger("treeld.asymptotics")


def _theta(theta: float, name: str = "theta") -> float:
    return float(check_theta(theta, name))


def _q(q: float) -> float:
    return float(check_q(q))


def _n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


# ------------------------------- exponents ---------------------------------
def k_p(theta: float) -> float:
    """Noiseless exponent ``-log(1 - θ(1 - sqrt(4θ(1-θ))))``; does not depend on p."""
    theta = _theta(theta)
    return -math.log1p(-theta * (1.0 - math.sqrt(4.0 * theta * (1.0 - theta))))


def k_bk(theta: float) -> float:
    """Bresler-Karzand exponent ``θ(1-2θ)^2 / 8`` specialised to homogeneous trees."""
    theta = _theta(theta)
    return theta * (1.0 - 2.0 * theta) ** 2 / 8.0


def beta1(theta: float, q: float) -> float:
    """Noisy probability of the letter ``001`` on the 3-chain."""
    theta, q = _theta(theta), _q(q)
    keep = (1.0 - q) ** 3 + q**3
    mixed = q * (1.0 - q) * (1.0 - theta * (1.0 - theta))
    return keep * theta * (1.0 - theta) / 2.0 + mixed / 2.0


def beta2(theta: float, q: float) -> float:
    """Noisy probability of the letter ``010`` on the 3-chain."""
    theta, q = _theta(theta), _q(q)
    keep = (1.0 - q) ** 3 + q**3
    return keep * theta**2 / 2.0 + q * (1.0 - q) * (1.0 - theta**2) / 2.0


def am_gm_gap(a: float, b: float) -> float:
    """Difference between the arithmetic and geometric means of ``a`` and ``b``."""
    if a < 0 or b < 0:
        raise ValueError("am_gm_gap needs non-negative arguments")
    return (a + b) / 2.0 - math.sqrt(a * b)


def k_q(theta: float, q: float) -> float:
    """Noisy exponent ``-log(1 - 4 Δ(β1, β2))``; equals :func:`k_p` at ``q = 0``."""
    b1, b2 = beta1(theta, q), beta2(theta, q)
    return -math.log1p(-4.0 * am_gm_gap(b1, b2))


def k_nks(theta: float, q: float) -> float:
    """Nikolakakis-Kalogerias-Sarwate exponent for homogeneous trees observed through BSC(q)."""
    theta, q = _theta(theta), _q(q)
    shrink = (1.0 - 2.0 * q) ** 4
    numerator = shrink * theta**2 * (1.0 - 2.0 * theta) ** 2
    return numerator / (8.0 * (1.0 - shrink * (1.0 - 2.0 * theta)))


def lemma2_exponent(theta1: float, theta3: float) -> float:
    """
    Exponent of ``P(Â13 >= Â12)`` on the chain 1-2-3.

    The edge 1-2 flips with ``theta1`` and the edge 2-3 with ``theta3``.
    """
    theta1, theta3 = _theta(theta1, "theta1"), _theta(theta3, "theta3")
    return -math.log1p(-theta3 * (1.0 - math.sqrt(4.0 * theta1 * (1.0 - theta1))))


def nonedge_exponent(theta: float, distance: int) -> float:
    """
    Exponent of a non-edge at tree distance ``distance`` out-weighing an adjacent edge.

    Distance 2 reproduces :func:`k_p`; larger distances decay strictly faster.
    """
    if distance < 2:
        raise ValueError(f"A non-edge has distance >= 2, got {distance}")
    theta = _theta(theta)
    return lemma2_exponent(theta, flip_probability_at_distance(theta, distance - 1))


def joint_exponent(theta: float) -> float:
    """Exponent of ``{Â13 >= Â12} ∩ {Â13 >= Â23}``; strictly larger than :func:`k_p`."""
    theta = _theta(theta)
    inner = 2.0 - theta - 3.0 * theta ** (1.0 / 3.0) * (1.0 - theta) ** (2.0 / 3.0)
    return -math.log1p(-theta * inner)


# ------------------------------- prefactors --------------------------------
def sigma_squared(theta: float) -> float:
    """Variance of the tilted noiseless step, ``θ sqrt(4θ(1-θ)) exp(K_P)``."""
    theta = _theta(theta)
    return theta * math.sqrt(4.0 * theta * (1.0 - theta)) * math.exp(k_p(theta))


def mu2_noisy(theta: float, q: float) -> float:
    """Variance of the tilted noisy step, ``4 sqrt(β1 β2) exp(K_P^(q))``."""
    return 4.0 * math.sqrt(beta1(theta, q) * beta2(theta, q)) * math.exp(k_q(theta, q))


def z_ratio(theta: float, q: float = 0.0) -> float:
    """``exp(-τ)`` of the tilted step: ``sqrt(θ/(1-θ))`` noiseless, ``sqrt(β2/β1)`` noisy."""
    if _q(q) == 0:
        theta = _theta(theta)
        return math.sqrt(theta / (1.0 - theta))
    return math.sqrt(beta2(theta, q) / beta1(theta, q))


class Prefactors(NamedTuple):
    f_tilde: float
    f: float


class LogPrefactors(NamedTuple):
    """``log f̃(n)`` and ``f(n) / f̃(n)``, which may be negative at small n."""

    log_f_tilde: float
    f_ratio: float
    exponent: float
    variance: float
    z: float


def _expansion(exponent: float, variance: float, z: float, n: int) -> LogPrefactors:
    log_f_tilde = (
        -n * exponent
        - 0.5 * math.log(2.0 * math.pi * variance * n)
        + math.log1p((1.0 - 3.0 * variance) / (8.0 * variance * n))
    )
    ratio = (1.0 - z * (1.0 + z) / (2.0 * (1.0 - z) ** 2 * variance * n)) / (1.0 - z)
    return LogPrefactors(log_f_tilde, ratio, exponent, variance, z)


def log_prefactors(theta: float, q: float, n: int) -> LogPrefactors:
    """Log-space prefactor terms for the noiseless (``q = 0``) or noisy model."""
    n = _n(n)
    if _q(q) == 0:
        return _expansion(k_p(theta), sigma_squared(theta), z_ratio(theta), n)
    return _expansion(k_q(theta, q), mu2_noisy(theta, q), z_ratio(theta, q), n)


def prefactors(theta: float, n: int) -> Prefactors:
    """
    Tie probability ``f̃(n)`` and tail ``f(n)`` of the noiseless trinomial walk.

    Returns:
        ``(f_tilde, f)``; ``f`` is negative for small ``n`` where the expansion is not yet valid.
    """
    terms = log_prefactors(theta, 0.0, n)
    f_tilde = math.exp(terms.log_f_tilde)
    return Prefactors(f_tilde, f_tilde * terms.f_ratio)


def prefactors_noisy(theta: float, q: float, n: int) -> Prefactors:
    """Noisy analogues of :func:`prefactors`; identical output at ``q = 0``."""
    if _q(q) == 0:
        return prefactors(theta, n)
    terms = log_prefactors(theta, q, n)
    f_tilde = math.exp(terms.log_f_tilde)
    return Prefactors(f_tilde, f_tilde * terms.f_ratio)


# ------------------------------- predictions -------------------------------
@dataclass(frozen=True)
class AsymptoticPrediction:
    exponent: float
    f_tilde_n: float
    f_n: float
    zeta: int
    predicted_error: float
    log_predicted_error: float
    theta: float
    q: float
    n: int
    tree: str

    def __post_init__(self) -> None:
        if self.exponent < 0:
            raise ValueError(f"exponent must be non-negative, got {self.exponent}")
        if self.predicted_error < 0:
            raise ValueError(f"predicted error must be non-negative, got {self.predicted_error}")

    def to_dict(self) -> dict:
        return {
            "tree": self.tree,
            "theta": self.theta,
            "q": self.q,
            "n": self.n,
            "zeta": self.zeta,
            "exponent": self.exponent,
            "f_tilde_n": self.f_tilde_n,
            "f_n": self.f_n,
            "predicted_error": self.predicted_error,
            "log_predicted_error": self.log_predicted_error,
        }


def predict_error(t: TreeStructure, theta: float, q: float, n: int) -> AsymptoticPrediction:
    """
    ``ζ_P (2 f(n) - f̃(n))`` with noiseless or noisy prefactors chosen by ``q``.

    Raises:
        ValueError: When ``2 f(n) - f̃(n) <= 0``, i.e. ``n`` is below the regime of the expansion.
    """
    n = _n(n)
    terms = log_prefactors(theta, q, n)
    f_tilde, f = prefactors_noisy(theta, q, n)
    count = zeta(t)
    scale = 2.0 * terms.f_ratio - 1.0
    if scale <= 0 and count > 0:
        raise ValueError(
            f"n={n} is outside the asymptotic regime for theta={theta}, q={q}: 2f - f~ <= 0"
        )
    if count == 0:
        log_error = -math.inf
    else:
        log_error = math.log(count) + terms.log_f_tilde + math.log(scale)
    return AsymptoticPrediction(
        exponent=terms.exponent,
        f_tilde_n=f_tilde,
        f_n=f,
        zeta=count,
        predicted_error=count * (2.0 * f - f_tilde),
        log_predicted_error=log_error,
        theta=float(theta),
        q=float(q),
        n=n,
        tree=t.to_text(),
    )


def predict_conservative_error(t: TreeStructure, theta: float, q: float, n: int) -> float:
    """``2 ζ_P f(n)``: every tie on a 3-vertex subtree is charged as an error."""
    n = _n(n)
    terms = log_prefactors(theta, q, n)
    if terms.f_ratio <= 0:
        raise ValueError(f"n={n} is outside the asymptotic regime for theta={theta}, q={q}")
    return 2.0 * zeta(t) * math.exp(terms.log_f_tilde) * terms.f_ratio


# --------------------------------- bounds ----------------------------------
def bk_bound(p: int, theta: float, n: int) -> float:
    """``2 p^2 exp(-n K_BK)``, uncapped."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    return 2.0 * p * p * math.exp(-_n(n) * k_bk(theta))


def nks_bound(p: int, theta: float, q: float, n: int) -> float:
    """``2 p^2 exp(-n K_NKS(q))``, uncapped."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    return 2.0 * p * p * math.exp(-_n(n) * k_nks(theta, q))
