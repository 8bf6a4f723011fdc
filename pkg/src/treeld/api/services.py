from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

from treeld import __version__
from treeld.asymptotics import (
    beta1,
    beta2,
    bk_bound,
    joint_exponent,
    k_bk,
    k_nks,
    k_p,
    k_q,
    lemma2_exponent,
    nks_bound,
    predict_conservative_error,
    predict_error,
)
from treeld.learner import TiePolicy
from treeld.oracle import exact_error_p3
from treeld.tree_model import TreeStructure, make_structure, parse_tree_text, zeta

logger = logging.getLogger("treeld.api.services")


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


class TheoryService:
    """
    Read-only access to the closed forms and the exact 3-chain oracle.

    Every argument is validated by the library functions; their ``ValueError`` reaches the app's
    exception handler unchanged.
    """

    def health(self) -> Dict[str, str]:
        return {"status": "ok", "version": __version__}

    def exponents(self, theta: float, q: float = 0.0, theta3: Optional[float] = None) -> Dict:
        theta3 = theta if theta3 is None else theta3
        logger.info("Exponents | theta=%s q=%s theta3=%s", theta, q, theta3)
        return {
            "theta": theta,
            "q": q,
            "theta3": theta3,
            "k_p": k_p(theta),
            "k_bk": k_bk(theta),
            "k_q": k_q(theta, q),
            "k_nks": k_nks(theta, q),
            "beta1": beta1(theta, q),
            "beta2": beta2(theta, q),
            "joint_exponent": joint_exponent(theta),
            "lemma2_exponent": lemma2_exponent(theta, theta3),
        }

    def resolve_tree(
        self, structure: Optional[str] = None, tree: Optional[str] = None, p: int = 10
    ) -> TreeStructure:
        if tree is not None:
            return parse_tree_text(tree)
        return make_structure(structure or "p3", p)

    def predict(
        self,
        theta: float,
        q: float,
        n_values: Sequence[int],
        *,
        structure: Optional[str] = None,
        tree: Optional[str] = None,
        p: int = 10,
    ) -> Dict[str, Any]:
        """Prediction rows; out-of-regime sizes get ``None`` predictions and keep their bounds."""
        t = self.resolve_tree(structure, tree, p)
        exponent = k_p(theta) if q == 0 else k_q(theta, q)
        rows: List[Dict[str, Any]] = []
        for n in n_values:
            row: Dict[str, Any] = {
                "n": n,
                "bk_bound": bk_bound(t.p, theta, n),
                "nks_bound": nks_bound(t.p, theta, q, n),
                "exponent": exponent,
            }
            try:
                prediction = predict_error(t, theta, q, n)
                row["prediction"] = prediction.predicted_error
                row["log_prediction"] = _finite(prediction.log_predicted_error)
                row["conservative"] = predict_conservative_error(t, theta, q, n)
            except ValueError as exc:
                logger.warning("Prediction outside regime | n=%d reason=%s", n, exc)
            rows.append(row)
        return {"tree": t.to_text(), "zeta": zeta(t), "theta": theta, "q": q, "rows": rows}

    def tree_info(self, structure: str, p: int = 10) -> Dict[str, Any]:
        t = make_structure(structure, p)
        return {
            "name": t.name or structure,
            "p": t.p,
            "text": t.to_text(),
            "zeta": zeta(t),
            "edges": [(i + 1, j + 1) for i, j in t.sorted_edges],
            "degrees": list(t.degrees),
            "is_star": t.is_star(),
            "is_chain": t.is_chain(),
            "dot": t.to_dot(),
        }

    def exact_p3(self, theta: float, q: float, n: int, policy: str) -> Dict[str, Any]:
        resolved = TiePolicy.parse(policy)
        logger.info("Exact p3 | theta=%s q=%s n=%d policy=%s", theta, q, n, resolved.value)
        error = exact_error_p3(theta, q, n, resolved)
        return {"theta": theta, "q": q, "n": n, "policy": resolved.value, "error": error}
