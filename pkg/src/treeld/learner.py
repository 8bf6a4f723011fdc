"""
Maximum-weight spanning tree learners.

Kruskal's algorithm runs over the complete graph with edges sorted by weight (descending) and a
secondary key that realises the tie policy: a uniform random permutation for
:attr:`TiePolicy.RANDOM` and :attr:`TiePolicy.CONSERVATIVE`, the ``(i, j)`` pair order for
:attr:`TiePolicy.LEXICOGRAPHIC`. Agreement weights are compared as integer counts; mutual
information is compared on canonicalised count tables so equal-information patterns tie exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .sampling import PairStats, table_mutual_information
from .streams import TIE_STREAM, SeedLike, purpose_generator
from .tree_model import Edge, TreeStructure

_logger = logging.getLogger("treeld.learner")


class EdgeWeight(str, Enum):
    AGREEMENT = "agreement"
    MUTUAL_INFORMATION = "mi"

    @classmethod
    def parse(cls, value: "str | EdgeWeight") -> "EdgeWeight":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "agreement": cls.AGREEMENT,
            "mi": cls.MUTUAL_INFORMATION,
            "mutual_information": cls.MUTUAL_INFORMATION,
            "chow-liu": cls.MUTUAL_INFORMATION,
        }
        if key not in aliases:
            raise ValueError(f"Unknown edge weight {value!r}; expected agreement or mi")
        return aliases[key]


class TiePolicy(str, Enum):
    RANDOM = "random"
    CONSERVATIVE = "conservative"
    LEXICOGRAPHIC = "lexicographic"

    @classmethod
    def parse(cls, value: "str | TiePolicy") -> "TiePolicy":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value == key or member.name.lower() == key:
                return member
        raise ValueError(
            f"Unknown tie policy {value!r}; expected random, conservative or lexicographic"
        )


@dataclass(frozen=True)
class LearnResult:
    """Recovered tree plus tie diagnostics."""

    edges: TreeStructure
    tie_encountered: bool
    declared_error: bool = False
    policy: TiePolicy = TiePolicy.RANDOM

    def __post_init__(self) -> None:
        if self.declared_error and self.policy is not TiePolicy.CONSERVATIVE:
            raise ValueError("declared_error is only set by the conservative policy")


def all_pairs(p: int) -> List[Edge]:
    return [(i, j) for i in range(p) for j in range(i + 1, p)]


def mwst_weight_keys(s: PairStats, weight: "EdgeWeight | str") -> np.ndarray:
    """
    Exact comparison keys of every pair in :func:`all_pairs` order.

    Agreement keys are the integer counts ``c00 + c11``; mutual-information keys are floats that
    are bit-identical for count tables related by relabelling.
    """
    weight = EdgeWeight.parse(weight)
    pairs = all_pairs(s.p)
    if weight is EdgeWeight.AGREEMENT:
        agree = s.agreement_counts
        return np.array([agree[i, j] for i, j in pairs], dtype=np.int64)
    return np.array(
        [table_mutual_information(*s.pair_counts(i, j)) for i, j in pairs], dtype=np.float64
    )


def learn_mwst(
    s: PairStats,
    weight: "EdgeWeight | str" = EdgeWeight.AGREEMENT,
    policy: "TiePolicy | str" = TiePolicy.RANDOM,
    seed: SeedLike = None,
) -> LearnResult:
    """
    Maximum-weight spanning tree of the complete graph weighted by ``weight``.

    Args:
        s: Pairwise statistics of the (clean or noisy) batch.
        weight: Agreement (side-information ML rule) or empirical mutual information (Chow-Liu).
        policy: How equal weights are ordered and whether boundary ties declare an error.
        seed: Integer seed or generator for the random tie permutation.

    Returns:
        LearnResult with the tree, whether the MWST was unique, and the conservative flag.
    """
    if s.p < 2:
        raise ValueError(f"learn_mwst needs p >= 2, got p={s.p}")
    return learn_from_keys(mwst_weight_keys(s, weight), s.p, policy, seed)


def learn_from_weights(
    weights: np.ndarray,
    p: Optional[int] = None,
    policy: "TiePolicy | str" = TiePolicy.RANDOM,
    seed: SeedLike = None,
) -> LearnResult:
    """
    MWST from an explicit symmetric ``p x p`` weight matrix (diagonal ignored).

    Example:
        >>> w = np.array([[0, .9, .6], [.9, 0, .8], [.6, .8, 0]])
        >>> learn_from_weights(w, policy="lexicographic").edges.to_text()
        '3 1-2 2-3'
    """
    matrix = np.asarray(weights)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"weights must be a square matrix, got shape {matrix.shape}")
    size = matrix.shape[0] if p is None else p
    if matrix.shape[0] != size:
        raise ValueError(f"weights are {matrix.shape[0]}x{matrix.shape[0]} but p={size}")
    if not np.array_equal(matrix, matrix.T):
        raise ValueError("weights must be symmetric")
    keys = np.array([matrix[i, j] for i, j in all_pairs(size)])
    return learn_from_keys(keys, size, policy, seed)


def learn_from_keys(
    keys: np.ndarray, p: int, policy: "TiePolicy | str" = TiePolicy.RANDOM, seed: SeedLike = None
) -> LearnResult:
    """Kruskal over pair keys listed in :func:`all_pairs` order."""
    policy = TiePolicy.parse(policy)
    pairs = all_pairs(p)
    if len(keys) != len(pairs):
        raise ValueError(f"Expected {len(pairs)} pair weights for p={p}, got {len(keys)}")
    if policy is TiePolicy.LEXICOGRAPHIC:
        secondary = np.arange(len(pairs))
    else:
        secondary = purpose_generator(seed, TIE_STREAM).permutation(len(pairs))
    order = np.lexsort((secondary, -np.asarray(keys)))

    forest = DisjointSet(range(p))
    chosen: List[int] = []
    for idx in order:
        i, j = pairs[idx]
        if forest.merge(i, j):
            chosen.append(int(idx))
            if len(chosen) == p - 1:
                break

    tree = TreeStructure(p, frozenset(pairs[idx] for idx in chosen))
    tie = _has_alternative_mwst(keys, pairs, tree)
    declared = False
    if policy is TiePolicy.CONSERVATIVE:
        declared = _boundary_tie(keys, chosen)
    return LearnResult(edges=tree, tie_encountered=tie, declared_error=declared, policy=policy)


def _has_alternative_mwst(keys: Sequence, pairs: Sequence[Edge], tree: TreeStructure) -> bool:
    """True iff a non-tree edge ties the lightest tree edge on the cycle it closes."""
    if len(set(keys.tolist() if isinstance(keys, np.ndarray) else keys)) == len(keys):
        return False
    p = tree.p
    index = {pair: k for k, pair in enumerate(pairs)}
    adjacency = tree.adjacency
    for root in range(p):
        # lightest key on the tree path from root to every vertex
        lightest = {root: None}
        stack = [root]
        while stack:
            v = stack.pop()
            for w in adjacency[v]:
                if w not in lightest:
                    edge_key = keys[index[(min(v, w), max(v, w))]]
                    prev = lightest[v]
                    lightest[w] = edge_key if prev is None or edge_key < prev else prev
                    stack.append(w)
        for other in range(root + 1, p):
            if tree.has_edge(root, other):
                continue
            if keys[index[(root, other)]] == lightest[other]:
                return True
    return False


def _boundary_tie(keys: Sequence, chosen: Sequence[int]) -> bool:
    """Some non-tree weight equals the smallest chosen weight."""
    floor = min(keys[k] for k in chosen)
    in_tree = set(chosen)
    return any(keys[k] == floor for k in range(len(keys)) if k not in in_tree)


def structure_error(learned: LearnResult, truth: TreeStructure) -> bool:
    """Edge sets differ, or the conservative policy declared an error."""
    if learned.edges.p != truth.p:
        raise ValueError(
            f"Dimension mismatch: learned tree has p={learned.edges.p}, truth has p={truth.p}"
        )
    return learned.edges.edges != truth.edges or learned.declared_error

