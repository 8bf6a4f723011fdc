"""
Spanning-tree structures for homogeneous zero-field Ising models.

A :class:`TreeStructure` is an immutable undirected spanning tree on ``p`` vertices. Vertices
are 0-indexed inside the library; the text format, reports and the HTTP service use 1-indexed
labels. Trees can be exported to plain dictionaries, JSON and Graphviz DOT for inspection.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import math
import numbers
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .streams import SeedLike, as_generator

_logger = logging.getLogger("treeld.tree_model")

Edge = Tuple[int, int]

STRUCTURES = ("star", "chain", "hybrid", "p3")


def _normalize_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class TreeStructure:
    """
    Undirected spanning tree ``T = (V, E)`` with ``V = {0, ..., p-1}``.

    Construction validates the edge list eagerly: exactly ``p - 1`` distinct edges, no
    self-loops, and no cycle (checked with a disjoint-set forest).

    Example:
        >>> t = TreeStructure.from_edges(3, [(1, 2), (2, 3)], one_indexed=True)
        >>> t.to_text()
        '3 1-2 2-3'
    """

    p: int
    edges: FrozenSet[Edge]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or self.p < 2:
            raise ValueError(f"Tree needs p >= 2 vertices, got p={self.p!r}")
        normalized = frozenset(_normalize_edge(int(i), int(j)) for i, j in self.edges)
        if len(normalized) != len(self.edges):
            raise ValueError("Duplicate edge in tree edge list")
        if len(normalized) != self.p - 1:
            raise ValueError(
                f"Tree on p={self.p} vertices needs {self.p - 1} edges, got {len(normalized)}"
            )
        forest = DisjointSet(range(self.p))
        for i, j in sorted(normalized):
            if i == j:
                raise ValueError(f"Self-loop at vertex {i}")
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"Edge ({i}, {j}) out of range for p={self.p}")
            if not forest.merge(i, j):
                raise ValueError(f"Edge ({i}, {j}) closes a cycle")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "edges", normalized)

    # ---------------------------- construction ----------------------------
    @classmethod
    def from_edges(
        cls,
        p: int,
        edges: Iterable[Sequence[int]],
        *,
        one_indexed: bool = False,
        name: str = "",
    ) -> "TreeStructure":
        """Build a tree from ``(i, j)`` pairs, optionally shifting 1-indexed labels down."""
        shift = 1 if one_indexed else 0
        pairs = []
        for edge in edges:
            if len(edge) != 2:
                raise ValueError(f"Edge must have two endpoints, got {edge!r}")
            pairs.append((int(edge[0]) - shift, int(edge[1]) - shift))
        frozen = frozenset(pairs)
        if len(frozen) != len(pairs):
            raise ValueError("Duplicate edge in tree edge list")
        return cls(p=p, edges=frozen, name=name)

    # ------------------------------ structure -----------------------------
    @property
    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    @property
    def degrees(self) -> Tuple[int, ...]:
        counts = [0] * self.p
        for i, j in self.edges:
            counts[i] += 1
            counts[j] += 1
        return tuple(counts)

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        nbrs: List[List[int]] = [[] for _ in range(self.p)]
        for i, j in self.sorted_edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(n)) for n in nbrs)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        self._check_vertex(v)
        return self.adjacency[v]

    def has_edge(self, i: int, j: int) -> bool:
        return _normalize_edge(i, j) in self.edges

    def bfs_order(self, root: int = 0) -> Tuple[List[int], List[int]]:
        """
        Breadth-first visiting order from ``root`` and the parent of every vertex.

        Returns:
            ``(order, parent)`` where ``parent[root] == -1``.
        """
        self._check_vertex(root)
        adjacency = self.adjacency
        parent = [-1] * self.p
        seen = [False] * self.p
        seen[root] = True
        order: List[int] = []
        queue = deque([root])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    queue.append(w)
        return order, parent

    def path(self, i: int, j: int) -> List[int]:
        """Vertices on the unique path from ``i`` to ``j`` (both included)."""
        self._check_vertex(i)
        self._check_vertex(j)
        _, parent = self.bfs_order(root=j)
        route = [i]
        while route[-1] != j:
            route.append(parent[route[-1]])
        return route

    def distance(self, i: int, j: int) -> int:
        return len(self.path(i, j)) - 1

    def is_star(self) -> bool:
        return max(self.degrees) == self.p - 1

    def is_chain(self) -> bool:
        return max(self.degrees) <= 2

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.p:
            raise ValueError(f"Vertex {v} out of range for p={self.p}")

    # ------------------------------- export -------------------------------
    def to_text(self) -> str:
        """Tree text format: ``p`` followed by 1-indexed ``i-j`` tokens."""
        tokens = [f"{i + 1}-{j + 1}" for i, j in self.sorted_edges]
        return " ".join([str(self.p), *tokens])

    def to_dict(self) -> Dict[str, Any]:
        """
        Export tree to dictionary format with 1-indexed vertices.

        Returns:
            Dictionary with nodes, edges, and metadata
        """
        degrees = self.degrees
        return {
            "nodes": [{"id": v + 1, "degree": degrees[v]} for v in range(self.p)],
            "edges": [{"source": i + 1, "target": j + 1} for i, j in self.sorted_edges],
            "metadata": {
                "name": self.name,
                "p": self.p,
                "zeta": zeta(self),
                "text": self.to_text(),
            },
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_dot(self) -> str:
        """Export tree to an undirected Graphviz ``graph``."""
        degrees = self.degrees
        lines = [f"graph {self.name or 'tree'} {{", "  node [shape=circle, style=filled];", ""]
        for v in range(self.p):
            color = "lightblue" if degrees[v] > 1 else "lightgreen"
            lines.append(f'  v{v + 1} [label="{v + 1}", fillcolor={color}];')
        lines.append("")
        for i, j in self.sorted_edges:
            lines.append(f"  v{i + 1} -- v{j + 1};")
        lines.append("}")
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class ModelParams:
    """Edge flip probability ``theta`` and BSC crossover ``q``."""

    theta: float
    q: float = 0.0

    def __post_init__(self) -> None:
        check_theta(self.theta)
        check_q(self.q)


def check_theta(theta: float, name: str = "theta") -> float:
    if isinstance(theta, bool) or not isinstance(theta, numbers.Real):
        raise ValueError(f"{name} must be a real number, got {theta!r}")
    if not 0 < theta < 0.5:
        raise ValueError(f"{name} must lie in (0, 0.5), got {theta!r}")
    return theta


def check_q(q: float) -> float:
    if isinstance(q, bool) or not isinstance(q, numbers.Real):
        raise ValueError(f"q must be a real number, got {q!r}")
    if not 0 <= q < 0.5:
        raise ValueError(f"q must lie in [0, 0.5), got {q!r}")
    return q


def _check_p(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or p < 2:
        raise ValueError(f"p must be an integer >= 2, got {p!r}")
    return int(p)


# ------------------------------ canonical trees ------------------------------
def make_star(p: int) -> TreeStructure:
    """Star with vertex 0 (label 1) as hub."""
    p = _check_p(p)
    return TreeStructure(p, frozenset((0, v) for v in range(1, p)), name="star")


def make_chain(p: int) -> TreeStructure:
    p = _check_p(p)
    return TreeStructure(p, frozenset((v, v + 1) for v in range(p - 1)), name="chain")


def make_hybrid() -> TreeStructure:
    """
    Ten-vertex hybrid: hub 1 carries leaves 2..6 and starts the chain 1-7-8-9-10.

    Degrees are (6, 1, 1, 1, 1, 1, 2, 2, 2, 1) so ``zeta`` is 15 + 3 = 18.
    """
    leaves = [(0, v) for v in range(1, 6)]
    chain = [(0, 6), (6, 7), (7, 8), (8, 9)]
    return TreeStructure(10, frozenset(leaves + chain), name="hybrid")


def make_structure(name: str, p: int = 10) -> TreeStructure:
    """Dispatch ``star|chain|hybrid|p3`` to the matching constructor."""
    key = name.strip().lower()
    if key == "star":
        return make_star(p)
    if key == "chain":
        return make_chain(p)
    if key == "hybrid":
        return make_hybrid()
    if key == "p3":
        return TreeStructure(3, frozenset({(0, 1), (1, 2)}), name="p3")
    raise ValueError(f"Unknown structure {name!r}; expected one of {', '.join(STRUCTURES)}")


# ---------------------------------- Prüfer -----------------------------------
def prufer_decode(sequence: Sequence[int], p: int) -> TreeStructure:
    """Decode a Prüfer sequence of length ``p - 2`` over ``{0..p-1}`` into a labeled tree."""
    p = _check_p(p)
    if len(sequence) != p - 2:
        raise ValueError(f"Prüfer sequence for p={p} must have length {p - 2}")
    degree = [1] * p
    for v in sequence:
        if not 0 <= v < p:
            raise ValueError(f"Prüfer entry {v} out of range for p={p}")
        degree[v] += 1
    leaves = [v for v in range(p) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, int(v))
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return TreeStructure(p, frozenset(_normalize_edge(a, b) for a, b in edges))


def iter_labeled_trees(p: int) -> Iterator[TreeStructure]:
    """All ``p ** (p - 2)`` labeled trees, in lexicographic Prüfer order."""
    p = _check_p(p)
    for sequence in itertools.product(range(p), repeat=p - 2):
        yield prufer_decode(sequence, p)


def random_tree(p: int, seed: SeedLike) -> TreeStructure:
    """Uniform labeled tree: decode a uniform Prüfer sequence drawn from ``seed``."""
    p = _check_p(p)
    rng = as_generator(seed)
    sequence = rng.integers(0, p, size=p - 2).tolist() if p > 2 else []
    return prufer_decode(sequence, p)


# ------------------------------ degree quantities ----------------------------
def zeta(t: TreeStructure) -> int:
    """Number of 3-vertex path subtrees, ``sum_i d_i (d_i - 1) / 2``."""
    return sum(d * (d - 1) // 2 for d in t.degrees)


def path_flip_probability(t: TreeStructure, i: int, j: int, theta: float) -> float:
    """
    Probability that vertices ``i`` and ``j`` disagree.

    Flips compose along the path, so at distance ``d`` the value is ``(1 - (1 - 2θ)^d) / 2``.
    """
    if i == j:
        raise ValueError("path_flip_probability needs two distinct vertices")
    check_theta(theta)
    d = t.distance(i, j)
    return flip_probability_at_distance(theta, d)


def flip_probability_at_distance(theta: float, d: int) -> float:
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    if d <= 1:
        return float(theta) * d
    return -math.expm1(d * math.log1p(-2 * theta)) / 2


def parse_tree_text(line: str, *, name: str = "") -> TreeStructure:
    """
    Parse the tree text format ``"p i-j i-j ..."`` (1-indexed).

    Example:
        >>> parse_tree_text("3 1-2 2-3").sorted_edges
        [(0, 1), (1, 2)]
    """
    tokens = line.split()
    if not tokens:
        raise ValueError("Empty tree description")
    try:
        p = int(tokens[0])
    except ValueError as exc:
        raise ValueError(f"Tree description must start with p, got {tokens[0]!r}") from exc
    edges = []
    for token in tokens[1:]:
        parts = token.split("-")
        if len(parts) != 2:
            raise ValueError(f"Malformed edge token {token!r}; expected i-j")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ValueError(f"Malformed edge token {token!r}; expected i-j") from exc
    return TreeStructure.from_edges(p, edges, one_indexed=True, name=name)


def read_tree_file(path: str) -> TreeStructure:
    """First non-blank, non-comment line of ``path`` in tree text format."""
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if line and not line.startswith("#"):
                _logger.info("Loaded tree | path=%s", path)
                return parse_tree_text(line, name="file")
    raise ValueError(f"No tree description found in {path}")
