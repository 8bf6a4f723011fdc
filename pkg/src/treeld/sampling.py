"""
Sampling from tree Ising models, the binary symmetric channel, and pairwise statistics.

Samples are drawn ancestrally in BFS order from vertex 0: the root is a fair coin and every
child copies its parent, flipped with probability ``theta``. Batches are stored bit-packed
(little-endian bit order within each byte), and reduce to :class:`PairStats`, the 2x2 joint
counts of every pair of variables.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
from scipy.special import xlogy

from .streams import CHANNEL_STREAM, SAMPLE_STREAM, SeedLike, purpose_generator
from .tree_model import TreeStructure, check_q, check_theta

_logger = logging.getLogger("treeld.sampling")


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """
    ``n`` binary samples of dimension ``p``, one bit-packed row per sample.

    ``packed`` has shape ``(n, ceil(p / 8))``; variable ``k`` lives in byte ``k // 8`` at bit
    ``k % 8`` (least significant bit first).
    """

    n: int
    p: int
    packed: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"SampleBatch needs n >= 1, got {self.n}")
        if self.p < 1:
            raise ValueError(f"SampleBatch needs p >= 1, got {self.p}")
        expected = (self.n, (self.p + 7) // 8)
        packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        if packed.shape != expected:
            raise ValueError(f"packed array has shape {packed.shape}, expected {expected}")
        object.__setattr__(self, "packed", _readonly(packed.copy()))

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "SampleBatch":
        array = np.asarray(bits)
        if array.ndim != 2:
            raise ValueError(f"bits must be an n x p matrix, got shape {array.shape}")
        if array.size and not np.isin(array, (0, 1)).all():
            raise ValueError("bits must contain only 0 and 1")
        packed = np.packbits(array.astype(np.uint8), axis=1, bitorder="little")
        return cls(n=array.shape[0], p=array.shape[1], packed=packed)

    @property
    def bits(self) -> np.ndarray:
        """Unpacked ``n x p`` uint8 matrix."""
        return np.unpackbits(self.packed, axis=1, count=self.p, bitorder="little")

    def to_hex_lines(self) -> List[str]:
        return [row.tobytes().hex() for row in self.packed]

    @classmethod
    def from_hex_lines(cls, lines: Iterable[str], p: int) -> "SampleBatch":
        rows = [bytes.fromhex(line.strip()) for line in lines if line.strip()]
        if not rows:
            raise ValueError("No samples in hex dump")
        width = (p + 7) // 8
        if any(len(row) != width for row in rows):
            raise ValueError(f"Every hex row must hold {width} bytes for p={p}")
        packed = np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(len(rows), width)
        batch = cls(n=len(rows), p=p, packed=packed)
        if p % 8 and np.any(packed[:, -1] >> (p % 8)):
            raise ValueError("Hex dump sets bits beyond variable p")
        return batch


def write_batch(batch: SampleBatch, path: Union[str, Path]) -> Path:
    """Write one hex row per sample."""
    target = Path(path)
    target.write_text("\n".join(batch.to_hex_lines()) + "\n", encoding="utf-8")
    _logger.info("Batch written | path=%s n=%d p=%d", target, batch.n, batch.p)
    return target


def read_batch(path: Union[str, Path], p: int) -> SampleBatch:
    return SampleBatch.from_hex_lines(Path(path).read_text(encoding="utf-8").splitlines(), p)


# -------------------------------- sampling ---------------------------------
def sample_trials(
    t: TreeStructure, theta: float, n: int, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """
    ``trials`` independent batches of ``n`` samples as a ``(trials, n, p)`` uint8 array.

    Draw order is fixed: root bits first, then one flip mask covering the non-root vertices in
    BFS order.
    """
    check_theta(theta)
    if n < 1 or trials < 1:
        raise ValueError(f"n and trials must be positive, got n={n} trials={trials}")
    order, parent = t.bfs_order(0)
    bits = np.empty((trials, n, t.p), dtype=np.uint8)
    bits[..., 0] = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    flips = rng.random((trials, n, t.p - 1)) < float(theta)
    for k, v in enumerate(order[1:]):
        np.bitwise_xor(bits[..., parent[v]], flips[..., k], out=bits[..., v])
    return bits


def sample_bits(t: TreeStructure, theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One batch as an ``(n, p)`` uint8 array."""
    return sample_trials(t, theta, n, 1, rng)[0]


def sample_batch(t: TreeStructure, theta: float, n: int, seed: SeedLike) -> SampleBatch:
    """Draw ``n`` i.i.d. samples of the tree model; deterministic given ``seed``."""
    check_theta(theta)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = purpose_generator(seed, SAMPLE_STREAM)
    return SampleBatch.from_bits(sample_bits(t, theta, n, rng))


def flip_bits(bits: np.ndarray, q: float, rng: np.random.Generator) -> np.ndarray:
    """Flip every entry independently with probability ``q``."""
    check_q(q)
    if q == 0:
        return bits.copy()
    mask = rng.random(bits.shape) < float(q)
    return np.bitwise_xor(bits, mask.astype(bits.dtype))


def apply_bsc(b: SampleBatch, q: float, seed: SeedLike) -> SampleBatch:
    """Pass a batch through a memoryless BSC with crossover ``q``."""
    check_q(q)
    if q == 0:
        return SampleBatch(n=b.n, p=b.p, packed=b.packed)
    rng = purpose_generator(seed, CHANNEL_STREAM)
    return SampleBatch.from_bits(flip_bits(b.bits, q, rng))


# ------------------------------- statistics --------------------------------
@dataclass(frozen=True, eq=False)
class PairStats:
    """
    Joint 2x2 counts for every ordered pair of variables.

    ``table[i, j, a, b]`` counts samples with ``x_i = a`` and ``x_j = b``; the structure is built
    from the node sums ``ones`` and the co-occurrence matrix ``both[i, j] = #{x_i = x_j = 1}``.
    """

    n: int
    ones: np.ndarray = field(repr=False)
    both: np.ndarray = field(repr=False)
    table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ones = np.asarray(self.ones, dtype=np.int64)
        both = np.asarray(self.both, dtype=np.int64)
        p = ones.shape[0]
        if self.n < 1:
            raise ValueError(f"PairStats needs n >= 1, got {self.n}")
        if both.shape != (p, p):
            raise ValueError(f"co-occurrence matrix must be {p}x{p}, got {both.shape}")
        c11 = both
        c10 = ones[:, None] - both
        c01 = ones[None, :] - both
        c00 = self.n - ones[:, None] - ones[None, :] + both
        table = np.stack([np.stack([c00, c01], axis=-1), np.stack([c10, c11], axis=-1)], axis=-2)
        if (table < 0).any():
            raise ValueError("Inconsistent counts: negative cell in pair table")
        object.__setattr__(self, "ones", _readonly(ones.copy()))
        object.__setattr__(self, "both", _readonly(both.copy()))
        object.__setattr__(self, "table", _readonly(table))

    @classmethod
    def from_counts(cls, n: int, ones: np.ndarray, both: np.ndarray) -> "PairStats":
        return cls(n=int(n), ones=ones, both=both)

    @property
    def p(self) -> int:
        return int(self.ones.shape[0])

    @property
    def counts(self) -> np.ndarray:
        """``(p, p, 4)`` array of ``(c00, c01, c10, c11)``."""
        return self.table.reshape(self.p, self.p, 4)

    @property
    def agreement_counts(self) -> np.ndarray:
        """Integer ``c00 + c11`` for every pair."""
        return self.table[..., 0, 0] + self.table[..., 1, 1]

    def pair_counts(self, i: int, j: int) -> Tuple[int, int, int, int]:
        self._check_pair(i, j)
        c = self.table[i, j]
        return int(c[0, 0]), int(c[0, 1]), int(c[1, 0]), int(c[1, 1])

    def disagreement_rate(self, i: int, j: int) -> float:
        c00, _, _, c11 = self.pair_counts(i, j)
        return (self.n - c00 - c11) / self.n

    def _check_pair(self, i: int, j: int) -> None:
        if i == j:
            raise ValueError("A pair needs two distinct variables")
        if not (0 <= i < self.p and 0 <= j < self.p):
            raise ValueError(f"Pair ({i}, {j}) out of range for p={self.p}")


def pair_stats(b: SampleBatch) -> PairStats:
    """Exact joint counts of all pairs."""
    bits = b.bits.astype(np.int64)
    return PairStats(n=b.n, ones=bits.sum(axis=0), both=bits.T @ bits)


def batch_pair_stats(bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Node sums ``(trials, p)`` and co-occurrences ``(trials, p, p)`` of a bit stack."""
    stack = bits.astype(np.int32)
    ones = stack.sum(axis=1, dtype=np.int64)
    both = np.matmul(stack.transpose(0, 2, 1), stack).astype(np.int64)
    return ones, both


def agreement_weight(s: PairStats, i: int, j: int) -> float:
    """Empirical agreement ``(c00 + c11) / n``."""
    c00, _, _, c11 = s.pair_counts(i, j)
    return (c00 + c11) / s.n


def canonical_table(c00: int, c01: int, c10: int, c11: int) -> Tuple[int, int, int, int]:
    """
    Smallest relabelling of a 2x2 table under row swap, column swap and transpose.

    Mutual information is invariant under these maps, so equal canonical forms give equal weights.
    """
    variants = []
    for a, b, c, d in ((c00, c01, c10, c11), (c00, c10, c01, c11)):
        variants.extend([(a, b, c, d), (c, d, a, b), (b, a, d, c), (d, c, b, a)])
    return min(variants)


@functools.lru_cache(maxsize=65536)
def _mi_canonical(n: int, cells: Tuple[int, int, int, int]) -> float:
    c00, c01, c10, c11 = cells
    if c00 * c11 == c01 * c10:
        return 0.0
    rows = (c00 + c01, c10 + c11)
    cols = (c00 + c10, c01 + c11)
    total = (
        math.fsum(float(xlogy(c, c)) for c in cells)
        + float(xlogy(n, n))
        - math.fsum(float(xlogy(r, r)) for r in rows)
        - math.fsum(float(xlogy(c, c)) for c in cols)
    )
    return max(total / n, 0.0)


def table_mutual_information(c00: int, c01: int, c10: int, c11: int) -> float:
    """Empirical mutual information (nats) of a 2x2 count table, ``0 log 0 = 0``."""
    n = c00 + c01 + c10 + c11
    if n < 1:
        raise ValueError("Count table is empty")
    return _mi_canonical(n, canonical_table(int(c00), int(c01), int(c10), int(c11)))


def mi_weight(s: PairStats, i: int, j: int) -> float:
    """Empirical mutual information of the pair, in nats."""
    return table_mutual_information(*s.pair_counts(i, j))
