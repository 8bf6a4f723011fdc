from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from conftest import assert_within_sigmas
from scipy.sparse.csgraph import minimum_spanning_tree

from treeld.learner import (
    EdgeWeight,
    LearnResult,
    TiePolicy,
    all_pairs,
    learn_from_keys,
    learn_from_weights,
    learn_mwst,
    mwst_weight_keys,
    structure_error,
)
from treeld.sampling import SampleBatch, pair_stats
from treeld.streams import chunk_generator
from treeld.tree_model import make_chain, make_structure


def _weights(p: int, values: dict) -> np.ndarray:
    matrix = np.zeros((p, p))
    for (i, j), w in values.items():
        matrix[i, j] = matrix[j, i] = w
    return matrix


def test_fractional_weights_example():
    w = _weights(3, {(0, 1): 0.9, (0, 2): 0.6, (1, 2): 0.8})
    result = learn_from_weights(w, policy="lexicographic")
    assert result.edges.to_text() == "3 1-2 2-3"
    assert not result.tie_encountered
    assert not result.declared_error


@pytest.mark.parametrize("weight", list(EdgeWeight))
def test_recovers_star_from_many_samples(star_batch, star10, weight):
    result = learn_mwst(pair_stats(star_batch), weight, TiePolicy.RANDOM, seed=1)
    assert result.edges == star10
    assert not structure_error(result, star10)


def test_agreement_keys_are_integer_counts(star_batch):
    keys = mwst_weight_keys(pair_stats(star_batch), EdgeWeight.AGREEMENT)
    assert keys.dtype == np.int64
    assert len(keys) == len(all_pairs(10)) == 45
    assert keys.max() <= star_batch.n


def test_all_ties_lexicographic_keeps_first_pairs():
    result = learn_from_keys(np.array([5, 5, 5]), 3, TiePolicy.LEXICOGRAPHIC)
    assert result.edges.to_text() == "3 1-2 1-3"
    assert result.tie_encountered


def test_random_tie_break_is_uniform_over_trees():
    trials = 3000
    counts = Counter(
        learn_from_keys(np.array([5, 5, 5]), 3, TiePolicy.RANDOM, seed=s).edges.to_text()
        for s in range(trials)
    )
    assert set(counts) == {"3 1-2 1-3", "3 1-2 2-3", "3 1-3 2-3"}
    for count in counts.values():
        assert_within_sigmas(count / trials, 1 / 3, trials)


def test_random_policy_is_reproducible_per_seed():
    keys = np.array([2, 2, 2, 2, 2, 2])
    first = learn_from_keys(keys, 4, TiePolicy.RANDOM, seed=17)
    again = learn_from_keys(keys, 4, TiePolicy.RANDOM, seed=17)
    assert first.edges == again.edges


def test_conservative_declares_boundary_tie():
    # A12 = A13 tie for the second slot: conservative flags, random does not
    keys = np.array([4, 4, 9])
    conservative = learn_from_keys(keys, 3, TiePolicy.CONSERVATIVE, seed=0)
    assert conservative.declared_error
    assert structure_error(conservative, make_chain(3))
    random_result = learn_from_keys(keys, 3, TiePolicy.RANDOM, seed=0)
    assert not random_result.declared_error


def test_conservative_without_tie():
    result = learn_from_keys(np.array([9, 1, 8]), 3, TiePolicy.CONSERVATIVE, seed=0)
    assert not result.declared_error
    assert not structure_error(result, make_structure("p3"))


def test_irrelevant_ties_do_not_count():
    w = _weights(4, {(0, 1): 10, (1, 2): 9, (2, 3): 8, (0, 2): 1, (0, 3): 1, (1, 3): 1})
    result = learn_from_weights(w, policy=TiePolicy.CONSERVATIVE, seed=0)
    assert result.edges == make_chain(4)
    assert not result.tie_encountered
    assert not result.declared_error


def test_tie_inside_cycle_is_detected():
    # 0-3 and 2-3 tie as the lightest edges of the cycle 0-1-2-3
    w = _weights(4, {(0, 1): 10, (1, 2): 9, (2, 3): 3, (0, 3): 3, (0, 2): 1, (1, 3): 1})
    result = learn_from_weights(w, policy="lexicographic")
    assert result.tie_encountered


def test_mi_keys_are_relabelling_invariant():
    # pairs (1,2) and (2,3) both have one sample in every cell
    bits = np.array([[0, 0, 1], [1, 1, 0], [0, 1, 1], [1, 0, 0]], dtype=np.uint8)
    stats = pair_stats(SampleBatch.from_bits(bits))
    keys = mwst_weight_keys(stats, "mi")
    assert keys.dtype == np.float64
    assert keys[0] == keys[2]


def test_declared_error_requires_conservative_policy():
    with pytest.raises(ValueError):
        LearnResult(edges=make_chain(3), tie_encountered=True, declared_error=True)


def test_structure_error_dimension_mismatch():
    result = learn_from_keys(np.array([3, 2, 1]), 3, TiePolicy.LEXICOGRAPHIC)
    with pytest.raises(ValueError, match="Dimension mismatch"):
        structure_error(result, make_chain(4))


@pytest.mark.parametrize(
    "weights",
    [np.zeros((3, 2)), np.array([[0, 1, 2], [0, 0, 3], [2, 3, 0]])],
)
def test_weight_matrix_validation(weights):
    with pytest.raises(ValueError):
        learn_from_weights(weights)


def test_key_count_validation():
    with pytest.raises(ValueError, match="Expected 3"):
        learn_from_keys(np.array([1, 2]), 3)


def test_enum_parsing():
    assert EdgeWeight.parse("Chow-Liu") is EdgeWeight.MUTUAL_INFORMATION
    assert EdgeWeight.parse("agreement") is EdgeWeight.AGREEMENT
    assert TiePolicy.parse("LEXICOGRAPHIC") is TiePolicy.LEXICOGRAPHIC
    with pytest.raises(ValueError):
        EdgeWeight.parse("pearson")
    with pytest.raises(ValueError):
        TiePolicy.parse("first")


def _distinct_weights(p: int, seed: int) -> np.ndarray:
    upper = np.triu(chunk_generator(seed).uniform(0.1, 1.0, size=(p, p)), 1)
    return upper + upper.T


def _scipy_maximum_tree(weights: np.ndarray) -> set:
    # reversing the order keeps every weight positive so no edge reads as missing
    reversed_weights = np.triu(weights.max() + 1.0 - weights, 1)
    tree = minimum_spanning_tree(reversed_weights).tocoo()
    return {(min(i, j), max(i, j)) for i, j in zip(tree.row.tolist(), tree.col.tolist())}


@pytest.mark.parametrize("policy", list(TiePolicy))
@pytest.mark.parametrize("seed", range(5))
def test_matches_scipy_spanning_tree_without_ties(policy, seed):
    weights = _distinct_weights(8, seed)
    result = learn_from_weights(weights, policy=policy, seed=seed)
    assert set(result.edges.edges) == _scipy_maximum_tree(weights)
    assert not result.tie_encountered
    assert not result.declared_error


@pytest.mark.parametrize("policy", list(TiePolicy))
def test_monotone_weight_transform_keeps_the_tree(policy):
    weights = _distinct_weights(9, 42)
    transformed = np.exp(3.0 * weights) + 2.0 * weights**3
    np.fill_diagonal(transformed, 0.0)
    before = learn_from_weights(weights, policy=policy, seed=1)
    after = learn_from_weights(transformed, policy=policy, seed=1)
    assert after.edges == before.edges


def test_affine_transform_of_agreement_counts_keeps_the_tree(star_batch):
    stats = pair_stats(star_batch)
    keys = mwst_weight_keys(stats, "agreement")
    shifted = learn_from_keys(2 * keys + 7, 10, TiePolicy.LEXICOGRAPHIC)
    assert shifted.edges == learn_from_keys(keys, 10, TiePolicy.LEXICOGRAPHIC).edges


def test_conservative_errs_whenever_random_does():
    # A12 = A13 < A23: the edge 1-2 ties the non-edge 1-3 for the last slot
    bits = np.array([[0, 0, 0]] * 6 + [[0, 1, 1]] * 2, dtype=np.uint8)
    stats = pair_stats(SampleBatch.from_bits(bits))
    assert stats.agreement_counts[0, 1] == stats.agreement_counts[0, 2]
    truth = make_structure("p3")
    random_errors = 0
    for seed in range(200):
        random_result = learn_mwst(stats, "agreement", TiePolicy.RANDOM, seed=seed)
        conservative = learn_mwst(stats, "agreement", TiePolicy.CONSERVATIVE, seed=seed)
        assert structure_error(conservative, truth)
        if structure_error(random_result, truth):
            random_errors += 1
    assert 0 < random_errors < 200
