from .asymptotics import (
    AsymptoticPrediction,
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
    prefactors,
    prefactors_noisy,
)
from .config import ExperimentConfig
from .learner import EdgeWeight, LearnResult, TiePolicy, learn_mwst, structure_error
from .logutil import configure_logging
from .sampling import PairStats, SampleBatch, apply_bsc, pair_stats, sample_batch
from .tree_model import (
    ModelParams,
    TreeStructure,
    make_chain,
    make_hybrid,
    make_star,
    make_structure,
    parse_tree_text,
    random_tree,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "EdgeWeight",
    "ExperimentConfig",
    "LearnResult",
    "ModelParams",
    "PairStats",
    "SampleBatch",
    "TiePolicy",
    "TreeStructure",
    "apply_bsc",
    "bk_bound",
    "configure_logging",
    "joint_exponent",
    "k_bk",
    "k_nks",
    "k_p",
    "k_q",
    "learn_mwst",
    "lemma2_exponent",
    "make_chain",
    "make_hybrid",
    "make_star",
    "make_structure",
    "nks_bound",
    "pair_stats",
    "parse_tree_text",
    "predict_conservative_error",
    "predict_error",
    "prefactors",
    "prefactors_noisy",
    "random_tree",
    "sample_batch",
    "structure_error",
    "zeta",
    "__version__",
]
