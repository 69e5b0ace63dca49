"""Semantic matching energies for multi-relational link prediction."""

from .dataset import Dictionary, FoldSplit, Triple, TripleSet, load_triples, make_folds, positives_of
from .evaluator import EvalReport, ScoredSet, auc_pr, cross_validate, score_set
from .model import (BILINEAR, LINEAR, BilinearParams, EmbeddingTable, LinearParams,
                    Model, energy, energy_gradients)
from .trainer import TrainConfig, TrainTrace, corrupt, ranking_loss, sgd_step, train

__all__ = [
    "BILINEAR", "LINEAR",
    "BilinearParams", "Dictionary", "EmbeddingTable", "EvalReport", "FoldSplit",
    "LinearParams", "Model", "ScoredSet", "TrainConfig", "TrainTrace", "Triple",
    "TripleSet",
    "auc_pr", "corrupt", "cross_validate", "energy", "energy_gradients",
    "load_triples", "make_folds", "positives_of", "ranking_loss", "score_set",
    "sgd_step", "train",
]

__version__ = "0.1.0"
