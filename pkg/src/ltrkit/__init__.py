"""Learning-to-rank toolkit: ranking losses, a trainable feature scorer,
BM25 retrieval, reciprocal-rank ensembling and fusion, and MRR evaluation.
"""

from .core import Judgments, QueryGroup, RankedRun, rank_positions
from .data import TrainingList, Triple, featurize, group_triples, tokenize
from .ensemble import RunSet, ensemble_reciprocal_rank, fuse_two_lists
from .losses import ListBatch, LossKind, listwise_softmax, pairwise_logistic, pointwise_sigmoid_ce
from .metrics import EvalReport, mrr_at_k, recall_at_k
from .model import ListScorer, ScorerParams, TrainConfig, load_checkpoint, rerank, save_checkpoint, score, train
from .retrieval import Corpus, InvertedIndex, bm25_search, build_index

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "EvalReport",
    "InvertedIndex",
    "Judgments",
    "ListBatch",
    "ListScorer",
    "LossKind",
    "QueryGroup",
    "RankedRun",
    "RunSet",
    "ScorerParams",
    "TrainConfig",
    "TrainingList",
    "Triple",
    "bm25_search",
    "build_index",
    "ensemble_reciprocal_rank",
    "featurize",
    "fuse_two_lists",
    "group_triples",
    "listwise_softmax",
    "load_checkpoint",
    "mrr_at_k",
    "pairwise_logistic",
    "pointwise_sigmoid_ce",
    "rank_positions",
    "recall_at_k",
    "rerank",
    "save_checkpoint",
    "score",
    "tokenize",
    "train",
]
