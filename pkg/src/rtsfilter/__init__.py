"""Real-time tweet filtering with Dirichlet query likelihood and online redundancy removal."""

from .corpus import (
    InterestProfile,
    TermVector,
    Tweet,
    load_profiles,
    load_tweets,
    profile_query,
    term_vector,
    tokenize,
)
from .estimators import QueryLikelihoodScorer, TweetFilter
from .evalkit import EvalConfig, GroundTruth, evaluate, load_ground_truth, relabel_ground_truth, sweep
from .novelty import ClusterState, novelty_check
from .pipeline import Decision, RunConfig, RunRecord, process_tweet, read_run, run_stream, write_run
from .refmodel import ReferenceModel, build_reference_model, persist, restore
from .scoring import QueryScorer, cosine, dirichlet_doc_prob, dirichlet_score, jm_doc_prob
from .synth import generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "ClusterState",
    "Decision",
    "EvalConfig",
    "GroundTruth",
    "InterestProfile",
    "QueryLikelihoodScorer",
    "QueryScorer",
    "ReferenceModel",
    "RunConfig",
    "RunRecord",
    "TermVector",
    "Tweet",
    "TweetFilter",
    "build_reference_model",
    "cosine",
    "dirichlet_doc_prob",
    "dirichlet_score",
    "evaluate",
    "generate_synthetic",
    "jm_doc_prob",
    "load_ground_truth",
    "load_profiles",
    "load_tweets",
    "novelty_check",
    "persist",
    "process_tweet",
    "profile_query",
    "read_run",
    "relabel_ground_truth",
    "restore",
    "run_stream",
    "sweep",
    "term_vector",
    "tokenize",
    "write_run",
]
