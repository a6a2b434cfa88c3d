"""scikit-learn compatible front end.

``fit`` learns the background model from reference texts; scoring and
filtering then run on any collection of tweet texts.

>>> flt = TweetFilter(query="olympic swimming medal", threshold=0.0)
>>> flt.fit(reference_texts).predict(stream_texts)        # doctest: +SKIP
array([0, 1, 0, 2, ...])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import text_vector
from .novelty import ClusterState, novelty_check
from .pipeline import DEFAULT_THETA, DEFAULT_THRESHOLD, Decision
from .refmodel import ReferenceModel, build_reference_model
from .scoring import DEFAULT_MU, QueryScorer
from .validation import (
    check_positive,
    check_query,
    check_texts,
    check_threshold,
    check_tweet_ids,
    check_unit_interval,
)

__all__ = ["QueryLikelihoodScorer", "TweetFilter"]


def _fit_reference(estimator, X) -> ReferenceModel:
    if estimator.reference_model is not None:
        if not isinstance(estimator.reference_model, ReferenceModel):
            raise TypeError("reference_model must be a ReferenceModel")
        return estimator.reference_model
    texts = check_texts(X)
    if estimator.min_count < 1:
        raise ValueError("min_count must be >= 1")
    return build_reference_model(texts, min_count=estimator.min_count)


class QueryLikelihoodScorer(TransformerMixin, BaseEstimator):
    """Dirichlet-smoothed relevance of each text to each query.

    ``transform`` returns an ``(n_texts, n_queries)`` array of scores in
    nats. Passing ``reference_model`` skips estimation in ``fit``.
    """

    def __init__(self, queries=(), mu=DEFAULT_MU, min_count=1, reference_model=None):
        self.queries = queries
        self.mu = mu
        self.min_count = min_count
        self.reference_model = reference_model

    def fit(self, X=None, y=None):
        check_positive(self.mu, "mu")
        if isinstance(self.queries, str):
            raise TypeError("queries must be a collection of query strings")
        query_vectors = [check_query(q, f"queries[{i}]") for i, q in enumerate(self.queries)]
        if not query_vectors:
            raise ValueError("at least one query is required")
        self.reference_model_ = _fit_reference(self, X)
        self.scorers_ = [QueryScorer(q, self.reference_model_, self.mu) for q in query_vectors]
        self.n_queries_ = len(self.scorers_)
        return self

    def transform(self, X):
        check_is_fitted(self, "scorers_")
        docs = [text_vector(t) for t in check_texts(X)]
        out = np.empty((len(docs), self.n_queries_), dtype=np.float64)
        for j, scorer in enumerate(self.scorers_):
            out[:, j] = [scorer(d) for d in docs]
        return out


class TweetFilter(BaseEstimator):
    """Push filter for a single interest profile.

    ``predict`` replays texts in the given order and returns one
    :class:`~rtsfilter.pipeline.Decision` code per text: 0 irrelevant,
    1 pushed, 2 redundant. Each ``predict`` call starts from an empty
    cluster state; ``partial_predict`` continues from the previous call.
    """

    def __init__(self, query="", mu=DEFAULT_MU, threshold=DEFAULT_THRESHOLD, theta=DEFAULT_THETA,
                 novelty=True, min_count=1, reference_model=None):
        self.query = query
        self.mu = mu
        self.threshold = threshold
        self.theta = theta
        self.novelty = novelty
        self.min_count = min_count
        self.reference_model = reference_model

    def fit(self, X=None, y=None):
        check_positive(self.mu, "mu")
        check_threshold(self.threshold)
        check_unit_interval(self.theta, "theta")
        self.query_ = check_query(self.query)
        self.reference_model_ = _fit_reference(self, X)
        self.scorer_ = QueryScorer(self.query_, self.reference_model_, self.mu)
        self.reset()
        return self

    def reset(self):
        self.clusters_ = ClusterState()
        self.n_seen_ = 0
        self.pushed_ids_ = []
        return self

    def decision_function(self, X):
        check_is_fitted(self, "scorer_")
        return np.array([self.scorer_(text_vector(t)) for t in check_texts(X)], dtype=np.float64)

    def predict(self, X, tweet_ids=None):
        check_is_fitted(self, "scorer_")
        self.reset()
        return self.partial_predict(X, tweet_ids)

    def partial_predict(self, X, tweet_ids=None):
        check_is_fitted(self, "scorer_")
        texts = check_texts(X)
        if tweet_ids is None:
            tweet_ids = [str(self.n_seen_ + i) for i in range(len(texts))]
        tweet_ids = check_tweet_ids(tweet_ids, len(texts))
        out = np.empty(len(texts), dtype=np.int64)
        for i, (tid, text) in enumerate(zip(tweet_ids, texts)):
            doc = text_vector(text)
            if self.scorer_(doc) < self.threshold:
                out[i] = Decision.DROPPED_IRRELEVANT
            elif self.novelty and not novelty_check(self.clusters_, doc, self.theta, tid).novel:
                out[i] = Decision.DROPPED_REDUNDANT
            else:
                if not self.novelty:
                    self.clusters_.add(tid, doc)
                self.pushed_ids_.append(tid)
                out[i] = Decision.PUSHED
        self.n_seen_ += len(texts)
        return out
