"""Relevance and similarity functions over sparse term vectors.

All logarithms are natural logs, so relevance thresholds are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import TermVector
from .refmodel import ReferenceModel

__all__ = [
    "BASELINE_MU",
    "DEFAULT_MU",
    "QueryScorer",
    "ScoringConfig",
    "cosine",
    "dirichlet_doc_prob",
    "dirichlet_score",
    "jm_doc_prob",
]

DEFAULT_MU = 2500.0
# "very little smoothing": the same formula with a vanishing prior
BASELINE_MU = 1e-9


@dataclass(frozen=True)
class ScoringConfig:
    mu: float = DEFAULT_MU
    lambda_: float = 0.5

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lambda_}")


def _check_mu(mu: float) -> None:
    if not mu > 0 or math.isinf(mu):
        raise ValueError(f"mu must be a finite positive number, got {mu}")


class QueryScorer:
    """Dirichlet query-likelihood scorer bound to one query.

    Per-term constants ``mu * p(w|C)`` are computed once, so scoring a
    document touches only the terms shared with the query and never the
    reference vocabulary.
    """

    __slots__ = ("query", "mu", "_qlen", "_weights")

    def __init__(self, query: TermVector, model: ReferenceModel, mu: float = DEFAULT_MU):
        _check_mu(mu)
        if not query:
            raise ValueError("cannot score against an empty query")
        self.query = query
        self.mu = float(mu)
        self._qlen = query.length
        # term -> (c(w,q), mu * p(w|C))
        self._weights = {w: (c, self.mu * model.prob(w)) for w, c in query.counts.items()}

    def __call__(self, doc: TermVector) -> float:
        weights = self._weights
        dcounts = doc.counts
        total = 0.0
        if len(dcounts) < len(weights):
            for w, cd in dcounts.items():
                pair = weights.get(w)
                if pair is not None:
                    total += pair[0] * math.log1p(cd / pair[1])
        else:
            for w, (cq, mu_p) in weights.items():
                cd = dcounts.get(w)
                if cd is not None:
                    total += cq * math.log1p(cd / mu_p)
        return total + self._qlen * math.log(self.mu / (doc.length + self.mu))


def dirichlet_score(d: TermVector, q: TermVector, model: ReferenceModel, mu: float = DEFAULT_MU) -> float:
    """Document-dependent part of the Dirichlet-smoothed query log-likelihood.

    ``sum_{w in d&q} c(w,q) ln(1 + c(w,d) / (mu p(w|C))) + |q| ln(mu / (|d| + mu))``
    """
    return QueryScorer(q, model, mu)(d)


def dirichlet_doc_prob(d: TermVector, model: ReferenceModel, mu: float, w: str) -> float:
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    denom = d.length + mu
    if denom <= 0:
        raise ValueError("empty document with mu = 0 has no language model")
    if d.length == 0:
        return model.prob(w)
    return (d.counts.get(w, 0) + mu * model.prob(w)) / denom


def jm_doc_prob(d: TermVector, model: ReferenceModel, lambda_: float, w: str) -> float:
    if not 0.0 <= lambda_ <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lambda_}")
    ref = model.prob(w)
    if lambda_ == 1.0:
        return ref
    if d.length == 0:
        raise ValueError("empty document needs lambda = 1")
    return (1.0 - lambda_) * d.counts.get(w, 0) / d.length + lambda_ * ref


def _dot(a: dict[str, int], b: dict[str, int]) -> int:
    if len(a) > len(b):
        a, b = b, a
    return sum(c * b[w] for w, c in a.items() if w in b)


def cosine(v1: TermVector, v2: TermVector) -> float:
    """Cosine of raw count vectors; 0 when either side is empty."""
    if not v1.sumsq or not v2.sumsq:
        return 0.0
    dot = _dot(v1.counts, v2.counts)
    if not dot:
        return 0.0
    # a single sqrt of the integer product keeps parallel vectors at exactly 1.0
    return min(1.0, dot / math.sqrt(v1.sumsq * v2.sumsq))
