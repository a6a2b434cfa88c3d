"""Input checks shared by the estimator classes."""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np

from .corpus import TermVector, Tweet, text_vector


def check_texts(X, name: str = "X") -> list[str]:
    """Coerce a 1-d collection of documents to a list of strings.

    Accepts lists, tuples, numpy arrays (1-d, or 2-d with one column),
    pandas Series and sequences of :class:`Tweet`.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError(f"{name} must be a collection of texts, not a single string")
    if isinstance(X, np.ndarray):
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        elif X.ndim != 1:
            raise ValueError(f"{name} must be 1-dimensional, got shape {X.shape}")
    elif hasattr(X, "to_numpy") and getattr(X, "ndim", 1) == 1:
        X = X.to_numpy()
    if not isinstance(X, Iterable):
        raise TypeError(f"{name} must be an iterable of texts, got {type(X).__name__}")
    texts = []
    for i, item in enumerate(X):
        if isinstance(item, Tweet):
            item = item.text
        if not isinstance(item, str):
            raise TypeError(f"{name}[{i}] is {type(item).__name__}, expected str")
        texts.append(item)
    return texts


def check_tweet_ids(ids, n: int) -> list[str]:
    ids = [str(i) for i in ids]
    if len(ids) != n:
        raise ValueError(f"got {len(ids)} tweet ids for {n} texts")
    if len(set(ids)) != n:
        raise ValueError("tweet ids must be unique")
    return ids


def check_threshold(value: float, name: str = "threshold") -> float:
    value = float(value)
    if math.isnan(value):
        raise ValueError(f"{name} must not be NaN")
    return value


def check_unit_interval(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0 or math.isinf(value):
        raise ValueError(f"{name} must be a finite positive number, got {value}")
    return value


def check_query(query, name: str = "query") -> TermVector:
    if isinstance(query, TermVector):
        vec = query
    elif isinstance(query, str):
        vec = text_vector(query)
    else:
        raise TypeError(f"{name} must be a string or TermVector, got {type(query).__name__}")
    if not vec:
        raise ValueError(f"{name} has no terms")
    return vec
