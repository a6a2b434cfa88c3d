"""Online redundancy removal against one stored tweet per pushed cluster."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .corpus import TermVector

__all__ = ["ClusterState", "NoveltyResult", "novelty_check"]


@dataclass(frozen=True)
class NoveltyResult:
    novel: bool
    matched_id: str | None = None
    similarity: float = -math.inf


class _Postings:
    """Growable (representative index, count) arrays for one term."""

    __slots__ = ("idx", "cnt", "size")

    def __init__(self):
        self.idx = np.empty(4, dtype=np.intp)
        self.cnt = np.empty(4, dtype=np.float64)
        self.size = 0

    def append(self, i: int, c: int) -> None:
        if self.size == len(self.idx):
            self.idx = np.resize(self.idx, 2 * self.size)
            self.cnt = np.resize(self.cnt, 2 * self.size)
        self.idx[self.size] = i
        self.cnt[self.size] = c
        self.size += 1


class ClusterState:
    """Representatives in push order, with a term -> representative index.

    Only representatives sharing a term with the incoming tweet can have a
    positive cosine. Dot products are accumulated over those postings in
    float64, which is exact for integer counts below 2**53.
    """

    def __init__(self):
        self._ids: list[str] = []
        self._vectors: list[TermVector] = []
        self._postings: dict[str, _Postings] = {}
        self._sumsq = np.empty(16, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self) -> Iterator[tuple[str, TermVector]]:
        return iter(zip(self._ids, self._vectors))

    @property
    def representatives(self) -> list[tuple[str, TermVector]]:
        return list(self)

    def add(self, tweet_id: str, vec: TermVector) -> None:
        idx = len(self._ids)
        self._ids.append(tweet_id)
        self._vectors.append(vec)
        if idx == len(self._sumsq):
            self._sumsq = np.resize(self._sumsq, 2 * idx)
        self._sumsq[idx] = vec.sumsq
        for w, c in vec.counts.items():
            plist = self._postings.get(w)
            if plist is None:
                plist = self._postings[w] = _Postings()
            plist.append(idx, c)

    def max_similarity(self, vec: TermVector) -> tuple[float, int]:
        """Highest cosine against the representatives and its first index.

        Returns ``(-inf, -1)`` for an empty state.
        """
        n = len(self._ids)
        if n == 0:
            return -math.inf, -1
        dots = np.zeros(n)
        touched = False
        if vec.sumsq:
            for w, c in vec.counts.items():
                plist = self._postings.get(w)
                if plist is not None:
                    k = plist.size
                    # indices within one postings list are distinct
                    dots[plist.idx[:k]] += c * plist.cnt[:k]
                    touched = True
        if not touched:
            # no shared term: every representative sits at cosine 0
            return 0.0, 0
        denom = np.sqrt(self._sumsq[:n] * float(vec.sumsq))
        # empty representatives have zero norm and stay at cosine 0
        sims = np.divide(dots, denom, out=np.zeros(n), where=denom > 0)
        np.minimum(sims, 1.0, out=sims)
        best_idx = int(np.argmax(sims))
        return float(sims[best_idx]), best_idx

    def to_json(self) -> list:
        return [[i, v.counts] for i, v in zip(self._ids, self._vectors)]

    @classmethod
    def from_json(cls, data) -> "ClusterState":
        state = cls()
        for tweet_id, counts in data:
            state.add(str(tweet_id), TermVector(counts))
        return state


def novelty_check(state: ClusterState, d: TermVector, theta: float, tweet_id: str | None = None) -> NoveltyResult:
    """Admit ``d`` as a new cluster when its best cosine is below ``theta``.

    A novel tweet is appended to ``state`` (under ``tweet_id``); a redundant
    one is reported against the earliest best-matching representative and
    not stored.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    sim, idx = state.max_similarity(d)
    if sim < theta:
        if tweet_id is None:
            tweet_id = str(len(state))
        state.add(tweet_id, d)
        return NoveltyResult(True, None, sim)
    return NoveltyResult(False, state._ids[idx], sim)
