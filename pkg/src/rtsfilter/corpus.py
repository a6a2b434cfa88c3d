"""Tweets, interest profiles and their conversion into sparse term vectors."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "CorpusError",
    "EmptyQueryError",
    "InterestProfile",
    "TermVector",
    "Tweet",
    "load_profiles",
    "load_tweets",
    "parse_profiles",
    "parse_tweets",
    "profile_query",
    "serialize_tweets",
    "stream_key",
    "term_vector",
    "tokenize",
]

PROFILE_FIELDS = ("title", "description", "narrative")

_URL = re.compile(r"https?://\S*", re.IGNORECASE)
# letters and digits of any script; "_" is a word char but not alphanumeric
_ALNUM_RUN = re.compile(r"[^\W_]+")


class CorpusError(ValueError):
    """Malformed tweets or profiles input."""

    def __init__(self, message: str, lineno: int | None = None, source: str | None = None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:"
        if lineno is not None:
            where = f"{where}{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class EmptyQueryError(ValueError):
    pass


@dataclass(frozen=True)
class Tweet:
    id: str
    timestamp_ms: int
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("tweet id must be non-empty")
        if self.timestamp_ms < 0:
            raise ValueError(f"tweet {self.id}: negative timestamp_ms")


@dataclass(frozen=True)
class InterestProfile:
    topid: str
    title: str = ""
    description: str = ""
    narrative: str = ""

    def __post_init__(self):
        if not self.topid:
            raise ValueError("profile topid must be non-empty")


class TermVector:
    """Sparse bag of words: term -> positive count.

    ``length`` is the total number of tokens and ``sumsq`` the squared
    Euclidean norm of the counts, both kept as exact integers.
    """

    __slots__ = ("counts", "length", "sumsq")

    def __init__(self, counts: dict[str, int] | None = None):
        counts = dict(counts or {})
        for term, c in counts.items():
            if not term:
                raise ValueError("empty term in term vector")
            if not isinstance(c, int) or c < 1:
                raise ValueError(f"count for {term!r} must be a positive integer, got {c!r}")
        self.counts = counts
        self.length = sum(counts.values())
        self.sumsq = sum(c * c for c in counts.values())

    @classmethod
    def _trusted(cls, counts: dict[str, int]) -> "TermVector":
        # skips validation; callers guarantee positive int counts
        vec = cls.__new__(cls)
        vec.counts = counts
        vec.length = sum(counts.values())
        vec.sumsq = sum(c * c for c in counts.values())
        return vec

    @property
    def norm(self) -> float:
        return math.sqrt(self.sumsq)

    def __len__(self) -> int:
        return len(self.counts)

    def __bool__(self) -> bool:
        return bool(self.counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TermVector):
            return NotImplemented
        return self.counts == other.counts

    def __hash__(self):
        return hash(frozenset(self.counts.items()))

    def __repr__(self) -> str:
        return f"TermVector({self.counts!r}, length={self.length})"


def tokenize(text: str) -> list[str]:
    """Split tweet text into lowercase alphanumeric terms.

    URLs are removed whole; ``#`` and ``@`` fall away as separators, which
    keeps the body of hashtags and mentions.

    >>> tokenize("#Rio2016 via https://t.co/x @NBC")
    ['rio2016', 'via', 'nbc']
    """
    if not text:
        return []
    text = _URL.sub(" ", text)
    # lowercase before splitting so case mapping can never create a new run boundary
    return _ALNUM_RUN.findall(text.lower())


def term_vector(terms: Iterable[str]) -> TermVector:
    return TermVector._trusted(dict(Counter(terms)))


def text_vector(text: str) -> TermVector:
    return term_vector(tokenize(text))


def stream_key(tweet: Tweet) -> tuple[int, int, str]:
    """Sort key for replay: time first, then numeric id order without int parsing."""
    return (tweet.timestamp_ms, len(tweet.id), tweet.id)


def _coerce_id(value, lineno, source) -> str:
    if isinstance(value, bool):
        raise CorpusError("field 'id' must be a string", lineno, source)
    if isinstance(value, int):
        value = str(value)
    if not isinstance(value, str) or not value:
        raise CorpusError("field 'id' must be a non-empty string", lineno, source)
    return value


def parse_tweets(lines: Iterable[str], source: str | None = None) -> list[Tweet]:
    """Parse line-delimited JSON tweets, keeping file order."""
    tweets = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON ({exc.msg})", lineno, source) from None
        if not isinstance(obj, dict):
            raise CorpusError("expected a JSON object", lineno, source)
        try:
            raw_id, ts, text = obj["id"], obj["timestamp_ms"], obj["text"]
        except KeyError as exc:
            raise CorpusError(f"missing field {exc.args[0]!r}", lineno, source) from None
        tweet_id = _coerce_id(raw_id, lineno, source)
        if isinstance(ts, bool) or not isinstance(ts, int) or ts < 0:
            raise CorpusError("field 'timestamp_ms' must be a non-negative integer", lineno, source)
        if not isinstance(text, str):
            raise CorpusError("field 'text' must be a string", lineno, source)
        if tweet_id in seen:
            raise CorpusError(
                f"duplicate tweet id {tweet_id} (first seen at line {seen[tweet_id]})", lineno, source
            )
        seen[tweet_id] = lineno
        tweets.append(Tweet(tweet_id, ts, text))
    return tweets


def load_tweets(path) -> list[Tweet]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_tweets(fh, source=str(path))


def serialize_tweets(tweets: Iterable[Tweet]) -> str:
    return "".join(
        json.dumps({"id": t.id, "timestamp_ms": t.timestamp_ms, "text": t.text}, ensure_ascii=False) + "\n"
        for t in tweets
    )


def parse_profiles(text: str, source: str | None = None) -> list[InterestProfile]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON ({exc.msg})", exc.lineno, source) from None
    if not isinstance(data, list):
        raise CorpusError("profiles file must hold a JSON array", None, source)
    profiles = []
    seen = set()
    for i, obj in enumerate(data):
        if not isinstance(obj, dict) or not obj.get("topid"):
            raise CorpusError(f"profile #{i} lacks a topid", None, source)
        topid = str(obj["topid"])
        if topid in seen:
            raise CorpusError(f"duplicate topid {topid}", None, source)
        seen.add(topid)
        fields = {}
        for name in PROFILE_FIELDS:
            value = obj.get(name) or ""
            if not isinstance(value, str):
                raise CorpusError(f"profile {topid}: field {name!r} must be a string", None, source)
            fields[name] = value
        profiles.append(InterestProfile(topid, **fields))
    return profiles


def load_profiles(path) -> list[InterestProfile]:
    path = Path(path)
    return parse_profiles(path.read_text(encoding="utf-8"), source=str(path))


def profile_query(profile: InterestProfile, fields: Sequence[str] = ("narrative",)) -> TermVector:
    """Query vector from the chosen profile fields, joined in canonical order."""
    fields = set(fields)
    if not fields:
        raise ValueError("at least one profile field is required")
    unknown = fields - set(PROFILE_FIELDS)
    if unknown:
        raise ValueError(f"unknown profile field(s): {', '.join(sorted(unknown))}")
    text = " ".join(getattr(profile, name) for name in PROFILE_FIELDS if name in fields)
    vec = text_vector(text)
    if not vec:
        raise EmptyQueryError(f"profile {profile.topid}: query from {sorted(fields)} has no terms")
    return vec
