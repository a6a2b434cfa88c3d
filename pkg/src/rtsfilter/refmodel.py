"""Background unigram model p(w|C) estimated from a reference day of tweets."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Tweet, tokenize

__all__ = [
    "CorruptModelError",
    "ReferenceModel",
    "build_reference_model",
    "persist",
    "ref_prob",
    "restore",
]

META_FILE = "meta.json"
TERMS_FILE = "terms.tsv"


class CorruptModelError(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class ReferenceModel:
    """Integer term counts; probabilities are derived on lookup."""

    term_counts: dict[str, int] = field(repr=False)
    total_tokens: int
    vocab_size: int

    def __post_init__(self):
        if self.total_tokens <= 0:
            raise ValueError("reference model needs at least one token")
        if self.vocab_size != len(self.term_counts):
            raise ValueError("vocab_size does not match the number of terms")

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "ReferenceModel":
        counts = {w: c for w, c in counts.items() if c > 0}
        return cls(counts, sum(counts.values()), len(counts))

    @property
    def unseen_epsilon(self) -> float:
        return 1.0 / (self.total_tokens + self.vocab_size + 1)

    def prob(self, term: str) -> float:
        c = self.term_counts.get(term)
        if c is None:
            return self.unseen_epsilon
        return c / self.total_tokens

    def __contains__(self, term: str) -> bool:
        return term in self.term_counts


def ref_prob(model: ReferenceModel, term: str) -> float:
    return model.prob(term)


def build_reference_model(tweets: Iterable[Tweet | str], min_count: int = 1) -> ReferenceModel:
    """Count tokens over all tweets.

    Terms seen fewer than ``min_count`` times are dropped and the total is
    taken over the kept terms only.
    """
    counts: Counter[str] = Counter()
    for tweet in tweets:
        text = tweet if isinstance(tweet, str) else tweet.text
        counts.update(tokenize(text))
    if min_count > 1:
        counts = Counter({w: c for w, c in counts.items() if c >= min_count})
    if not counts:
        raise ValueError("reference corpus yields zero tokens")
    return ReferenceModel.from_counts(dict(counts))


def persist(model: ReferenceModel, path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    terms = sorted(model.term_counts, key=lambda w: w.encode("utf-8"))
    with open(path / TERMS_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for w in terms:
            fh.write(f"{w}\t{model.term_counts[w]}\n")
    meta = {"total_tokens": model.total_tokens, "vocab_size": model.vocab_size}
    (path / META_FILE).write_text(json.dumps(meta) + "\n", encoding="utf-8")


def restore(path) -> ReferenceModel:
    path = Path(path)
    try:
        meta = json.loads((path / META_FILE).read_text(encoding="utf-8"))
        n_expected = int(meta["total_tokens"])
        v_expected = int(meta["vocab_size"])
    except FileNotFoundError:
        raise CorruptModelError(f"{path}: missing {META_FILE}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptModelError(f"{path / META_FILE}: unreadable metadata ({exc})") from None

    counts: dict[str, int] = {}
    try:
        with open(path / TERMS_FILE, encoding="utf-8", newline="\n") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.endswith("\n"):
                    raise CorruptModelError(f"{path / TERMS_FILE}:{lineno}: truncated line")
                term, sep, raw = line[:-1].partition("\t")
                if not sep or not term or not raw.isdigit() or int(raw) < 1:
                    raise CorruptModelError(f"{path / TERMS_FILE}:{lineno}: malformed entry")
                if term in counts:
                    raise CorruptModelError(f"{path / TERMS_FILE}:{lineno}: duplicate term {term!r}")
                counts[term] = int(raw)
    except FileNotFoundError:
        raise CorruptModelError(f"{path}: missing {TERMS_FILE}") from None
    except UnicodeDecodeError:
        raise CorruptModelError(f"{path / TERMS_FILE}: not valid UTF-8") from None

    if len(counts) != v_expected or sum(counts.values()) != n_expected:
        raise CorruptModelError(
            f"{path}: terms file holds {len(counts)} terms / {sum(counts.values())} tokens, "
            f"metadata says {v_expected} / {n_expected}"
        )
    try:
        return ReferenceModel(counts, n_expected, v_expected)
    except ValueError as exc:
        raise CorruptModelError(f"{path}: {exc}") from None
