"""Time-ordered replay of a tweet stream against interest profiles."""

from __future__ import annotations

import enum
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import InterestProfile, TermVector, Tweet, profile_query, stream_key, text_vector
from .novelty import ClusterState, novelty_check
from .refmodel import ReferenceModel
from .scoring import DEFAULT_MU, QueryScorer

__all__ = [
    "Decision",
    "ProfileState",
    "RunConfig",
    "RunEntry",
    "RunRecord",
    "StreamStats",
    "load_checkpoint",
    "order_stream",
    "parse_run",
    "process_tweet",
    "read_run",
    "run_stream",
    "save_checkpoint",
    "write_run",
    "format_run",
]

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 4.5
DEFAULT_THETA = 0.7


class Decision(enum.IntEnum):
    """Outcome for one tweet; the values line up with qrels labels."""

    DROPPED_IRRELEVANT = 0
    PUSHED = 1
    DROPPED_REDUNDANT = 2


@dataclass(frozen=True)
class RunConfig:
    mu: float = DEFAULT_MU
    threshold: float = DEFAULT_THRESHOLD
    theta: float = DEFAULT_THETA
    novelty_enabled: bool = True
    query_fields: tuple[str, ...] = ("narrative",)

    def __post_init__(self):
        if not self.mu > 0 or math.isinf(self.mu):
            raise ValueError(f"mu must be a finite positive number, got {self.mu}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if math.isnan(self.threshold):
            raise ValueError("threshold must not be NaN")
        if not self.query_fields:
            raise ValueError("query_fields must not be empty")
        object.__setattr__(self, "query_fields", tuple(self.query_fields))

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "threshold": self.threshold,
            "theta": self.theta,
            "novelty_enabled": self.novelty_enabled,
            "query_fields": list(self.query_fields),
        }


@dataclass(frozen=True)
class RunEntry:
    rank: int
    tweet_id: str
    score: float
    timestamp_ms: int


@dataclass
class RunRecord:
    topid: str
    entries: list[RunEntry] = field(default_factory=list)

    def append(self, tweet_id: str, score: float, timestamp_ms: int) -> RunEntry:
        entry = RunEntry(len(self.entries) + 1, tweet_id, score, timestamp_ms)
        self.entries.append(entry)
        return entry

    @property
    def tweet_ids(self) -> list[str]:
        return [e.tweet_id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


class ProfileState:
    """Query, redundancy clusters and pushes for one profile."""

    def __init__(self, profile: InterestProfile, model: ReferenceModel, config: RunConfig,
                 query: TermVector | None = None):
        self.profile = profile
        self.query = query if query is not None else profile_query(profile, config.query_fields)
        self.scorer = QueryScorer(self.query, model, config.mu)
        self.clusters = ClusterState()
        self.pushed = RunRecord(profile.topid)

    @property
    def topid(self) -> str:
        return self.profile.topid


def process_tweet(state: ProfileState, tweet: Tweet, model: ReferenceModel | None, config: RunConfig,
                  doc: TermVector | None = None) -> Decision:
    """Relevance gate, then (optionally) the novelty gate, for one tweet.

    ``model`` is accepted for symmetry with the scoring functions; the
    state's scorer already carries the reference probabilities it needs.
    ``doc`` may hold a precomputed term vector of ``tweet.text``.
    """
    if doc is None:
        doc = text_vector(tweet.text)
    score = state.scorer(doc)
    if score < config.threshold:
        return Decision.DROPPED_IRRELEVANT
    if config.novelty_enabled:
        if not novelty_check(state.clusters, doc, config.theta, tweet.id).novel:
            return Decision.DROPPED_REDUNDANT
    else:
        state.clusters.add(tweet.id, doc)
    state.pushed.append(tweet.id, score, tweet.timestamp_ms)
    return Decision.PUSHED


def order_stream(tweets: Iterable[Tweet]) -> list[Tweet]:
    tweets = list(tweets)
    seen = set()
    for t in tweets:
        if t.id in seen:
            raise ValueError(f"duplicate tweet id {t.id} in stream")
        seen.add(t.id)
    return sorted(tweets, key=stream_key)


@dataclass
class StreamStats:
    tweets: int = 0
    pushes: int = 0
    elapsed: float = 0.0

    @property
    def rate(self) -> float:
        return self.tweets / self.elapsed if self.elapsed > 0 else float("inf")

    def summary(self) -> str:
        return (f"processed {self.tweets} tweets, {self.pushes} pushes, "
                f"{self.elapsed:.2f}s elapsed, {self.rate:.0f} tweets/sec")


def _replay(states: list[ProfileState], stream: Sequence[Tweet], config: RunConfig, start: int = 0,
            checkpoint_path=None, checkpoint_every: int = 0) -> None:
    for pos in range(start, len(stream)):
        tweet = stream[pos]
        doc = text_vector(tweet.text)
        for state in states:
            process_tweet(state, tweet, None, config, doc)
        done = pos + 1
        if checkpoint_path and checkpoint_every and done % checkpoint_every == 0 and done < len(stream):
            save_checkpoint(checkpoint_path, states, done, config)


def _replay_worker(args):
    profiles, stream, model, config = args
    states = [ProfileState(p, model, config) for p in profiles]
    _replay(states, stream, config)
    return [s.pushed for s in states]


def run_stream(profiles: Sequence[InterestProfile], tweets: Iterable[Tweet], model: ReferenceModel,
               config: RunConfig = RunConfig(), *, jobs: int = 1, checkpoint_path=None,
               checkpoint_every: int = 0, resume: bool = False,
               stats: StreamStats | None = None) -> dict[str, RunRecord]:
    """Replay ``tweets`` in time order against every profile independently.

    With ``jobs > 1`` profiles are split across worker processes; output is
    identical to a serial run. Checkpoints (serial runs only) snapshot all
    profile states every ``checkpoint_every`` tweets; ``resume=True``
    continues from an existing checkpoint file.
    """
    t0 = time.perf_counter()
    stream = order_stream(tweets)
    states = [ProfileState(p, model, config) for p in profiles]
    start = 0
    if resume and checkpoint_path and os.path.exists(checkpoint_path):
        start = load_checkpoint(checkpoint_path, states, config)
        log.info("resuming from checkpoint at tweet %d", start)

    jobs = max(1, min(jobs, len(states)))
    if jobs > 1 and not checkpoint_path:
        chunks = [list(profiles[i::jobs]) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_replay_worker, [(c, stream, model, config) for c in chunks])
            records = {r.topid: r for chunk in results for r in chunk}
        for state in states:
            state.pushed = records[state.topid]
    else:
        _replay(states, stream, config, start, checkpoint_path, checkpoint_every)

    runs = {s.topid: s.pushed for s in states}
    if stats is not None:
        stats.tweets += len(stream) - start
        stats.pushes += sum(len(r) for r in runs.values())
        stats.elapsed += time.perf_counter() - t0
    return runs


def save_checkpoint(path, states: Sequence[ProfileState], position: int, config: RunConfig) -> None:
    data = {
        "position": position,
        "config": config.to_dict(),
        "profiles": {
            s.topid: {
                "run": [[e.rank, e.tweet_id, e.score, e.timestamp_ms] for e in s.pushed],
                "representatives": s.clusters.to_json(),
            }
            for s in states
        },
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(data, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def load_checkpoint(path, states: Sequence[ProfileState], config: RunConfig) -> int:
    """Restore pushes and representatives into ``states``; return the stream position."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("config") != config.to_dict():
        raise ValueError(f"{path}: checkpoint was written with a different configuration")
    saved = data["profiles"]
    for state in states:
        if state.topid not in saved:
            raise ValueError(f"{path}: no checkpoint state for profile {state.topid}")
        entry = saved[state.topid]
        record = RunRecord(state.topid)
        for rank, tweet_id, score, ts in entry["run"]:
            record.entries.append(RunEntry(rank, tweet_id, score, ts))
        state.pushed = record
        state.clusters = ClusterState.from_json(entry["representatives"])
    return int(data["position"])


def format_run(runs: dict[str, RunRecord], header: dict | None = None) -> str:
    lines = []
    for key, value in (header or {}).items():
        lines.append(f"# {key}={value}\n")
    for topid in sorted(runs):
        for e in runs[topid]:
            lines.append(f"{topid}\t{e.tweet_id}\t{e.score:.6f}\t{e.rank}\t{e.timestamp_ms}\n")
    return "".join(lines)


def write_run(path, runs: dict[str, RunRecord], header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_run(runs, header))


def parse_run(lines: Iterable[str], source: str | None = None) -> dict[str, RunRecord]:
    runs: dict[str, RunRecord] = {}
    where = f"{source}:" if source else "line "
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"{where}{lineno}: expected 5 tab-separated fields, got {len(parts)}")
        topid, tweet_id, score, rank, ts = parts
        try:
            entry = RunEntry(int(rank), tweet_id, float(score), int(ts))
        except ValueError:
            raise ValueError(f"{where}{lineno}: malformed numeric field") from None
        record = runs.setdefault(topid, RunRecord(topid))
        if entry.rank != len(record) + 1:
            raise ValueError(f"{where}{lineno}: rank {entry.rank} out of sequence for {topid}")
        record.entries.append(entry)
    return runs


def read_run(path) -> dict[str, RunRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_run(fh, source=str(path))
