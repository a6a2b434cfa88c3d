"""Seeded synthetic stream with planted information clusters.

Every profile owns a private topical vocabulary split across its clusters.
A cluster member carries the cluster's 8 core words plus 2 filler words
from a background vocabulary shared with noise tweets, so members of one
cluster overlap on at least 80% of their tokens. Noise tweets use only the
background vocabulary.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import InterestProfile, Tweet, serialize_tweets

__all__ = ["SyntheticData", "generate_synthetic", "write_synthetic"]

CORE_WORDS = 8
FILLER_WORDS = 2
BACKGROUND_VOCAB = 400
BASE_ID = 770_000_000_000_000_000
BASE_TIME_MS = 1_470_096_000_000  # 2016-08-02T00:00:00Z
SPAN_MS = 10 * 24 * 3600 * 1000

TWEETS_FILE = "tweets.jsonl"
PROFILES_FILE = "profiles.json"
QRELS_FILE = "qrels.txt"
CLUSTERS_FILE = "clusters.json"


@dataclass
class SyntheticData:
    tweets: list[Tweet]
    profiles: list[InterestProfile]
    qrels: list[tuple[str, str, int]]
    clusters: dict[str, list[list[str]]]

    def tweets_text(self) -> str:
        return serialize_tweets(self.tweets)

    def profiles_text(self) -> str:
        data = [
            {"topid": p.topid, "title": p.title, "description": p.description, "narrative": p.narrative}
            for p in self.profiles
        ]
        return json.dumps(data, indent=1) + "\n"

    def qrels_text(self) -> str:
        return "".join(f"{topid} Q0 {tid} {label}\n" for topid, tid, label in self.qrels)

    def clusters_text(self) -> str:
        return json.dumps(self.clusters, indent=1, sort_keys=True) + "\n"


def _word(prefix: str, n: int) -> str:
    # letters only, so each synthetic word is exactly one token
    letters = []
    for _ in range(4):
        n, r = divmod(n, 26)
        letters.append(chr(ord("a") + r))
    return prefix + "".join(reversed(letters))


def generate_synthetic(n_profiles: int, n_clusters_per_profile: int, tweets_per_cluster: int,
                       n_noise_tweets: int, seed: int) -> SyntheticData:
    counts = (n_profiles, n_clusters_per_profile, tweets_per_cluster, n_noise_tweets)
    if any(c < 0 for c in counts):
        raise ValueError("all counts must be >= 0")
    n_total = n_profiles * n_clusters_per_profile * tweets_per_cluster + n_noise_tweets
    if n_total == 0:
        raise ValueError("parameters produce zero tweets")

    rng = random.Random(seed)
    background = [_word("bg", i) for i in range(BACKGROUND_VOCAB)]
    profiles = []
    # (text, topid or None, cluster index, member index)
    raw: list[tuple[str, str | None, int, int]] = []

    for p in range(n_profiles):
        topid = f"SYN{p + 1:03d}"
        core_by_cluster = [
            [_word(f"p{p}c{c}", k) for k in range(CORE_WORDS)] for c in range(n_clusters_per_profile)
        ]
        narrative = " ".join(w for words in core_by_cluster for w in words[:CORE_WORDS // 2])
        profiles.append(InterestProfile(
            topid=topid,
            title=f"synthetic topic {p + 1}",
            description=f"planted topic {p + 1} with {n_clusters_per_profile} clusters",
            narrative=narrative or f"topic{p + 1}",
        ))
        for c, words in enumerate(core_by_cluster):
            for m in range(tweets_per_cluster):
                tokens = words + rng.sample(background, FILLER_WORDS)
                rng.shuffle(tokens)
                raw.append((" ".join(tokens), topid, c, m))

    for _ in range(n_noise_tweets):
        tokens = rng.sample(background, CORE_WORDS + FILLER_WORDS)
        raw.append((" ".join(tokens), None, -1, -1))

    # distinct timestamps, and within each cluster members keep their order
    times = sorted(rng.sample(range(SPAN_MS), n_total))
    order = list(range(n_total))
    rng.shuffle(order)
    slot_of = {}
    # member m of a cluster must precede member m+1: sort slots within each cluster
    by_cluster: dict[tuple[str, int], list[int]] = {}
    for pos, idx in enumerate(order):
        slot_of[idx] = pos
        text, topid, c, m = raw[idx]
        if topid is not None:
            by_cluster.setdefault((topid, c), []).append(idx)
    for members in by_cluster.values():
        slots = sorted(slot_of[i] for i in members)
        for i, s in zip(sorted(members, key=lambda i: raw[i][3]), slots):
            slot_of[i] = s

    tweets: list[Tweet | None] = [None] * n_total
    ids = {}
    for idx, slot in slot_of.items():
        tid = str(BASE_ID + slot)
        ids[idx] = tid
        tweets[slot] = Tweet(tid, BASE_TIME_MS + times[slot], raw[idx][0])

    clusters: dict[str, list[list[str]]] = {p.topid: [] for p in profiles}
    qrels: list[tuple[str, str, int]] = []
    for (topid, c), members in sorted(by_cluster.items()):
        members = sorted(members, key=lambda i: raw[i][3])
        clusters[topid].append([ids[i] for i in members])
        for i in members:
            qrels.append((topid, ids[i], 1 if raw[i][3] == 0 else 2))
    # every profile judges the noise as irrelevant
    noise_ids = sorted((ids[i] for i in range(n_total) if raw[i][1] is None), key=lambda t: (len(t), t))
    for p in profiles:
        qrels.extend((p.topid, tid, 0) for tid in noise_ids)

    return SyntheticData([t for t in tweets if t is not None], profiles, qrels, clusters)


def write_synthetic(data: SyntheticData, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "tweets": (TWEETS_FILE, data.tweets_text()),
        "profiles": (PROFILES_FILE, data.profiles_text()),
        "qrels": (QRELS_FILE, data.qrels_text()),
        "clusters": (CLUSTERS_FILE, data.clusters_text()),
    }
    paths = {}
    for key, (name, text) in files.items():
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths[key] = path
    return paths
