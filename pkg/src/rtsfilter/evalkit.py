"""Ground truth handling and effectiveness metrics for push runs.

Relevance labels follow the TREC RTS convention: 0 irrelevant, 1 relevant,
2 redundant (relevant, but repeating an earlier tweet of its cluster).

Metrics can be taken at two granularities:

* ``"tweet"``: every tweet labelled 1 or 2 is a relevant item.
* ``"cluster"``: the items are information units (a ground-truth cluster,
  or a relevant tweet outside every cluster); a push counts only when it is
  the first one from its unit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import InterestProfile, Tweet, profile_query, text_vector
from .novelty import ClusterState, novelty_check
from .pipeline import RunConfig, RunRecord, order_stream
from .refmodel import ReferenceModel
from .scoring import QueryScorer

__all__ = [
    "EvalConfig",
    "GroundTruth",
    "GroundTruthError",
    "SweepRow",
    "average_precision",
    "cg_at_k",
    "dcg_at_k",
    "evaluate",
    "format_report",
    "format_sweep_csv",
    "gains_for_run",
    "load_ground_truth",
    "mean_ap",
    "parse_clusters",
    "parse_ground_truth",
    "parse_qrels",
    "precision_recall",
    "relabel_ground_truth",
    "sweep",
    "unit_precision_recall",
]

LABELS = (0, 1, 2)
GAIN_MODES = ("cluster-first", "label-based")
GRANULARITIES = ("cluster", "tweet")


class GroundTruthError(ValueError):
    pass


@dataclass
class GroundTruth:
    labels: dict[tuple[str, str], int] = field(default_factory=dict)
    clusters: dict[str, list[list[str]]] = field(default_factory=dict)

    def topics(self) -> list[str]:
        found = {topid for topid, _ in self.labels} | set(self.clusters)
        return sorted(found)

    def label(self, topid: str, tweet_id: str) -> int:
        return self.labels.get((topid, tweet_id), 0)

    def relevant_ids(self, topid: str) -> set[str]:
        return {tid for (t, tid), lab in self.labels.items() if t == topid and lab in (1, 2)}

    def units(self, topid: str) -> dict[str, int]:
        """Map each relevant tweet id to its information unit index."""
        unit_of: dict[str, int] = {}
        for i, cluster in enumerate(self.clusters.get(topid, [])):
            for tid in cluster:
                unit_of[tid] = i
        n = len(self.clusters.get(topid, []))
        for tid in sorted(self.relevant_ids(topid) - unit_of.keys(), key=_id_key):
            unit_of[tid] = n
            n += 1
        return unit_of

    def n_relevant(self, topid: str, granularity: str = "tweet") -> int:
        _check_granularity(granularity)
        if granularity == "tweet":
            return len(self.relevant_ids(topid))
        return len(set(self.units(topid).values()))

    def validate(self) -> None:
        for topid, clusters in self.clusters.items():
            for cluster in clusters:
                for tid in cluster:
                    lab = self.labels.get((topid, tid))
                    if lab is None:
                        raise GroundTruthError(f"{topid}: cluster member {tid} has no qrels label")
                    if lab == 0:
                        raise GroundTruthError(f"{topid}: cluster member {tid} is labelled irrelevant")


def _id_key(tweet_id: str):
    return (len(tweet_id), tweet_id)


def _check_granularity(granularity: str) -> None:
    if granularity not in GRANULARITIES:
        raise ValueError(f"unknown granularity {granularity!r}; expected one of {GRANULARITIES}")


def parse_qrels(lines: Iterable[str], source: str | None = None) -> dict[tuple[str, str], int]:
    labels: dict[tuple[str, str], int] = {}
    where = f"{source}:" if source else "line "
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) == 3:
            topid, tid, raw = parts
        elif len(parts) == 4:
            topid, _, tid, raw = parts
        else:
            raise GroundTruthError(f"{where}{lineno}: expected 3 or 4 columns, got {len(parts)}")
        try:
            label = int(raw)
        except ValueError:
            label = None
        if label not in LABELS:
            raise GroundTruthError(f"{where}{lineno}: invalid label {raw!r} (expected 0, 1 or 2)")
        labels[(topid, tid)] = label
    return labels


def parse_clusters(text: str, source: str | None = None) -> dict[str, list[list[str]]]:
    """Read ``{topid: [[tweet_id, ...], ...]}``.

    The TREC 2016 batch-clusters layout
    ``{"topics": {topid: {"clusters": [...]}}}`` is accepted as well.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroundTruthError(f"{source or 'clusters'}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if isinstance(data, dict) and isinstance(data.get("topics"), dict):
        data = {t: v.get("clusters", []) if isinstance(v, dict) else v for t, v in data["topics"].items()}
    if not isinstance(data, dict):
        raise GroundTruthError(f"{source or 'clusters'}: expected an object keyed by topid")
    clusters = {}
    for topid, groups in data.items():
        if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
            raise GroundTruthError(f"{source or 'clusters'}: {topid} must map to an array of arrays")
        clusters[str(topid)] = [[str(tid) for tid in g] for g in groups]
    return clusters


def parse_ground_truth(qrels_lines: Iterable[str], clusters_text: str | None = None,
                       source: str | None = None) -> GroundTruth:
    gt = GroundTruth(parse_qrels(qrels_lines, source), parse_clusters(clusters_text) if clusters_text else {})
    gt.validate()
    return gt


def load_ground_truth(qrels_path, clusters_path=None) -> GroundTruth:
    with open(qrels_path, encoding="utf-8") as fh:
        labels = parse_qrels(fh, source=str(qrels_path))
    clusters = {}
    if clusters_path is not None:
        clusters = parse_clusters(Path(clusters_path).read_text(encoding="utf-8"), source=str(clusters_path))
    gt = GroundTruth(labels, clusters)
    gt.validate()
    return gt


def relabel_ground_truth(gt: GroundTruth, available_ids: Iterable[str], order: Mapping[str, int]) -> GroundTruth:
    """Restrict judgments to the tweets actually present in the stream.

    In every surviving cluster the earliest available member becomes the
    relevant (1) tweet and the rest redundant (2).
    """
    available = set(available_ids)
    labels = {key: lab for key, lab in gt.labels.items() if key[1] in available}
    clusters: dict[str, list[list[str]]] = {}
    for topid, groups in gt.clusters.items():
        kept_groups = []
        for group in groups:
            kept = [tid for tid in group if tid in available]
            if not kept:
                continue
            first = min(kept, key=lambda tid: (order[tid], len(tid), tid))
            for tid in kept:
                labels[(topid, tid)] = 1 if tid == first else 2
            kept_groups.append(kept)
        clusters[topid] = kept_groups
    return GroundTruth(labels, clusters)


def _ranked_ids(run: RunRecord | Sequence[str] | None, rank_by: str = "push") -> list[str]:
    if run is None:
        return []
    if isinstance(run, RunRecord):
        entries = list(run.entries)
        if rank_by == "score":
            entries.sort(key=lambda e: (-e.score, e.rank))
        elif rank_by != "push":
            raise ValueError(f"unknown rank order {rank_by!r}")
        return [e.tweet_id for e in entries]
    return list(run)


def _unit_hits(ids: Sequence[str], gt: GroundTruth, topid: str) -> list[int]:
    """1 where a push is the first from its information unit, else 0."""
    unit_of = gt.units(topid)
    seen: set[int] = set()
    hits = []
    for tid in ids:
        unit = unit_of.get(tid)
        if unit is None or unit in seen:
            hits.append(0)
        else:
            seen.add(unit)
            hits.append(1)
    return hits


def _relevance(ids: Sequence[str], gt: GroundTruth, topid: str, granularity: str) -> list[int]:
    _check_granularity(granularity)
    if granularity == "cluster":
        return _unit_hits(ids, gt, topid)
    return [1 if gt.label(topid, tid) in (1, 2) else 0 for tid in ids]


def precision_recall(run, gt: GroundTruth, topid: str, granularity: str = "tweet"
                     ) -> tuple[float | None, float | None]:
    """(precision, recall); ``None`` marks a zero denominator."""
    ids = _ranked_ids(run)
    rel = _relevance(ids, gt, topid, granularity)
    hits = sum(rel)
    total = gt.n_relevant(topid, granularity)
    precision = hits / len(ids) if ids else None
    recall = hits / total if total else None
    return precision, recall


def unit_precision_recall(run, gt: GroundTruth, topid: str) -> tuple[float | None, float | None]:
    return precision_recall(run, gt, topid, granularity="cluster")


def average_precision(run, gt: GroundTruth, topid: str, granularity: str = "tweet",
                      rank_by: str = "push") -> float:
    ids = _ranked_ids(run, rank_by)
    total = gt.n_relevant(topid, granularity)
    if total == 0:
        return 0.0
    found = 0
    acc = 0.0
    for i, r in enumerate(_relevance(ids, gt, topid, granularity), start=1):
        if r:
            found += 1
            acc += found / i
    return acc / total


def mean_ap(runs: Mapping[str, RunRecord], gt: GroundTruth, topics: Iterable[str] | None = None,
            granularity: str = "tweet", rank_by: str = "push") -> float | None:
    """Mean AP over topics with at least one relevant item; ``None`` if there are none."""
    topics = gt.topics() if topics is None else list(topics)
    aps = [
        average_precision(runs.get(t), gt, t, granularity, rank_by)
        for t in topics if gt.n_relevant(t, granularity) > 0
    ]
    return sum(aps) / len(aps) if aps else None


def gains_for_run(run, gt: GroundTruth, topid: str, gain_mode: str = "cluster-first",
                  rank_by: str = "push") -> list[int]:
    ids = _ranked_ids(run, rank_by)
    if gain_mode == "cluster-first":
        return _unit_hits(ids, gt, topid)
    if gain_mode == "label-based":
        return [1 if gt.label(topid, tid) == 1 else 0 for tid in ids]
    raise ValueError(f"unknown gain mode {gain_mode!r}; expected one of {GAIN_MODES}")


def cg_at_k(gains: Sequence[float], k: int = 30) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(sum(gains[:k]))


def dcg_at_k(gains: Sequence[float], k: int = 30, base: int = 2) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if base < 2:
        raise ValueError("discount base must be >= 2")
    log = math.log2 if base == 2 else (lambda x: math.log(x, base))
    return sum(g / log(i + 1) for i, g in enumerate(gains[:k], start=1) if g)


@dataclass(frozen=True)
class EvalConfig:
    k: int = 30
    discount_base: int = 2
    gain_mode: str = "cluster-first"
    granularity: str = "cluster"
    rank_by: str = "push"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.discount_base < 2:
            raise ValueError("discount_base must be >= 2")
        if self.gain_mode not in GAIN_MODES:
            raise ValueError(f"unknown gain mode {self.gain_mode!r}")
        _check_granularity(self.granularity)
        if self.rank_by not in ("push", "score"):
            raise ValueError(f"unknown rank order {self.rank_by!r}")


def evaluate(runs: Mapping[str, RunRecord], gt: GroundTruth, config: EvalConfig = EvalConfig(),
             topics: Iterable[str] | None = None) -> dict:
    """Per-topic AP, CG@k, DCG@k, precision, recall, and their means.

    mAP averages only topics with relevant items; CG and DCG average over
    every evaluated topic.
    """
    if topics is None:
        topics = sorted(set(gt.topics()) | set(runs))
    topics = list(topics)
    per_topic = {}
    for topid in topics:
        run = runs.get(topid)
        gains = gains_for_run(run, gt, topid, config.gain_mode, config.rank_by)
        precision, recall = precision_recall(run, gt, topid, config.granularity)
        has_rel = gt.n_relevant(topid, config.granularity) > 0
        per_topic[topid] = {
            "ap": average_precision(run, gt, topid, config.granularity, config.rank_by) if has_rel else None,
            f"cg{config.k}": cg_at_k(gains, config.k),
            f"dcg{config.k}": dcg_at_k(gains, config.k, config.discount_base),
            "precision": precision,
            "recall": recall,
        }
    aps = [v["ap"] for v in per_topic.values() if v["ap"] is not None]
    n = len(per_topic)
    mean = {
        "map": sum(aps) / len(aps) if aps else None,
        f"cg{config.k}": sum(v[f"cg{config.k}"] for v in per_topic.values()) / n if n else None,
        f"dcg{config.k}": sum(v[f"dcg{config.k}"] for v in per_topic.values()) / n if n else None,
    }
    return {"per_topic": per_topic, "mean": mean}


def _fixed(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_fixed(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return f"{obj:.6f}"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fixed(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def format_report(report: dict, params: dict | None = None) -> str:
    """JSON text with every real number written to 6 decimals."""
    body = dict(report)
    if params:
        body["params"] = params
    return _fixed(body) + "\n"


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    pushed: int
    relevant_pushed: int
    precision: float | None
    recall: float | None


def _scored_stream(profiles, stream, model, config):
    scorers = {p.topid: QueryScorer(profile_query(p, config.query_fields), model, config.mu) for p in profiles}
    docs = [text_vector(t.text) for t in stream]
    scores = {topid: [scorer(d) for d in docs] for topid, scorer in scorers.items()}
    return docs, scores


def _threshold_runs(profiles, stream, docs, scores, config: RunConfig) -> dict[str, RunRecord]:
    runs = {}
    for p in profiles:
        record = RunRecord(p.topid)
        clusters = ClusterState()
        for tweet, doc, score in zip(stream, docs, scores[p.topid]):
            if score < config.threshold:
                continue
            if config.novelty_enabled and not novelty_check(clusters, doc, config.theta, tweet.id).novel:
                continue
            record.append(tweet.id, score, tweet.timestamp_ms)
        runs[p.topid] = record
    return runs


def sweep(profiles: Sequence[InterestProfile], tweets: Iterable[Tweet], model: ReferenceModel,
          config: RunConfig, thresholds: Sequence[float], gt: GroundTruth,
          granularity: str = "tweet", return_runs: bool = False):
    """Evaluate one full run per relevance threshold, pooled over profiles.

    Scores do not depend on the threshold, so each tweet is scored once and
    every threshold replays only the gates. Rows come back in threshold
    order; with ``return_runs`` the per-threshold runs are returned too.
    """
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("threshold list is empty")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    _check_granularity(granularity)
    stream = order_stream(tweets)
    docs, scores = _scored_stream(profiles, stream, model, config)
    total_relevant = sum(gt.n_relevant(p.topid, granularity) for p in profiles)

    rows, all_runs = [], []
    for t in thresholds:
        cfg = RunConfig(config.mu, t, config.theta, config.novelty_enabled, config.query_fields)
        runs = _threshold_runs(profiles, stream, docs, scores, cfg)
        pushed = sum(len(r) for r in runs.values())
        hits = sum(sum(_relevance(r.tweet_ids, gt, topid, granularity)) for topid, r in runs.items())
        rows.append(SweepRow(
            threshold=t,
            pushed=pushed,
            relevant_pushed=hits,
            precision=hits / pushed if pushed else None,
            recall=hits / total_relevant if total_relevant else None,
        ))
        all_runs.append(runs)
    return (rows, all_runs) if return_runs else rows


def _num(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x:.6f}" if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def format_sweep_csv(rows: Iterable[SweepRow]) -> str:
    out = ["threshold,pushed,relevant_pushed,precision,recall\n"]
    for r in rows:
        out.append(f"{_num(r.threshold)},{r.pushed},{r.relevant_pushed},{_num(r.precision)},{_num(r.recall)}\n")
    return "".join(out)

