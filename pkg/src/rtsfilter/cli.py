"""Command-line entry point: ``rtsfilter <subcommand> ...``.

Exit status is 0 on success, 1 for runtime or data errors and 2 for usage
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time

from . import evalkit, pipeline, refmodel, synth
from .corpus import PROFILE_FIELDS, CorpusError, load_profiles, load_tweets
from .scoring import DEFAULT_MU

log = logging.getLogger("rtsfilter")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _fields(text: str) -> tuple[str, ...]:
    fields = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fields if f not in PROFILE_FIELDS]
    if not fields or bad:
        raise argparse.ArgumentTypeError(
            f"fields must be a comma list drawn from {','.join(PROFILE_FIELDS)}, got {text!r}")
    return fields


def parse_thresholds(text: str) -> list[float]:
    """``A:B:STEP`` (A included, B excluded) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must look like A:B:STEP, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"non-numeric threshold range {text!r}") from None
        if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)) or step <= 0:
            raise argparse.ArgumentTypeError(f"range needs finite bounds and a positive step, got {text!r}")
        values = []
        i = 0
        while True:
            # index-based so rounding error cannot accumulate across steps
            value = round(start + i * step, 10)
            if value >= stop:
                break
            values.append(value)
            i += 1
        if not values:
            raise argparse.ArgumentTypeError(f"range {text!r} is empty")
        return values
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric threshold in {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("no thresholds given")
    return values


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="reference model directory")
    p.add_argument("--profiles", required=True, help="interest profiles JSON array")
    p.add_argument("--tweets", required=True, help="line-delimited tweets")
    p.add_argument("--mu", type=float, default=DEFAULT_MU,
                   help="Dirichlet prior (default: %(default)s; 1e-9 gives the lightly smoothed baseline)")
    p.add_argument("--theta", type=float, default=pipeline.DEFAULT_THETA,
                   help="redundancy threshold on cosine (default: %(default)s)")
    p.add_argument("--no-novelty", dest="novelty", action="store_false",
                   help="push every relevant tweet, skipping redundancy removal")
    p.add_argument("--fields", type=_fields, default=("narrative",),
                   help="profile fields forming the query (default: narrative)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtsfilter", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("build-refmodel", help="estimate the background model from a tweets file",
                       allow_abbrev=False)
    p.add_argument("--tweets", required=True)
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--min-count", type=_pos_int, default=1, help="drop rarer terms (default: %(default)s)")

    p = sub.add_parser("run", help="replay a stream and write pushed tweets", allow_abbrev=False)
    _add_run_options(p)
    p.add_argument("--t", dest="threshold", type=float, default=pipeline.DEFAULT_THRESHOLD,
                   help="relevance threshold in nats (default: %(default)s)")
    p.add_argument("--out", required=True, help="run file (TSV)")
    p.add_argument("--jobs", type=_pos_int, default=1, help="worker processes across profiles")
    p.add_argument("--checkpoint", help="checkpoint file for long replays")
    p.add_argument("--checkpoint-every", type=_nonneg_int, default=0, help="tweets between checkpoints")
    p.add_argument("--resume", action="store_true", help="continue from --checkpoint if it exists")

    p = sub.add_parser("sweep", help="precision/recall over a range of relevance thresholds",
                       allow_abbrev=False)
    _add_run_options(p)
    p.add_argument("--qrels", required=True)
    p.add_argument("--clusters")
    p.add_argument("--thresholds", type=parse_thresholds, required=True, help="A:B:STEP or t1,t2,...")
    p.add_argument("--granularity", choices=evalkit.GRANULARITIES, default="tweet")
    p.add_argument("--out", required=True, help="CSV output")

    p = sub.add_parser("eval", help="score a run file against ground truth", allow_abbrev=False)
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--clusters")
    p.add_argument("--gain-mode", choices=evalkit.GAIN_MODES, default="cluster-first")
    p.add_argument("--granularity", choices=evalkit.GRANULARITIES, default="cluster")
    p.add_argument("--rank-by", choices=("push", "score"), default="push")
    p.add_argument("--k", type=_pos_int, default=30)
    p.add_argument("--discount-base", type=int, default=2)
    p.add_argument("--out", required=True, help="JSON report")

    p = sub.add_parser("relabel", help="restrict ground truth to the available tweets", allow_abbrev=False)
    p.add_argument("--qrels", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--tweets", required=True)
    p.add_argument("--out-qrels", required=True)
    p.add_argument("--out-clusters", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset", allow_abbrev=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--profiles", type=_nonneg_int, default=5)
    p.add_argument("--clusters", type=_nonneg_int, default=4, help="clusters per profile")
    p.add_argument("--per-cluster", type=_nonneg_int, default=3, help="tweets per cluster")
    p.add_argument("--noise", type=_nonneg_int, default=200, help="irrelevant background tweets")
    p.add_argument("--out-dir", required=True)
    return parser


def _run_config(args, threshold: float) -> pipeline.RunConfig:
    return pipeline.RunConfig(mu=args.mu, threshold=threshold, theta=args.theta,
                              novelty_enabled=args.novelty, query_fields=args.fields)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_build_refmodel(args) -> str:
    model = refmodel.build_reference_model(load_tweets(args.tweets), min_count=args.min_count)
    refmodel.persist(model, args.out)
    return f"reference model: {model.vocab_size} terms, {model.total_tokens} tokens"


def cmd_run(args) -> str:
    config = _run_config(args, args.threshold)
    model = refmodel.restore(args.model)
    profiles = load_profiles(args.profiles)
    tweets = load_tweets(args.tweets)
    stats = pipeline.StreamStats()
    runs = pipeline.run_stream(profiles, tweets, model, config, jobs=args.jobs,
                               checkpoint_path=args.checkpoint, checkpoint_every=args.checkpoint_every,
                               resume=args.resume, stats=stats)
    header = {"mu": args.mu, "t": args.threshold, "theta": args.theta,
              "novelty": int(args.novelty), "fields": ",".join(args.fields)}
    pipeline.write_run(args.out, runs, header)
    return stats.summary()


def cmd_sweep(args) -> str:
    thresholds = args.thresholds
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise UsageError("--thresholds must be strictly increasing")
    config = _run_config(args, thresholds[0])
    model = refmodel.restore(args.model)
    profiles = load_profiles(args.profiles)
    tweets = load_tweets(args.tweets)
    gt = evalkit.load_ground_truth(args.qrels, args.clusters)
    t0 = time.perf_counter()
    rows = evalkit.sweep(profiles, tweets, model, config, thresholds, gt, granularity=args.granularity)
    _write_text(args.out, evalkit.format_sweep_csv(rows))
    stats = pipeline.StreamStats(len(tweets), sum(r.pushed for r in rows), time.perf_counter() - t0)
    return f"{len(rows)} thresholds; " + stats.summary()


def cmd_eval(args) -> str:
    config = evalkit.EvalConfig(k=args.k, discount_base=args.discount_base, gain_mode=args.gain_mode,
                                granularity=args.granularity, rank_by=args.rank_by)
    runs = pipeline.read_run(args.run)
    gt = evalkit.load_ground_truth(args.qrels, args.clusters)
    report = evalkit.evaluate(runs, gt, config)
    params = {"k": args.k, "discount_base": args.discount_base, "gain_mode": args.gain_mode,
              "granularity": args.granularity, "rank_by": args.rank_by}
    _write_text(args.out, evalkit.format_report(report, params))
    m = report["mean"]
    shown = "n/a" if m["map"] is None else f"{m['map']:.6f}"
    return f"evaluated {len(report['per_topic'])} topics, map={shown}"


def cmd_relabel(args) -> str:
    gt = evalkit.load_ground_truth(args.qrels, args.clusters)
    tweets = load_tweets(args.tweets)
    timestamps = {t.id: t.timestamp_ms for t in tweets}
    new = evalkit.relabel_ground_truth(gt, timestamps.keys(), timestamps)
    key = lambda item: (item[0][0], len(item[0][1]), item[0][1])  # noqa: E731
    _write_text(args.out_qrels, "".join(
        f"{topid} Q0 {tid} {label}\n" for (topid, tid), label in sorted(new.labels.items(), key=key)))
    _write_text(args.out_clusters, json.dumps(new.clusters, indent=1, sort_keys=True) + "\n")
    return f"kept {len(new.labels)} of {len(gt.labels)} judgments"


def cmd_synth(args) -> str:
    data = synth.generate_synthetic(args.profiles, args.clusters, args.per_cluster, args.noise, args.seed)
    synth.write_synthetic(data, args.out_dir)
    return f"wrote {len(data.tweets)} tweets for {len(data.profiles)} profiles to {args.out_dir}"


COMMANDS = {
    "build-refmodel": cmd_build_refmodel,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "eval": cmd_eval,
    "relabel": cmd_relabel,
    "synth": cmd_synth,
}


_NUMERIC_FLAGS = {"--thresholds", "--t", "--mu", "--theta"}


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-1:3:0.5" or "-inf" as an option; bind such values to their flag
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _NUMERIC_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, refmodel.CorruptModelError, evalkit.GroundTruthError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command}: {summary}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
