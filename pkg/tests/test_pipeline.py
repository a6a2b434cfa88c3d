import math

import pytest

from oracles import naive_dirichlet_score
from rtsfilter.corpus import InterestProfile, Tweet, profile_query, text_vector
from rtsfilter.pipeline import (
    Decision,
    ProfileState,
    RunConfig,
    format_run,
    parse_run,
    process_tweet,
    read_run,
    run_stream,
    load_checkpoint,
    save_checkpoint,
    write_run,
)
from rtsfilter.refmodel import build_reference_model
from rtsfilter.scoring import cosine

SPACE = InterestProfile("T1", title="space", narrative="rocket launch orbit")
FOOD = InterestProfile("T2", title="food", narrative="pasta recipe sauce")


@pytest.fixture
def stream():
    texts = [
        "rocket launch today from the cape",        # A: relevant to T1
        "weather is nice and sunny",                # noise
        "rocket launch today from the cape!!",      # duplicate of A
        "orbit insertion confirmed after launch",   # C: relevant, different wording
        "pasta recipe with tomato sauce",           # T2
        "the cat sat on the mat",                   # noise
    ]
    return [Tweet(str(100 + i), 1000 * (i + 1), t) for i, t in enumerate(texts)]


@pytest.fixture
def model(stream):
    background = [Tweet(f"9{i}", 0, t) for i, t in enumerate([
        "the a and is on from with after today nice", "sunny weather cat mat sat", "confirmed insertion",
        "tomato cape", "the the the and and a a"])]
    return build_reference_model(background + stream)


def test_gate_below_threshold_leaves_state(model, stream):
    state = ProfileState(SPACE, model, RunConfig(threshold=100.0))
    assert process_tweet(state, stream[0], model, RunConfig(threshold=100.0)) == Decision.DROPPED_IRRELEVANT
    assert len(state.pushed) == 0 and len(state.clusters) == 0


def test_first_relevant_tweet_pushed_at_rank_one(model, stream):
    cfg = RunConfig(threshold=0.0)
    state = ProfileState(SPACE, model, cfg)
    assert process_tweet(state, stream[0], model, cfg) == Decision.PUSHED
    (entry,) = state.pushed.entries
    assert (entry.rank, entry.tweet_id, entry.timestamp_ms) == (1, "100", 1000)


def test_duplicate_text_dropped_as_redundant(model, stream):
    cfg = RunConfig(threshold=0.0, theta=0.9)
    state = ProfileState(SPACE, model, cfg)
    process_tweet(state, stream[0], model, cfg)
    assert process_tweet(state, stream[2], model, cfg) == Decision.DROPPED_REDUNDANT


def test_novelty_disabled_pushes_duplicates(model, stream):
    cfg = RunConfig(threshold=0.0, novelty_enabled=False)
    state = ProfileState(SPACE, model, cfg)
    decisions = [process_tweet(state, stream[i], model, cfg) for i in (0, 2)]
    assert decisions == [Decision.PUSHED, Decision.PUSHED]
    assert [i for i, _ in state.clusters] == state.pushed.tweet_ids


def test_run_stream_hand_scored(model, stream):
    """Exactly A and C clear the gate per the naive scorer, and cos(A, C) < theta."""
    stream = [t for t in stream if t.id != "102"]
    q = profile_query(SPACE)
    scores = {t.id: naive_dirichlet_score(text_vector(t.text).counts, q.counts, model.prob, 2500.0) for t in stream}
    t = 0.0
    assert [tid for tid, s in scores.items() if s >= t] == ["100", "103"]
    assert cosine(text_vector(stream[0].text), text_vector(stream[2].text)) < 0.7

    runs = run_stream([SPACE], list(reversed(stream)), model, RunConfig(threshold=t, theta=0.7))
    record = runs["T1"]
    assert record.tweet_ids == ["100", "103"]
    assert [e.rank for e in record] == [1, 2]
    for e in record:
        assert e.score == pytest.approx(scores[e.tweet_id], rel=1e-12)


def test_empty_stream(model):
    runs = run_stream([SPACE, FOOD], [], model, RunConfig())
    assert {k: len(v) for k, v in runs.items()} == {"T1": 0, "T2": 0}


def test_profile_independence(model, stream):
    cfg = RunConfig(threshold=0.0)
    both = run_stream([SPACE, FOOD], stream, model, cfg)
    for p in (SPACE, FOOD):
        assert both[p.topid].entries == run_stream([p], stream, model, cfg)[p.topid].entries
    assert both["T2"].tweet_ids == ["104"]


def test_duplicate_ids_rejected_before_processing(model, stream):
    with pytest.raises(ValueError, match="duplicate"):
        run_stream([SPACE], stream + [stream[0]], model, RunConfig())


def test_ordering_by_time_then_numeric_id(model):
    tweets = [Tweet("100", 5, "rocket"), Tweet("99", 5, "rocket launch"), Tweet("7", 1, "orbit")]
    runs = run_stream([SPACE], tweets, model, RunConfig(threshold=-math.inf, novelty_enabled=False))
    assert runs["T1"].tweet_ids == ["7", "99", "100"]


def test_run_invariants(planted):
    model = build_reference_model(planted.tweets)
    cfg = RunConfig(threshold=0.0, theta=0.5)
    runs = run_stream(planted.profiles, planted.tweets, model, cfg)
    for record in runs.values():
        assert [e.rank for e in record] == list(range(1, len(record) + 1))
        times = [e.timestamp_ms for e in record]
        assert times == sorted(times)
        assert all(e.score >= cfg.threshold for e in record)


def test_threshold_nesting(planted):
    model = build_reference_model(planted.tweets)
    previous = None
    for t in [-1.0, -0.01, 0.0, 0.5, 1.0, 2.0]:
        runs = run_stream(planted.profiles, planted.tweets, model, RunConfig(threshold=t, novelty_enabled=False))
        pushed = {(k, tid) for k, r in runs.items() for tid in r.tweet_ids}
        if previous is not None:
            assert pushed <= previous
        previous = pushed


def test_parallel_matches_serial(planted):
    model = build_reference_model(planted.tweets)
    cfg = RunConfig(threshold=0.0, theta=0.5)
    serial = run_stream(planted.profiles, planted.tweets, model, cfg)
    parallel = run_stream(planted.profiles, planted.tweets, model, cfg, jobs=2)
    assert format_run(serial) == format_run(parallel)


def test_checkpoint_resume(tmp_path, planted):
    model = build_reference_model(planted.tweets)
    cfg = RunConfig(threshold=0.0, theta=0.5)
    full = run_stream(planted.profiles, planted.tweets, model, cfg)

    ckpt = tmp_path / "ckpt.json"
    run_stream(planted.profiles, planted.tweets[:130], model, cfg, checkpoint_path=ckpt, checkpoint_every=50)
    assert ckpt.exists()
    # last snapshot is at tweet 100; the resumed run replays the rest of the full stream
    resumed = run_stream(planted.profiles, planted.tweets, model, cfg, checkpoint_path=ckpt, resume=True)
    assert format_run(resumed) == format_run(full)


def test_checkpoint_config_mismatch(tmp_path, planted):
    model = build_reference_model(planted.tweets)
    states = [ProfileState(p, model, RunConfig()) for p in planted.profiles]
    save_checkpoint(tmp_path / "c.json", states, 3, RunConfig())
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "c.json", states, RunConfig(theta=0.1))


def test_run_file_format_and_roundtrip(tmp_path, model, stream):
    runs = run_stream([SPACE, FOOD], stream, model, RunConfig(threshold=0.0))
    path = tmp_path / "run.tsv"
    write_run(path, runs, {"mu": 2500.0})
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "# mu=2500.0"
    first = lines[1].split("\t")
    assert first[0] == "T1" and first[3] == "1" and len(first[2].split(".")[1]) == 6
    back = read_run(path)
    assert {k: v.tweet_ids for k, v in back.items()} == {k: v.tweet_ids for k, v in runs.items() if len(v)}


def test_parse_run_rejects_gaps():
    with pytest.raises(ValueError):
        parse_run(["T1\t5\t1.0\t2\t10"])
    with pytest.raises(ValueError):
        parse_run(["T1\t5\t1.0\t1"])


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(mu=0)
    with pytest.raises(ValueError):
        RunConfig(theta=1.01)
    with pytest.raises(ValueError):
        RunConfig(query_fields=())
    assert RunConfig().threshold == 4.5 and RunConfig().mu == 2500 and RunConfig().theta == 0.7
