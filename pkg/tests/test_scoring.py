import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_dirichlet_score, naive_score_magnitude
from rtsfilter.corpus import TermVector
from rtsfilter.refmodel import ReferenceModel
from rtsfilter.scoring import (
    BASELINE_MU,
    QueryScorer,
    ScoringConfig,
    cosine,
    dirichlet_doc_prob,
    dirichlet_score,
    jm_doc_prob,
)

# expected values below were evaluated independently at 40 digits with mpmath


def test_score_with_overlap():
    model = ReferenceModel.from_counts({"a": 1, "z": 9})  # p(a) = 0.1
    score = dirichlet_score(TermVector({"a": 2, "b": 1}), TermVector({"a": 1}), model, mu=2)
    assert score == pytest.approx(1.481604540924215, rel=1e-12)


def test_score_without_overlap_is_length_penalty():
    model = ReferenceModel.from_counts({"x": 1})
    q = TermVector({"q1": 1, "q2": 2, "q3": 2})
    d = TermVector({"d": 10})
    assert dirichlet_score(d, q, model, mu=2500) == pytest.approx(-0.019960106347687265, rel=1e-12)


def test_baseline_score():
    model = ReferenceModel.from_counts({"a": 1, "b": 1})
    score = dirichlet_score(TermVector({"a": 1}), TermVector({"a": 1}), model, mu=BASELINE_MU)
    assert score == pytest.approx(0.6931471800599453, rel=1e-9)
    assert round(score, 4) == round(math.log(2), 4)


def test_empty_document_scores_zero(model_ab):
    assert dirichlet_score(TermVector(), TermVector({"a": 3}), model_ab) == 0.0


@pytest.mark.parametrize("mu", [0, -1, float("inf"), float("nan")])
def test_bad_mu(model_ab, mu):
    with pytest.raises(ValueError):
        dirichlet_score(TermVector({"a": 1}), TermVector({"a": 1}), model_ab, mu=mu)


def test_empty_query(model_ab):
    with pytest.raises(ValueError):
        dirichlet_score(TermVector({"a": 1}), TermVector(), model_ab)


def test_scoring_config():
    assert ScoringConfig().mu == 2500
    with pytest.raises(ValueError):
        ScoringConfig(mu=0)
    with pytest.raises(ValueError):
        ScoringConfig(lambda_=1.5)


def random_instance(rng):
    vocab = [f"w{i}" for i in range(rng.randint(2, 25))]
    counts = {w: rng.randint(1, 1000) for w in rng.sample(vocab, rng.randint(1, len(vocab)))}
    model = ReferenceModel.from_counts(counts)
    q = TermVector({w: rng.randint(1, 3) for w in rng.sample(vocab, rng.randint(1, min(6, len(vocab))))})
    d = TermVector({w: rng.randint(1, 4) for w in rng.sample(vocab, rng.randint(0, min(12, len(vocab))))})
    mu = rng.choice([BASELINE_MU, 0.5, 10.0, 2500.0, 10.0 ** rng.uniform(-3, 4)])
    return d, q, model, mu


def test_oracle_equivalence_smoke():
    rng = random.Random(7)
    for _ in range(200):
        d, q, model, mu = random_instance(rng)
        got = dirichlet_score(d, q, model, mu)
        want = naive_dirichlet_score(d.counts, q.counts, model.prob, mu)
        scale = naive_score_magnitude(d.counts, q.counts, model.prob, mu)
        assert abs(got - want) <= 1e-9 * max(abs(want), scale)


def test_scorer_symmetry_of_iteration(model_ab):
    # short doc / long doc branches must agree
    scorer = QueryScorer(TermVector({"a": 1, "b": 2, "c": 1}), model_ab, 3.0)
    short = TermVector({"a": 2})
    long = TermVector({"a": 2, "x": 1, "y": 1, "z": 1, "b": 1})
    assert scorer(short) == pytest.approx(
        naive_dirichlet_score(short.counts, scorer.query.counts, model_ab.prob, 3.0), rel=1e-12)
    assert scorer(long) == pytest.approx(
        naive_dirichlet_score(long.counts, scorer.query.counts, model_ab.prob, 3.0), rel=1e-12)


def test_rank_equivalence_identity():
    rng = random.Random(11)
    for _ in range(20):
        _, q, model, mu = random_instance(rng)
        const = -sum(c * math.log(model.prob(w)) for w, c in q.counts.items())
        for _ in range(30):
            d, _, _, _ = random_instance(rng)
            loglik = sum(c * math.log(dirichlet_doc_prob(d, model, mu, w)) for w, c in q.counts.items())
            assert dirichlet_score(d, q, model, mu) - loglik == pytest.approx(const, abs=1e-9 * max(1, abs(const)))


def test_dirichlet_doc_prob_cases(model_ab):
    d = TermVector({"a": 2, "b": 1})
    assert dirichlet_doc_prob(d, model_ab, 0, "a") == 2 / 3
    assert dirichlet_doc_prob(TermVector(), model_ab, 7.0, "a") == model_ab.prob("a")
    half = ReferenceModel.from_counts({"a": 1, "b": 1})
    assert dirichlet_doc_prob(TermVector({"a": 1}), half, 1, "a") == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(ValueError):
        dirichlet_doc_prob(TermVector(), model_ab, 0, "a")
    with pytest.raises(ValueError):
        dirichlet_doc_prob(d, model_ab, -1, "a")


def test_jm_doc_prob_cases():
    model = ReferenceModel.from_counts({"a": 1, "z": 4})  # p(a) = 0.2
    d = TermVector({"a": 1, "b": 1})
    assert jm_doc_prob(d, model, 0.0, "a") == 0.5
    assert jm_doc_prob(d, model, 1.0, "a") == 0.2
    assert jm_doc_prob(TermVector(), model, 1.0, "a") == 0.2
    assert jm_doc_prob(d, model, 0.5, "a") == pytest.approx(0.35, abs=1e-15)
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            jm_doc_prob(d, model, bad, "a")
    with pytest.raises(ValueError):
        jm_doc_prob(TermVector(), model, 0.5, "a")


@pytest.mark.parametrize("smoother", ["dirichlet", "jm"])
def test_document_models_sum_to_one(smoother):
    rng = random.Random(3)
    for _ in range(50):
        d, _, model, mu = random_instance(rng)
        if smoother == "jm" and d.length == 0:
            continue
        support = set(d.counts) | set(model.term_counts)
        if smoother == "dirichlet":
            probs = [dirichlet_doc_prob(d, model, mu, w) for w in support]
            unseen_ref = [w for w in d.counts if w not in model.term_counts]
            # doc terms missing from the reference model carry floor mass on top of 1
            floor_mass = mu * model.unseen_epsilon * len(unseen_ref) / (d.length + mu)
        else:
            lam = rng.random()
            probs = [jm_doc_prob(d, model, lam, w) for w in support]
            unseen_ref = [w for w in d.counts if w not in model.term_counts]
            floor_mass = lam * model.unseen_epsilon * len(unseen_ref)
        assert all(0 <= p <= 1 for p in probs)
        assert sum(probs) == pytest.approx(1 + floor_mass, abs=1e-6)


def test_cosine_examples():
    v = TermVector({"a": 1, "b": 1})
    assert cosine(v, v) == 1.0
    assert cosine(v, TermVector({"c": 3})) == 0.0
    assert cosine(v, TermVector({"a": 1})) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert cosine(v, TermVector()) == 0.0
    assert cosine(TermVector(), TermVector()) == 0.0


vectors = st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 50), max_size=7).map(TermVector)


@given(vectors, vectors)
def test_cosine_properties(v1, v2):
    c = cosine(v1, v2)
    assert c == cosine(v2, v1)
    assert 0.0 <= c <= 1.0
    if v1:
        assert cosine(v1, v1) == 1.0


@given(vectors, st.integers(1, 1000))
def test_cosine_scaled_copy_is_exactly_one(v, k):
    if v:
        scaled = TermVector({w: c * k for w, c in v.counts.items()})
        assert cosine(v, scaled) == 1.0
