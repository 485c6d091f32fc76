import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from earedge.errors import ConfigError, ModelFormatError
from earedge.intent import (
    INTENTS,
    PATHWAYS,
    IntentClassifier,
    Router,
    TfidfVectorizer,
    bundled_corpus,
    fit,
    route,
    tokenize,
)
from earedge.intent.classifier import loss_and_grad

TEXTS, LABELS = bundled_corpus()


@pytest.fixture(scope="module")
def clf():
    return fit(TEXTS, LABELS)


def test_bundled_corpus_shape():
    assert len(TEXTS) == 200
    assert {l: LABELS.count(l) for l in INTENTS} == {l: 50 for l in INTENTS}


def test_tokenizer_and_idf():
    assert tokenize("What's ON this Table?") == ["what", "s", "on", "this", "table"]
    vec = TfidfVectorizer.fit(["a b", "a c", "a"])
    n = 3
    assert vec.idf[vec.vocabulary["a"]] == pytest.approx(np.log((1 + n) / (1 + 3)) + 1)
    assert vec.idf[vec.vocabulary["b"]] == pytest.approx(np.log(4 / 2) + 1)
    assert np.all(vec.idf >= 0)
    row = vec.transform("a b b")[0]
    assert row[vec.vocabulary["b"]] == pytest.approx(2 / 3 * vec.idf[vec.vocabulary["b"]])


def test_disjoint_keywords_fit_perfectly():
    words = {"device_control": "zap", "visual_query": "look", "general_question": "fact",
             "conversational": "chat"}
    texts, intents = [], []
    for intent, w in words.items():
        for filler in ("one", "two", "three"):
            texts.append(f"{w} {filler}")
            intents.append(intent)
    model = fit(texts, intents)
    assert model.accuracy(texts, intents) == 1.0


def test_degenerate_corpora_rejected():
    with pytest.raises(ConfigError):
        fit(["only one class", "still one"], ["conversational"] * 2)
    with pytest.raises(ConfigError):
        fit([], [])
    with pytest.raises(ConfigError):
        fit(["x", "y"], ["conversational", "smalltalk"])


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.random((12, 7))
    y = rng.integers(0, 4, 12)
    W = rng.normal(0, 0.5, (4, 7))
    b = rng.normal(0, 0.5, 4)
    l2 = 1e-2
    _, gW, gb = loss_and_grad(W, b, X, y, l2)
    h = 1e-6
    for arr, grad in ((W, gW), (b, gb)):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = loss_and_grad(W, b, X, y, l2)[0]
            flat[i] = old - h
            down = loss_and_grad(W, b, X, y, l2)[0]
            flat[i] = old
            num = (up - down) / (2 * h)
            assert abs(num - gflat[i]) <= 1e-4 * max(abs(num), abs(gflat[i]), 1e-8)


def test_loss_decreases_monotonically(clf):
    hist = np.array(clf.loss_history)
    assert np.all(np.diff(hist) <= 1e-12)
    assert hist[-1] < hist[0]


def test_fit_is_deterministic():
    a, b = fit(TEXTS, LABELS, iterations=50, seed=1), fit(TEXTS, LABELS, iterations=50, seed=1)
    assert np.array_equal(a.weights, b.weights)


def test_paper_example_utterances(clf):
    assert clf.classify("take a photo")[0] == "device_control"
    assert clf.classify("what's on this table?")[0] == "visual_query"


def test_empty_and_unknown_text_fall_back(clf):
    for text in ("", "zzyzx qwerty"):
        label, post = clf.classify(text)
        assert label == "conversational" and post.max() <= 0.5


@pytest.mark.parametrize("intent", INTENTS)
def test_route_mapping(intent):
    d = route(intent, 0.7)
    assert d.pathway == PATHWAYS[intent] and d.intent == intent and d.confidence == 0.7
    assert d.pathway in {"device_command", "visual_pipeline", "conversational_pipeline"}


def test_route_rejects_unknown_label():
    with pytest.raises(ValueError):
        route("memory_need", 1.0)


def test_router_hooks_annotate(clf):
    router = Router(clf, [lambda text, d: {"length": len(text)}])
    d = router.decide("take a picture")
    assert d.pathway == "device_command" and d.annotations == {"length": 14}


@given(st.sampled_from(TEXTS))
def test_posterior_sums_to_one(clf, text):
    post = clf.posterior(text)
    assert abs(post.sum() - 1) < 1e-9 and np.all(post >= 0)


@given(st.sampled_from(TEXTS), st.integers(2, 5))
def test_argmax_ignores_document_length(clf, text, k):
    assert clf.classify(" ".join([text] * k))[0] == clf.classify(text)[0]


def test_classify_latency(clf):
    t0 = time.perf_counter()
    for text in TEXTS:
        clf.classify(text)
    assert (time.perf_counter() - t0) / len(TEXTS) <= 0.05


def test_json_round_trip(tmp_path, clf):
    clf.save(tmp_path / "m.json")
    back = IntentClassifier.load(tmp_path / "m.json")
    for text in TEXTS[::17]:
        assert back.classify(text)[0] == clf.classify(text)[0]
        assert np.allclose(back.posterior(text), clf.posterior(text))
    with pytest.raises(ModelFormatError):
        IntentClassifier.from_dict({"format": "other"})
