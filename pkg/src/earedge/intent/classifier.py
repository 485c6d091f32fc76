"""Multinomial logistic regression over TF-IDF features."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from earedge.errors import ConfigError, ModelFormatError
from earedge.intent.tfidf import TfidfVectorizer

INTENTS = ("device_control", "visual_query", "general_question", "conversational")
FALLBACK_INTENT = "conversational"
L2 = 1e-4
FORMAT = "earedge-intent"
VERSION = 1


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(W, b, X, y, l2: float = L2):
    """Mean cross-entropy plus ``l2/2 * ||W||^2``; ``W`` is (classes, features)."""
    n = X.shape[0]
    P = _softmax(X @ W.T + b)
    loss = -np.mean(np.log(P[np.arange(n), y] + 1e-300)) + 0.5 * l2 * np.sum(W * W)
    D = P.copy()
    D[np.arange(n), y] -= 1.0
    D /= n
    return loss, D.T @ X + l2 * W, D.sum(axis=0)


def step_size(X: np.ndarray, l2: float = L2) -> float:
    """1/L for the smoothness constant of the loss in (W, b).

    The softmax cross-entropy Hessian is bounded by half the Gram matrix of
    the bias-augmented inputs, so one over that bound guarantees descent.
    """
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    sigma = np.linalg.norm(Xa, 2)
    return 1.0 / (0.5 * sigma ** 2 / X.shape[0] + l2)


@dataclass
class IntentClassifier:
    vectorizer: TfidfVectorizer
    weights: np.ndarray          # (4, V)
    bias: np.ndarray             # (4,)
    labels: tuple[str, ...] = INTENTS
    loss_history: list[float] = field(default_factory=list, repr=False)

    def posterior(self, text: str) -> np.ndarray:
        x = self.vectorizer.transform(text)
        if not x.any():
            # nothing we recognise: uniform posterior
            return np.full(len(self.labels), 1.0 / len(self.labels))
        return _softmax(x @ self.weights.T + self.bias)[0]

    def classify(self, text: str) -> tuple[str, np.ndarray]:
        """Label and posterior; unrecognised input falls back to conversational."""
        x = self.vectorizer.transform(text)
        if not x.any():
            return FALLBACK_INTENT, self.posterior(text)
        p = self.posterior(text)
        return self.labels[int(np.argmax(p))], p

    def predict(self, texts) -> list[str]:
        return [self.classify(t)[0] for t in texts]

    def accuracy(self, texts, intents) -> float:
        pred = self.predict(texts)
        return float(np.mean([a == b for a, b in zip(pred, intents)]))

    def to_dict(self) -> dict:
        vocab = sorted(self.vectorizer.vocabulary, key=self.vectorizer.vocabulary.get)
        return {
            "format": FORMAT,
            "version": VERSION,
            "labels": list(self.labels),
            "vocabulary": vocab,
            "idf": self.vectorizer.idf.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> IntentClassifier:
        if d.get("format") != FORMAT:
            raise ModelFormatError("not an intent model file")
        if d.get("version") != VERSION:
            raise ModelFormatError(f"unsupported intent model version {d.get('version')}")
        vocab = {tok: i for i, tok in enumerate(d["vocabulary"])}
        vec = TfidfVectorizer(vocab, np.asarray(d["idf"], dtype=np.float64))
        return cls(vec, np.asarray(d["weights"], dtype=np.float64),
                   np.asarray(d["bias"], dtype=np.float64), tuple(d["labels"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> IntentClassifier:
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit(texts, intents, iterations: int = 500, l2: float = L2, seed: int = 0,
        labels: tuple[str, ...] = INTENTS) -> IntentClassifier:
    """Full-batch gradient descent from zero weights at step 1/L.

    ``seed`` only permutes the training order, which leaves the result
    unchanged up to float rounding; it exists so every entry point takes one.
    """
    texts, intents = list(texts), list(intents)
    if not texts:
        raise ConfigError("empty training corpus")
    if len(texts) != len(intents):
        raise ConfigError("texts and intents differ in length")
    index = {name: i for i, name in enumerate(labels)}
    unknown = sorted(set(intents) - set(index))
    if unknown:
        raise ConfigError(f"unknown intents {unknown}")
    if len(set(intents)) < 2:
        raise ConfigError("need at least two intent classes")
    order = np.random.default_rng(seed).permutation(len(texts))
    texts = [texts[i] for i in order]
    y = np.array([index[intents[i]] for i in order])
    vec = TfidfVectorizer.fit(texts)
    X = vec.transform(texts)
    W = np.zeros((len(labels), X.shape[1]))
    b = np.zeros(len(labels))
    eta = step_size(X, l2)
    history = []
    for _ in range(iterations):
        loss, gW, gb = loss_and_grad(W, b, X, y, l2)
        history.append(float(loss))
        W -= eta * gW
        b -= eta * gb
    history.append(float(loss_and_grad(W, b, X, y, l2)[0]))
    return IntentClassifier(vec, W, b, labels, history)
