"""Intent classification and routing."""

import csv
from importlib import resources

from earedge.intent.classifier import INTENTS, IntentClassifier, fit
from earedge.intent.router import PATHWAYS, RouteDecision, Router, route
from earedge.intent.tfidf import TfidfVectorizer, tokenize


def bundled_corpus() -> tuple[list[str], list[str]]:
    """The shipped 200-utterance template corpus as (texts, intents)."""
    with resources.files("earedge.data").joinpath("intent_corpus.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    return [r["text"] for r in rows], [r["intent"] for r in rows]


__all__ = [
    "INTENTS",
    "PATHWAYS",
    "IntentClassifier",
    "RouteDecision",
    "Router",
    "TfidfVectorizer",
    "bundled_corpus",
    "fit",
    "route",
    "tokenize",
]
