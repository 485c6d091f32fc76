"""Three-pathway dispatch from intent labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from earedge.intent.classifier import INTENTS, IntentClassifier

PATHWAYS = {
    "device_control": "device_command",
    "visual_query": "visual_pipeline",
    "general_question": "conversational_pipeline",
    "conversational": "conversational_pipeline",
}


@dataclass(frozen=True)
class RouteDecision:
    pathway: str
    intent: str
    confidence: float
    annotations: dict = field(default_factory=dict)


def route(intent: str, confidence: float) -> RouteDecision:
    if intent not in PATHWAYS:
        raise ValueError(f"unknown intent {intent!r}; expected one of {INTENTS}")
    return RouteDecision(PATHWAYS[intent], intent, float(confidence))


# A hook sees the utterance and the decision and returns extra annotations.
# Further classifiers (e.g. whether a moment is worth remembering) plug in here.
Hook = Callable[[str, RouteDecision], dict]


class Router:
    def __init__(self, classifier: IntentClassifier, hooks: list[Hook] | None = None):
        self.classifier = classifier
        self.hooks = list(hooks or [])

    def add_hook(self, hook: Hook) -> None:
        self.hooks.append(hook)

    def decide(self, text: str) -> RouteDecision:
        intent, post = self.classifier.classify(text)
        decision = route(intent, float(post.max()))
        for hook in self.hooks:
            decision.annotations.update(hook(text, decision) or {})
        return decision
