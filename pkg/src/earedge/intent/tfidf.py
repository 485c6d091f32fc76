"""Length-normalised TF-IDF over lowercase alphanumeric tokens."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class TfidfVectorizer:
    """``tf = count / n_tokens``; ``idf = ln((1 + N) / (1 + df)) + 1``."""

    vocabulary: dict[str, int]
    idf: np.ndarray

    @classmethod
    def fit(cls, texts) -> TfidfVectorizer:
        texts = list(texts)
        df: Counter[str] = Counter()
        for text in texts:
            df.update(set(tokenize(text)))
        vocab = {tok: i for i, tok in enumerate(sorted(df))}
        n = len(texts)
        idf = np.array([math.log((1 + n) / (1 + df[tok])) + 1 for tok in vocab])
        return cls(vocab, idf)

    def transform(self, texts) -> np.ndarray:
        if isinstance(texts, str):
            texts = [texts]
        out = np.zeros((len(texts), len(self.vocabulary)))
        for row, text in enumerate(texts):
            tokens = tokenize(text)
            if not tokens:
                continue
            for tok, c in Counter(tokens).items():
                j = self.vocabulary.get(tok)
                if j is not None:
                    out[row, j] = c / len(tokens) * self.idf[j]
        return out
