"""Corpus tools: ingestion, segmentation, augmentation, toy data."""

from earedge.dataset.augment import AugmentSpec, augment
from earedge.dataset.corpus import CorpusSummary, LabeledClip, load_corpus
from earedge.dataset.segment import segment
from earedge.dataset.toy import make_toy_corpus, toy_dataset

__all__ = [
    "AugmentSpec",
    "CorpusSummary",
    "LabeledClip",
    "augment",
    "load_corpus",
    "make_toy_corpus",
    "segment",
    "toy_dataset",
]
