"""Corpus ingestion from one folder per label."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer, read_wav, resample
from earedge.errors import AudioFormatError, ConfigError

log = logging.getLogger(__name__)

LABELS = ("heydotty", "confuse", "noise", "unknown")
FOLDER_ALIASES = {"random": "unknown"}
# histogram bin edges in seconds; the last bin is open-ended
HIST_EDGES = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 5.0)


@dataclass(frozen=True)
class LabeledClip:
    pcm: PcmBuffer
    label: str
    source_path: str = ""

    def __post_init__(self):
        if self.label not in LABELS:
            raise ConfigError(f"unknown label {self.label!r}")

    @property
    def duration_s(self) -> float:
        return self.pcm.duration_s


@dataclass
class CorpusSummary:
    counts: dict[str, int]
    total_duration_s: float
    histogram: list[int]
    errors: list[tuple[str, str]] = field(default_factory=list)
    skipped_folders: list[str] = field(default_factory=list)

    @classmethod
    def of(cls, clips, errors=(), skipped=()) -> CorpusSummary:
        counts = Counter(c.label for c in clips)
        durations = [c.duration_s for c in clips]
        edges = list(HIST_EDGES) + [np.inf]
        hist, _ = np.histogram(durations, bins=edges)
        return cls({label: counts.get(label, 0) for label in LABELS}, float(sum(durations)),
                   [int(h) for h in hist], list(errors), list(skipped))

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "total_duration_s": round(self.total_duration_s, 6),
            "histogram": {"edges_s": list(HIST_EDGES), "counts": list(self.histogram)},
            "errors": [{"path": p, "error": e} for p, e in self.errors],
            "skipped_folders": list(self.skipped_folders),
        }

    def to_csv(self) -> str:
        lines = ["label,count"]
        lines += [f"{label},{n}" for label, n in self.counts.items()]
        lines.append(f"total_duration_s,{self.total_duration_s:.6f}")
        return "\n".join(lines) + "\n"


def load_clip(path, label: str) -> LabeledClip:
    """Read one WAV as a 16 kHz mono clip (stereo is downmixed)."""
    pcm = read_wav(path, downmix=True)
    if pcm.sample_rate_hz != SAMPLE_RATE:
        pcm = resample(pcm, SAMPLE_RATE)
    return LabeledClip(pcm, label, str(path))


def load_corpus(root) -> tuple[list[LabeledClip], CorpusSummary]:
    """Ingest every ``*.wav`` below each label folder of ``root``.

    Unknown folder names are skipped with a warning. Files that fail to
    parse are reported in ``summary.errors`` and do not abort the load.
    """
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"corpus root {root} is not a directory")
    folders = sorted(p for p in root.iterdir() if p.is_dir())
    clips, errors, skipped = [], [], []
    n_label_folders = 0
    for folder in folders:
        label = FOLDER_ALIASES.get(folder.name, folder.name)
        if label not in LABELS:
            log.warning("skipping unknown label folder %s", folder)
            skipped.append(folder.name)
            continue
        n_label_folders += 1
        for path in sorted(folder.rglob("*.wav")):
            try:
                clips.append(load_clip(path, label))
            except (AudioFormatError, OSError) as exc:
                errors.append((str(path), str(exc)))
    if n_label_folders == 0:
        raise ConfigError(f"no label folders under {root}; expected some of {LABELS}")
    return clips, CorpusSummary.of(clips, errors, skipped)
