"""Streaming wake-word detection over overlapping one-second windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from earedge.audio.pcm import PcmBuffer
from earedge.features import DEFAULT_CONFIG, FeatureConfig, mfcc_window

WAKE_LABEL = "heydotty"


@dataclass(frozen=True)
class DetectorConfig:
    window_s: float = 1.0
    stride_s: float = 0.5
    threshold: float = 0.43
    smoothing: float = 0.5  # weight of the newest window in the EMA
    suppression_s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not 0.0 < self.smoothing <= 1.0:
            raise ValueError("smoothing must lie in (0, 1]")
        if self.stride_s <= 0 or self.window_s <= 0:
            raise ValueError("window and stride must be positive")
        if self.suppression_s < self.stride_s:
            raise ValueError("suppression_s must be at least one stride")


@dataclass(frozen=True)
class DetectionEvent:
    t_start: float
    t_end: float
    score: float
    label: str = WAKE_LABEL


class StreamingDetector:
    """EMA-smoothed posterior with a refractory period.

    After an event, further events are blocked until ``suppression_s`` has
    elapsed *and* the smoothed score has dipped below the threshold at least
    once, so one long or repeated utterance cannot trigger twice.
    """

    def __init__(self, model, cfg: DetectorConfig = DetectorConfig(),
                 features: FeatureConfig = DEFAULT_CONFIG):
        self.model = model
        self.cfg = cfg
        self.features = features
        self.wake_index = list(model.labels).index(WAKE_LABEL)
        self.reset()

    def reset(self) -> None:
        self.smoothed = None
        self.last_event_t = None
        self.dipped = True

    def score(self, window) -> float:
        feats = mfcc_window(window, self.features)
        return float(self.model.predict_proba(feats)[self.wake_index])

    def push(self, window, t_start: float) -> DetectionEvent | None:
        """Feed the window starting at ``t_start`` seconds."""
        p = self.score(window)
        a = self.cfg.smoothing
        self.smoothed = p if self.smoothed is None else a * p + (1 - a) * self.smoothed
        hot = self.smoothed >= self.cfg.threshold
        if not hot:
            self.dipped = True
            return None
        if self.last_event_t is not None:
            # small epsilon: stride multiples accumulate float error
            if t_start - self.last_event_t < self.cfg.suppression_s - 1e-9 or not self.dipped:
                return None
        self.last_event_t = t_start
        self.dipped = False
        return DetectionEvent(t_start, t_start + self.cfg.window_s, self.smoothed)


def window_starts(n_samples: int, sample_rate: int, cfg: DetectorConfig) -> np.ndarray:
    win = int(round(cfg.window_s * sample_rate))
    hop = int(round(cfg.stride_s * sample_rate))
    if n_samples < win:
        return np.zeros(0, dtype=np.int64)
    return np.arange(0, n_samples - win + 1, hop)


def detect_stream(audio: PcmBuffer, cfg: DetectorConfig, model,
                  features: FeatureConfig = DEFAULT_CONFIG) -> list[DetectionEvent]:
    """Run the detector over a whole buffer; ``model`` may be float or int8."""
    if audio.channels != 1 or audio.sample_rate_hz != features.sample_rate_hz:
        raise ValueError("detect_stream expects 16 kHz mono audio")
    det = StreamingDetector(model, cfg, features)
    win = int(round(cfg.window_s * audio.sample_rate_hz))
    events = []
    for start in window_starts(len(audio), audio.sample_rate_hz, cfg):
        ev = det.push(audio.samples[start:start + win], start / audio.sample_rate_hz)
        if ev is not None:
            events.append(ev)
    return events
