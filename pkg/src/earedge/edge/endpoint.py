"""Trailing-silence end-of-utterance detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer


@dataclass(frozen=True)
class Boundary:
    t_s: float            # stream time at which the boundary fires
    speech_end_s: float   # end of the last voiced hop (0 if none)
    empty: bool           # no voiced hop seen at all


class EndpointDetector:
    """Fires once trailing energy stays under ``threshold_dbfs`` for
    ``hangover_ms``. Works on 20 ms hops; call :meth:`reset` between
    utterances."""

    def __init__(self, hangover_ms: float = 700.0, threshold_dbfs: float = -45.0,
                 hop_ms: float = 20.0, sample_rate_hz: int = SAMPLE_RATE):
        self.hop = int(round(hop_ms * sample_rate_hz / 1000))
        self.hangover_hops = int(round(hangover_ms / hop_ms))
        self.threshold = threshold_dbfs
        self.sample_rate_hz = sample_rate_hz
        self.reset()

    def reset(self) -> None:
        self._pending = np.zeros(0)
        self._hops = 0
        self._silent_run = 0
        self._last_voiced = None
        self.boundary: Boundary | None = None

    def feed(self, pcm: PcmBuffer) -> Boundary | None:
        """Consume more audio; returns the boundary the first time it fires."""
        if self.boundary is not None:
            return None
        x = np.concatenate([self._pending, pcm.to_float()])
        n = len(x) // self.hop
        hop_s = self.hop / self.sample_rate_hz
        for k in range(n):
            frame = x[k * self.hop:(k + 1) * self.hop]
            db = 10 * np.log10(np.mean(frame ** 2) + 1e-20)
            self._hops += 1
            if db >= self.threshold:
                self._silent_run = 0
                self._last_voiced = self._hops
            else:
                self._silent_run += 1
                if self._silent_run >= self.hangover_hops:
                    end = (self._last_voiced or 0) * hop_s
                    self.boundary = Boundary(round(self._hops * hop_s, 6), round(end, 6),
                                             self._last_voiced is None)
                    self._pending = np.zeros(0)
                    return self.boundary
        self._pending = x[n * self.hop:]
        return None


def endpoint_detect(chunks, **kwargs) -> Boundary | None:
    """Run a fresh detector over an iterable of PCM chunks."""
    det = EndpointDetector(**kwargs)
    for chunk in chunks:
        b = det.feed(chunk)
        if b is not None:
            return b
    return None
