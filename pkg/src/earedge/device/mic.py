"""Microphone input assembled from WAV fixtures on a timeline."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer, read_wav, resample
from earedge.errors import ConfigError


def _load(ref, base: Path | None, cache: dict) -> PcmBuffer:
    if isinstance(ref, PcmBuffer):
        return ref
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    key = str(path)
    if key not in cache:
        if not path.is_file():
            raise ConfigError(f"mic fixture not found: {path}")
        pcm = read_wav(path, downmix=True)
        if pcm.sample_rate_hz != SAMPLE_RATE:
            pcm = resample(pcm, SAMPLE_RATE)
        cache[key] = pcm
    return cache[key]


def mic_source(timeline, base_dir=None) -> PcmBuffer:
    """Concatenate timeline entries into one 16 kHz stream.

    Entries are ``{"silence_s": d}`` or ``{"clip": path_or_PcmBuffer}``,
    either optionally pinned with ``"at_s"``. Unpinned entries follow the
    previous one; a pinned entry may leave a silent gap but must not start
    before the stream built so far ends. All fixtures are loaded and
    checked before any audio is assembled.
    """
    base = Path(base_dir) if base_dir is not None else None
    cache: dict = {}
    placed = []
    cursor = 0
    if not isinstance(timeline, (list, tuple)):
        raise ConfigError("timeline must be a list of entries")
    for i, entry in enumerate(timeline):
        if not isinstance(entry, dict):
            raise ConfigError(f"timeline entry {i} must be an object")
        if ("clip" in entry) == ("silence_s" in entry):
            raise ConfigError(f"timeline entry {i} needs exactly one of 'clip' or 'silence_s'")
        if "clip" in entry:
            samples = _load(entry["clip"], base, cache).samples
        else:
            d = float(entry["silence_s"])
            if d < 0:
                raise ConfigError(f"timeline entry {i}: negative silence")
            samples = np.zeros(int(round(d * SAMPLE_RATE)), np.int16)
        start = cursor
        if "at_s" in entry:
            start = int(round(float(entry["at_s"]) * SAMPLE_RATE))
            if start < cursor:
                raise ConfigError(f"timeline entry {i} at {entry['at_s']} s overlaps the "
                                  f"previous entry ending at {cursor / SAMPLE_RATE:.3f} s")
        placed.append((start, samples))
        cursor = start + len(samples)
    out = np.zeros(cursor, np.int16)
    for start, samples in placed:
        out[start:start + len(samples)] = samples
    return PcmBuffer(out, SAMPLE_RATE)
