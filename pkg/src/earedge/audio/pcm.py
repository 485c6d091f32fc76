"""PCM containers, WAV I/O and sample-rate conversion."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from earedge.errors import AudioFormatError

SAMPLE_RATE = 16000
INT16_MIN = -32768
INT16_MAX = 32767

# windowed-sinc resampler taps (total, centred on the output instant)
RESAMPLE_TAPS = 16


@dataclass(frozen=True, eq=False)
class PcmBuffer:
    """Signed 16-bit PCM.

    ``samples`` is 1-D for mono and ``(n_frames, channels)`` otherwise.
    """

    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE
    channels: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.dtype != np.int16:
            if samples.size and (samples.min() < INT16_MIN or samples.max() > INT16_MAX):
                raise ValueError("sample values outside the signed 16-bit range")
            samples = samples.astype(np.int16)
        if self.channels < 1:
            raise ValueError("channels must be >= 1")
        if self.channels == 1:
            samples = samples.reshape(-1)
        elif samples.ndim != 2 or samples.shape[1] != self.channels:
            raise ValueError(f"expected (n, {self.channels}) samples, got {samples.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PcmBuffer):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.channels == other.channels
            and np.array_equal(self.samples, other.samples)
        )

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @classmethod
    def silence(cls, duration_s: float, sample_rate_hz: int = SAMPLE_RATE) -> PcmBuffer:
        return cls(np.zeros(int(round(duration_s * sample_rate_hz)), np.int16), sample_rate_hz)

    @classmethod
    def from_float(cls, x, sample_rate_hz: int = SAMPLE_RATE) -> PcmBuffer:
        """Build from floats in [-1, 1); out-of-range values saturate."""
        return cls(float_to_int16(x), sample_rate_hz)

    def to_float(self) -> np.ndarray:
        return self.samples.astype(np.float64) / 32768.0

    def slice(self, start_s: float, end_s: float) -> PcmBuffer:
        a = max(0, int(round(start_s * self.sample_rate_hz)))
        b = min(len(self), int(round(end_s * self.sample_rate_hz)))
        return PcmBuffer(self.samples[a:b], self.sample_rate_hz, self.channels)

    def to_mono(self) -> PcmBuffer:
        if self.channels == 1:
            return self
        mixed = np.round(self.samples.astype(np.float64).mean(axis=1))
        return PcmBuffer(mixed.astype(np.int16), self.sample_rate_hz, 1)


def float_to_int16(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64) * 32768.0
    return np.clip(np.round(x), INT16_MIN, INT16_MAX).astype(np.int16)


def concat(buffers, sample_rate_hz: int = SAMPLE_RATE) -> PcmBuffer:
    parts = []
    for b in buffers:
        if b.sample_rate_hz != sample_rate_hz or b.channels != 1:
            raise ValueError("concat expects mono buffers at a common rate")
        parts.append(b.samples)
    if not parts:
        return PcmBuffer(np.zeros(0, np.int16), sample_rate_hz)
    return PcmBuffer(np.concatenate(parts), sample_rate_hz)


def write_wav(pcm: PcmBuffer, path) -> None:
    with wave.open(str(path), "wb") as w:
        w.setnchannels(pcm.channels)
        w.setsampwidth(2)
        w.setframerate(pcm.sample_rate_hz)
        w.writeframes(pcm.samples.astype("<i2").tobytes())


def read_wav(path, downmix: bool = False) -> PcmBuffer:
    """Read a 16-bit PCM WAV file.

    Multi-channel files raise :class:`AudioFormatError` unless ``downmix``
    is set, in which case channels are averaged to mono.
    """
    try:
        with wave.open(str(path), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            n = w.getnframes()
            raw = w.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"{path}: {exc}") from exc
    if width != 2:
        raise AudioFormatError(f"{path}: {8 * width}-bit samples, expected 16-bit PCM")
    if len(raw) % (2 * channels):
        raise AudioFormatError(f"{path}: truncated sample data")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.int16)
    if channels > 1:
        pcm = PcmBuffer(samples.reshape(-1, channels), rate, channels)
        if not downmix:
            raise AudioFormatError(f"{path}: {channels} channels; pass downmix=True to mix to mono")
        return pcm.to_mono()
    return PcmBuffer(samples, rate)


def _kernel(t, cutoff):
    # Hann-windowed sinc; `t` in input samples, support |t| < RESAMPLE_TAPS/2
    half = RESAMPLE_TAPS / 2
    w = np.where(np.abs(t) < half, 0.5 + 0.5 * np.cos(np.pi * t / half), 0.0)
    return cutoff * np.sinc(cutoff * t) * w


def resample(pcm: PcmBuffer, target_hz: int) -> PcmBuffer:
    """Windowed-sinc sample-rate conversion of a mono buffer."""
    if target_hz <= 0:
        raise ValueError("target_hz must be positive")
    pcm = pcm.to_mono()
    src_hz = pcm.sample_rate_hz
    if target_hz == src_hz:
        return PcmBuffer(pcm.samples.copy(), src_hz)
    n_in = len(pcm)
    n_out = int(round(n_in * target_hz / src_hz))
    if n_in == 0 or n_out == 0:
        return PcmBuffer(np.zeros(0, np.int16), target_hz)
    x = pcm.samples.astype(np.float64)
    cutoff = min(1.0, target_hz / src_hz)
    # output instant k sits at input position k * src/target
    pos = np.arange(n_out) * (src_hz / target_hz)
    base = np.floor(pos).astype(np.int64)
    offsets = np.arange(-RESAMPLE_TAPS // 2 + 1, RESAMPLE_TAPS // 2 + 1)
    idx = base[:, None] + offsets[None, :]
    weights = _kernel(pos[:, None] - idx, cutoff)
    valid = (idx >= 0) & (idx < n_in)
    taps = np.where(valid, x[np.clip(idx, 0, n_in - 1)], 0.0)
    y = (taps * weights).sum(axis=1)
    return PcmBuffer(np.clip(np.round(y), INT16_MIN, INT16_MAX).astype(np.int16), target_hz)
