"""Label-preserving augmentation: gain, additive noise, time shift."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from earedge.audio.pcm import PcmBuffer, float_to_int16
from earedge.dataset.corpus import LabeledClip
from earedge.errors import ConfigError

POSITIVE_RANGE_S = (0.6, 1.0)
WINDOW_S = 1.0


def _range(value, name) -> tuple[float, float]:
    lo, hi = (float(v) for v in value)
    if lo > hi:
        raise ConfigError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
    return lo, hi


@dataclass(frozen=True)
class AugmentSpec:
    """Closed ranges sampled uniformly per variant.

    ``snr_db`` of ``None`` disables noise mixing.
    """

    gain_db: tuple[float, float] = (0.0, 0.0)
    snr_db: tuple[float, float] | None = None
    time_shift_ms: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "gain_db", _range(self.gain_db, "gain_db"))
        object.__setattr__(self, "time_shift_ms", _range(self.time_shift_ms, "time_shift_ms"))
        if self.snr_db is not None:
            object.__setattr__(self, "snr_db", _range(self.snr_db, "snr_db"))

    @classmethod
    def from_dict(cls, d: dict) -> AugmentSpec:
        unknown = set(d) - {"gain_db", "snr_db", "time_shift_ms"}
        if unknown:
            raise ConfigError(f"unknown augment fields: {sorted(unknown)}")
        return cls(**d)


def fit_duration(x: np.ndarray, sample_rate: int, lo_s: float, hi_s: float) -> np.ndarray:
    """Zero-pad (at the end) or trim (symmetrically) into [lo_s, hi_s]."""
    lo, hi = int(round(lo_s * sample_rate)), int(round(hi_s * sample_rate))
    if len(x) < lo:
        return np.concatenate([x, np.zeros(lo - len(x), x.dtype)])
    if len(x) > hi:
        cut = (len(x) - hi) // 2
        return x[cut:cut + hi]
    return x


def shift(x: np.ndarray, n: int) -> np.ndarray:
    """Delay (n > 0) or advance by ``n`` samples, zero-filling; length kept."""
    out = np.zeros_like(x)
    if n >= 0:
        out[n:] = x[: len(x) - n] if n < len(x) else x[:0]
    else:
        out[:n] = x[-n:]
    return out


def mix_noise(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add white noise scaled so that signal power / noise power is exactly ``snr_db``."""
    p_sig = np.mean(x ** 2)
    if p_sig == 0 or x.size == 0:
        return x.copy()
    noise = rng.standard_normal(x.size)
    noise *= np.sqrt(p_sig / (np.mean(noise ** 2) * 10 ** (snr_db / 10)))
    return x + noise


def augment(clip: LabeledClip, spec: AugmentSpec, n: int, seed: int = 0) -> list[LabeledClip]:
    """``n`` variants of ``clip``; positives are kept within 0.6-1.0 s."""
    if n < 0:
        raise ConfigError("n must be non-negative")
    if clip.duration_s > WINDOW_S + 1e-9:
        raise ConfigError(f"clip is {clip.duration_s:.3f} s; augmentation expects <= {WINDOW_S} s")
    rate = clip.pcm.sample_rate_hz
    rng = np.random.default_rng(seed)
    base = clip.pcm.to_float()
    out = []
    for i in range(n):
        x = base.copy()
        shift_ms = rng.uniform(*spec.time_shift_ms)
        if shift_ms:
            x = shift(x, int(round(shift_ms * rate / 1000)))
        x = x * 10 ** (rng.uniform(*spec.gain_db) / 20)
        if spec.snr_db is not None:
            x = mix_noise(x, rng.uniform(*spec.snr_db), rng)
        if clip.label == "heydotty":
            x = fit_duration(x, rate, *POSITIVE_RANGE_S)
        pcm = PcmBuffer(float_to_int16(x), rate)
        out.append(LabeledClip(pcm, clip.label, f"{clip.source_path}#aug{i}"))
    return out
