"""Synthetic four-class wake-word corpus.

Utterances are strings of "syllables": harmonic series on a random pitch,
shaped by a two-formant spectral envelope and a raised-cosine amplitude
envelope. The wake phrase, its confusers and random phrases differ in the
formant sequence, which is what an MFCC front end picks up. Everything is
mixed over coloured background noise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer, write_wav

LABELS = ("heydotty", "confuse", "noise", "unknown")

# (F1, F2) in Hz
WAKE_SYLLABLES = ((500, 1900), (750, 1150), (320, 2500))
CONFUSER_PHRASES = (
    ((500, 1900), (420, 800), (320, 2500)),     # "hey dobby"
    ((500, 1900), (750, 1150), (650, 1000)),    # "hey dotta"
    ((700, 1200), (750, 1150), (320, 2500)),    # "hay dotty"
)
SYLLABLE_SHARE = (0.33, 0.30, 0.37)
POSITIVE_DURATION = (0.6, 1.0)


def _envelope(n: int) -> np.ndarray:
    ramp = max(1, n // 5)
    env = np.ones(n)
    shape = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    env[:ramp] = shape
    env[-ramp:] = shape[::-1]
    return env


def syllable(formants, duration_s: float, rng: np.random.Generator,
             pitch_hz: float | None = None, sr: int = SAMPLE_RATE) -> np.ndarray:
    """One voiced syllable as float samples with unit peak."""
    n = max(1, int(duration_s * sr))
    t = np.arange(n) / sr
    f0 = pitch_hz if pitch_hz is not None else rng.uniform(100, 220)
    # gentle pitch glide so harmonics are not perfectly stationary
    glide = 1.0 + rng.uniform(-0.06, 0.06) * t / max(duration_s, 1e-3)
    phase = 2 * np.pi * f0 * np.cumsum(glide) / sr
    f1, f2 = (f * rng.uniform(0.95, 1.05) for f in formants)
    out = np.zeros(n)
    for k in range(1, int(4000 // f0) + 1):
        fk = k * f0
        gain = np.exp(-0.5 * ((fk - f1) / 90.0) ** 2) + 0.7 * np.exp(-0.5 * ((fk - f2) / 120.0) ** 2)
        gain += 0.02 / k
        out += gain * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    out *= _envelope(n)
    peak = np.max(np.abs(out))
    return out / peak if peak > 0 else out


def phrase(formant_seq, duration_s: float, rng: np.random.Generator,
           shares=None, sr: int = SAMPLE_RATE) -> np.ndarray:
    """Concatenate syllables filling ``duration_s`` with short gaps."""
    if shares is None:
        shares = np.full(len(formant_seq), 1.0 / len(formant_seq))
    pitch = rng.uniform(100, 220)
    parts = []
    gap = int(0.02 * sr)
    for formants, share in zip(formant_seq, shares):
        syl_dur = max(0.03, duration_s * share - 0.02)
        parts.append(syllable(formants, syl_dur, rng, pitch * rng.uniform(0.95, 1.08), sr))
        parts.append(np.zeros(gap))
    out = np.concatenate(parts[:-1])
    n = int(duration_s * sr)
    if out.size < n:
        out = np.concatenate([out, np.zeros(n - out.size)])
    return out[:n]


def colored_noise(n: int, rng: np.random.Generator, kind: str | None = None) -> np.ndarray:
    """Unit-RMS white, pink, brown or hum-laden noise."""
    kind = kind or rng.choice(["white", "pink", "brown", "hum"])
    white = rng.standard_normal(n)
    if kind == "white":
        x = white
    elif kind in ("pink", "brown"):
        spec = np.fft.rfft(white)
        f = np.arange(spec.size, dtype=np.float64)
        f[0] = 1.0
        spec /= np.sqrt(f) if kind == "pink" else f
        x = np.fft.irfft(spec, n)
    else:
        t = np.arange(n) / SAMPLE_RATE
        hum = sum(np.sin(2 * np.pi * 50 * k * t + rng.uniform(0, 6.3)) / k for k in (1, 2, 3))
        x = 0.3 * white + hum
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def positive(rng: np.random.Generator, duration_s: float | None = None) -> np.ndarray:
    d = duration_s if duration_s is not None else rng.uniform(*POSITIVE_DURATION)
    return phrase(WAKE_SYLLABLES, d, rng, SYLLABLE_SHARE)


def confuser(rng: np.random.Generator) -> np.ndarray:
    seq = CONFUSER_PHRASES[rng.integers(len(CONFUSER_PHRASES))]
    return phrase(seq, rng.uniform(*POSITIVE_DURATION), rng, SYLLABLE_SHARE)


def _random_formants(rng):
    while True:
        f = (rng.uniform(250, 850), rng.uniform(700, 2600))
        # keep random syllables away from the wake-phrase syllables
        if all(abs(f[0] - a) > 80 or abs(f[1] - b) > 250 for a, b in WAKE_SYLLABLES):
            return f


def unknown(rng: np.random.Generator) -> np.ndarray:
    """Random phrases or fragments of the wake phrase ("hey d-", "-dotty")."""
    if rng.random() < 0.35:
        d = rng.uniform(*POSITIVE_DURATION)
        full = phrase(WAKE_SYLLABLES, d, rng, SYLLABLE_SHARE)
        cut = int(full.size * rng.uniform(0.30, 0.45))
        return full[:cut] if rng.random() < 0.5 else full[-cut:]
    n_syl = int(rng.integers(1, 5))
    seq = [_random_formants(rng) for _ in range(n_syl)]
    return phrase(seq, rng.uniform(0.3, 1.0), rng)


def _place(signal: np.ndarray, n: int, rng: np.random.Generator, min_keep: float) -> np.ndarray:
    """Drop ``signal`` into an n-sample window, possibly clipping an edge."""
    out = np.zeros(n)
    L = signal.size
    lo = -int(L * (1 - min_keep))
    hi = n - L + int(L * (1 - min_keep))
    if hi < lo:
        lo = hi = (n - L) // 2
    start = int(rng.integers(lo, hi + 1))
    a, b = max(0, start), min(n, start + L)
    out[a:b] = signal[a - start:b - start]
    return out


def synth_clip(label: str, rng: np.random.Generator, window_s: float = 1.0) -> PcmBuffer:
    """One labelled window of synthetic audio."""
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}")
    n = int(window_s * SAMPLE_RATE)
    noise_db = rng.uniform(-75, -35)
    if label == "noise":
        if rng.random() < 0.08:
            return PcmBuffer(np.zeros(n, np.int16))
        noise_db = rng.uniform(-90, -20)
        x = colored_noise(n, rng) * 10 ** (noise_db / 20)
        return PcmBuffer.from_float(x)
    if label == "heydotty":
        fg = _place(positive(rng), n, rng, min_keep=0.85)
    elif label == "confuse":
        fg = _place(confuser(rng), n, rng, min_keep=0.85)
    else:
        fg = _place(unknown(rng), n, rng, min_keep=0.6)
    level = 10 ** (rng.uniform(-18, -3) / 20)
    x = fg * level + colored_noise(n, rng) * 10 ** (noise_db / 20)
    return PcmBuffer.from_float(x)


def make_toy_corpus(root, per_class: int = 100, seed: int = 0) -> dict[str, int]:
    """Write ``per_class`` WAV files into one folder per label."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    counts = {}
    for label in LABELS:
        folder = root / label
        folder.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            write_wav(synth_clip(label, rng), folder / f"{label}_{i:04d}.wav")
        counts[label] = per_class
    return counts


def toy_dataset(per_class: int = 100, seed: int = 0):
    """In-memory corpus: (list of PcmBuffer, list of labels)."""
    rng = np.random.default_rng(seed)
    clips, labels = [], []
    for i in range(per_class):
        for label in LABELS:
            clips.append(synth_clip(label, rng))
            labels.append(label)
    return clips, labels


def background(duration_s: float, rng: np.random.Generator, level_db: float = -50.0,
               kind: str | None = None) -> np.ndarray:
    n = int(round(duration_s * SAMPLE_RATE))
    return colored_noise(n, rng, kind) * 10 ** (level_db / 20)
