"""MFCC front end for the wake-word model.

A one-second 16 kHz window becomes a 49 x 13 matrix: 25 ms Hamming frames
every 20 ms, 512-point power spectrum, 32 triangular mel filters, natural
log with a floor, orthonormal DCT-II keeping coefficients 0..12.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from earedge.audio.pcm import PcmBuffer


@dataclass(frozen=True)
class FeatureConfig:
    n_mfcc: int = 13
    frame_len_ms: float = 25.0
    frame_stride_ms: float = 20.0
    n_mel_filters: int = 32
    pre_emphasis: float = 0.98
    window_len_ms: float = 1000.0
    sample_rate_hz: int = 16000
    log_floor: float = 1e-10
    n_fft: int = 512

    def __post_init__(self):
        if self.frame_len_ms < self.frame_stride_ms:
            raise ValueError("frame length must be >= frame stride")
        if self.n_mfcc > self.n_mel_filters:
            raise ValueError("n_mfcc cannot exceed n_mel_filters")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise ValueError("pre_emphasis must lie in [0, 1)")
        if self.frame_len < 1 or self.n_fft < self.frame_len:
            raise ValueError("n_fft must cover one frame")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    @property
    def frame_len(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_len_ms / 1000))

    @property
    def frame_stride(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_stride_ms / 1000))

    @property
    def window_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.window_len_ms / 1000))

    @property
    def n_frames(self) -> int:
        return (self.window_samples - self.frame_len) // self.frame_stride + 1

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1


DEFAULT_CONFIG = FeatureConfig()


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def pre_emphasize(x, alpha: float = 0.98) -> np.ndarray:
    """First-order high-pass: y[0] = x[0], y[n] = x[n] - alpha * x[n-1]."""
    if isinstance(x, PcmBuffer):
        x = x.samples
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - alpha * x[:-1]
    return y


def mel_band_edges(cfg: FeatureConfig = DEFAULT_CONFIG):
    """(lower, centre, upper) frequencies in Hz of every mel filter."""
    nyquist = cfg.sample_rate_hz / 2
    points = mel_to_hz(np.linspace(0.0, hz_to_mel(nyquist), cfg.n_mel_filters + 2))
    return points[:-2], points[1:-1], points[2:]


def mel_filterbank(cfg: FeatureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Triangular filters, shape ``(n_mel_filters, n_fft // 2 + 1)``."""
    return _filterbank(cfg).copy()


@lru_cache(maxsize=8)
def _filterbank(cfg: FeatureConfig) -> np.ndarray:
    lo, mid, hi = mel_band_edges(cfg)
    freqs = np.arange(cfg.n_bins) * cfg.sample_rate_hz / cfg.n_fft
    rising = (freqs[None, :] - lo[:, None]) / (mid - lo)[:, None]
    falling = (hi[:, None] - freqs[None, :]) / (hi - mid)[:, None]
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb.setflags(write=False)
    return fb


@lru_cache(maxsize=8)
def _hamming(n: int) -> np.ndarray:
    w = np.hamming(n)
    w.setflags(write=False)
    return w


def frame_signal(y: np.ndarray, cfg: FeatureConfig) -> np.ndarray:
    starts = np.arange(cfg.n_frames) * cfg.frame_stride
    return y[starts[:, None] + np.arange(cfg.frame_len)[None, :]]


def _as_window(x, cfg: FeatureConfig) -> np.ndarray:
    if isinstance(x, PcmBuffer):
        if x.sample_rate_hz != cfg.sample_rate_hz:
            raise ValueError(f"expected {cfg.sample_rate_hz} Hz audio, got {x.sample_rate_hz} Hz")
        if x.channels != 1:
            raise ValueError("MFCC front end expects mono audio")
        x = x.samples
    x = np.asarray(x)
    n = cfg.window_samples
    if x.shape[0] > n:
        raise ValueError(f"window holds {x.shape[0]} samples, expected at most {n}")
    # scale int16 to [-1, 1); short windows are zero-padded at the end
    out = np.zeros(n, np.float64)
    out[: x.shape[0]] = x.astype(np.float64) / 32768.0
    return out


def mfcc_window(x, cfg: FeatureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """MFCC matrix ``(n_frames, n_mfcc)`` for one analysis window."""
    y = pre_emphasize(_as_window(x, cfg), cfg.pre_emphasis)
    frames = frame_signal(y, cfg) * _hamming(cfg.frame_len)
    spectrum = np.fft.rfft(frames, n=cfg.n_fft, axis=1)
    power = (spectrum.real ** 2 + spectrum.imag ** 2) / cfg.n_fft
    log_mel = np.log(power @ _filterbank(cfg).T + cfg.log_floor)
    return dct(log_mel, type=2, norm="ortho", axis=1)[:, : cfg.n_mfcc]


def mfcc_batch(windows, cfg: FeatureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Stack of MFCC matrices for an iterable of windows."""
    return np.stack([mfcc_window(w, cfg) for w in windows]) if len(windows) else np.zeros(
        (0, cfg.n_frames, cfg.n_mfcc))


def features_to_csv(features: np.ndarray) -> str:
    """Row-major CSV dump with six decimals, one frame per line."""
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(features), fmt="%.6f", delimiter=",")
    return buf.getvalue()


def features_from_csv(text: str) -> np.ndarray:
    return np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
