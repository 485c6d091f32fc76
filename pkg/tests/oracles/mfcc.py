"""Loop-level MFCC reference.

Everything is spelled out from the textbook definitions: HTK mel scale,
explicit DFT sums (no FFT), triangular filters evaluated bin by bin, and
the orthonormal DCT-II written as a cosine sum.
"""

import math

import numpy as np

SR = 16000
N_FFT = 512
FRAME = 400
HOP = 320
N_MEL = 32
N_MFCC = 13
ALPHA = 0.98
FLOOR = 1e-10


def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mel_points(n_filters=N_MEL, sr=SR):
    """n_filters + 2 frequencies equally spaced on the mel axis from 0 to Nyquist."""
    top = mel(sr / 2)
    return [inv_mel(top * i / (n_filters + 1)) for i in range(n_filters + 2)]


def centre_frequencies(n_filters=N_MEL, sr=SR):
    return mel_points(n_filters, sr)[1:-1]


def filter_weight(f, lo, mid, hi):
    if lo <= f <= mid and mid > lo:
        return (f - lo) / (mid - lo)
    if mid < f <= hi:
        return (hi - f) / (hi - mid)
    return 0.0


def mfcc(samples):
    """MFCC matrix for one window of int16 samples (zero-padded to 1 s)."""
    x = np.zeros(SR)
    src = np.asarray(samples, dtype=np.float64) / 32768.0
    x[: len(src)] = src
    y = np.empty_like(x)
    y[0] = x[0]
    for n in range(1, len(x)):
        y[n] = x[n] - ALPHA * x[n - 1]

    n_frames = (SR - FRAME) // HOP + 1
    window = np.array([0.54 - 0.46 * math.cos(2 * math.pi * n / (FRAME - 1))
                       for n in range(FRAME)])
    n_bins = N_FFT // 2 + 1
    k = np.arange(n_bins)[:, None]
    n = np.arange(FRAME)[None, :]
    # explicit DFT basis restricted to the 400 non-zero samples of the padded frame
    cos_b = np.cos(2 * math.pi * k * n / N_FFT)
    sin_b = np.sin(2 * math.pi * k * n / N_FFT)

    pts = mel_points()
    freqs = [b * SR / N_FFT for b in range(n_bins)]
    fbank = np.array([[filter_weight(f, pts[m], pts[m + 1], pts[m + 2]) for f in freqs]
                      for m in range(N_MEL)])
    dct_basis = np.array([[math.sqrt((1 if c == 0 else 2) / N_MEL)
                           * math.cos(math.pi * c * (2 * m + 1) / (2 * N_MEL))
                           for m in range(N_MEL)] for c in range(N_MFCC)])

    out = np.zeros((n_frames, N_MFCC))
    for t in range(n_frames):
        frame = y[t * HOP: t * HOP + FRAME] * window
        re = cos_b @ frame
        im = sin_b @ frame
        power = (re * re + im * im) / N_FFT
        energies = [math.log(float(fbank[m] @ power) + FLOOR) for m in range(N_MEL)]
        out[t] = dct_basis @ np.array(energies)
    return out
