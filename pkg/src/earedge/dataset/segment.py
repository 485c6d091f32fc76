"""Energy-spike segmentation of continuous recordings."""

from __future__ import annotations

import numpy as np

from earedge.audio.pcm import PcmBuffer

HOP_MS = 20
PAD_MS = 100
THRESHOLD_ABOVE_FLOOR_DB = 6.0


def short_time_energy_db(pcm: PcmBuffer, hop_ms: int = HOP_MS) -> np.ndarray:
    """Mean-square energy in dBFS per non-overlapping hop."""
    hop = int(pcm.sample_rate_hz * hop_ms / 1000)
    x = pcm.to_float()
    n = len(x) // hop
    if n == 0:
        return np.zeros(0)
    frames = x[: n * hop].reshape(n, hop)
    return 10 * np.log10(np.mean(frames ** 2, axis=1) + 1e-12)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def segment(pcm: PcmBuffer, min_gap_ms: float = 200, energy_threshold: float | None = None,
            pad_ms: float = PAD_MS) -> list[tuple[float, float]]:
    """Sorted, disjoint ``(t_start, t_end)`` intervals in seconds.

    A hop is active when its energy exceeds ``energy_threshold`` (dBFS);
    by default the threshold sits 6 dB above the 10th-percentile hop energy.
    Digital silence is never active. Runs closer than ``min_gap_ms`` merge,
    then each run is padded by ``pad_ms`` and overlapping results merge.
    """
    energy = short_time_energy_db(pcm)
    if energy.size == 0:
        return []
    if energy_threshold is None:
        energy_threshold = np.percentile(energy, 10) + THRESHOLD_ABOVE_FLOOR_DB
    active = (energy > energy_threshold) & (energy > -115)
    hop_s = HOP_MS / 1000
    runs = [[a * hop_s, b * hop_s] for a, b in _runs(active)]
    merged: list[list[float]] = []
    for run in runs:
        if merged and run[0] - merged[-1][1] < min_gap_ms / 1000 - 1e-9:
            merged[-1][1] = run[1]
        else:
            merged.append(run)
    duration = pcm.duration_s
    pad = pad_ms / 1000
    out: list[list[float]] = []
    for a, b in merged:
        a, b = max(0.0, a - pad), min(duration, b + pad)
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    # rounding must not push the last end past the recording
    return [(round(float(a), 6), min(round(float(b), 6), duration)) for a, b in out]
