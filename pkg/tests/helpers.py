"""Small shared utilities for the test suite."""

import json
from pathlib import Path

import numpy as np

from earedge.audio.pcm import PcmBuffer

GOLDEN = Path(__file__).parent / "golden"


def golden_json(name: str):
    return json.loads((GOLDEN / name).read_text())


def golden_samples(name: str) -> np.ndarray:
    return np.array((GOLDEN / name).read_text().split(), dtype=np.int16)


def snr_db(ref, test) -> float:
    ref = np.asarray(ref, dtype=np.float64)
    err = ref - np.asarray(test, dtype=np.float64)
    return 10 * np.log10(np.sum(ref ** 2) / max(np.sum(err ** 2), 1e-12))


def sine(freq: float, duration_s: float, level: float = 0.5, rate: int = 16000,
         phase: float = 0.0) -> PcmBuffer:
    t = np.arange(int(round(duration_s * rate))) / rate
    return PcmBuffer.from_float(level * np.sin(2 * np.pi * freq * t + phase), rate)


def wake_stream(duration_s: float, offsets, seed: int, noise_db: float = -50.0) -> PcmBuffer:
    """Background noise with a synthetic wake phrase starting at each offset."""
    from earedge.dataset.toy import background, positive

    rng = np.random.default_rng(seed)
    x = background(duration_s, rng, noise_db)
    for off in offsets:
        clip = positive(rng) * 10 ** (rng.uniform(-14, -4) / 20)
        i = int(round(off * 16000))
        x[i:i + len(clip)] += clip[: len(x) - i]
    return PcmBuffer.from_float(x)


def session_scenario(mic, **overrides) -> dict:
    """A session scenario dict using the bundled stubs, photo and channel."""
    from earedge.scenario import bundled_path

    raw = {
        "name": "test",
        "seed": 0,
        "mic": mic,
        "photos": [str(bundled_path("fixtures", "table.png"))],
        "stubs": {k: str(bundled_path("stubs", f"{k}.json")) for k in ("asr", "llm", "vlm", "tts")},
        "channel": {"base_latency_ms": 20.0, "jitter_ms": 5.0},
    }
    raw.update(overrides)
    return raw


def fixture_clip(name: str) -> str:
    from earedge.scenario import bundled_path

    return str(bundled_path("fixtures", f"{name}.wav"))
