"""Deterministic table-driven stand-ins for the speech and language models.

A stub table is JSON ``{key: {"output": ..., "latency_ms": ...}}``. The
special key ``"*"`` is the fallback entry. Latency is the entry's own
``latency_ms`` when present, otherwise ``base_ms + per_token_ms * tokens``
of the output.
"""

from __future__ import annotations

import json
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from earedge.audio.pcm import PcmBuffer
from earedge.errors import ConfigError

STUB_KINDS = ("asr", "llm", "vlm", "tts")
FALLBACK_KEY = "*"
TTS_RATE = 22050
ASR_BIN_HZ = 50


def normalize_text(text: str) -> str:
    return " ".join(re.findall(r"[a-z0-9']+", text.lower()))


@dataclass
class InferenceStub:
    kind: str
    table: dict[str, dict] = field(default_factory=dict)
    base_ms: float = 0.0
    per_token_ms: float = 0.0

    def __post_init__(self):
        if self.kind not in STUB_KINDS:
            raise ConfigError(f"stub kind must be one of {STUB_KINDS}")
        for key, entry in self.table.items():
            if not isinstance(entry, dict) or "output" not in entry:
                raise ConfigError(f"{self.kind} stub entry {key!r} lacks 'output'")

    def _latency(self, entry, output) -> float:
        if entry is not None and "latency_ms" in entry:
            return float(entry["latency_ms"])
        tokens = len(str(output).split())
        return self.base_ms + self.per_token_ms * tokens

    def lookup(self, key: str):
        """(output, latency_ms) for ``key``; misses use the fallback entry."""
        entry = self.table.get(key)
        if entry is None and self.kind != "asr":
            entry = self.table.get(normalize_text(key))
        if entry is None:
            entry = self.table.get(FALLBACK_KEY)
        output = entry["output"] if entry is not None else ""
        return output, self._latency(entry, output)

    @classmethod
    def load(cls, kind: str, path) -> InferenceStub:
        raw = json.loads(Path(path).read_text())
        meta = raw.pop("_latency_model", {})
        return cls(kind, raw, float(meta.get("base_ms", 0.0)), float(meta.get("per_token_ms", 0.0)))

    def scaled(self, factor: float) -> InferenceStub:
        """Copy with every latency multiplied by ``factor``."""
        table = {k: dict(v) for k, v in self.table.items()}
        for v in table.values():
            if "latency_ms" in v:
                v["latency_ms"] = float(v["latency_ms"]) * factor
        return InferenceStub(self.kind, table, self.base_ms * factor, self.per_token_ms * factor)


def audio_key(pcm: PcmBuffer, floor_dbfs: float = -50.0) -> str:
    """ASR lookup key: the dominant frequency in 50 Hz bins, or ``silence``."""
    x = pcm.to_float()
    if x.size == 0 or 10 * np.log10(np.mean(x ** 2) + 1e-20) < floor_dbfs:
        return "silence"
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size)))
    freqs = np.fft.rfftfreq(x.size, 1 / pcm.sample_rate_hz)
    f = freqs[int(np.argmax(spec))]
    return f"tone:{int(round(f / ASR_BIN_HZ)) * ASR_BIN_HZ}"


def render_vlm(output) -> str:
    """One sentence from the vision stub's structured answer."""
    if isinstance(output, str):
        try:
            output = json.loads(output)
        except json.JSONDecodeError:
            return output
    if isinstance(output, dict):
        if output.get("summary"):
            return str(output["summary"])
        objects = [str(o) for o in output.get("objects", [])]
        if objects:
            listed = objects[0] if len(objects) == 1 else ", ".join(objects[:-1]) + " and " + objects[-1]
            where = output.get("location")
            return f"I can see {listed}" + (f" on {where}." if where else ".")
    return "I couldn't make out anything in the photo."


def synthesize(text: str, sample_rate: int = TTS_RATE, seconds_per_char: float = 0.055,
               level: float = 0.3) -> PcmBuffer:
    """Multi-tone speech proxy whose length grows with the text."""
    n = int(round(max(0.3, seconds_per_char * len(text)) * sample_rate))
    if not text:
        return PcmBuffer.from_float(np.zeros(n), sample_rate)
    h = zlib.crc32(text.encode())
    f0 = 110 + h % 90
    t = np.arange(n) / sample_rate
    # syllable-rate amplitude modulation over three harmonics-ish partials
    env = 0.55 + 0.45 * np.sin(2 * np.pi * 4.0 * t + (h % 7)) ** 2
    x = sum(a * np.sin(2 * np.pi * f0 * k * t) for k, a in ((1, 1.0), (3, 0.5), (7, 0.25)))
    ramp = np.minimum(1.0, np.minimum(t, t[-1] - t) / 0.01)
    return PcmBuffer.from_float(level * x / 1.75 * env * ramp, sample_rate)


@dataclass
class StubSet:
    asr: InferenceStub
    llm: InferenceStub
    vlm: InferenceStub
    tts: InferenceStub

    @classmethod
    def load(cls, paths: dict, base_dir=None) -> StubSet:
        base = Path(base_dir) if base_dir else None
        stubs = {}
        for kind in STUB_KINDS:
            if kind not in paths:
                raise ConfigError(f"missing stub table for {kind}")
            p = Path(paths[kind])
            if base is not None and not p.is_absolute():
                p = base / p
            if not p.is_file():
                raise ConfigError(f"stub table not found: {p}")
            stubs[kind] = InferenceStub.load(kind, p)
        return cls(**stubs)
