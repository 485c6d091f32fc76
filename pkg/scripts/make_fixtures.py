"""Regenerate the bundled models, fixtures, stub tables and scenarios.

Everything is derived from fixed seeds, so rerunning reproduces the
committed files byte for byte.

    python scripts/make_fixtures.py [--skip-models]
"""

from __future__ import annotations

import argparse
import json
import struct
import zlib
from pathlib import Path

import numpy as np

from earedge.audio.pcm import PcmBuffer, write_wav
from earedge.dataset.toy import positive, toy_dataset
from earedge.features import mfcc_batch
from earedge.intent import bundled_corpus, fit
from earedge.kws import quantize_int8, save_model, top1_agreement, train

DATA = Path(__file__).resolve().parents[1] / "src" / "earedge" / "data"
SR = 16000

QUERIES = {
    # fixture name: (tone Hz, transcript)
    "query_photo": (400, "take a photo"),
    "query_table": (600, "what's on this table?"),
    "query_chat": (800, "how are you doing today"),
    "query_question": (1000, "what is the capital of france"),
}


def speech_proxy(freq: float, duration_s: float = 1.5, level: float = 0.3) -> np.ndarray:
    """A steady tone with syllable-rate amplitude modulation."""
    t = np.arange(int(duration_s * SR)) / SR
    env = 0.6 + 0.4 * np.cos(2 * np.pi * 4.0 * t)
    ramp = np.minimum(1.0, np.minimum(t, t[-1] - t) / 0.01)
    return level * env * ramp * np.sin(2 * np.pi * freq * t)


def tiny_png(width: int = 8, height: int = 6) -> bytes:
    """A small RGB gradient PNG built with zlib only."""
    rows = b"".join(
        b"\x00" + b"".join(bytes((x * 30 % 256, y * 40 % 256, 128)) for x in range(width))
        for y in range(height))

    def chunk(kind: bytes, data: bytes) -> bytes:
        return (struct.pack(">I", len(data)) + kind + data
                + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF))

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(rows, 9))
            + chunk(b"IEND", b""))


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def make_models() -> None:
    clips, labels = toy_dataset(per_class=300, seed=0)
    x = mfcc_batch(clips)
    result = train(x, labels, epochs=100, seed=0)
    calib = x[result.train_idx][:200]
    qmodel = quantize_int8(result.model, calib)
    agree = top1_agreement(result.model, qmodel, x[result.val_idx])
    print(f"kws: val acc {result.final_val_acc:.3f}, int8 agreement {agree:.3f}")
    save_model(result.model, DATA / "kws_float.kws")
    save_model(qmodel, DATA / "kws_int8.kws")


def make_intent_model() -> None:
    texts, intents = bundled_corpus()
    clf = fit(texts, intents)
    clf.save(DATA / "intent_model.json")
    for _, text in QUERIES.values():
        print(f"intent: {text!r} -> {clf.classify(text)[0]}")


def make_audio() -> None:
    fx = DATA / "fixtures"
    fx.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(("wake", "wake_b")):
        clip = positive(np.random.default_rng(100 + i), 0.8) * 10 ** (-8 / 20)
        write_wav(PcmBuffer.from_float(clip), fx / f"{name}.wav")
    for name, (freq, _) in QUERIES.items():
        write_wav(PcmBuffer.from_float(speech_proxy(freq)), fx / f"{name}.wav")
    (fx / "table.png").write_bytes(tiny_png())


def make_stubs() -> None:
    st = DATA / "stubs"
    asr = {f"tone:{freq}": {"output": text, "latency_ms": 400.0}
           for freq, text in QUERIES.values()}
    asr["*"] = {"output": "", "latency_ms": 400.0}
    write_json(st / "asr.json", asr)
    write_json(st / "llm.json", {
        "how are you doing today": {
            "output": "I'm doing well, thanks for asking. How can I help?", "latency_ms": 1500.0},
        "what is the capital of france": {
            "output": "The capital of France is Paris.", "latency_ms": 1500.0},
        "*": {"output": "I'm not sure about that one.", "latency_ms": 1500.0},
    })
    write_json(st / "vlm.json", {
        "what's on this table": {
            "output": {"objects": ["a laptop", "a coffee mug", "a notebook"],
                       "location": "the table"}, "latency_ms": 1500.0},
        "*": {"output": {"objects": ["a desk lamp"], "location": None}, "latency_ms": 1500.0},
    })
    write_json(st / "tts.json", {"_latency_model": {"base_ms": 300.0, "per_token_ms": 0.0}})


def query_timeline(names, spacing_s: float = 12.0, first_s: float = 1.0) -> list[dict]:
    timeline = []
    for i, name in enumerate(names):
        timeline.append({"clip": "../fixtures/wake.wav" if i % 2 == 0 else "../fixtures/wake_b.wav",
                         "at_s": first_s + i * spacing_s})
        timeline.append({"silence_s": 0.5})
        timeline.append({"clip": f"../fixtures/{name}.wav"})
    timeline.append({"silence_s": spacing_s - 3.0})
    return timeline


STUBS = {k: f"../stubs/{k}.json" for k in ("asr", "llm", "vlm", "tts")}


def make_scenarios() -> None:
    sc = DATA / "scenarios"
    common = {"photos": ["../fixtures/table.png"], "stubs": STUBS,
              "channel": {"base_latency_ms": 20.0, "jitter_ms": 5.0}}
    write_json(sc / "walkthrough.json", {
        "name": "walkthrough",
        "description": "Photo command, visual question and small talk.",
        "seed": 1,
        "mic": query_timeline(["query_photo", "query_table", "query_chat"]),
        **common,
    })
    write_json(sc / "latency.json", {
        "name": "latency",
        "description": "Typical visual and language queries for the latency budget.",
        "seed": 2,
        "mic": query_timeline(["query_table", "query_chat", "query_question", "query_table",
                               "query_chat", "query_question", "query_table", "query_photo",
                               "query_chat"]),
        **common,
    })
    write_json(sc / "linkdrop.json", {
        "name": "linkdrop",
        "description": "The link drops while the first query streams; the second succeeds.",
        "seed": 3,
        "mic": query_timeline(["query_chat", "query_table"]),
        "link_drops": [{"at_ms": 2600.0, "duration_ms": 1500.0}],
        **common,
    })
    write_json(sc / "power.json", {
        "name": "power",
        "description": "One walkthrough plus an explicit day-long power schedule.",
        "seed": 4,
        "mic": query_timeline(["query_chat"]),
        "power_profile": {"battery_mah": 200.0},
        "power_schedule": [
            {"state": "BaselineListening", "hours": 1.0},
            {"state": "ActiveQuery", "minutes": 5.0},
            {"state": "PlayingResponse", "minutes": 5.0},
            {"state": "LightSleep", "hours": 10.0},
            {"state": "DeepSleep", "hours": 12.0},
        ],
        **common,
    })
    for mode in ("off", "naive", "prioritized"):
        write_json(sc / f"coexistence_{mode}.json", {
            "kind": "coexistence", "name": f"coexistence_{mode}", "mode": mode,
            "seeds": [0, 1, 2, 3, 4], "duration_s": 10.0, "prebuffer_ms": 300.0,
        })
    write_json(sc / "jitter.json", {
        "kind": "jitter", "name": "jitter", "seeds": list(range(20)), "prebuffer_ms": 300.0,
        "jitter_ms": 250.0, "base_latency_ms": 260.0, "duration_s": 5.0,
    })


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-models", action="store_true", help="keep the existing model files")
    args = ap.parse_args()
    if not args.skip_models:
        make_models()
    make_intent_model()
    make_audio()
    make_stubs()
    make_scenarios()


if __name__ == "__main__":
    main()
