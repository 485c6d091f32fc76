"""Freeze reference-oracle outputs as golden test data.

    python tests/make_golden.py

Inputs are generated once from fixed seeds and stored next to the expected
outputs, so the golden files do not depend on any RNG implementation.
Only the oracles under tests/oracles produce expected values; the package
is used solely to build a quantized model's parameters for the int8 case.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import cnn, ima_adpcm, int_arith, mfcc  # noqa: E402

GOLDEN = Path(__file__).resolve().parent / "golden"


def adpcm_inputs() -> dict[str, list[int]]:
    rng = np.random.default_rng(20240)
    t = np.arange(1000) / 16000
    impulse = [0] * 320
    impulse[10] = 20000
    return {
        "impulse": impulse,
        "sine_440_half_scale": [int(v) for v in np.round(16383 * np.sin(2 * np.pi * 440 * t))],
        "noise_odd_length": [int(v) for v in rng.integers(-12000, 12000, 701)],
        "full_scale_square": ([32767] * 40 + [-32768] * 40) * 8,
        "chirp": [int(v) for v in np.round(
            9000 * np.sin(2 * np.pi * (200 + 3000 * t[:900]) * t[:900]))],
        "silence": [0] * 100,
    }


def make_adpcm() -> None:
    vectors = []
    for name, samples in adpcm_inputs().items():
        blocks = ima_adpcm.encode(samples)
        vectors.append({
            "name": name,
            "input": samples,
            "blocks": [{"predictor": p, "step_index": i, "sample_count": len(c),
                        "nibbles": ima_adpcm.pack(c).hex()} for p, i, c in blocks],
            "decoded": ima_adpcm.decode(blocks),
        })
    write(GOLDEN / "adpcm_vectors.json", vectors)


def make_mfcc() -> None:
    rng = np.random.default_rng(7)
    t = np.arange(16000) / 16000
    signals = {
        "chirp": np.round(8000 * np.sin(2 * np.pi * (100 + 1500 * t) * t)),
        "noise": rng.normal(0, 3000, 16000).round().clip(-32768, 32767),
        "short_tone": np.round(6000 * np.sin(2 * np.pi * 700 * t[:9000])),
    }
    for name, x in signals.items():
        x = x.astype(np.int16)
        (GOLDEN / f"mfcc_{name}.input.txt").write_text(" ".join(map(str, x.tolist())) + "\n")
        feats = mfcc.mfcc(x)
        np.savetxt(GOLDEN / f"mfcc_{name}.csv", feats, fmt="%.6f", delimiter=",")
    write(GOLDEN / "mel_centres.json", mfcc.centre_frequencies())


def make_cnn() -> None:
    rng = np.random.default_rng(11)
    shapes = {"conv1.w": (3, 13, 8), "conv1.b": (8,), "conv2.w": (3, 8, 16), "conv2.b": (16,),
              "dense.w": (192, 4), "dense.b": (4,)}
    params = {k: np.round(rng.normal(0, 0.08, s), 6) for k, s in shapes.items()}
    mean = np.round(rng.normal(0, 2, 13), 6)
    std = np.round(rng.uniform(0.5, 3, 13), 6)
    cases = []
    for _ in range(3):
        x = np.round(rng.normal(0, 2, (49, 13)), 6)
        post = cnn.forward({k: v.tolist() for k, v in params.items()}, mean.tolist(),
                           std.tolist(), x.tolist())
        cases.append({"features": x.tolist(), "posterior": post})
    write(GOLDEN / "kws_forward.json", {
        "params": {k: v.tolist() for k, v in params.items()},
        "norm_mean": mean.tolist(), "norm_std": std.tolist(), "cases": cases})


def make_int8() -> None:
    from earedge.kws import KwsModel, quantize_int8

    rng = np.random.default_rng(5)
    model = KwsModel.init(3)
    for k in model.params:
        if k.endswith(".b"):
            model.params[k] = rng.normal(0, 0.2, model.params[k].shape)
    model.norm_mean = rng.normal(0, 1, 13)
    model.norm_std = rng.uniform(0.5, 2, 13)
    calib = rng.normal(0, 3, (32, 49, 13))
    q = quantize_int8(model, calib)
    spec = {"act": {k: {"scale": v.scale, "zp": v.zero_point} for k, v in q.act_q.items()}}
    for layer in ("conv1", "conv2", "dense"):
        spec[layer] = {"w": q.weights[layer].tolist(), "b": q.biases[layer].tolist(),
                       "w_scale": q.weight_q[layer].scale, "b_scale": q.bias_q[layer].scale}
    cases = []
    for _ in range(4):
        xq = rng.integers(-128, 128, (49, 13)).tolist()
        cases.append({"input": xq, "logits": int_arith.forward(spec, xq)})
    write(GOLDEN / "int8_forward.json", {"spec": spec, "cases": cases})


def write(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, separators=(",", ":")) + "\n")


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    make_adpcm()
    make_mfcc()
    make_cnn()
    make_int8()
    print("golden data written to", GOLDEN)


if __name__ == "__main__":
    main()
