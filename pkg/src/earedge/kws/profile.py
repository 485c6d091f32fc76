"""Static resource accounting for the wake-word network."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from earedge.features import DEFAULT_CONFIG, mfcc_window
from earedge.kws.model import CONV1_OUT, CONV2_OUT, INPUT_SHAPE, KERNEL, KwsModel
from earedge.kws.quantize import QuantizedKwsModel

# vendor figures for the deployed build, reported alongside ours
REFERENCE_PEAK_RAM_BYTES = 15.4 * 1000
REFERENCE_FLASH_BYTES = 52 * 1000


@dataclass
class ResourceProfile:
    params: int
    macs: int
    peak_activation_bytes: int
    weight_bytes: int
    bytes_per_value: int
    mfcc_ms: float | None = None
    classify_ms: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def layer_shapes():
    t0, c0 = INPUT_SHAPE
    t1 = t0 // 2
    t2 = t1 // 2
    return [
        # (name, input elements, output elements, MACs)
        ("conv1", t0 * c0, t0 * CONV1_OUT, t0 * CONV1_OUT * c0 * KERNEL),
        ("pool1", t0 * CONV1_OUT, t1 * CONV1_OUT, 0),
        ("conv2", t1 * CONV1_OUT, t1 * CONV2_OUT, t1 * CONV2_OUT * CONV1_OUT * KERNEL),
        ("pool2", t1 * CONV2_OUT, t2 * CONV2_OUT, 0),
        ("dense", t2 * CONV2_OUT, 4, t2 * CONV2_OUT * 4),
    ]


def profile(model: KwsModel | QuantizedKwsModel, time_it: bool = False,
            repeats: int = 20) -> ResourceProfile:
    """Parameter, MAC and memory counts.

    Peak activation memory is the largest input-plus-output buffer pair over
    the layer sequence, at one byte per value for int8 and four for float
    (float32 deployment).
    """
    quantized = isinstance(model, QuantizedKwsModel)
    width = 1 if quantized else 4
    n_params = model.n_params
    shapes = layer_shapes()
    macs = sum(s[3] for s in shapes)
    peak = max(s[1] + s[2] for s in shapes) * width
    weight_bytes = n_params * width
    prof = ResourceProfile(n_params, macs, peak, weight_bytes, width)
    if time_it:
        rng = np.random.default_rng(0)
        x = (rng.standard_normal(16000) * 3000).astype(np.int16)
        t0 = time.perf_counter()
        for _ in range(repeats):
            feats = mfcc_window(x, DEFAULT_CONFIG)
        t1 = time.perf_counter()
        for _ in range(repeats):
            model.predict_proba(feats)
        t2 = time.perf_counter()
        prof.mfcc_ms = 1000 * (t1 - t0) / repeats
        prof.classify_ms = 1000 * (t2 - t1) / repeats
    return prof
