"""Post-training INT8 quantization and integer-only inference.

Weights and biases are per-tensor symmetric int8 in [-127, 127];
activations are per-tensor affine int8 with calibrated ranges. Biases are
expanded once, at construction, to int32 accumulator units (``s_in * s_w``),
so every stored parameter costs one byte. Accumulation is int32 and every
layer output is requantized with a fixed-point multiplier (Q31 mantissa plus power-of-two
shift, rounding as in gemmlowp). Only the final softmax runs in float, on
dequantized logits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from earedge.kws.model import INPUT_SHAPE, LABELS, KwsModel, im2col, maxpool2, softmax

INT8_MIN, INT8_MAX = -128, 127
INT32_MIN, INT32_MAX = -(2 ** 31), 2 ** 31 - 1
# smallest scale used for a tensor whose observed range is empty
SCALE_FLOOR = 1e-6
LAYERS = ("conv1", "conv2", "dense")
ACTIVATIONS = ("input", "conv1", "conv2", "dense")


@dataclass(frozen=True)
class QParams:
    scale: float
    zero_point: int = 0

    def quantize(self, x, lo: int = INT8_MIN, hi: int = INT8_MAX) -> np.ndarray:
        q = np.round(np.asarray(x, dtype=np.float64) / self.scale) + self.zero_point
        return np.clip(q, lo, hi).astype(np.int32)

    def dequantize(self, q) -> np.ndarray:
        return (np.asarray(q, dtype=np.float64) - self.zero_point) * self.scale


def symmetric_qparams(w: np.ndarray) -> QParams:
    peak = float(np.max(np.abs(w))) if w.size else 0.0
    return QParams(max(peak / 127.0, SCALE_FLOOR), 0)


def affine_qparams(lo: float, hi: float) -> QParams:
    """Asymmetric int8 parameters for a range that is widened to contain zero."""
    lo, hi = min(0.0, float(lo)), max(0.0, float(hi))
    scale = max((hi - lo) / 255.0, SCALE_FLOOR)
    zp = int(round(INT8_MIN - lo / scale))
    return QParams(scale, int(np.clip(zp, INT8_MIN, INT8_MAX)))


def quantize_multiplier(m: float) -> tuple[int, int]:
    """Split a positive real into a Q31 mantissa and a left-shift exponent."""
    if m <= 0:
        return 0, 0
    frac, shift = math.frexp(m)
    q = int(round(frac * (1 << 31)))
    if q == 1 << 31:
        q //= 2
        shift += 1
    return q, shift


def _trunc_div_pow2(v: np.ndarray, bits: int) -> np.ndarray:
    # C-style division (rounds toward zero)
    d = np.int64(1) << np.int64(bits)
    return np.where(v >= 0, v // d, -((-v) // d))


def multiply_by_quantized_multiplier(acc: np.ndarray, mult: int, shift: int) -> np.ndarray:
    """Fixed-point ``acc * mult * 2**(shift - 31)`` with round-half-away rounding."""
    acc = np.asarray(acc, dtype=np.int64)
    left = max(shift, 0)
    right = max(-shift, 0)
    x = np.clip(acc << np.int64(left), INT32_MIN, INT32_MAX)
    ab = x * np.int64(mult)
    nudge = np.where(ab >= 0, np.int64(1 << 30), np.int64(1 - (1 << 30)))
    high = _trunc_div_pow2(ab + nudge, 31)
    if right == 0:
        return high
    mask = np.int64((1 << right) - 1)
    remainder = high & mask
    threshold = (mask >> 1) + (high < 0)
    return (high >> np.int64(right)) + (remainder > threshold)


@dataclass
class QuantizedKwsModel:
    weights: dict[str, np.ndarray]       # int8 values held in int32 arrays
    biases: dict[str, np.ndarray]        # int8 values held in int32 arrays
    weight_q: dict[str, QParams]
    bias_q: dict[str, QParams]
    act_q: dict[str, QParams]
    norm_mean: np.ndarray
    norm_std: np.ndarray
    labels: tuple[str, ...] = LABELS
    multipliers: dict[str, tuple[int, int]] = field(default_factory=dict, init=False)
    bias_acc: dict[str, np.ndarray] = field(default_factory=dict, init=False)

    def __post_init__(self):
        prev = "input"
        for layer in LAYERS:
            acc_scale = self.act_q[prev].scale * self.weight_q[layer].scale
            self.multipliers[layer] = quantize_multiplier(acc_scale / self.act_q[layer].scale)
            acc = np.round(self.biases[layer] * (self.bias_q[layer].scale / acc_scale))
            self.bias_acc[layer] = np.clip(acc, INT32_MIN, INT32_MAX).astype(np.int64)
            prev = layer

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights.values()) + sum(b.size for b in self.biases.values())

    def quantize_input(self, features: np.ndarray) -> np.ndarray:
        x = (np.asarray(features, dtype=np.float64) - self.norm_mean) / self.norm_std
        return self.act_q["input"].quantize(x)

    def _layer(self, xq: np.ndarray, name: str, src: str, relu: bool) -> np.ndarray:
        zp_in = self.act_q[src].zero_point
        out_q = self.act_q[name]
        centred = xq.astype(np.int64) - zp_in
        if name == "dense":
            acc = centred @ self.weights[name].astype(np.int64)
        else:
            cols = im2col(centred)  # zero padding == real-valued zero
            acc = cols @ self.weights[name].reshape(-1, self.weights[name].shape[-1]).astype(np.int64)
        acc = acc + self.bias_acc[name]
        mult, shift = self.multipliers[name]
        y = multiply_by_quantized_multiplier(acc, mult, shift) + out_q.zero_point
        lo = out_q.zero_point if relu else INT8_MIN
        return np.clip(y, lo, INT8_MAX).astype(np.int32)

    def forward_int(self, xq: np.ndarray) -> np.ndarray:
        """Int8 logits for int8 inputs ``(B, 49, 13)``."""
        a1 = self._layer(xq, "conv1", "input", relu=True)
        h1, _ = maxpool2(a1)
        a2 = self._layer(h1, "conv2", "conv1", relu=True)
        h2, _ = maxpool2(a2)
        flat = h2.reshape(h2.shape[0], -1)
        return self._layer(flat, "dense", "conv2", relu=False)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.shape[1:] != INPUT_SHAPE:
            raise ValueError(f"expected feature matrices of shape {INPUT_SHAPE}, got {x.shape[1:]}")
        logits = self.act_q["dense"].dequantize(self.forward_int(self.quantize_input(x)))
        probs = softmax(logits)
        return probs[0] if single else probs

    def dequantized_params(self) -> dict[str, np.ndarray]:
        out = {}
        for layer in LAYERS:
            out[f"{layer}.w"] = self.weight_q[layer].dequantize(self.weights[layer])
            out[f"{layer}.b"] = self.bias_q[layer].dequantize(self.biases[layer])
        return out


def activation_ranges(model: KwsModel, calibration: np.ndarray) -> dict[str, tuple[float, float]]:
    """Observed (min, max) of the input and every layer output."""
    x = np.asarray(calibration, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    _, cache = model.forward(x)
    a1 = np.maximum(cache["z1"], 0.0)
    a2 = np.maximum(cache["z2"], 0.0)
    logits = cache["flat"] @ model.params["dense.w"] + model.params["dense.b"]
    out = {}
    for name, arr in (("input", cache["x"]), ("conv1", a1), ("conv2", a2), ("dense", logits)):
        out[name] = (float(arr.min()), float(arr.max()))
    return out


def quantize_int8(model: KwsModel, calibration) -> QuantizedKwsModel:
    """Calibrate activation ranges on ``calibration`` and convert to int8."""
    calibration = np.asarray(calibration, dtype=np.float64)
    if calibration.size == 0:
        raise ValueError("calibration set must not be empty")
    ranges = activation_ranges(model, calibration)
    act_q = {name: affine_qparams(*ranges[name]) for name in ACTIVATIONS}
    weights, biases, weight_q, bias_q = {}, {}, {}, {}
    for layer in LAYERS:
        for store, qstore, key in ((weights, weight_q, "w"), (biases, bias_q, "b")):
            t = model.params[f"{layer}.{key}"]
            q = symmetric_qparams(t)
            store[layer] = q.quantize(t, -127, 127)
            qstore[layer] = q
    return QuantizedKwsModel(weights, biases, weight_q, bias_q, act_q, model.norm_mean.copy(),
                             model.norm_std.copy(), model.labels)


def top1_agreement(model: KwsModel, qmodel: QuantizedKwsModel, features) -> float:
    features = np.asarray(features, dtype=np.float64)
    a = model.predict_proba(features).argmax(axis=1)
    b = qmodel.predict_proba(features).argmax(axis=1)
    return float(np.mean(a == b))


__all__ = [
    "QParams",
    "QuantizedKwsModel",
    "affine_qparams",
    "multiply_by_quantized_multiplier",
    "quantize_int8",
    "quantize_multiplier",
    "symmetric_qparams",
    "top1_agreement",
]
