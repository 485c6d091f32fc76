"""Versioned binary model files.

Layout (little-endian)::

    "KWS1" | version u16 | kind u8 (0 float, 1 int8)
    n_labels u8 | (len u8, utf-8 label)*
    n_tensors u16 | tensor*
    n_act u8 | (len u8, name, scale f64, zero_point i32)*      int8 only

    tensor := len u8, name | dtype u8 | ndim u8 | dims u32* |
              has_q u8 | [scale f64, zero_point i32] | raw data
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from earedge.errors import ModelFormatError
from earedge.kws.model import KwsModel
from earedge.kws.quantize import ACTIVATIONS, LAYERS, QParams, QuantizedKwsModel

MAGIC = b"KWS1"
VERSION = 1
KIND_FLOAT, KIND_INT8 = 0, 1
DTYPES = {0: np.dtype("<f8"), 1: np.dtype("i1"), 2: np.dtype("<i4"), 3: np.dtype("<f4")}
DTYPE_CODES = {v: k for k, v in DTYPES.items()}


class _Writer:
    def __init__(self):
        self.parts = []

    def pack(self, fmt, *values):
        self.parts.append(struct.pack("<" + fmt, *values))

    def name(self, s: str):
        raw = s.encode()
        self.pack("B", len(raw))
        self.parts.append(raw)

    def tensor(self, name, arr, dtype, q: QParams | None = None):
        arr = np.ascontiguousarray(arr, dtype=dtype)
        self.name(name)
        self.pack("BB", DTYPE_CODES[np.dtype(dtype)], arr.ndim)
        for d in arr.shape:
            self.pack("I", d)
        if q is None:
            self.pack("B", 0)
        else:
            self.pack("Bdi", 1, q.scale, q.zero_point)
        self.parts.append(arr.tobytes())

    def bytes(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        st = struct.Struct("<" + fmt)
        if self.pos + st.size > len(self.data):
            raise ModelFormatError("model file truncated")
        out = st.unpack_from(self.data, self.pos)
        self.pos += st.size
        return out

    def name(self) -> str:
        (n,) = self.unpack("B")
        raw = self.data[self.pos:self.pos + n]
        if len(raw) != n:
            raise ModelFormatError("model file truncated")
        self.pos += n
        return raw.decode()

    def tensor(self):
        name = self.name()
        code, ndim = self.unpack("BB")
        if code not in DTYPES:
            raise ModelFormatError(f"tensor {name}: unknown dtype code {code}")
        shape = tuple(self.unpack("I")[0] for _ in range(ndim))
        (has_q,) = self.unpack("B")
        q = QParams(*self.unpack("di")) if has_q else None
        dtype = DTYPES[code]
        size = int(np.prod(shape)) * dtype.itemsize
        if self.pos + size > len(self.data):
            raise ModelFormatError(f"tensor {name}: data truncated")
        arr = np.frombuffer(self.data, dtype, count=int(np.prod(shape)), offset=self.pos)
        self.pos += size
        return name, arr.reshape(shape).copy(), q


def to_bytes(model: KwsModel | QuantizedKwsModel) -> bytes:
    w = _Writer()
    w.parts.append(MAGIC)
    quantized = isinstance(model, QuantizedKwsModel)
    w.pack("HB", VERSION, KIND_INT8 if quantized else KIND_FLOAT)
    w.pack("B", len(model.labels))
    for label in model.labels:
        w.name(label)
    if quantized:
        w.pack("H", 2 + 2 * len(LAYERS))
        w.tensor("norm.mean", model.norm_mean, "<f8")
        w.tensor("norm.std", model.norm_std, "<f8")
        for layer in LAYERS:
            w.tensor(f"{layer}.w", model.weights[layer], "i1", model.weight_q[layer])
            w.tensor(f"{layer}.b", model.biases[layer], "i1", model.bias_q[layer])
        w.pack("B", len(ACTIVATIONS))
        for name in ACTIVATIONS:
            w.name(name)
            w.pack("di", model.act_q[name].scale, model.act_q[name].zero_point)
    else:
        w.pack("H", 2 + len(model.params))
        w.tensor("norm.mean", model.norm_mean, "<f8")
        w.tensor("norm.std", model.norm_std, "<f8")
        for name, arr in model.params.items():
            w.tensor(name, arr, "<f8")
    return w.bytes()


def from_bytes(data: bytes) -> KwsModel | QuantizedKwsModel:
    if data[:4] != MAGIC:
        raise ModelFormatError(f"bad magic {data[:4]!r}")
    r = _Reader(data)
    r.pos = 4
    version, kind = r.unpack("HB")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    (n_labels,) = r.unpack("B")
    labels = tuple(r.name() for _ in range(n_labels))
    (n_tensors,) = r.unpack("H")
    tensors = {}
    for _ in range(n_tensors):
        name, arr, q = r.tensor()
        tensors[name] = (arr, q)
    norm_mean = tensors.pop("norm.mean")[0]
    norm_std = tensors.pop("norm.std")[0]
    if kind == KIND_FLOAT:
        params = {name: arr.astype(np.float64) for name, (arr, _) in tensors.items()}
        return KwsModel(params, norm_mean, norm_std, labels)
    if kind != KIND_INT8:
        raise ModelFormatError(f"unknown model kind {kind}")
    (n_act,) = r.unpack("B")
    act_q = {}
    for _ in range(n_act):
        name = r.name()
        act_q[name] = QParams(*r.unpack("di"))
    weights = {l: tensors[f"{l}.w"][0].astype(np.int32) for l in LAYERS}
    biases = {l: tensors[f"{l}.b"][0].astype(np.int32) for l in LAYERS}
    weight_q = {l: tensors[f"{l}.w"][1] for l in LAYERS}
    bias_q = {l: tensors[f"{l}.b"][1] for l in LAYERS}
    return QuantizedKwsModel(weights, biases, weight_q, bias_q, act_q, norm_mean, norm_std, labels)


def save_model(model, path) -> None:
    Path(path).write_bytes(to_bytes(model))


def load_model(path) -> KwsModel | QuantizedKwsModel:
    return from_bytes(Path(path).read_bytes())
